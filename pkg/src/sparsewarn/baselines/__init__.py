from .grid import GridResult, GridSpec, grid_search, knn_k_grid, log_grid
from .knn import METRICS, MetricWarning, knn_classify, knn_predict, pairwise_distances
from .svm import KERNELS, SvmModel, kernel_matrix, svm_train

__all__ = [
    "GridResult", "GridSpec", "grid_search", "knn_k_grid", "log_grid",
    "METRICS", "MetricWarning", "knn_classify", "knn_predict", "pairwise_distances",
    "KERNELS", "SvmModel", "kernel_matrix", "svm_train",
]
