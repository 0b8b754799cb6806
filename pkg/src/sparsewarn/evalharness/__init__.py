from .harness import EvalReport, FoldResult, benchmark_time, run_cv
from .methods import FittedMethod, default_pca_m, fit_method, prepare_csen, represent
from .metrics import ConfusionMatrix, MetricReport, confidence_interval, confusion_from_predictions, metrics
from .report import benchmark_csv, predictions_csv, read_benchmark_csv, report_csv, report_text

__all__ = [
    "EvalReport", "FoldResult", "benchmark_time", "run_cv",
    "FittedMethod", "default_pca_m", "fit_method", "prepare_csen", "represent",
    "ConfusionMatrix", "MetricReport", "confidence_interval", "confusion_from_predictions", "metrics",
    "benchmark_csv", "predictions_csv", "read_benchmark_csv", "report_csv", "report_text",
]
