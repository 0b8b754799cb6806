"""A small reverse-mode network engine for the support-estimator networks and the MLP."""

from .architectures import build_csen1, build_csen2, build_mlp, build_reconnet_se, default_hidden
from .checks import gradient_check, support_estimate
from .layers import ClassAvgPool, Conv2D, Dense, MaxPool2D, ReLU, Softmax, TransposedConv2D
from .network import Adam, Network, TrainConfig, TrainingDiverged, train

__all__ = [
    "Adam",
    "ClassAvgPool",
    "Conv2D",
    "Dense",
    "MaxPool2D",
    "Network",
    "ReLU",
    "Softmax",
    "TrainConfig",
    "TrainingDiverged",
    "TransposedConv2D",
    "build_csen1",
    "build_csen2",
    "build_mlp",
    "build_reconnet_se",
    "default_hidden",
    "gradient_check",
    "support_estimate",
    "train",
]
