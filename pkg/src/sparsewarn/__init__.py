"""Sparse-representation, collaborative-representation and support-estimator
classifiers with a cross-validation harness for early-warning screening."""

__version__ = "0.1.0"
