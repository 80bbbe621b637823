"""Python bindings for the dkgccl C++ library."""

from ._core import (
    ConfigError,
    InputError,
    NumericalError,
    UndefinedError,
    ari,
    coarsen,
    config_digest,
    kmeans,
    loss,
    nmi,
    partition,
    read_matrix,
    run_pipeline,
    substructure_count_expectation,
)

__all__ = [
    "ConfigError",
    "InputError",
    "NumericalError",
    "UndefinedError",
    "ari",
    "coarsen",
    "config_digest",
    "kmeans",
    "loss",
    "nmi",
    "partition",
    "read_matrix",
    "run_pipeline",
    "substructure_count_expectation",
]
