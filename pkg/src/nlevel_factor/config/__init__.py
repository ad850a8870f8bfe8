"""Configuration module for nlevel-factor."""

from nlevel_factor.config.settings import (
    DEFAULT_DIM_CAP,
    DEFAULT_SEED,
    DEFAULT_THREADS,
    RuntimeSettings,
    get_dim_cap,
    get_seed,
    get_threads,
)

__all__ = [
    "DEFAULT_DIM_CAP",
    "DEFAULT_SEED",
    "DEFAULT_THREADS",
    "RuntimeSettings",
    "get_dim_cap",
    "get_seed",
    "get_threads",
]
