"""
Runtime settings for nlevel-factor.

Settings come from environment variables and can be overridden per call or
by the CLI's global flags.

Environment Variables:
    NFACTOR_DIM_CAP: Largest matrix dimension any build or reduction may
        allocate (default: 65536).
    NFACTOR_THREADS: Worker threads for parameter sweeps (default: 1).
    NFACTOR_SEED: Seed for randomized utilities such as the mean-field
        oracle (default: 0).
"""

from __future__ import annotations

import logging
import os
from typing import ClassVar

from nlevel_factor.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_DIM_CAP = 65536
DEFAULT_THREADS = 1
DEFAULT_SEED = 0

ENV_DIM_CAP = "NFACTOR_DIM_CAP"
ENV_THREADS = "NFACTOR_THREADS"
ENV_SEED = "NFACTOR_SEED"


def _env_int(name: str, default: int, *, minimum: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


class RuntimeSettings:
    """Process-wide runtime settings."""

    _instance: ClassVar[RuntimeSettings | None] = None

    def __init__(self) -> None:
        self.dim_cap = DEFAULT_DIM_CAP
        self.threads = DEFAULT_THREADS
        self.seed = DEFAULT_SEED
        self._load_from_env()

    @classmethod
    def get_instance(cls) -> RuntimeSettings:
        """Get or create the singleton instance."""
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    @classmethod
    def reset(cls) -> None:
        """Reset the singleton instance (for testing)."""
        cls._instance = None

    def _load_from_env(self) -> None:
        self.dim_cap = _env_int(ENV_DIM_CAP, DEFAULT_DIM_CAP, minimum=1)
        self.threads = _env_int(ENV_THREADS, DEFAULT_THREADS, minimum=1)
        self.seed = _env_int(ENV_SEED, DEFAULT_SEED, minimum=0)

    def override(
        self,
        *,
        dim_cap: int | None = None,
        threads: int | None = None,
        seed: int | None = None,
    ) -> None:
        """Apply explicit overrides (CLI flags take precedence over env)."""
        if dim_cap is not None:
            if dim_cap < 1:
                raise ConfigError(f"dimension cap must be >= 1, got {dim_cap}")
            self.dim_cap = dim_cap
        if threads is not None:
            if threads < 1:
                raise ConfigError(f"threads must be >= 1, got {threads}")
            self.threads = threads
        if seed is not None:
            self.seed = seed
        logger.debug(
            "runtime settings: cap=%d threads=%d seed=%d", self.dim_cap, self.threads, self.seed
        )


def get_dim_cap(cap: int | None = None) -> int:
    """Resolve an explicit cap or fall back to the runtime setting."""
    return cap if cap is not None else RuntimeSettings.get_instance().dim_cap


def get_threads(threads: int | None = None) -> int:
    """Resolve an explicit thread count or fall back to the runtime setting."""
    return threads if threads is not None else RuntimeSettings.get_instance().threads


def get_seed(seed: int | None = None) -> int:
    """Resolve an explicit seed or fall back to the runtime setting."""
    return seed if seed is not None else RuntimeSettings.get_instance().seed
