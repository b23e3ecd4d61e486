"""Spin Calogero-Moser systems by reduction of T*(Hermitian matrices) under SU(n)."""
import os

from .errors import (
    ConfigError,
    DimensionError,
    DriftError,
    IllConditionedError,
    NotRegularError,
    OrbitSearchError,
    SpinCMError,
    SpinSignError,
    StructureError,
    WallCollisionError,
)

__version__ = "0.1.0"


def tol_scale():
    """Multiplier applied to test tolerances, from SPINCM_TOL_SCALE (default 1)."""
    raw = os.environ.get("SPINCM_TOL_SCALE", "1")
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"SPINCM_TOL_SCALE must be a positive number, got {raw!r}") from None
    if not value > 0:
        raise ConfigError(f"SPINCM_TOL_SCALE must be positive, got {raw!r}")
    return value
