"""Size guards for exhaustive (exponential) checks.

The environment variable ``ALEXDB_SIZE_GUARD`` overrides every guard at
once; it exists so callers with patience can push brute-force checks past
the shipped defaults.
"""
from __future__ import annotations

import os

from .errors import SizeGuardError

# Defaults: open-set enumeration walks 2^n subsets; the monotonicity check
# walks 2^n subsets of the target space.
OPEN_SET_GUARD = 20
MONOTONICITY_GUARD = 15


def size_guard(default: int) -> int:
    """Return the active bound: the override env var, if set, else ``default``."""
    raw = os.environ.get("ALEXDB_SIZE_GUARD")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise SizeGuardError(f"ALEXDB_SIZE_GUARD must be an integer, got {raw!r}")


def check_guard(n: int, default: int, what: str) -> int:
    """Raise SizeGuardError when ``n`` exceeds the active bound for ``what``."""
    bound = size_guard(default)
    if n > bound:
        raise SizeGuardError(
            f"{what}: input has {n} elements, exceeding the bound {bound} "
            f"(set ALEXDB_SIZE_GUARD to override)"
        )
    return bound
