"""Combinatorial budgets.  ``MTMF_BUDGET`` overrides every default."""
from __future__ import annotations

import os


def budget(default: int) -> int:
    raw = os.environ.get("MTMF_BUDGET", "").strip()
    if not raw:
        return default
    try:
        value = int(float(raw))
    except ValueError:
        raise ValueError(f"MTMF_BUDGET must be a number, got {raw!r}") from None
    if value < 1:
        raise ValueError("MTMF_BUDGET must be positive")
    return value
