"""Argument checks shared by the estimators, the sklearn layer and the CLI.

Thin wrappers over ``sklearn.utils.check_scalar`` so every module reports a
bad argument with the same wording.
"""

from __future__ import annotations

import numbers

from sklearn.utils import check_scalar

__all__ = ["check_probability", "check_count", "check_budget", "check_positive", "check_sizes"]


def check_probability(p, name="p", closed=True) -> float:
    """A probability in [0, 1] (or (0, 1) with ``closed=False``)."""
    bounds = "both" if closed else "neither"
    return float(check_scalar(p, name, numbers.Real, min_val=0.0, max_val=1.0, include_boundaries=bounds))


def check_count(n, name="n", min_val=0) -> int:
    return int(check_scalar(n, name, numbers.Integral, min_val=min_val))


def check_budget(budget, name="budget") -> int:
    if isinstance(budget, numbers.Integral) and budget <= 0:
        raise ValueError(f"{name} must be a positive sample count, got {budget}")
    return check_count(budget, name, min_val=1)


def check_positive(x, name) -> float:
    return float(check_scalar(x, name, numbers.Real, min_val=0.0, include_boundaries="neither"))


def check_sizes(ns, name="ns", min_val=0) -> list[int]:
    """Nonempty increasing list of distinct integer sizes."""
    out = sorted({check_count(n, name, min_val) for n in ns})
    if not out:
        raise ValueError(f"{name} must not be empty")
    return out
