"""Input validation helpers."""

import numbers

import numpy as np

from .exceptions import DomainError


def check_positive_scalar(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


def check_fraction(value, name, *, closed_low=False):
    """Check ``value`` lies in ``(0, 1]`` (or ``[0, 1]`` with ``closed_low``)."""
    ok = (0 <= value <= 1) if closed_low else (0 < value <= 1)
    if not ok:
        raise DomainError(f"{name} must lie in {'[' if closed_low else '('}0, 1], got {value!r}")
    return float(value)


def as_positive_1d(values, name):
    """Return a non-empty 1-d float array of finite positive values."""
    a = np.asarray(values, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise DomainError(f"{name} must contain finite positive values")
    return a


def tail_slice(n, tail_fraction):
    """Slice selecting the trailing ``tail_fraction`` of ``n`` indices (at least one)."""
    check_fraction(tail_fraction, "tail_fraction")
    k = max(1, int(np.ceil(tail_fraction * n)))
    return slice(n - k, n)


def make_rng(seed, *stream):
    """Generator for ``seed`` and an optional stream key.

    Distinct stream keys give statistically independent generators, so work
    split across scenarios or chunks does not depend on scheduling.
    """
    if seed is None:
        raise DomainError("an explicit seed is required")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.default_rng(ss)
