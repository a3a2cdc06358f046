"""Heavy-tailed metaorder length and size laws and their tail diagnostics."""

from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from ._validation import make_rng
from .exceptions import DomainError

__all__ = [
    "LengthLaw",
    "SizeLaw",
    "sample_length",
    "sample_size",
    "hill_estimator",
    "hazard_ratio",
    "BracketCheck",
    "size_bracket_probability",
    "bracket_burn_in",
    "conditional_size_moment",
    "MomentCheck",
    "moment_exponent",
]

_TABLE_SIZE = 1 << 16


class LengthLaw:
    """Truncated discrete power law ``P(N = n) = n**-(1 + beta) / Z`` on ``[1, n_max]``.

    The normaliser ``Z`` and all tail sums use the Hurwitz zeta function.
    """

    def __init__(self, beta, n_max=10**7):
        if not (np.isfinite(beta) and beta > 0):
            raise DomainError("beta must be positive")
        if int(n_max) != n_max or n_max < 1:
            raise DomainError("n_max must be a positive integer")
        self.beta = float(beta)
        self.n_max = int(n_max)
        self._s = 1.0 + self.beta
        self._far = float(zeta(self._s, self.n_max + 1.0))
        self.normalizer = float(zeta(self._s, 1.0)) - self._far
        self._table = None

    def __repr__(self):
        return f"LengthLaw(beta={self.beta!r}, n_max={self.n_max!r})"

    @property
    def tail_constant(self):
        """``C`` in ``P(N = n) ~ C / n**(1 + beta)``; exact for the truncated law."""
        return 1.0 / self.normalizer

    def pmf(self, n):
        n = np.asarray(n, dtype=float)
        inside = (n >= 1) & (n <= self.n_max)
        return np.where(inside, np.where(inside, n, 1.0) ** -self._s / self.normalizer, 0.0)

    def survival(self, n):
        """``P(N >= n)``."""
        n = np.asarray(n, dtype=float)
        clipped = np.clip(n, 1.0, self.n_max + 1.0)
        out = (zeta(self._s, clipped) - self._far) / self.normalizer
        return np.where(n <= 1, 1.0, np.where(n > self.n_max, 0.0, out))

    def _survival_table(self):
        if self._table is None:
            size = min(self.n_max, _TABLE_SIZE)
            self._table = self.survival(np.arange(1, size + 1, dtype=float))
        return self._table

    def sample(self, size, rng):
        """Inverse-survival sampling: table lookup, bisection for the far tail."""
        v = 1.0 - rng.random(size)  # in (0, 1]
        table = self._survival_table()
        out = np.searchsorted(-table, -v, side="right").astype(np.int64)
        far = v < table[-1]
        if np.any(far):
            vv = v[far]
            lo = np.full(vv.size, float(table.size))
            hi = np.full(vv.size, float(self.n_max + 1))
            while np.any(hi - lo > 1):
                mid = np.floor(0.5 * (lo + hi))
                ok = self.survival(mid) >= vv
                lo = np.where(ok, mid, lo)
                hi = np.where(ok, hi, mid)
            out[far] = lo.astype(np.int64)
        return out


@dataclass(frozen=True)
class SizeLaw:
    """Metaorder size given its length: uniform on a window of width
    ``(q_plus - q_minus) N**(1 - gamma)`` anchored at ``N q_minus`` (``"lower"``)
    or ``N q_plus`` (``"upper"``)."""

    gamma: float = 0.0
    variant: str = "lower"
    q_minus: float = 1.0
    q_plus: float = 2.0

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise DomainError("gamma must be non-negative")
        if self.variant not in ("lower", "upper"):
            raise DomainError("variant must be 'lower' or 'upper'")
        if not 0 < self.q_minus <= self.q_plus < np.inf:
            raise DomainError("need 0 < q_minus <= q_plus < inf")

    def support(self, n):
        n = np.asarray(n, dtype=float)
        width = (self.q_plus - self.q_minus) * n ** (1.0 - self.gamma)
        if self.variant == "lower":
            lo = n * self.q_minus
            return lo, lo + width
        hi = n * self.q_plus
        return hi - width, hi


def sample_length(law, seed, size=None, stream=0):
    """Draw metaorder lengths from ``law``; a scalar when ``size`` is None."""
    out = law.sample(1 if size is None else size, make_rng(seed, stream))
    return int(out[0]) if size is None else out


def sample_size(length, law, seed, stream=0):
    """Draw metaorder sizes given lengths (scalar or array)."""
    n = np.asarray(length)
    if np.any(n < 1):
        raise DomainError("length must be at least 1")
    lo, hi = law.support(n)
    u = make_rng(seed, stream).random(np.shape(n))
    out = np.clip(lo + u * (hi - lo), n * law.q_minus, n * law.q_plus)
    return float(out) if np.ndim(out) == 0 else out


def hill_estimator(samples, top_fraction=0.01):
    """Hill estimate of the tail index from the largest ``top_fraction`` of samples."""
    x = np.sort(np.asarray(samples, dtype=float))[::-1]
    k = int(np.ceil(top_fraction * x.size))
    if k < 2 or k >= x.size:
        raise DomainError("not enough samples for the requested top fraction")
    if x[k] <= 0:
        raise DomainError("Hill estimator needs positive order statistics")
    return float(1.0 / np.mean(np.log(x[:k] / x[k])))


def hazard_ratio(law, n):
    """Exact ``P(N >= n + 1 | N >= n)`` under the truncated law."""
    n = np.asarray(n, dtype=float)
    return law.survival(n + 1) / law.survival(n)


@dataclass(frozen=True)
class BracketCheck:
    n: int
    probability: float
    lower_bound: float
    upper_bound: float

    @property
    def lower_ok(self):
        return self.lower_bound <= self.probability

    @property
    def upper_ok(self):
        return self.probability <= self.upper_bound


def size_bracket_probability(length_law, size_law, n):
    """Exact ``P(n q_minus <= Q <= n q_plus)`` against its two power bounds.

    The bounds use ``C / 2`` and ``2 C / beta`` with ``C`` the length-law
    tail constant.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be positive")
    qm, qp = size_law.q_minus, size_law.q_plus
    a, b = n * qm, n * qp
    lengths = np.arange(max(1, int(np.floor(n * qm / qp))),
                        min(length_law.n_max, int(np.ceil(n * qp / qm))) + 1, dtype=float)
    lo, hi = size_law.support(lengths)
    width = hi - lo
    overlap = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    degenerate = width <= 0
    frac = np.where(degenerate, ((lo >= a) & (lo <= b)).astype(float),
                    overlap / np.where(degenerate, 1.0, width))
    prob = float(np.sum(length_law.pmf(lengths) * frac))
    c = length_law.tail_constant
    beta = length_law.beta
    return BracketCheck(n, prob, c / 2.0 * n ** -(1.0 + beta), 2.0 * c / beta * n**-beta)


def bracket_burn_in(checks):
    """Smallest tested ``n`` from which both bounds hold at every larger tested ``n``.

    Returns None when the bounds fail at the largest tested ``n``.
    """
    m = None
    for chk in sorted(checks, key=lambda c: c.n, reverse=True):
        if not (chk.lower_ok and chk.upper_ok):
            break
        m = chk.n
    return m


def conditional_size_moment(nu, n, size_law):
    """``E[Q**nu | N = n]`` for the uniform conditional size law."""
    n = np.asarray(n, dtype=float)
    lo, hi = size_law.support(n)
    width = hi - lo
    if size_law.variant == "lower":
        anchor, rel = lo, width / lo
        growth = np.expm1((1.0 + nu) * np.log1p(rel))
    else:
        anchor, rel = hi, width / hi
        growth = -np.expm1((1.0 + nu) * np.log1p(-rel))
    safe = np.where(rel > 0, rel, 1.0)
    return anchor**nu * np.where(rel > 0, growth / ((1.0 + nu) * safe), 1.0)


@dataclass(frozen=True)
class MomentCheck:
    nu: float
    exponent: float
    expected_exponent: float
    finite: bool


def moment_exponent(nu, beta, gamma=0.0, variant="lower", q_minus=1.0, q_plus=2.0,
                    n_range=(1e3, 1e6), n_points=200, n_max=10**7, boundary_tol=0.02):
    """Decay exponent of ``Delta_n = P(N = n) E[Q**nu | N = n]``.

    The exponent is the negated log-log slope of ``Delta_n`` over
    ``n_range``. ``E[Q**nu]`` is declared finite when it exceeds
    ``1 + boundary_tol``, so the boundary ``nu = beta`` counts as infinite.
    """
    if nu < 0:
        raise DomainError("nu must be non-negative")
    law = LengthLaw(beta, n_max)
    if n_range[1] > law.n_max:
        raise DomainError("n_range must lie within the truncation")
    size_law = SizeLaw(gamma, variant, q_minus, q_plus)
    n = np.unique(np.round(np.geomspace(n_range[0], n_range[1], n_points)))
    log_delta = np.log(law.pmf(n)) + np.log(conditional_size_moment(nu, n, size_law))
    slope = np.polyfit(np.log(n), log_delta, 1)[0]
    exponent = float(-slope)
    return MomentCheck(float(nu), exponent, 1.0 + beta - nu, exponent > 1.0 + boundary_tol)
