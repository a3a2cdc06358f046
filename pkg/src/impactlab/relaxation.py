"""Post-execution relaxation: decay profiles, fair pricing time, residual impact."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import make_rng
from .exceptions import DomainError, NoFairPricingError

__all__ = [
    "RelaxationProfile",
    "NoiseSpec",
    "FairPricing",
    "eval_G",
    "inverse_G",
    "fair_pricing",
    "fair_pricing_times",
    "relax_paths",
    "second_differences",
]

FAMILIES = ("exponential", "power")
_CHUNK = 1024


@dataclass(frozen=True)
class RelaxationProfile:
    """``G(t) = alpha + (1 - alpha) G0(t)``.

    ``G0`` is ``exp(-t / tau)`` for the exponential family and
    ``(1 + t / t0)**-p`` for the power family.
    """

    alpha: float = 1.0 / 3.0
    family: str = "exponential"
    tau: float = 1.0
    t0: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if not 0 <= self.alpha <= 0.5:
            raise DomainError("alpha must lie in [0, 1/2]")
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}")
        for name in ("tau", "t0", "p"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive")

    def g0(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            return np.exp(-t / self.tau)
        return np.exp(-self.p * np.log1p(t / self.t0))

    def g0_inverse(self, g):
        g = np.asarray(g, dtype=float)
        if self.family == "exponential":
            return -self.tau * np.log(g)
        return self.t0 * np.expm1(-np.log(g) / self.p)


@dataclass(frozen=True)
class NoiseSpec:
    """Mean-zero Gaussian noise with standard deviation ``std_scale * I_N``."""

    std_scale: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.std_scale) and self.std_scale >= 0):
            raise DomainError("std_scale must be non-negative")


@dataclass(frozen=True)
class FairPricing:
    time: float
    residual_at_T: float
    residual_at_inf: float


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def eval_G(profile, t):
    """Average relaxation function at times ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0)):
        raise DomainError("t must be non-negative")
    return _scalar(profile.alpha + (1.0 - profile.alpha) * profile.g0(t))


def inverse_G(profile, r):
    """Time at which ``G`` reaches ``r``.

    Raises
    ------
    NoFairPricingError
        If ``r <= alpha``: the decay never gets that low.
    """
    r = np.asarray(r, dtype=float)
    if np.any(~(r > profile.alpha)):
        raise NoFairPricingError(f"level must exceed alpha={profile.alpha}")
    if np.any(r > 1):
        raise DomainError("level must not exceed 1")
    g = (r - profile.alpha) / (1.0 - profile.alpha)
    return _scalar(np.maximum(profile.g0_inverse(g), 0.0))


def fair_pricing(path, profile):
    """Fair pricing time ``T_N = G^{-1}(R_N)`` and the two residual impacts.

    ``residual_at_T = G(T_N) I_N`` recovers the average execution impact;
    ``residual_at_inf = alpha I_N``.
    """
    r_n = float(path.friction[-1])
    i_n = float(path.impacts[-1])
    t_n = inverse_G(profile, r_n)
    return FairPricing(t_n, eval_G(profile, t_n) * i_n, profile.alpha * i_n)


def fair_pricing_times(paths, profile):
    """``(T_N, R_N)`` arrays over a collection of paths."""
    r = np.array([p.friction[-1] for p in paths], dtype=float)
    return inverse_G(profile, r) * np.ones_like(r), r


def _chunk_noise_sum(seed, chunk, count, n_grid, std):
    rng = make_rng(seed, chunk)
    return rng.normal(0.0, std, size=(count, n_grid)).sum(axis=0)


def relax_paths(path, profile, noise, horizon, m, n_grid=201, jobs=1):
    """Empirical average relaxation ``G_hat`` from ``m`` noisy residual trajectories.

    Each trajectory is ``G(t) I_N + noise`` normalised by ``I_N``. Noise is
    drawn in fixed chunks with per-chunk seeds, so the result does not
    depend on ``jobs``.

    Returns
    -------
    t, g_hat : ndarray
    """
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    t = np.linspace(0.0, float(horizon), int(n_grid))
    g = eval_G(profile, t)
    # the path fixes I_N; normalised trajectories do not depend on it otherwise
    if not np.isfinite(path.impacts[-1]) or path.impacts[-1] <= 0:
        raise DomainError("path must end at a positive finite impact")
    if noise.std_scale == 0:
        return t, g.copy()
    m = int(m)
    counts = [min(_CHUNK, m - k) for k in range(0, m, _CHUNK)]
    args = [(noise.seed, i, c, t.size, noise.std_scale) for i, c in enumerate(counts)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            sums = list(pool.map(lambda a: _chunk_noise_sum(*a), args))
    else:
        sums = [_chunk_noise_sum(*a) for a in args]
    total = np.sum(np.stack(sums), axis=0)
    return t, g + total / m


def second_differences(profile, horizon=50.0, n_grid=2001):
    """Second differences of ``G`` on a uniform grid; non-negative for convex ``G``."""
    t = np.linspace(0.0, horizon, n_grid)
    return np.diff(eval_G(profile, t), 2)

