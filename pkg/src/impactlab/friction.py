"""Friction-series analysis: convergence, equilibrium index estimates, limit points."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_fraction, tail_slice
from .exceptions import DegenerateWindowError, DomainError, NonEquilibriumError

__all__ = [
    "FrictionAnalysis",
    "analyze_friction",
    "rho_from_friction",
    "rho_loglog",
    "rho_local",
    "rho_local_estimate",
    "is_rho_infinite",
    "limit_points",
    "participation_impact",
    "speed_diagnostic",
    "slow_variation_ratio",
]

CONVERGENCE_SPREAD = 0.02
RHO_INFINITE_THRESHOLD = 1e3


@dataclass(frozen=True)
class FrictionAnalysis:
    limit_estimate: float
    rho_hat_friction: float
    rho_hat_loglog: float
    rho_hat_local: float
    converged: bool
    tail_liminf: float
    tail_limsup: float
    rho_infinite: bool = False

    def as_dict(self):
        return {
            "limit_estimate": self.limit_estimate,
            "rho_hat_friction": self.rho_hat_friction,
            "rho_hat_loglog": self.rho_hat_loglog,
            "rho_hat_local": self.rho_hat_local,
            "converged": self.converged,
            "tail_liminf": self.tail_liminf,
            "tail_limsup": self.tail_limsup,
            "rho_infinite": self.rho_infinite,
        }


def _friction(path_or_values):
    return np.asarray(getattr(path_or_values, "friction", path_or_values), dtype=float)


def rho_from_friction(path, tail_fraction=0.2):
    """Equilibrium index from the tail mean of the friction: ``1 / mean(R) - 1``.

    ``path`` may be an :class:`~impactlab.core.ImpactPath` or a raw friction
    sequence.

    Raises
    ------
    NonEquilibriumError
        If the tail mean is not a positive finite number.
    """
    r = _friction(path)
    r_bar = float(np.mean(r[tail_slice(r.size, tail_fraction)]))
    if not np.isfinite(r_bar) or r_bar <= 0:
        raise NonEquilibriumError(f"tail mean friction {r_bar} does not define a finite index")
    return max(0.0, 1.0 / r_bar - 1.0)


def _default_window(sizes, decades=2.0):
    return np.flatnonzero(sizes >= sizes[-1] / 10**decades)


def rho_loglog(path, window=None):
    """Least-squares slope of ``log I_n`` on ``log S_n``, clipped at zero.

    Parameters
    ----------
    path : ImpactPath
    window : slice, array of indices, or None
        Indices to regress on. By default the last two decades of ``S_n``.
    """
    sizes = path.cumulative_sizes
    idx = _default_window(sizes) if window is None else np.arange(len(path))[window]
    x = np.log(sizes[idx])
    y = path.log_impacts[idx]
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if idx.size < 2 or sxx <= 0:
        raise DegenerateWindowError("log cumulative size has no spread over the window")
    slope = float(np.dot(xc, y - y.mean())) / sxx
    return max(0.0, slope)


def rho_local(path):
    """Local index sequence ``(S_n / Q_n) (1 - I_{n-1} / I_n)`` for ``n >= 2``.

    The first entry (no predecessor) is NaN.
    """
    s = path.cumulative_sizes
    q = path.volumes
    out = np.full(len(path), np.nan)
    out[1:] = s[1:] / q[1:] * -np.expm1(np.diff(path.log_impacts) * -1.0)
    return out


def rho_local_estimate(path, tail_fraction=0.2):
    """Tail median of :func:`rho_local`, clipped at zero."""
    seq = rho_local(path)[1:]
    if seq.size == 0:
        raise DomainError("local index needs at least two steps")
    return max(0.0, float(np.median(seq[tail_slice(seq.size, tail_fraction)])))


def is_rho_infinite(path, tail_fraction=0.2, threshold=RHO_INFINITE_THRESHOLD):
    """Divergence flag: tail of the local index beyond ``threshold`` and still growing."""
    seq = rho_local(path)[1:]
    if seq.size < 2:
        return False
    tail = seq[tail_slice(seq.size, tail_fraction)]
    half = tail.size // 2
    if half == 0:
        return False
    return bool(tail[-1] > threshold and np.median(tail[half:]) > np.median(tail[:half]))


def analyze_friction(path, tail_fraction=0.2):
    """Summary of a friction series.

    Estimators that are undefined for the path (too short, no equilibrium)
    are reported as NaN.
    """
    r = path.friction
    tail = r[tail_slice(r.size, tail_fraction)]
    spread = float(tail.max() - tail.min())
    infinite = is_rho_infinite(path, tail_fraction)

    def attempt(fn, *args):
        try:
            return fn(path, *args)
        except (NonEquilibriumError, DegenerateWindowError, DomainError):
            return float("nan")

    return FrictionAnalysis(
        limit_estimate=float(tail.mean()),
        rho_hat_friction=attempt(rho_from_friction, tail_fraction),
        rho_hat_loglog=attempt(rho_loglog),
        rho_hat_local=attempt(rho_local_estimate, tail_fraction),
        converged=bool(spread < CONVERGENCE_SPREAD and not infinite),
        tail_liminf=float(tail.min()),
        tail_limsup=float(tail.max()),
        rho_infinite=infinite,
    )


def limit_points(path, tail_fraction=0.2, resolution=0.01):
    """Observed limit set of the friction over the trailing indices.

    Returns
    -------
    liminf, limsup : float
        Tail minimum and maximum of ``R_n``.
    max_gap : float
        Width of the longest run of empty cells when ``[liminf, limsup]`` is
        cut into cells of width ``resolution``; zero when every cell is visited.
    """
    check_fraction(resolution, "resolution")
    r = _friction(path)
    tail = r[tail_slice(r.size, tail_fraction)]
    lo, hi = float(tail.min()), float(tail.max())
    n_cells = int(np.ceil((hi - lo) / resolution))
    if n_cells == 0:
        return lo, hi, 0.0
    cells = np.minimum(((tail - lo) / resolution).astype(int), n_cells - 1)
    hit = np.zeros(n_cells, dtype=bool)
    hit[cells] = True
    longest = run = 0
    for h in hit:
        run = 0 if h else run + 1
        longest = max(longest, run)
    return lo, hi, longest * resolution


def participation_impact(path, vols, kernel):
    """Ratio ``I_n / (f(V_1 + ... + V_n) * (Q/V)**rho)``; tends to one in equilibrium."""
    if len(vols.volumes) != len(path):
        raise DomainError("market volumes must align with the path")
    log_sigma = kernel.log_eval(vols.cumulative)
    return np.exp(path.log_impacts - log_sigma - kernel.rho * np.log(vols.participation))


def speed_diagnostic(path):
    """``(S_n / Q_n) (R_{n-1} / R_n - 1)`` for ``n >= 2`` (first entry NaN).

    Tends to zero when the friction settles at the speed required by the
    strong form of the equilibrium characterisation.
    """
    r = path.friction
    out = np.full(r.size, np.nan)
    out[1:] = path.cumulative_sizes[1:] / path.volumes[1:] * (r[:-1] / r[1:] - 1.0)
    return out


def slow_variation_ratio(path, lam, s_min):
    """``R(lam S) / R(S)`` along the path for ``S >= s_min`` with ``lam S`` inside the path.

    ``R`` is interpolated linearly in ``log S``.
    """
    s = path.cumulative_sizes
    log_s = np.log(s)
    pts = s[(s >= s_min) & (lam * s <= s[-1])]
    if pts.size == 0:
        raise DomainError("no sizes satisfy s_min <= S and lam * S <= S_n")
    r_at = np.interp(np.log(pts), log_s, path.friction)
    r_lam = np.interp(np.log(lam * pts), log_s, path.friction)
    return r_lam / r_at
