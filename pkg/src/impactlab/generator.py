"""Seeded generation of equilibrium and non-equilibrium metaorder scenarios."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_fraction, make_rng
from .core import ImpactPath, MarketVolumes, OrderSchedule, impact_path
from .exceptions import DomainError

__all__ = [
    "ScenarioSpec",
    "NonEqSpec",
    "make_schedule",
    "gen_equilibrium",
    "gen_nonequilibrium",
    "nonequilibrium_rho_schedule",
    "gen_volumes",
]

VOLUME_LAWS = ("uniform", "constant")
TIME_LAWS = ("constant", "exponential")


@dataclass(frozen=True)
class ScenarioSpec:
    """How to draw a metaorder schedule.

    ``volume_law="constant"`` uses the midpoint of ``[q_minus, q_plus]``.
    ``time_law="exponential"`` draws gaps with mean ``time_gap``.
    """

    n: int
    q_minus: float = 0.5
    q_plus: float = 1.5
    volume_law: str = "uniform"
    time_gap: float = 1.0
    time_law: str = "constant"
    seed: int = 0
    sign: int = 1
    start_price: float = 100.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if not 0 < self.q_minus <= self.q_plus < np.inf:
            raise DomainError("need 0 < q_minus <= q_plus < inf")
        if self.volume_law not in VOLUME_LAWS:
            raise DomainError(f"volume_law must be one of {VOLUME_LAWS}")
        if self.time_law not in TIME_LAWS:
            raise DomainError(f"time_law must be one of {TIME_LAWS}")
        if not self.time_gap > 0:
            raise DomainError("time_gap must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class NonEqSpec:
    """Two-regime index switching on geometrically growing blocks.

    Block ``j`` covers indices ``[n_j, n_{j+1})`` with ``n_{j+1} = ceil(g n_j)``;
    even blocks use ``rho1`` and odd blocks ``rho2``.
    """

    rho1: float
    rho2: float
    n0: int = 1
    growth: float = 10.0

    def __post_init__(self):
        if self.rho1 < 0 or self.rho2 < 0:
            raise DomainError("rho1 and rho2 must be non-negative")
        if self.rho1 > self.rho2:
            raise DomainError("need rho1 <= rho2")
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise DomainError("n0 must be a positive integer")
        if not self.growth > 1:
            raise DomainError("growth must exceed 1")


def make_schedule(spec, stream=0):
    """Draw the child volumes and times described by ``spec``."""
    rng = make_rng(spec.seed, stream)
    n = int(spec.n)
    if spec.volume_law == "uniform" and spec.q_plus > spec.q_minus:
        volumes = rng.uniform(spec.q_minus, spec.q_plus, n)
    else:
        volumes = np.full(n, 0.5 * (spec.q_minus + spec.q_plus))
    if spec.time_law == "exponential":
        gaps = rng.exponential(spec.time_gap, n)
        # zero gaps would break strict monotonicity
        gaps = np.maximum(gaps, np.finfo(float).tiny)
    else:
        gaps = np.full(n, float(spec.time_gap))
    times = np.cumsum(gaps)
    return OrderSchedule(volumes, times, spec.q_minus, spec.q_plus, spec.sign, spec.start_price)


def gen_equilibrium(spec, kernel, stream=0):
    """Schedule plus its equilibrium impact path ``I_n = f(S_n)``."""
    schedule = make_schedule(spec, stream)
    return schedule, impact_path(schedule, kernel)


def nonequilibrium_rho_schedule(n, neq):
    """Index ``rho(n)`` for ``n = 1..n`` under block switching.

    Boundaries are ``b_0 = n0`` and ``b_{j+1} = ceil(g b_j)``; indices below
    ``b_1`` form block 0.
    """
    rho = np.empty(n)
    lo, hi, block = 1, int(np.ceil(neq.growth * neq.n0)), 0
    while lo <= n:
        rho[lo - 1:min(hi, n + 1) - 1] = neq.rho1 if block % 2 == 0 else neq.rho2
        lo, hi = hi, max(hi + 1, int(np.ceil(neq.growth * hi)))
        block += 1
    return rho


def gen_nonequilibrium(spec, neq, stream=0, clamp=0.45):
    """Schedule plus a sawtooth impact path.

    Impacts grow multiplicatively, ``I_n = I_{n-1} / (1 - rho(n) Q_n / S_n)``,
    starting from ``I_1 = S_1**rho(1)``. While ``rho(n) Q_n / S_n`` exceeds
    ``clamp`` the index is lowered to keep the factor positive.
    """
    if not 0 < clamp < 0.5:
        raise DomainError("clamp must lie in (0, 1/2)")
    schedule = make_schedule(spec, stream)
    q = schedule.volumes
    s = schedule.cumulative_sizes
    rho = nonequilibrium_rho_schedule(schedule.n, neq)
    share = q / s
    rho_eff = np.minimum(rho, clamp / share)
    steps = -np.log1p(-rho_eff * share)
    steps[0] = rho[0] * np.log(s[0])
    log_impacts = np.cumsum(steps)
    return schedule, ImpactPath.from_log_impacts(q, log_impacts)


def gen_volumes(schedule, participation, seed, noise=0.1, stream=0):
    """Market volumes consistent with a target participation rate.

    ``V_k = Q_k / participation`` times a mean-one lognormal factor with log
    standard deviation ``noise``, floored at ``Q_k``. With participation 1
    the volumes equal the child volumes exactly.
    """
    check_fraction(participation, "participation")
    q = schedule.volumes
    if participation == 1:
        return MarketVolumes(q.copy(), 1.0)
    v = q / participation
    if noise > 0:
        rng = make_rng(seed, stream, 1)
        v = v * np.exp(noise * rng.standard_normal(q.size) - 0.5 * noise**2)
    return MarketVolumes(np.maximum(v, q), float(participation))
