"""Core domain types: metaorder schedules, impact kernels and impact paths.

The impact of the n-th child order is the kernel evaluated at the cumulative
executed size, ``I_n = f(S_n)``, with the Karamata-type kernel

    f(x) = x**rho * exp(eta(x) + integral_{u0}^{x} theta(u) / u du).

Paths are stored with their log-impacts so that friction and local index
estimates stay accurate even when ``I_n`` itself is not representable.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import as_positive_1d, check_positive_scalar
from .exceptions import DomainError, KernelOverflowError, PositivityViolationError
from .quadrature import adaptive_simpson

__all__ = [
    "OrderSchedule",
    "ImpactKernel",
    "ImpactPath",
    "MarketVolumes",
    "eval_kernel",
    "impact_path",
    "incremental_impacts",
]

# exp() of anything above this is inf in float64
_LOG_MAX = float(np.log(np.finfo(float).max))
_LOG_TINY = float(np.log(np.finfo(float).smallest_subnormal))


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class OrderSchedule:
    """A metaorder split into child orders.

    Parameters
    ----------
    volumes : array_like
        Child order volumes ``Q_1..Q_n``, each in ``[q_minus, q_plus]``.
    times : array_like
        Strictly increasing, non-negative execution times.
    q_minus, q_plus : float
        Bounds on the child volumes.
    sign : {-1, +1}
        Direction of the metaorder (+1 buy).
    start_price : float
        Price just before the first execution.
    """

    volumes: np.ndarray
    times: np.ndarray
    q_minus: float
    q_plus: float
    sign: int = 1
    start_price: float = 100.0

    def __post_init__(self):
        volumes = as_positive_1d(self.volumes, "volumes")
        times = np.asarray(self.times, dtype=float)
        if times.shape != volumes.shape:
            raise DomainError("times and volumes must have the same length")
        if times[0] < 0 or np.any(np.diff(times) <= 0):
            raise DomainError("times must be non-negative and strictly increasing")
        check_positive_scalar(self.q_minus, "q_minus")
        check_positive_scalar(self.q_plus, "q_plus")
        if not self.q_minus <= self.q_plus < np.inf:
            raise DomainError("need 0 < q_minus <= q_plus < inf")
        # tolerate last-ulp excursions from samplers
        slack = 1e-12 * self.q_plus
        if np.any(volumes < self.q_minus - slack) or np.any(volumes > self.q_plus + slack):
            raise DomainError("child volumes must lie in [q_minus, q_plus]")
        if self.sign not in (-1, 1):
            raise DomainError("sign must be -1 or +1")
        check_positive_scalar(self.start_price, "start_price")
        object.__setattr__(self, "volumes", _readonly(volumes))
        object.__setattr__(self, "times", _readonly(times))

    @property
    def n(self):
        return self.volumes.size

    @property
    def cumulative_sizes(self):
        return np.cumsum(self.volumes)


@dataclass(frozen=True)
class ImpactKernel:
    """Regularly varying impact kernel.

    The slowly varying part uses two built-in families unless custom
    callables are supplied:

    * ``eta(x) = kappa + eta_amp * (1 + log(max(x, 1)))**(-eta_decay)``
    * ``theta(u) = theta_amp * (1 + log(u / u0))**(-theta_decay)`` for
      ``u > u0`` and 0 below.

    Custom ``eta``/``theta`` must accept float arrays. A custom ``theta`` is
    integrated by adaptive quadrature; its values below ``u0`` are ignored.
    """

    rho: float
    kappa: float = 0.0
    eta_amp: float = 0.0
    eta_decay: float = 1.0
    theta_amp: float = 0.0
    theta_decay: float = 1.0
    u0: float = 1.0
    eta: Optional[Callable] = field(default=None, compare=False)
    theta: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.rho) or self.rho < 0:
            raise DomainError(f"rho must be a finite non-negative real, got {self.rho}")
        check_positive_scalar(self.u0, "u0")
        check_positive_scalar(self.eta_decay, "eta_decay")
        check_positive_scalar(self.theta_decay, "theta_decay")
        for name in ("kappa", "eta_amp", "theta_amp"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def is_pure_power(self):
        """True when ``f(x) = x**rho`` exactly."""
        return (self.eta is None and self.theta is None and self.kappa == 0
                and self.eta_amp == 0 and self.theta_amp == 0)

    def eta_fn(self, x):
        x = np.asarray(x, dtype=float)
        if self.eta is not None:
            return np.broadcast_to(np.asarray(self.eta(x), dtype=float), x.shape)
        if self.eta_amp == 0:
            return np.full(x.shape, float(self.kappa))
        return self.kappa + self.eta_amp * (1.0 + np.log(np.maximum(x, 1.0))) ** (-self.eta_decay)

    def theta_fn(self, u):
        u = np.asarray(u, dtype=float)
        above = u > self.u0
        if self.theta is not None:
            vals = np.asarray(self.theta(np.where(above, u, self.u0)), dtype=float)
            return np.where(above, vals, 0.0)
        if self.theta_amp == 0:
            return np.zeros(u.shape)
        safe = np.where(above, u, self.u0)
        return np.where(above, self.theta_amp * (1.0 + np.log(safe / self.u0)) ** (-self.theta_decay), 0.0)

    def theta_integral(self, x):
        """``integral_{u0}^{x} theta(u) / u du`` (zero for ``x <= u0``)."""
        x = np.asarray(x, dtype=float)
        if self.theta is not None:
            return self._theta_integral_quad(x)
        if self.theta_amp == 0:
            return np.zeros(x.shape)
        ell = np.log1p(np.log(np.maximum(x, self.u0) / self.u0))
        p = self.theta_decay
        if p == 1.0:
            return self.theta_amp * ell
        return self.theta_amp * np.expm1((1.0 - p) * ell) / (1.0 - p)

    def _theta_integral_quad(self, x):
        flat = x.ravel()
        order = np.argsort(flat, kind="stable")
        out = np.zeros(flat.size)
        integrand = lambda u: float(self.theta_fn(u)) / u  # noqa: E731
        acc = 0.0
        prev = self.u0
        for idx in order:
            xi = flat[idx]
            if xi > prev:
                acc += adaptive_simpson(integrand, prev, xi, rtol=1e-10, atol=1e-300)
                prev = xi
            out[idx] = acc if xi > self.u0 else 0.0
        return out.reshape(x.shape)

    def log_eval(self, x):
        """Natural log of ``f(x)``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)):
            raise DomainError("kernel argument must be positive")
        return self.rho * np.log(x) + self.eta_fn(x) + self.theta_integral(x)

    def __call__(self, x):
        return eval_kernel(self, x)


def eval_kernel(kernel, x):
    """Evaluate ``f(x)`` for a kernel.

    Parameters
    ----------
    kernel : ImpactKernel
    x : float or array_like
        Positive sizes.

    Returns
    -------
    float or ndarray
        Positive kernel values, same shape as ``x``.

    Raises
    ------
    KernelOverflowError
        When ``f(x)`` overflows (or underflows to zero) in float64.
    """
    log_f = kernel.log_eval(x)
    if np.any(~np.isfinite(log_f)) or np.any(log_f > _LOG_MAX):
        raise KernelOverflowError("kernel value exceeds the float64 range")
    if np.any(log_f < _LOG_TINY):
        raise KernelOverflowError("kernel value underflows to zero")
    out = np.exp(log_f)
    return float(out) if np.ndim(out) == 0 else out


def _friction_from_logs(volumes, log_impacts):
    """``R_n = sum_k Q_k I_k / (S_n I_n)`` computed from log-impacts.

    Uses extended-precision prefix sums; falls back to the stable
    recursion ``R_n S_n = R_{n-1} S_{n-1} I_{n-1}/I_n + Q_n`` when the
    log-range exceeds what extended precision can hold.
    """
    q = volumes.astype(np.longdouble)
    logs = log_impacts.astype(np.longdouble)
    w = np.exp(logs - logs.max())
    if np.all(w > 0):
        return (np.cumsum(q * w) / (np.cumsum(q) * w)).astype(float)
    ratios = np.exp(np.diff(logs, prepend=logs[0]))
    sizes = np.cumsum(q)
    out = np.empty(q.size, dtype=np.longdouble)
    acc = np.longdouble(0)
    for k in range(q.size):
        acc = acc / ratios[k] + q[k]
        out[k] = acc / sizes[k]
    return out.astype(float)


@dataclass(frozen=True)
class ImpactPath:
    """Per-step impacts of a metaorder and the quantities derived from them.

    Build instances with :meth:`from_impacts` or :meth:`from_log_impacts`.

    Attributes
    ----------
    volumes : ndarray
        Child volumes ``Q_n``.
    cumulative_sizes : ndarray
        ``S_n = Q_1 + ... + Q_n``.
    impacts : ndarray
        Peak impacts ``I_n``. May contain ``inf`` for diagnostic paths built
        from log-impacts beyond the float64 range.
    log_impacts : ndarray
    avg_impacts : ndarray
        Volume-weighted average impacts.
    friction : ndarray
        ``R_n = avg_impacts / impacts``.
    increments : ndarray
        ``delta_n = I_n - I_{n-1}`` with ``I_0 = 0``.
    """

    volumes: np.ndarray
    cumulative_sizes: np.ndarray
    impacts: np.ndarray
    log_impacts: np.ndarray
    avg_impacts: np.ndarray
    friction: np.ndarray
    increments: np.ndarray

    @classmethod
    def from_log_impacts(cls, volumes, log_impacts):
        volumes = as_positive_1d(volumes, "volumes")
        log_impacts = np.asarray(log_impacts, dtype=float)
        if log_impacts.shape != volumes.shape:
            raise DomainError("volumes and impacts must have the same length")
        if np.any(~np.isfinite(log_impacts)) or np.any(log_impacts < _LOG_TINY):
            raise PositivityViolationError("impacts must be strictly positive")
        with np.errstate(over="ignore"):
            impacts = np.exp(log_impacts)
        return cls._assemble(volumes, impacts, log_impacts)

    @classmethod
    def from_impacts(cls, volumes, impacts):
        volumes = as_positive_1d(volumes, "volumes")
        impacts = np.asarray(impacts, dtype=float)
        if impacts.shape != volumes.shape:
            raise DomainError("volumes and impacts must have the same length")
        if np.any(~(impacts > 0)):
            bad = int(np.argmax(~(impacts > 0)))
            raise PositivityViolationError(f"impact I_{bad + 1} = {impacts[bad]} is not positive")
        if np.any(~np.isfinite(impacts)):
            raise KernelOverflowError("impacts must be finite")
        return cls._assemble(volumes, impacts, np.log(impacts))

    @classmethod
    def _assemble(cls, volumes, impacts, log_impacts):
        friction = _friction_from_logs(volumes, log_impacts)
        with np.errstate(invalid="ignore", over="ignore"):
            avg = friction * impacts
            increments = np.diff(impacts, prepend=0.0)
        return cls(
            volumes=_readonly(volumes),
            cumulative_sizes=_readonly(np.cumsum(volumes)),
            impacts=_readonly(impacts),
            log_impacts=_readonly(log_impacts),
            avg_impacts=_readonly(avg),
            friction=_readonly(friction),
            increments=_readonly(increments),
        )

    def __len__(self):
        return self.volumes.size

    def vwap_burn_in(self):
        """First index (0-based) after which every ``R_n`` lies in ``[0, 1]``.

        Returns ``None`` when the last friction value is already outside.
        """
        outside = np.flatnonzero((self.friction < 0) | (self.friction > 1))
        if outside.size == 0:
            return 0
        last = int(outside[-1]) + 1
        return None if last >= len(self) else last

    def prices(self, sign=1, start_price=100.0):
        """Expected execution prices ``start_price + sign * I_n``."""
        return start_price + sign * self.impacts


@dataclass(frozen=True)
class MarketVolumes:
    """Market volumes traded alongside each child order."""

    volumes: np.ndarray
    participation: float

    def __post_init__(self):
        object.__setattr__(self, "volumes", _readonly(as_positive_1d(self.volumes, "volumes")))
        if not 0 < self.participation <= 1:
            raise DomainError("participation must lie in (0, 1]")

    @property
    def cumulative(self):
        return np.cumsum(self.volumes)


def impact_path(schedule, kernel):
    """Impact path of a schedule under a kernel: ``I_n = f(S_n)``.

    Raises
    ------
    KernelOverflowError
        If some ``f(S_n)`` exceeds the float64 range.
    PositivityViolationError
        If some ``f(S_n)`` is not strictly positive.
    """
    sizes = schedule.cumulative_sizes
    log_f = kernel.log_eval(sizes)
    if np.any(~np.isfinite(log_f)) or np.any(log_f > _LOG_MAX):
        raise KernelOverflowError("impact exceeds the float64 range")
    if np.any(log_f < _LOG_TINY):
        raise PositivityViolationError("impact underflows to zero")
    return ImpactPath.from_log_impacts(schedule.volumes, log_f)


def incremental_impacts(path):
    """``delta_n = I_n - I_{n-1}`` with ``I_0 = 0``."""
    return path.increments.copy()
