"""Population averages over a random equilibrium index.

``psi(x) = E[x**rho]`` is the average normalised impact at participation
``x``; ``E[1 / (1 + rho)]`` is the average friction limit.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from ._validation import make_rng
from .exceptions import DomainError

__all__ = [
    "RhoLaw",
    "psi",
    "psi_mc",
    "psi_derivative",
    "psi_with_se",
    "mean_rho",
    "mean_inv_one_plus_rho",
    "exp_integral_Ei",
    "jackknife_se",
    "mean_friction_mc",
]

EULER_GAMMA = 0.57721566490153286061
_SERIES_LIMIT = 5.0

VARIANTS = ("dirac", "uniform01", "exponential", "empirical")


@dataclass(frozen=True)
class RhoLaw:
    """Law of the equilibrium index.

    Use the constructors :meth:`dirac`, :meth:`uniform01`,
    :meth:`exponential` and :meth:`empirical`. ``param`` is the Dirac
    location or the exponential rate.
    """

    variant: str
    param: float = float("nan")
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown rho law {self.variant!r}")
        if self.variant == "dirac" and not (np.isfinite(self.param) and self.param >= 0):
            raise DomainError("Dirac location must be a finite non-negative real")
        if self.variant == "exponential" and not (np.isfinite(self.param) and self.param > 0):
            raise DomainError("exponential rate must be positive")
        if self.variant == "empirical":
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or s.size < 2 or not np.all(np.isfinite(s)) or np.any(s < 0):
                raise DomainError("empirical law needs at least two finite non-negative samples")
            s = s.copy()
            s.flags.writeable = False
            object.__setattr__(self, "samples", s)

    @classmethod
    def dirac(cls, lam):
        return cls("dirac", float(lam))

    @classmethod
    def uniform01(cls):
        return cls("uniform01")

    @classmethod
    def exponential(cls, lam=1.0):
        return cls("exponential", float(lam))

    @classmethod
    def empirical(cls, samples):
        return cls("empirical", samples=samples)

    @classmethod
    def parse(cls, text):
        """Parse ``"dirac(0.5)"``, ``"uniform01"`` or ``"exponential(1)"``."""
        m = re.fullmatch(r"\s*([a-z0-9_]+)\s*(?:\(\s*([^)]*)\s*\))?\s*", text)
        if not m or m.group(1) not in ("dirac", "uniform01", "exponential"):
            raise DomainError(f"cannot parse rho law {text!r}")
        name, arg = m.groups()
        if name == "uniform01":
            if arg:
                raise DomainError("uniform01 takes no parameter")
            return cls.uniform01()
        try:
            value = float(arg) if arg else (1.0 if name == "exponential" else None)
        except ValueError:
            raise DomainError(f"bad parameter in rho law {text!r}") from None
        if value is None:
            raise DomainError("dirac needs a location, e.g. dirac(0.5)")
        return cls(name, value)

    def label(self):
        if self.variant == "uniform01":
            return "uniform01"
        if self.variant == "empirical":
            return f"empirical[{self.samples.size}]"
        return f"{self.variant}({self.param:g})"

    def ppf(self, u):
        """Inverse CDF at probabilities ``u``."""
        u = np.asarray(u, dtype=float)
        if self.variant == "dirac":
            return np.full(u.shape, self.param)
        if self.variant == "uniform01":
            return u.copy()
        if self.variant == "exponential":
            return -np.log1p(-u) / self.param
        s = np.sort(self.samples)
        return s[np.minimum((u * s.size).astype(int), s.size - 1)]

    def sample(self, m, rng, stratified=False):
        """Draw ``m`` indices; ``stratified`` uses one uniform per probability stratum."""
        u = rng.random(m)
        if stratified:
            u = (rng.permutation(m) + u) / m
        return self.ppf(u)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(x > 1):
        raise DomainError("psi is defined on (0, 1]")
    return x


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def psi(law, x):
    """Average normalised market impact ``E[x**rho]`` on ``(0, 1]``."""
    x = _check_x(x)
    if law.variant == "dirac":
        out = x**law.param
    elif law.variant == "uniform01":
        y = np.log(x)
        safe = np.where(y == 0, 1.0, y)
        out = np.where(y == 0, 1.0, np.expm1(safe) / safe)
    elif law.variant == "exponential":
        out = law.param / (law.param - np.log(x))
    else:
        out = _empirical_mean(lambda r, xx: xx**r, law.samples, x)
    return _scalar(out)


def _empirical_mean(fn, samples, x, chunk=4096):
    flat = np.atleast_1d(x).ravel()
    out = np.empty(flat.size)
    for i in range(0, flat.size, chunk):
        block = flat[i:i + chunk]
        out[i:i + chunk] = fn(samples[None, :], block[:, None]).mean(axis=1)
    return out.reshape(np.shape(x))


def jackknife_se(values):
    """Jackknife standard error of the sample mean of ``values``."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        raise DomainError("jackknife needs at least two values")
    loo = (v.sum() - v) / (n - 1)
    return float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def psi_with_se(law, x):
    """``psi(x)`` with its plug-in standard error (zero for closed-form laws)."""
    x = float(_check_x(x))
    if law.variant != "empirical":
        return psi(law, x), 0.0
    values = x**law.samples
    return float(values.mean()), jackknife_se(values)


def psi_mc(law, x, m, seed, stream=0):
    """Monte Carlo estimate of ``psi(x)`` from ``m`` independent draws of rho.

    Returns
    -------
    estimate, std_error : float
    """
    x = float(_check_x(x))
    if m < 1000:
        raise DomainError("psi_mc needs m >= 1000")
    if law.variant == "dirac":
        return x**law.param, 0.0
    rng = make_rng(seed, stream)
    values = x ** law.sample(int(m), rng)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(m))


def psi_derivative(law, x):
    """``psi'(x) = E[rho x**(rho - 1)]``."""
    x = _check_x(x)
    if law.variant == "dirac":
        lam = law.param
        out = lam * x ** (lam - 1.0) if lam != 0 else np.zeros(x.shape)
    elif law.variant == "uniform01":
        out = _uniform_psi_slope(np.log(x)) / x
    elif law.variant == "exponential":
        lam = law.param
        out = lam / (x * (lam - np.log(x)) ** 2)
    else:
        out = _empirical_mean(lambda r, xx: r * xx ** (r - 1.0), law.samples, x)
    return _scalar(out)


def _uniform_psi_slope(y):
    """d/dy of ``expm1(y) / y``."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 0.5
    ys = np.where(small, y, 0.0)
    # sum_{k>=1} k y^(k-1) / (k+1)!
    series = np.zeros(y.shape)
    term = np.ones(y.shape)
    for k in range(1, 25):
        series += k * term / math.factorial(k + 1)
        term = term * ys
    yl = np.where(small, 1.0, y)
    direct = (yl * np.exp(yl) - np.expm1(yl)) / yl**2
    return np.where(small, series, direct)


def mean_rho(law):
    if law.variant == "dirac":
        return law.param
    if law.variant == "uniform01":
        return 0.5
    if law.variant == "exponential":
        return 1.0 / law.param
    return float(law.samples.mean())


def mean_inv_one_plus_rho(law):
    """``E[1 / (1 + rho)]``, the average friction limit."""
    if law.variant == "dirac":
        return 1.0 / (1.0 + law.param)
    if law.variant == "uniform01":
        return math.log(2.0)
    if law.variant == "exponential":
        lam = law.param
        # -lam e^lam Ei(-lam) = lam e^lam E1(lam)
        return lam * _scaled_e1(lam)
    return float(np.mean(1.0 / (1.0 + law.samples)))


def _e1_series(z):
    """E1(z) for 0 < z <= 5 by the convergent power series."""
    terms = [-EULER_GAMMA, -math.log(z)]
    term = 1.0
    k = 1
    while True:
        term *= -z / k
        contrib = -term / k
        terms.append(contrib)
        if abs(contrib) < 1e-18 * abs(math.fsum(terms)) or k > 200:
            break
        k += 1
    return math.fsum(terms)


def _e1_scaled_cf(z):
    """``e^z E1(z)`` for z > 1 by modified Lentz on the even continued fraction."""
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError("continued fraction for E1 did not converge")


def _scaled_e1(z):
    if z <= _SERIES_LIMIT:
        return math.exp(z) * _e1_series(z)
    return _e1_scaled_cf(z)


def _ei_negative(x):
    z = -x
    if z <= _SERIES_LIMIT:
        return -_e1_series(z)
    return -math.exp(-z) * _e1_scaled_cf(z)


def exp_integral_Ei(x):
    """Exponential integral ``Ei(x) = -integral_{-x}^{inf} e^{-u}/u du`` for ``x < 0``.

    Power series for ``|x| <= 5``, continued fraction beyond.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr < 0)):
        raise DomainError("Ei is implemented for negative arguments only")
    out = np.vectorize(_ei_negative, otypes=[float])(arr)
    return _scalar(out)


def mean_friction_mc(law, n_paths, spec, seed, tail_fraction=0.2, stratified=True):
    """Average tail friction over equilibrium paths with rho drawn from ``law``.

    Each path uses a pure power kernel ``x**rho``. The index draws and the
    child volumes come from independent streams.

    Returns
    -------
    mean, std_error : float
    rhos, tails : ndarray
        The sampled indices and per-path tail-mean frictions.
    """
    from dataclasses import replace

    from .core import ImpactKernel
    from .generator import gen_equilibrium

    rhos = law.sample(int(n_paths), make_rng(seed, 0), stratified=stratified)
    tails = np.empty(rhos.size)
    for i, r in enumerate(rhos):
        _, path = gen_equilibrium(replace(spec, seed=seed), ImpactKernel(rho=float(r)), stream=i + 1)
        k = max(1, int(np.ceil(tail_fraction * len(path))))
        tails[i] = path.friction[-k:].mean()
    return float(tails.mean()), float(tails.std(ddof=1) / math.sqrt(tails.size)), rhos, tails
