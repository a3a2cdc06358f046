"""Brute-force reference computations.

Everything here is written against numpy, scipy and the standard library
only. Kernels are read through their public parameters (``rho``, ``kappa``,
``eta_amp``, ...) and re-evaluated from scratch, so agreement with the
production modules is a genuine cross-check.
"""

import math

import numpy as np
from scipy import integrate

__all__ = [
    "brute_force_Z",
    "ratio_expansion_residual",
    "oracle_log_kernel",
    "karamata_mean",
]


class _Neumaier:
    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, x):
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self):
        return self.total + self.comp


def brute_force_Z(volumes, alpha):
    """``Z_n = (sum_k Q_k alpha_k) / (S_n alpha_n)`` with compensated running sums."""
    q = [float(v) for v in volumes]
    a = [float(v) for v in alpha]
    if len(q) != len(a):
        raise ValueError("sequences must have the same length")
    if any(not v > 0 for v in a):
        raise ValueError("alpha must be positive")
    num, den = _Neumaier(), _Neumaier()
    out = np.empty(len(q))
    for n, (qk, ak) in enumerate(zip(q, a)):
        num.add(qk * ak)
        den.add(qk)
        out[n] = num.value / (den.value * ak)
    return out


def ratio_expansion_residual(volumes, alpha, rho, log_alpha=False):
    """``r_n = (S_n / Q_n) (alpha_{n-1} / alpha_n - 1 + rho Q_n / S_n)`` for ``n >= 2``.

    The first entry is NaN. With ``log_alpha=True`` the sequence is given
    as logarithms and the ratio is formed as ``expm1`` of their difference.
    """
    q = np.asarray(volumes, dtype=float)
    a = np.asarray(alpha, dtype=float)
    s = np.array([math.fsum(q[:k + 1]) for k in range(q.size)]) if q.size < 2000 else np.cumsum(q)
    out = np.full(q.size, np.nan)
    if log_alpha:
        ratio_m1 = np.expm1(a[:-1] - a[1:])
    else:
        ratio_m1 = a[:-1] / a[1:] - 1.0
    out[1:] = s[1:] / q[1:] * (ratio_m1 + rho * q[1:] / s[1:])
    return out


def _theta_value(kernel, u):
    if u <= kernel.u0:
        return 0.0
    if kernel.theta is not None:
        return float(kernel.theta(np.asarray(u, dtype=float)))
    if kernel.theta_amp == 0:
        return 0.0
    return kernel.theta_amp * (1.0 + math.log(u / kernel.u0)) ** (-kernel.theta_decay)


def _slowly_varying_log(kernel, t):
    """``log f(t) - rho log t`` by direct quadrature of the theta term."""
    if kernel.eta is not None:
        eta = float(kernel.eta(np.asarray(t, dtype=float)))
    elif kernel.eta_amp == 0:
        eta = float(kernel.kappa)
    else:
        eta = kernel.kappa + kernel.eta_amp * (1.0 + math.log(max(t, 1.0))) ** (-kernel.eta_decay)
    if t <= kernel.u0 or (kernel.theta is None and kernel.theta_amp == 0):
        return eta
    # u = u0 e^v turns theta(u)/u du into theta(u0 e^v) dv
    upper = math.log(t / kernel.u0)
    val, _ = integrate.quad(lambda v: _theta_value(kernel, kernel.u0 * math.exp(v)),
                            0.0, upper, epsabs=0.0, epsrel=1e-13, limit=500)
    return eta + val


def oracle_log_kernel(kernel, x):
    """Independent evaluation of ``log f(x)``."""
    x = np.asarray(x, dtype=float)
    flat = [kernel.rho * math.log(v) + _slowly_varying_log(kernel, v) for v in x.ravel()]
    out = np.array(flat).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def karamata_mean(kernel, x):
    """``(1 / (x f(x))) integral_0^x f(t) dt`` by quadrature.

    Writing ``f(t) = t**rho exp(h(t))`` the value is
    ``(1 + c) / (1 + rho)`` with
    ``c = (1 + rho) integral_0^x expm1(h(t) - h(x)) (t / x)**rho dt / x``,
    so a pure power gives exactly ``1 / (1 + rho)``. ``h`` is constant below
    ``min(1, u0)``; the rest is integrated in ``log t``.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    rho = float(kernel.rho)
    h_x = _slowly_varying_log(kernel, x)
    log_x = math.log(x)
    c_lo = min(1.0, kernel.u0, x)
    # below c_lo: closed form
    pieces = [math.expm1(_slowly_varying_log(kernel, c_lo) - h_x) * (c_lo / x) ** (1.0 + rho)]

    def integrand(v):
        return (1.0 + rho) * math.expm1(_slowly_varying_log(kernel, math.exp(v)) - h_x) \
            * math.exp((1.0 + rho) * (v - log_x))

    knots = sorted({math.log(c) for c in (c_lo, kernel.u0, 1.0, x) if c_lo <= c <= x})
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-15, epsrel=1e-12, limit=500)
        pieces.append(val)
    return (1.0 + math.fsum(pieces)) / (1.0 + rho)
