"""Oracle suite: production numerics checked against independent references."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import oracle
from .averaging import RhoLaw, exp_integral_Ei, mean_inv_one_plus_rho
from .core import ImpactKernel
from .generator import ScenarioSpec, gen_equilibrium
from .quadrature import adaptive_simpson
from .sizes import LengthLaw

__all__ = ["CheckResult", "BUILTIN_KERNELS", "run_selftest"]

# kernels exercised by the oracle comparisons
BUILTIN_KERNELS = (
    ImpactKernel(0.5),
    ImpactKernel(0.3, theta_amp=0.1),
    ImpactKernel(0.5, theta_amp=0.1),
    ImpactKernel(1.0, eta_amp=0.2, kappa=0.1),
    ImpactKernel(2.0, theta_amp=-0.05, theta_decay=2.0, u0=2.0),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


def _check(name, value, tol):
    value = float(value)
    return CheckResult(name, bool(np.isfinite(value) and value <= tol), value, tol)


def _arithmetic_z():
    n = np.arange(1, 1001, dtype=float)
    z = oracle.brute_force_Z(np.ones(n.size), n)
    return np.max(np.abs(z - (n + 1) / (2 * n)))


def _karamata_exact():
    err = 0.0
    for rho, want in ((0.5, 2.0 / 3.0), (1.0, 0.5)):
        for x in (0.5, 10.0, 1e5):
            err = max(err, abs(oracle.karamata_mean(ImpactKernel(rho), x) - want))
    return err


def _friction_vs_oracle(seed):
    err = 0.0
    for i, kernel in enumerate(BUILTIN_KERNELS):
        _, path = gen_equilibrium(ScenarioSpec(n=5000, seed=seed), kernel, stream=i)
        z = oracle.brute_force_Z(path.volumes, path.impacts)
        err = max(err, np.max(np.abs(path.friction - z)))
    return err


def _kernel_vs_oracle():
    x = np.geomspace(0.3, 1e7, 25)
    err = 0.0
    for kernel in BUILTIN_KERNELS:
        err = max(err, np.max(np.abs(kernel.log_eval(x) - oracle.oracle_log_kernel(kernel, x))))
    return err


def _ratio_expansion_tail():
    n = 10_000
    q = np.ones(n)
    worst = 0.0
    for kernel in BUILTIN_KERNELS:
        log_alpha = oracle.oracle_log_kernel(kernel, np.arange(1, n + 1, dtype=float))
        r = oracle.ratio_expansion_residual(q, log_alpha, kernel.rho, log_alpha=True)
        worst = max(worst, float(np.median(np.abs(r[-n // 5:]))))
    return worst


def _ei_vs_quad():
    err = 0.0
    for x in (-1e-3, -0.5, -1.0, -4.9, -5.1, -20.0, -60.0):
        ref, _ = integrate.quad(lambda u: math.exp(-u) / u, -x, np.inf, epsabs=0.0, epsrel=1e-13, limit=400)
        err = max(err, abs(exp_integral_Ei(x) + ref) / ref)
    return err


def _exp_moment_vs_quad():
    ref, _ = integrate.quad(lambda r: math.exp(-r) / (1.0 + r), 0.0, np.inf, epsabs=0.0, epsrel=1e-13)
    return abs(mean_inv_one_plus_rho(RhoLaw.exponential(1.0)) - ref)


def _simpson_vs_quad():
    f = lambda u: math.sin(u) / (1.0 + u * u)  # noqa: E731
    ref, _ = integrate.quad(f, 0.0, 20.0, epsabs=0.0, epsrel=1e-13, limit=400)
    return abs(adaptive_simpson(f, 0.0, 20.0, rtol=1e-12) - ref)


def _zeta_normaliser():
    law = LengthLaw(1.5, n_max=100_000)
    k = np.arange(1, law.n_max + 1, dtype=float)
    direct = math.fsum(k**-2.5)
    return abs(law.normalizer - direct) / direct


def run_selftest(seed=0):
    """Run every oracle comparison; returns a list of :class:`CheckResult`."""
    return [
        _check("brute-force Z, arithmetic weights", _arithmetic_z(), 1e-12),
        _check("karamata mean of pure powers", _karamata_exact(), 0.0),
        _check("friction vs brute-force Z", _friction_vs_oracle(seed), 1e-12),
        _check("kernel log vs quadrature", _kernel_vs_oracle(), 1e-9),
        _check("ratio expansion residual tail", _ratio_expansion_tail(), 1e-2),
        _check("Ei vs quadrature (relative)", _ei_vs_quad(), 1e-10),
        _check("exponential moment vs quadrature", _exp_moment_vs_quad(), 1e-9),
        _check("adaptive Simpson vs quadrature", _simpson_vs_quad(), 1e-10),
        _check("zeta normaliser vs summation (relative)", _zeta_normaliser(), 1e-12),
    ]
