"""Simulation and estimation of metaorder market impact in equilibrium."""

__version__ = "0.1.0"

from .averaging import (
    RhoLaw,
    exp_integral_Ei,
    mean_friction_mc,
    mean_inv_one_plus_rho,
    mean_rho,
    psi,
    psi_derivative,
    psi_mc,
)
from .core import (
    ImpactKernel,
    ImpactPath,
    MarketVolumes,
    OrderSchedule,
    eval_kernel,
    impact_path,
    incremental_impacts,
)
from .estimators import AverageImpactCurve, EquilibriumIndexEstimator, TailIndexEstimator
from .exceptions import (
    ConfigError,
    DegenerateWindowError,
    DomainError,
    ImpactlabError,
    KernelOverflowError,
    NoFairPricingError,
    NonEquilibriumError,
    NumericalError,
    PositivityViolationError,
    QuadratureError,
)
from .friction import (
    analyze_friction,
    is_rho_infinite,
    limit_points,
    rho_from_friction,
    rho_local,
    rho_local_estimate,
    rho_loglog,
)
from .generator import NonEqSpec, ScenarioSpec, gen_equilibrium, gen_nonequilibrium, gen_volumes
from .relaxation import NoiseSpec, RelaxationProfile, eval_G, fair_pricing, inverse_G, relax_paths
from .sizes import LengthLaw, SizeLaw, hill_estimator, moment_exponent, sample_length, sample_size
