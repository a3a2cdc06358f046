"""Scenario configuration: TOML sections mapped onto the domain types.

Every section is optional and falls back to documented defaults. Unknown
sections or keys are rejected, and every section is validated before any
computation starts.
"""

import hashlib
import json
from dataclasses import dataclass, field, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .averaging import RhoLaw
from .core import ImpactKernel
from .exceptions import ConfigError, ImpactlabError
from .generator import NonEqSpec, ScenarioSpec
from .relaxation import NoiseSpec, RelaxationProfile
from .sizes import LengthLaw, SizeLaw

__all__ = ["ScenarioConfig", "load_config", "parse_config"]


@dataclass(frozen=True)
class ScheduleSection:
    n: int = 10_000
    q_minus: float = 0.5
    q_plus: float = 1.5
    volume_law: str = "uniform"
    time_gap: float = 1.0
    time_law: str = "constant"
    sign: int = 1
    start_price: float = 100.0
    participation: float = 1.0
    volume_noise: float = 0.1


@dataclass(frozen=True)
class KernelSection:
    # a list of rho values runs one scenario per value
    rho: object = 0.5
    kappa: float = 0.0
    eta_amp: float = 0.0
    eta_decay: float = 1.0
    theta_amp: float = 0.0
    theta_decay: float = 1.0
    u0: float = 1.0


@dataclass(frozen=True)
class NonEqSection:
    rho1: float = 0.5
    rho2: float = 2.0
    n0: int = 1
    growth: float = 10.0
    n: int = 1_000_000
    tail_fraction: float = 0.9
    # rows written to path.csv, log-spaced; 0 writes every step
    export_points: int = 5000


@dataclass(frozen=True)
class RhoLawSection:
    laws: tuple = ("dirac(0.5)", "uniform01", "exponential(1)")
    mc_samples: int = 100_000
    x_min: float = 0.01
    n_grid: int = 100


@dataclass(frozen=True)
class SizesSection:
    beta: float = 1.5
    n_max: int = 10**7
    gamma: float = 0.0
    variant: str = "lower"
    q_minus: float = 1.0
    q_plus: float = 2.0
    n_samples: int = 1_000_000
    top_fraction: float = 0.01
    hazard_n: tuple = (10, 100, 1000, 10_000, 100_000)
    bracket_n: tuple = (100, 300, 1000, 3000, 10_000)
    nu_factors: tuple = (0.5, 0.9, 1.0, 1.1, 2.0)


@dataclass(frozen=True)
class RelaxationSection:
    alpha: float = 1.0 / 3.0
    family: str = "exponential"
    tau: float = 1.0
    t0: float = 1.0
    p: float = 0.5
    std_scale: float = 0.2
    paths: int = 10_000
    horizon: float = 10.0
    n_grid: int = 201


@dataclass(frozen=True)
class OutputSection:
    dir: str = "impactlab-out"
    tail_fraction: float = 0.2


SECTIONS = {
    "schedule": ScheduleSection,
    "kernel": KernelSection,
    "noneq": NonEqSection,
    "rho_law": RhoLawSection,
    "sizes": SizesSection,
    "relaxation": RelaxationSection,
    "output": OutputSection,
}


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    schedule: ScheduleSection = field(default_factory=ScheduleSection)
    kernel: KernelSection = field(default_factory=KernelSection)
    noneq: NonEqSection = field(default_factory=NonEqSection)
    rho_law: RhoLawSection = field(default_factory=RhoLawSection)
    sizes: SizesSection = field(default_factory=SizesSection)
    relaxation: RelaxationSection = field(default_factory=RelaxationSection)
    output: OutputSection = field(default_factory=OutputSection)

    def as_dict(self):
        out = {"seed": self.seed}
        for name in SECTIONS:
            sec = getattr(self, name)
            out[name] = {f.name: _plain(getattr(sec, f.name)) for f in fields(sec)}
        return out

    def sha256(self):
        """Hash of the canonical JSON form; the output directory is excluded."""
        d = self.as_dict()
        d["output"] = {k: v for k, v in d["output"].items() if k != "dir"}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed):
        return replace(self, seed=_check_seed(seed))

    # domain objects

    def rhos(self):
        r = self.kernel.rho
        return list(r) if isinstance(r, (list, tuple)) else [r]

    def scenario_spec(self, n=None):
        s = self.schedule
        return ScenarioSpec(n=s.n if n is None else n, q_minus=s.q_minus, q_plus=s.q_plus,
                            volume_law=s.volume_law, time_gap=s.time_gap, time_law=s.time_law,
                            seed=self.seed, sign=s.sign, start_price=s.start_price)

    def impact_kernel(self, rho=None):
        k = self.kernel
        return ImpactKernel(rho=float(self.rhos()[0] if rho is None else rho), kappa=k.kappa,
                            eta_amp=k.eta_amp, eta_decay=k.eta_decay, theta_amp=k.theta_amp,
                            theta_decay=k.theta_decay, u0=k.u0)

    def nonequilibrium(self):
        q = self.noneq
        return NonEqSpec(q.rho1, q.rho2, q.n0, q.growth)

    def rho_laws(self):
        return [RhoLaw.parse(text) for text in self.rho_law.laws]

    def length_law(self):
        return LengthLaw(self.sizes.beta, self.sizes.n_max)

    def size_law(self):
        s = self.sizes
        return SizeLaw(s.gamma, s.variant, s.q_minus, s.q_plus)

    def profile(self):
        r = self.relaxation
        return RelaxationProfile(r.alpha, r.family, r.tau, r.t0, r.p)

    def noise(self):
        return NoiseSpec(self.relaxation.std_scale, self.seed)

    def validate(self):
        """Build every domain object once so that errors surface before any work."""
        try:
            for rho in self.rhos():
                self.impact_kernel(rho)
            self.scenario_spec()
            self.scenario_spec(self.noneq.n)
            self.nonequilibrium()
            self.rho_laws()
            self.length_law()
            self.size_law()
            self.profile()
            self.noise()
        except ImpactlabError as exc:
            raise ConfigError(str(exc)) from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value: {exc}") from exc
        s = self.schedule
        if not 0 < s.participation <= 1:
            raise ConfigError("schedule.participation must lie in (0, 1]")
        if s.volume_noise < 0:
            raise ConfigError("schedule.volume_noise must be non-negative")
        if not 0 < self.noneq.tail_fraction <= 1 or self.noneq.export_points < 0:
            raise ConfigError("noneq needs tail_fraction in (0, 1] and export_points >= 0")
        if not 0 < self.output.tail_fraction <= 1:
            raise ConfigError("output.tail_fraction must lie in (0, 1]")
        r = self.rho_law
        if r.mc_samples < 1000 or not 0 < r.x_min < 1 or r.n_grid < 2:
            raise ConfigError("rho_law needs mc_samples >= 1000, 0 < x_min < 1, n_grid >= 2")
        rl = self.relaxation
        if rl.paths < 1 or rl.horizon <= 0 or rl.n_grid < 2:
            raise ConfigError("relaxation needs paths >= 1, horizon > 0, n_grid >= 2")
        z = self.sizes
        if z.n_samples < 200 or not 0 < z.top_fraction < 1:
            raise ConfigError("sizes needs n_samples >= 200 and top_fraction in (0, 1)")
        if any(int(v) != v or v < 1 for v in z.hazard_n + z.bracket_n):
            raise ConfigError("sizes.hazard_n and sizes.bracket_n must be positive integers")
        return self


def _plain(value):
    return list(value) if isinstance(value, tuple) else value


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def _coerce(section, key, value, default):
    """Match TOML values to the type of the field default."""
    where = f"{section}.{key}"
    if isinstance(default, bool) or isinstance(value, bool):
        if not isinstance(value, bool) or not isinstance(default, bool):
            raise ConfigError(f"{where}: unexpected boolean")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected an array")
        return tuple(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    if section == "kernel" and key == "rho" and isinstance(value, list):
        if not value or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{where}: expected a number or a non-empty array of numbers")
        return tuple(float(v) for v in value)
    if isinstance(default, int):
        if not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number")
    return float(value)


def parse_config(data):
    """Build a validated :class:`ScenarioConfig` from a parsed TOML mapping."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    unknown = set(data) - set(SECTIONS) - {"seed"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs = {"seed": _check_seed(data.get("seed", 0))}
    for name, cls in SECTIONS.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"[{name}] must be a table")
        defaults = {f.name: f.default for f in fields(cls)}
        bad = set(raw) - set(defaults)
        if bad:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
        values = {k: _coerce(name, k, v, defaults[k]) for k, v in raw.items()}
        kwargs[name] = cls(**values)
    return ScenarioConfig(**kwargs).validate()


def load_config(path):
    """Read and validate a TOML scenario file; ``None`` gives the defaults."""
    if path is None:
        return ScenarioConfig().validate()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    return parse_config(data)
