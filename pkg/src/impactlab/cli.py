"""Command-line front end: ``impactlab <command> [--config FILE] [--seed N] [--out DIR] [--jobs K]``.

Every output file starts with a header (CSV comment lines or a ``meta``
object in JSON) carrying the config hash and the seed. Floats are written
with 17 significant digits, so reruns with the same config and seed are
byte-identical.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .averaging import mean_inv_one_plus_rho, mean_rho, psi, psi_mc
from .config import load_config
from .exceptions import ConfigError, ImpactlabError
from .friction import (CONVERGENCE_SPREAD, analyze_friction, limit_points,
                       participation_impact)
from .generator import (gen_equilibrium, gen_nonequilibrium, gen_volumes,
                        nonequilibrium_rho_schedule)
from .relaxation import eval_G, fair_pricing, inverse_G, relax_paths
from .selftest import run_selftest
from .sizes import (bracket_burn_in, hazard_ratio, hill_estimator, moment_exponent,
                    sample_length, size_bracket_probability)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SELFTEST = 0, 2, 3, 4
COMMANDS = ("simulate", "noneq", "psi", "sizes", "relax", "selftest")


# ---------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Writer:
    """Writes CSV and JSON files under one output directory with a shared header."""

    def __init__(self, out_dir, command, config_hash, seed):
        self.out_dir = out_dir
        self.meta = {"command": command, "config_sha256": config_hash, "seed": seed,
                     "version": __version__}
        self.written = []

    def csv(self, name, columns, data):
        head = [f"# {k}: {self.meta[k]}" for k in ("command", "config_sha256", "seed", "version")]
        lines = head + [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in zip(*data)]
        self._write(name, "\n".join(lines) + "\n")

    def json(self, name, payload):
        doc = {"meta": self.meta, **_finite(payload)}
        self._write(name, json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n")

    def _write(self, name, text):
        path = os.path.join(self.out_dir, name)
        _atomic_write(path, text)
        self.written.append(path)


def _finite(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


# ---------------------------------------------------------------- commands

def _simulate_one(cfg, writer, rho, stream):
    tail = cfg.output.tail_fraction
    kernel = cfg.impact_kernel(rho)
    schedule, path = gen_equilibrium(cfg.scenario_spec(), kernel, stream=stream)
    s = cfg.schedule
    vols = gen_volumes(schedule, s.participation, cfg.seed, noise=s.volume_noise, stream=stream)
    n = np.arange(1, len(path) + 1)
    writer.csv("path.csv", ["n", "tau", "Q", "S", "V", "I", "avg_I", "R"],
               [n, schedule.times, path.volumes, path.cumulative_sizes, vols.volumes,
                path.impacts, path.avg_impacts, path.friction])
    summary = analyze_friction(path, tail).as_dict()
    k = max(1, math.ceil(tail * len(path)))
    ratio = participation_impact(path, vols, kernel)
    summary.update({
        "rho": kernel.rho,
        "n": len(path),
        "theoretical_limit": 1.0 / (1.0 + kernel.rho),
        "participation": vols.participation,
        "participation_ratio_tail_mean": float(np.mean(ratio[-k:])),
        "final_friction": float(path.friction[-1]),
    })
    writer.json("summary.json", summary)


def cmd_simulate(cfg, out_dir, jobs=1):
    """Equilibrium paths: ``path.csv`` and ``summary.json`` per scenario."""
    rhos = cfg.rhos()
    tasks = []
    for i, rho in enumerate(rhos):
        sub = out_dir if len(rhos) == 1 else os.path.join(out_dir, f"scenario-{i:03d}")
        tasks.append((Writer(sub, "simulate", cfg.sha256(), cfg.seed), rho, i))
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda t: _simulate_one(cfg, *t), tasks))
    else:
        for t in tasks:
            _simulate_one(cfg, *t)
    return [p for w, _, _ in tasks for p in w.written]


def _export_index(n, points):
    if points <= 0 or points >= n:
        return np.arange(n)
    return np.unique(np.round(np.geomspace(1, n, points)).astype(int)) - 1


def cmd_noneq(cfg, out_dir, jobs=1):
    """Sawtooth friction series and its limit-point report."""
    w = Writer(out_dir, "noneq", cfg.sha256(), cfg.seed)
    neq = cfg.nonequilibrium()
    spec = cfg.scenario_spec(cfg.noneq.n)
    _, path = gen_nonequilibrium(spec, neq)
    rho_n = nonequilibrium_rho_schedule(len(path), neq)
    idx = _export_index(len(path), cfg.noneq.export_points)
    w.csv("path.csv", ["n", "Q", "S", "rho_n", "I", "log_I", "R"],
          [idx + 1, path.volumes[idx], path.cumulative_sizes[idx], rho_n[idx],
           path.impacts[idx], path.log_impacts[idx], path.friction[idx]])
    lo, hi, gap = limit_points(path, cfg.noneq.tail_fraction)
    log_si = np.log(path.cumulative_sizes) + path.log_impacts
    w.json("summary.json", {
        "liminf": lo,
        "limsup": hi,
        "max_gap": gap,
        "expected_liminf": 1.0 / (1.0 + neq.rho2),
        "expected_limsup": 1.0 / (1.0 + neq.rho1),
        "equilibrium": bool(hi - lo < CONVERGENCE_SPREAD),
        "size_times_impact_non_decreasing": bool(np.all(np.diff(log_si) >= 0)),
        "n": len(path),
        "tail_fraction": cfg.noneq.tail_fraction,
    })
    return w.written


def cmd_psi(cfg, out_dir, jobs=1):
    """Average normalised impact curves: closed form against Monte Carlo."""
    w = Writer(out_dir, "psi", cfg.sha256(), cfg.seed)
    r = cfg.rho_law
    x = np.geomspace(r.x_min, 1.0, r.n_grid)
    cols = {k: [] for k in ("law", "x", "psi", "psi_mc", "psi_mc_se", "z")}
    laws = {}
    for i, law in enumerate(cfg.rho_laws()):
        exact = np.asarray(psi(law, x))
        est = [psi_mc(law, float(v), r.mc_samples, cfg.seed, stream=i) for v in x]
        mc = np.array([e[0] for e in est])
        se = np.array([e[1] for e in est])
        diff = mc - exact
        z = np.divide(diff, se, out=np.zeros_like(diff), where=se > 0)
        for key, vals in (("law", [law.label()] * x.size), ("x", x), ("psi", exact),
                          ("psi_mc", mc), ("psi_mc_se", se), ("z", z)):
            cols[key].extend(vals)
        laws[law.label()] = {
            "mean_rho": mean_rho(law),
            "mean_inv_one_plus_rho": mean_inv_one_plus_rho(law),
            "max_abs_z": float(np.max(np.abs(z))),
            "within_3se": bool(np.all(np.abs(diff) <= 3 * se + 1e-15)),
        }
    w.csv("psi.csv", list(cols), list(cols.values()))
    w.json("summary.json", {"laws": laws, "mc_samples": r.mc_samples})
    return w.written


def cmd_sizes(cfg, out_dir, jobs=1):
    """Length-law tail diagnostics: hazard ratios, bracket bounds, moment verdicts."""
    w = Writer(out_dir, "sizes", cfg.sha256(), cfg.seed)
    z = cfg.sizes
    law, size_law = cfg.length_law(), cfg.size_law()
    samples = sample_length(law, cfg.seed, size=z.n_samples)
    hn = np.array(z.hazard_n, dtype=float)
    hz = hazard_ratio(law, hn)
    asym = (1.0 + 1.0 / hn) ** -law.beta
    w.csv("hazard.csv", ["n", "hazard_exact", "hazard_asymptotic", "abs_error"],
          [hn.astype(int), hz, asym, np.abs(hz - asym)])
    checks = [size_bracket_probability(law, size_law, n) for n in z.bracket_n]
    w.csv("bracket.csv", ["n", "probability", "lower_bound", "upper_bound", "lower_ok", "upper_ok"],
          [[c.n for c in checks], [c.probability for c in checks],
           [c.lower_bound for c in checks], [c.upper_bound for c in checks],
           [c.lower_ok for c in checks], [c.upper_ok for c in checks]])
    moments = [moment_exponent(f * z.beta, z.beta, z.gamma, z.variant, z.q_minus, z.q_plus,
                               n_max=max(z.n_max, 10**6))
               for f in z.nu_factors]
    w.csv("moments.csv", ["nu", "exponent", "expected_exponent", "finite"],
          [[m.nu for m in moments], [m.exponent for m in moments],
           [m.expected_exponent for m in moments], [m.finite for m in moments]])
    w.json("summary.json", {
        "beta": law.beta,
        "hill_tail_index": hill_estimator(samples, z.top_fraction),
        "sample_max": int(samples.max()),
        "tail_constant": law.tail_constant,
        "bracket_burn_in": bracket_burn_in(checks),
        "moment_verdicts_match": all(m.finite == (m.nu < z.beta) for m in moments),
        "hazard_max_abs_error": float(np.max(np.abs(hz - asym))),
    })
    return w.written


def cmd_relax(cfg, out_dir, jobs=1):
    """Fair pricing point of the configured path and the empirical relaxation curve."""
    w = Writer(out_dir, "relax", cfg.sha256(), cfg.seed)
    rl = cfg.relaxation
    profile = cfg.profile()
    _, path = gen_equilibrium(cfg.scenario_spec(), cfg.impact_kernel())
    fp = fair_pricing(path, profile)
    t, g_hat = relax_paths(path, profile, cfg.noise(), rl.horizon, rl.paths, rl.n_grid, jobs)
    g = eval_G(profile, t)
    w.csv("relax.csv", ["t", "G", "G_hat"], [t, g, g_hat])
    avg = float(path.avg_impacts[-1])
    w.json("summary.json", {
        "fair_pricing_time": fp.time,
        "final_friction": float(path.friction[-1]),
        "final_impact": float(path.impacts[-1]),
        "average_impact": avg,
        "residual_at_T": fp.residual_at_T,
        "residual_at_inf": fp.residual_at_inf,
        "identity_error": abs(fp.residual_at_T - avg) / avg,
        "fair_pricing_time_bound": inverse_G(profile, 0.5) if profile.alpha < 0.5 else None,
        "sup_deviation": float(np.max(np.abs(g_hat - g))),
        "paths": rl.paths,
    })
    return w.written


def cmd_selftest(cfg, out_dir, jobs=1):
    """Run the oracle suite; the exit status reports the outcome."""
    w = Writer(out_dir, "selftest", cfg.sha256(), cfg.seed)
    results = run_selftest(cfg.seed)
    for r in results:
        print(r.line())
    w.json("selftest.json", {
        "checks": [{"name": r.name, "passed": r.passed, "value": r.value,
                    "tolerance": r.tolerance} for r in results],
        "all_passed": all(r.passed for r in results),
    })
    return all(r.passed for r in results)


HANDLERS = {
    "simulate": cmd_simulate,
    "noneq": cmd_noneq,
    "psi": cmd_psi,
    "sizes": cmd_sizes,
    "relax": cmd_relax,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------- entry point

def _u64(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML scenario file (defaults apply when omitted)")
    common.add_argument("--seed", type=_u64, help="override the config seed")
    common.add_argument("--out", help="output directory (IMPACTLAB_OUT takes precedence)")
    common.add_argument("--jobs", type=_positive_int, default=1, help="parallel workers")
    parser = argparse.ArgumentParser(prog="impactlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"impactlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HANDLERS[name].__doc__.splitlines()[0])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        out_dir = os.environ.get("IMPACTLAB_OUT") or args.out or cfg.output.dir
        result = HANDLERS[args.command](cfg, out_dir, args.jobs)
    except ConfigError as exc:
        print(f"impactlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImpactlabError as exc:
        print(f"impactlab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "selftest":
        return EXIT_OK if result else EXIT_SELFTEST
    for path in result:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
