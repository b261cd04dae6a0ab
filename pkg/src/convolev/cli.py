"""Command-line experiment harness.

Every subcommand reads an optional TOML config, runs with per-rep random
streams, writes CSV files to ``--out`` and exits with 0 (all checks pass),
1 (configuration error) or 2 (a check failed).
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import appendix, kernels, levy, monotone, svint
from .errors import ConvolevError
from .report import ExperimentReport, fmt
from .setval import Interval

SUBCOMMANDS = ("simulate", "unbounded-growth", "bounded-check", "explosion", "covariance",
               "monotone-demo", "slepian", "stable-max", "validate")

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2


class ConfigError(ConvolevError, ValueError):
    """Invalid configuration file or flag."""


def load_toml(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

PRESETS = {
    "example6": {
        "kernel": {"type": "rl", "beta": 0.75},
        "driver": {"type": "compound_poisson", "rate": 2.0, "law": "normal", "scale": 1.5},
        # K3 = {z} on every jump: large jumps through k3, small ones through k4
        "monotone-demo": {"x0": [-1.0, 1.0], "k1": [-0.5, 0.5], "k2": [0.5, 1.0],
                          "k3": [1.0, 1.0], "k4": [1.0], "convolute_drift": False},
    },
    "example7": {
        "kernel": {"type": "exp_rl", "kappa": 1.0, "beta": 0.75},
        "driver": {"type": "holtsmark", "C": 1.0, "eps": 0.05},
        "monotone-demo": {"x0": [-1.0, 1.0], "k1": [-0.5, 0.5], "k2": [0.0],
                          "k3": [0.5, 1.0], "k4": [0.5, 1.0]},
    },
    "example8": {
        "kernel": {"type": "exp_rl", "kappa": 1.0, "beta": 0.75},
        "driver": {"type": "holtsmark", "C": 1.0, "eps": 0.05},
        "monotone-demo": {"x0": [-1.0, 1.0], "k1": [-0.5, 0.5], "k2": [0.0],
                          "k3": [0.5, 1.0], "k4": [0.5, 1.0]},
    },
    "example9": {
        "kernel": {"type": "mg", "beta": 0.6, "convention": "t"},
        "driver": {"type": "none"},
        "monotone-demo": {"x0": [0.0, 0.0], "k1": [0.0, 0.0], "k2": [0.0, 1.0],
                          "k3": [0.0, 0.0], "k4": [0.0]},
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    subcommand: str
    raw: dict = field(default_factory=dict)
    seed: int = 0
    reps: Optional[int] = None
    out: Path = Path("out")
    workers: int = 1
    preset: Optional[str] = None

    @property
    def section(self) -> dict:
        return self.raw.get(self.subcommand, {})

    def get(self, key, default=None):
        return self.section.get(key, self.raw.get("run", {}).get(key, default))

    def reps_or(self, default: int) -> int:
        return int(self.reps if self.reps is not None else self.get("reps", self.raw.get("reps", default)))

    def t(self, default: float = 1.0) -> float:
        return float(self.get("t", default))

    def kernel(self, T: Optional[float] = None) -> kernels.Kernel:
        spec = dict(self.raw.get("kernel", {"type": "rl", "beta": 0.75}))
        return kernels.make_kernel(spec, float(spec.get("T", T if T is not None else self.t())))

    def driver(self, T: Optional[float] = None) -> levy.LevyDriverSpec:
        cfg = dict(self.raw.get("driver", {}))
        return levy.driver_from_mapping(cfg, T if T is not None else self.t())


def _interval(v, name: str) -> Interval:
    try:
        lo, hi = (float(x) for x in v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a pair [lo, hi]") from exc
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _write_report(rep: ExperimentReport, cfg: RunConfig, stem: Optional[str] = None) -> Path:
    rep.metadata.setdefault("seed", cfg.seed)
    return rep.save(cfg.out, stem)


def _scalar(v) -> float:
    """Scalar of a one-dimensional functional; signed infinity when exploded."""
    if isinstance(v, svint.Exploded):
        signs = {d[0] for d in v.directions}
        return math.copysign(math.inf, signs.pop()) if len(signs) == 1 else math.nan
    return float(v[0])


def cmd_simulate(cfg: RunConfig) -> ExperimentReport:
    T = cfg.t()
    spec = cfg.driver(T).validate()
    k = cfg.kernel(T)
    M = int(cfg.get("grid_size", 256))
    reps = cfg.reps_or(1)
    mu, sig = float(spec.drift_vector[0]), float(spec.sigma_matrix[0, 0])
    if spec.d != 1 or spec.m != 1:
        raise ConfigError("simulate writes scalar integrals and needs d = m = 1")
    one = {q: svint.constant_selector(q, 1.0) for q in (1, 2)}
    z = {q: svint.mark_linear_selector(q, 1.0) for q in (3, 4)}
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for r in range(reps):
        path = levy.sample_path(spec, M, cfg.seed, r)
        if r == 0:
            with open(cfg.out / "increments.csv", "w", newline="") as fh:
                levy.write_increments_csv(path, fh)
            with open(cfg.out / "jumps.csv", "w", newline="") as fh:
                levy.write_jumps_csv(path, fh)
        for t in monotone.evaluation_times(path)[1:]:
            vals = [svint.integral_functional(1, k, one[1], path, 0.0, t),
                    svint.integral_functional(2, k, one[2], path, 0.0, t),
                    svint.integral_functional(3, k, z[3], path, 0.0, t),
                    svint.integral_functional(4, k, z[4], path, 0.0, t)]
            sc = [_scalar(v) for v in vals]
            total = mu * sc[0] + sig * sc[1] + sc[2] + sc[3]
            rows.append((r, t, *sc, total))
    with open(cfg.out / "simulate.csv", "w", newline="") as fh:
        fh.write("rep,t,I1,I2,I3,I4,X\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    rep = ExperimentReport("simulate", metadata={"reps": reps, "grid_size": M, "kernel": k.label,
                                                 "eps": spec.eps,
                                                 "truncation_error_variance": levy.truncation_error_variance(spec)})
    rep.add("simulate:paths", reps, float(len(rows)), verdict="info", claim="number of rows written")
    _write_report(rep, cfg, "simulate-report")
    return rep


def _family(cfg: RunConfig) -> svint.BFamily:
    name = str(cfg.get("family", "walsh"))
    kw = {}
    if name == "walsh" and "amplitude" in cfg.section:
        kw["amplitude"] = float(cfg.section["amplitude"])
    if name == "arithmetic":
        kw["delta"] = float(cfg.get("delta", 0.1))
    return svint.make_b_family(name, **kw)


def cmd_unbounded(cfg: RunConfig) -> ExperimentReport:
    t = cfg.t()
    k = kernels.make_kernel(dict(cfg.raw.get("kernel", {"type": "rl", "beta": 2.0})), t)
    n_values = [int(n) for n in cfg.get("n_values", [2 ** i for i in range(1, 9)])]
    rep = svint.unboundedness_experiment(
        float(cfg.get("alpha", 1.5)), n_values, _family(cfg), k, t, cfg.reps_or(2000), cfg.seed,
        float(cfg.get("t0", 0.0)), float(cfg.get("C", 1.0)), float(cfg.get("eps", 0.01)),
        float(cfg.get("r", 1.0)), cfg.workers)
    _write_report(rep, cfg)
    return rep


def cmd_bounded(cfg: RunConfig) -> ExperimentReport:
    t = cfg.t()
    drv = dict(cfg.raw.get("driver", {"type": "stable", "alpha": 0.5, "eps": 1e-3}))
    spec = levy.driver_from_mapping(drv, t).validate()
    k = cfg.kernel(t) if "kernel" in cfg.raw else kernels.make_exponential(1.0, t)
    fam = svint.SelectorFamily(tuple(svint.mark_linear_selector(4, float(c))
                                     for c in cfg.get("multipliers", [1.0, 2.0])), "multipliers")
    rep = svint.boundedness_bound_check(spec, fam, k, t, cfg.reps_or(2000), cfg.seed,
                                        float(cfg.get("t0", 0.0)),
                                        int(cfg.get("n_combinations", 1000)), cfg.workers)
    _write_report(rep, cfg)
    return rep


def cmd_explosion(cfg: RunConfig) -> ExperimentReport:
    T = float(cfg.get("T", cfg.t()))
    k = cfg.kernel(T)
    rep = monotone.explosion_probability_experiment(
        k, float(cfg.get("rate", 1.0)), T, cfg.reps_or(2000), cfg.seed,
        str(cfg.get("law", "normal")), float(cfg.get("scale", 1.0)), cfg.workers)
    _write_report(rep, cfg)
    return rep


def cmd_covariance(cfg: RunConfig) -> ExperimentReport:
    t = cfg.t()
    u = [float(x) for x in cfg.get("u_values", [2.0 ** -k for k in range(3, 11)])]
    k = cfg.kernel(t + max(u))
    rep = monotone.covariance_decay_check(k, t, u, cfg.reps_or(0), cfg.seed,
                                          int(cfg.get("grid_size", 1024)))
    _write_report(rep, cfg)
    return rep


def _builder(cfg: RunConfig, k: kernels.Kernel) -> monotone.SetPathBuilder:
    sec = cfg.section
    return monotone.SetPathBuilder(
        x0=_interval(sec.get("x0", [-1.0, 1.0]), "x0"), kernel=k,
        k1=_interval(sec.get("k1", [0.0, 0.0]), "k1"),
        k2=tuple(float(c) for c in sec.get("k2", [0.0])),
        k3=_interval(sec.get("k3", [0.0, 0.0]), "k3"),
        k4=tuple(float(c) for c in sec.get("k4", [0.0])),
        convolute_drift=bool(sec.get("convolute_drift", True)))


def cmd_monotone(cfg: RunConfig) -> ExperimentReport:
    T = cfg.t()
    k = cfg.kernel(T)
    spec = cfg.driver(T).validate()
    M = int(cfg.get("grid_size", 256))
    b = _builder(cfg, k)
    path = levy.sample_path(spec, M, cfg.seed, 0)
    sp = b.build(path)
    down, tau = monotone.decreasing_process(sp, float(cfg.get("width_tol", 1e-9)))
    up = monotone.increasing_process(sp)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for name, p in (("x", sp), ("down", down), ("up", up)):
        with open(cfg.out / f"{name}.csv", "w", newline="") as fh:
            p.write_csv(fh)
    I2 = sp.scalar["brownian_integral"]
    with open(cfg.out / "scalar.csv", "w", newline="") as fh:
        fh.write("t,brownian_integral,running_min,running_max,up_lo,up_hi\n")
        for row in zip(sp.times, I2, np.minimum.accumulate(I2), np.maximum.accumulate(I2), up.lo, up.hi):
            fh.write(",".join(fmt(v) for v in row) + "\n")
    rep = ExperimentReport("monotone-demo", metadata={"preset": cfg.preset, "kernel": k.label,
                                                      "grid_size": M, "tau_index": tau.index,
                                                      "tau_reason": tau.reason})
    fin = ~up.exploded
    inc = bool(np.all(np.diff(up.lo[fin]) <= 0) and np.all(np.diff(up.hi[fin]) >= 0)
               and np.all(np.diff(up.exploded.astype(int)) >= 0))
    dec = bool(np.all(np.diff(down.lo) >= 0) and np.all(np.diff(down.hi) <= 0))
    bnd = bool(np.all(np.maximum(np.abs(down.lo), np.abs(down.hi)) <= b.x0.norm()))
    rep.add("monotone:increasing", len(sp), float(inc), verdict="pass" if inc else "fail",
            claim="X-up is set-increasing and explosion is absorbing")
    rep.add("monotone:decreasing", len(sp), float(dec), verdict="pass" if dec else "fail",
            claim="X-down is set-decreasing")
    rep.add("monotone:down-bounded", len(sp), float(bnd), bound=b.x0.norm(),
            verdict="pass" if bnd else "fail", claim="d_H(X-down_t, {0}) <= d_H(X0, {0})")
    frac = float(np.mean(up.exploded))
    rep.add("monotone:up-exploded-fraction", len(sp), frac, verdict="info",
            claim="fraction of evaluation times at which X-up is exploded")
    if cfg.preset == "example9":
        same = bool(np.all(up.lo == np.minimum.accumulate(I2)) and np.all(up.hi == np.maximum.accumulate(I2)))
        rep.add("monotone:running-min-max", len(sp), float(same), verdict="pass" if same else "fail",
                claim="X-up equals [running min, running max] of the same-path integral")
    _write_report(rep, cfg, "monotone-demo")
    return rep


def _slepian_config(cfg: RunConfig) -> appendix.SlepianConfig:
    t = float(cfg.get("t", 4.0))
    kspec = dict(cfg.raw.get("kernel", {"type": "rl", "beta": 2.0}))
    k = kernels.make_kernel(kspec, float(kspec.get("T", t)))
    fam = svint.make_b_family(str(cfg.get("family", "harmonic")),
                              **({"delta": float(cfg.get("delta", 0.1))}
                                 if cfg.get("family") == "arithmetic" else {}))
    return appendix.SlepianConfig(alpha=float(cfg.get("alpha", 1.5)), rho=float(cfg.get("rho", 1.0)),
                                  kernel=k, t0=float(cfg.get("t0", 0.0)), t=t, family=fam,
                                  anchor=str(cfg.get("anchor", "worst")))


def cmd_slepian(cfg: RunConfig) -> ExperimentReport:
    sc = _slepian_config(cfg)
    n_values = [int(n) for n in cfg.get("n_values", [2, 3, 4, 8, 16, 32, 64, 128])]
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "slepian.csv", "w", newline="") as fh:
        appendix.write_table_csv(fh, sc, n_values)
    rep = appendix.comparison_report(sc, n_values)
    _write_report(rep, cfg, "slepian-report")
    return rep


def cmd_stable_max(cfg: RunConfig) -> ExperimentReport:
    n_values = [int(n) for n in cfg.get("n_values", [2, 8, 32, 128])]
    rep = svint.stable_max_report(float(cfg.get("alpha", 1.5)), n_values,
                                  float(cfg.get("scale", 1.0)), cfg.reps_or(10_000), cfg.seed)
    _write_report(rep, cfg)
    return rep


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(cfg: RunConfig) -> list[str]:
    """Dry-run every precondition; returns violations (warnings are prefixed ``warning:``)."""
    out: list[str] = []
    k = None
    try:
        k = cfg.kernel()
    except (ConvolevError, KeyError, TypeError, ValueError) as exc:
        out.append(f"kernel: {exc}")
    spec = None
    try:
        spec = cfg.driver()
        out += [f"driver: {v}" for v in spec.violations()]
    except (ConvolevError, KeyError, TypeError, ValueError) as exc:
        out.append(f"driver: {exc}")
    sub = cfg.subcommand
    if sub == "unbounded-growth":
        try:
            n_values = [int(n) for n in cfg.get("n_values", [2 ** i for i in range(1, 9)])]
            svint.certify_separation(_family(cfg), max(n_values), float(cfg.get("t0", 0.0)), cfg.t(),
                                     float(cfg.get("r", 1.0)))
        except (ConvolevError, ValueError) as exc:
            out.append(f"separation certificate: {exc}")
    if sub == "monotone-demo" and spec is not None and not spec.violations():
        sec = cfg.section
        try:
            ic = monotone.integrability_condition_check(_interval(sec.get("k1", [0, 0]), "k1"),
                                                        _interval(sec.get("k3", [0, 0]), "k3"), spec)
            out += [f"integrability: {r.experiment} = {fmt(r.estimate)} is infinite"
                    for r in ic.rows if r.verdict == "fail"]
        except ConvolevError as exc:
            out.append(f"integrability: {exc}")
        if k is not None and k.singular and not spec.jumps.finite_activity:
            out.append("warning: singular kernel with infinitely active jumps: the increasing "
                       "process explodes instantly and is never integrably bounded")
    if sub in ("simulate", "monotone-demo") and spec is not None:
        if not spec.jumps.symmetric:
            out.append("driver: q=4 small-jump integral requires a symmetric measure")
    return out


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

COMMANDS = {"simulate": cmd_simulate, "unbounded-growth": cmd_unbounded, "bounded-check": cmd_bounded,
            "explosion": cmd_explosion, "covariance": cmd_covariance, "monotone-demo": cmd_monotone,
            "slepian": cmd_slepian, "stable-max": cmd_stable_max}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convolev", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
    p.add_argument("--reps", type=int, default=None, help="Monte Carlo repetitions")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--preset", default=None, choices=sorted(PRESETS), help="monotone-demo preset")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    raw = load_toml(args.config)
    if args.preset:
        raw = _merge(PRESETS[args.preset], raw)
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.reps is not None and args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    return RunConfig(args.subcommand, raw, seed, args.reps, Path(args.out), args.workers, args.preset)


def run(cfg: RunConfig) -> int:
    if cfg.subcommand == "validate":
        target = RunConfig(str(cfg.raw.get("subcommand", "simulate")), cfg.raw, cfg.seed, cfg.reps,
                           cfg.out, cfg.workers, cfg.preset)
        issues = validate(target)
        for msg in issues:
            print(msg)
        if not issues:
            print("ok")
        return EXIT_CONFIG if any(not m.startswith("warning:") for m in issues) else EXIT_OK
    errors = [m for m in validate(cfg) if not m.startswith("warning:")]
    if errors:
        for msg in errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    rep = COMMANDS[cfg.subcommand](cfg)
    rep.summary()
    print(f"wall time {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_CHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return run(cfg)
    except (ConvolevError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
