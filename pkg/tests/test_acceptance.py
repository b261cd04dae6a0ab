"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion k] PASS|FAIL`` line with the measured
quantities and runtime, then asserts.  Run ``python3 tests/test_acceptance.py``
to get just the twelve lines.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from convolev import appendix, cli, levy, monotone, svint
from convolev import kernels as K
from convolev.setval import Interval, hausdorff, minkowski_sum
from oracles import brute_force_extremes, sine_cell_integrals, sine_kernel

LINES: dict = {}


def emit(k: int, ok: bool, detail: str, elapsed: float, budget: float) -> bool:
    ok = ok and elapsed < budget
    line = f"[criterion {k:2d}] {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.2f}s < {budget:g}s)"
    LINES[k] = line
    print(line)
    return ok


def c1_kernel_oracles():
    t0 = time.perf_counter()
    worst = 0.0
    for kappa in (0.5, 1.0, 2.0):
        for t in (0.5, 1.0):
            ref = (1 - math.exp(-2 * kappa * t)) / (2 * kappa)
            worst = max(worst, abs(K.l2_norm_sq(K.make_exponential(kappa), t) / ref - 1))
    for beta in (0.6, 0.75, 1.0, 1.5):
        for t in (0.5, 1.0):
            ref = t ** (2 * beta - 1) / ((2 * beta - 1) * math.gamma(beta) ** 2)
            worst = max(worst, abs(K.l2_norm_sq(K.make_riemann_liouville(beta), t) / ref - 1))
    el = time.perf_counter() - t0
    return emit(1, worst <= 1e-6, f"max rel err {worst:.2e} <= 1e-6", el, 1.0)


def c2_ito_isometry():
    t0 = time.perf_counter()
    spec = levy.LevyDriverSpec()
    h = svint.constant_selector(2, 1.0)
    parts, ok = [], True
    for beta in (0.75, 1.5):
        k = K.make_riemann_liouville(beta)
        x = np.array([svint.integral_functional(2, k, h, levy.sample_path(spec, 2 ** 12, 20, r), 0.0, 1.0)[0]
                      for r in range(10_000)])
        dev = (x - x.mean()) ** 2
        var = math.fsum(dev) / (x.size - 1)
        se = np.std(dev, ddof=1) / math.sqrt(x.size)
        ref = K.l2_norm_sq(k, 1.0)
        ok &= abs(var - ref) <= 3 * se
        parts.append(f"beta={beta}: var {var:.4f} vs {ref:.4f} (3SE {3 * se:.4f})")
    el = time.perf_counter() - t0
    return emit(2, ok, "; ".join(parts), el, 30.0)


def c3_aumann_oracle():
    t0 = time.perf_counter()
    I = svint.aumann_interval_integral(sine_kernel(12), -1.0, 2.0, t=1.0)
    lo, hi = brute_force_extremes(sine_cell_integrals(12), -1.0, 2.0)
    d_osc = hausdorff(I, Interval(lo, hi))
    d_const = 0.0
    edges = np.linspace(0.0, 1.0, 13)
    for k in (K.make_exponential(1.0), K.make_riemann_liouville(0.75), K.make_riemann_liouville(1.5)):
        J = svint.aumann_interval_integral(k, -1.0, 2.0, t=1.0)
        lo, hi = brute_force_extremes(K.cell_integrals(k, 1.0, edges), -1.0, 2.0)
        d_const = max(d_const, hausdorff(J, Interval(lo, hi)))
    el = time.perf_counter() - t0
    return emit(3, d_osc <= 1e-3 and d_const <= 1e-12,
                f"sign-changing d_H {d_osc:.2e} <= 1e-3; sign-constant d_H {d_const:.2e} <= 1e-12", el, 10.0)


def _family(q, coefs):
    if q < 3:
        return svint.SelectorFamily(tuple(svint.constant_selector(q, c) for c in coefs))
    return svint.SelectorFamily(tuple(svint.mark_linear_selector(q, c) for c in coefs))


def c4_minkowski():
    t0 = time.perf_counter()
    spec = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(5.0, "normal", 1.0))
    k = K.make_riemann_liouville(0.75)
    rng = np.random.default_rng(4)
    worst = 0.0
    for r in range(100):
        p = levy.sample_path(spec, 256, 44, r)
        t = float(rng.uniform(0.2, 1.0))
        for q in (1, 2, 3, 4):
            F = _family(q, rng.normal(size=3))
            G = _family(q, rng.normal(size=2))
            lhs = svint.sv_integral(q, k, F.minkowski(G), p, 0.0, t).finite
            rhs = minkowski_sum(svint.sv_integral(q, k, F, p, 0.0, t).finite,
                                svint.sv_integral(q, k, G, p, 0.0, t).finite)
            worst = max(worst, hausdorff(lhs, rhs))
    el = time.perf_counter() - t0
    return emit(4, worst <= 1e-10, f"max d_H {worst:.2e} <= 1e-10 over 100 paths, q=1..4", el, 30.0)


def c5_unbounded_growth():
    t0 = time.perf_counter()
    n_values = [2 ** i for i in range(1, 9)]
    rep = svint.unboundedness_experiment(1.5, n_values, r=1.0, reps=20_000, seed=5, eps=0.01)
    mono = rep.metadata["nondecreasing"]
    tstat = rep.metadata["slope_t"]
    el = time.perf_counter() - t0
    est = [r.estimate for r in rep.rows if r.experiment == "unbounded-growth:emax"]
    return emit(5, mono and rep.metadata["slope"] > 0 and tstat > 3,
                f"nondecreasing={mono}; slope {rep.metadata['slope']:.3f} t={tstat:.1f} > 3; "
                f"E max {est[0]:.3f}..{est[-1]:.3f}", el, 300.0)


def c6_boundedness():
    t0 = time.perf_counter()
    spec = levy.LevyDriverSpec(jumps=levy.SymmetricStable(0.5), eps=1e-3)
    fam = svint.SelectorFamily((svint.mark_linear_selector(4, 1.0), svint.mark_linear_selector(4, 2.0)))
    rep = svint.boundedness_bound_check(spec, fam, K.make_exponential(1.0), reps=10_000, seed=6,
                                        n_combinations=1000)
    row = next(r for r in rep.rows if r.experiment == "bounded-check:sup-sampled")
    el = time.perf_counter() - t0
    return emit(6, row.estimate <= row.bound,
                f"sup E|eta|^2 {row.estimate:.4f} <= bound {row.bound:.4f}", el, 120.0)


def c7_explosion():
    t0 = time.perf_counter()
    rep = monotone.explosion_probability_experiment(K.make_riemann_liouville(0.75), 1.0, 1.0,
                                                    reps=10_000, seed=7)
    row = rep.rows[0]
    ok = abs(row.estimate - row.bound) <= 3 * row.stderr
    el = time.perf_counter() - t0
    return emit(7, ok, f"fraction {row.estimate:.4f} vs {row.bound:.4f} (3SE {3 * row.stderr:.4f})", el, 60.0)


def c8_example9():
    t0 = time.perf_counter()
    worst = 0.0
    for beta in (0.6, 1.5):
        b = monotone.SetPathBuilder(Interval(0.0, 0.0), K.make_molchan_golosov(beta), k2=(0.0, 1.0))
        for r in range(100):
            sp = b.build(levy.sample_path(levy.LevyDriverSpec(), 256, 8, r))
            up = monotone.increasing_process(sp)
            I = sp.scalar["brownian_integral"]
            worst = max(worst, np.max(np.abs(up.lo - np.minimum.accumulate(I))),
                        np.max(np.abs(up.hi - np.maximum.accumulate(I))))
    el = time.perf_counter() - t0
    return emit(8, worst <= 1e-12, f"max deviation {worst:.2e} <= 1e-12, beta in {{0.6, 1.5}}", el, 60.0)


def c9_down_bound():
    t0 = time.perf_counter()
    x0 = Interval(-1.0, 1.5)
    spec = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(2.0, "normal", 1.5))
    b = monotone.SetPathBuilder(x0, K.make_riemann_liouville(0.75), k1=Interval(-0.5, 0.5), k2=(0.5, 1.0),
                                k3=Interval(1.0, 1.0), k4=(1.0,), convolute_drift=False)
    bad = 0
    for r in range(1000):
        down, _ = monotone.decreasing_process(b.build(levy.sample_path(spec, 64, 9, r)))
        bad += int(np.any(np.maximum(np.abs(down.lo), np.abs(down.hi)) > x0.norm()))
    el = time.perf_counter() - t0
    return emit(9, bad == 0, f"{bad} of 1000 paths violate d_H(X-down, 0) <= d_H(X0, 0)", el, 60.0)


def c10_covariance():
    t0 = time.perf_counter()
    u = [2.0 ** -k for k in range(3, 11)]
    out, ok = [], True
    for beta, lo, hi in ((1.5, 1.0, math.inf), (0.75, 0.0, 1.0)):
        rep = monotone.covariance_decay_check(K.make_riemann_liouville(beta, T=2.0), 1.0, u)
        slope = next(r.estimate for r in rep.rows if r.experiment == "covariance:exponent")
        r2 = rep.metadata["r2"]
        good = lo < slope < hi and r2 > 0.99
        ok &= good
        out.append(f"beta={beta}: exponent {slope:.4f} in ({lo}, {hi}) R^2 {r2:.5f}")
    el = time.perf_counter() - t0
    return emit(10, ok, "; ".join(out), el, 10.0)


def c11_slepian():
    t0 = time.perf_counter()
    cfg = appendix.SlepianConfig()
    n_values = [2, 3, 4, 8, 16, 32, 64, 128]
    rep = appendix.comparison_report(cfg, n_values)
    a3, a4 = rep.metadata["A3"], rep.metadata["A4"]
    dec = all(y < x for x, y in zip(a4, a4[1:]))
    const = all(v == a3[0] for v in a3)
    n_star = rep.metadata["n_star"]
    el = time.perf_counter() - t0
    return emit(11, dec and const and n_star is not None,
                f"A4 strictly decreasing={dec}; A3 constant={const}; crossover n*={n_star}", el, 5.0)


DETERMINISM_RUNS = [
    ("simulate", ["--reps", "3"]),
    ("unbounded-growth", ["--reps", "200"]),
    ("bounded-check", ["--reps", "200"]),
    ("explosion", ["--reps", "500"]),
    ("covariance", ["--reps", "50"]),
    ("monotone-demo", ["--preset", "example8"]),
    ("slepian", []),
    ("stable-max", ["--reps", "500"]),
]


def c12_determinism(tmp: Path):
    t0 = time.perf_counter()
    mismatched = []
    for sub, args in DETERMINISM_RUNS:
        dirs = []
        for tag, workers in (("a", "1"), ("b", "1"), ("c", "3")):
            out = tmp / f"{sub}-{tag}"
            cli.main([sub, *args, "--seed", "12", "--workers", workers, "--out", str(out)])
            dirs.append(out)
        names = sorted(p.name for p in dirs[0].iterdir())
        for other in dirs[1:]:
            if names != sorted(p.name for p in other.iterdir()) or any(
                    (dirs[0] / n).read_bytes() != (other / n).read_bytes() for n in names):
                mismatched.append(sub)
    el = time.perf_counter() - t0
    return emit(12, not mismatched, f"{len(DETERMINISM_RUNS)} subcommands byte-identical across "
                f"repeat runs and --workers 1/3; mismatched: {mismatched or 'none'}", el, math.inf)


def test_c01_kernel_oracles():
    assert c1_kernel_oracles(), LINES[1]


def test_c02_ito_isometry():
    assert c2_ito_isometry(), LINES[2]


def test_c03_aumann_oracle():
    assert c3_aumann_oracle(), LINES[3]


def test_c04_minkowski_additivity():
    assert c4_minkowski(), LINES[4]


def test_c05_unbounded_growth():
    assert c5_unbounded_growth(), LINES[5]


def test_c06_boundedness():
    assert c6_boundedness(), LINES[6]


def test_c07_explosion_probability():
    assert c7_explosion(), LINES[7]


def test_c08_running_extremes_identity():
    assert c8_example9(), LINES[8]


def test_c09_decreasing_bound():
    assert c9_down_bound(), LINES[9]


def test_c10_covariance_exponent():
    assert c10_covariance(), LINES[10]


def test_c11_slepian_failure():
    assert c11_slepian(), LINES[11]


def test_c12_determinism(tmp_path):
    assert c12_determinism(tmp_path), LINES[12]


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        results = [c1_kernel_oracles(), c2_ito_isometry(), c3_aumann_oracle(), c4_minkowski(),
                   c5_unbounded_growth(), c6_boundedness(), c7_explosion(), c8_example9(),
                   c9_down_bound(), c10_covariance(), c11_slepian(), c12_determinism(Path(d))]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
