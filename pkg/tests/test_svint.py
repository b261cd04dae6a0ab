import math

import numpy as np
import pytest

from convolev import kernels as K
from convolev import levy, svint
from convolev.errors import ParameterDomainError, PreconditionError, WeightSumError
from convolev.setval import Exploded, hausdorff, minkowski_sum
from oracles import brute_force_extremes, sine_cell_integrals, sine_kernel

RL = K.make_riemann_liouville(0.75)
CP = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(4.0, "normal", 1.0))


def test_q1_exponential_closed_form():
    k = K.make_exponential(2.0)
    h = svint.constant_selector(1, 1.0)
    p = levy.sample_path(levy.LevyDriverSpec(), 8, 0)
    assert svint.integral_functional(1, k, h, p, 0.0, 1.0)[0] == pytest.approx((1 - math.exp(-2)) / 2, abs=1e-8)


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_linearity(q):
    p = levy.sample_path(CP, 64, 5, 0)
    if q in (1, 2):
        a, b = svint.constant_selector(q, 1.0), svint.function_selector(q, np.sin)
    else:
        a, b = svint.mark_linear_selector(q, 1.0), svint.mark_linear_selector(q, np.cos)
    lhs = svint.integral_functional(q, RL, 2.0 * a + b, p, 0.0, 0.9)
    rhs = 2.0 * svint.integral_functional(q, RL, a, p, 0.0, 0.9) + svint.integral_functional(q, RL, b, p, 0.0, 0.9)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)


def test_q2_isometry_small():
    k = K.make_riemann_liouville(1.5)
    h = svint.constant_selector(2, 1.0)
    spec = levy.LevyDriverSpec()
    x = np.array([svint.integral_functional(2, k, h, levy.sample_path(spec, 256, 1, r), 0.0, 1.0)[0]
                  for r in range(3000)])
    se = x.var(ddof=1) * math.sqrt(2 / (x.size - 1))
    assert abs(x.var(ddof=1) - K.l2_norm_sq(k, 1.0)) <= 3 * se


def test_explosion_at_jump_time():
    p = levy.sample_path(CP, 8, 3, 0)
    s = float(p.jump_times[0])
    big = bool(p.jump_large[0])
    q = 3 if big else 4
    v = svint.integral_functional(q, RL, svint.mark_linear_selector(q, 1.0), p, 0.0, s)
    assert isinstance(v, Exploded)
    assert v.directions == ((math.copysign(1.0, p.jump_marks[0, 0]),),)
    finite = svint.integral_functional(q, K.make_riemann_liouville(1.5),
                                       svint.mark_linear_selector(q, 1.0), p, 0.0, s)
    assert np.all(np.isfinite(finite))


def test_q4_preconditions():
    p = levy.sample_path(CP, 8, 0)
    with pytest.raises(PreconditionError):
        svint.integral_functional(4, RL, svint.constant_selector(4, 1.0), p, 0.0, 1.0)
    asym = levy.LevyDriverSpec(jumps=levy.SymmetricStable(0.5, skew=0.5), eps=0.1)
    pa = levy.sample_path(asym, 8, 0)
    with pytest.raises(PreconditionError):
        svint.integral_functional(4, RL, svint.mark_linear_selector(4, 1.0), pa, 0.0, 1.0)


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_minkowski_additivity(q):
    mk = (lambda c: svint.constant_selector(q, c)) if q < 3 else (lambda c: svint.mark_linear_selector(q, c))
    F = svint.SelectorFamily((mk(1.0), mk(-0.5)))
    G = svint.SelectorFamily((mk(2.0), mk(0.25), mk(3.0)))
    p = levy.sample_path(CP, 128, 9, 0)
    lhs = svint.sv_integral(q, RL, F.minkowski(G), p, 0.0, 0.8).finite
    rhs = minkowski_sum(svint.sv_integral(q, RL, F, p, 0.0, 0.8).finite,
                        svint.sv_integral(q, RL, G, p, 0.0, 0.8).finite)
    assert hausdorff(lhs, rhs) <= 1e-10


def test_convex_combination_stays_in_hull():
    F = svint.SelectorFamily((svint.constant_selector(2, 1.0), svint.constant_selector(2, 3.0)))
    H = F.convex_combinations(np.array([[0.25, 0.75]]))
    p = levy.sample_path(levy.LevyDriverSpec(), 64, 2)
    vals = svint.sv_integral(2, RL, H, p, 0.0, 1.0).finite.points[:, 0]
    assert min(vals[:2]) - 1e-12 <= vals[2] <= max(vals[:2]) + 1e-12
    with pytest.raises(WeightSumError):
        F.convex_combinations(np.array([[0.5, 0.6]]))


def test_aumann_sign_constant_exact():
    k = K.make_exponential(1.0)
    I = svint.aumann_interval_integral(k, -0.5, 2.0, t=1.0)
    G = K.cell_integrals(k, 1.0, np.linspace(0, 1, 13))
    lo, hi = brute_force_extremes(G, -0.5, 2.0)
    assert abs(I.lo - lo) <= 1e-12 and abs(I.hi - hi) <= 1e-12


def test_aumann_sign_changing_brute_force():
    I = svint.aumann_interval_integral(sine_kernel(12), -1.0, 2.0, t=1.0)
    lo, hi = brute_force_extremes(sine_cell_integrals(12), -1.0, 2.0)
    assert max(abs(I.lo - lo), abs(I.hi - hi)) <= 1e-3


def test_decomposable_and_maximizing_combinations():
    V = np.array([[1.0, -3.0, 2.0], [-2.0, 1.0, 2.0]])
    best, J = svint.maximizing_combination(V)
    assert np.array_equal(J, [1, 0, 0]) and np.array_equal(best, [-2.0, -3.0, 2.0])
    rng = levy.make_rng(0)
    out = svint.decomposable_combination(V, [0.0, 1.0], rng)
    assert np.array_equal(out, V[1])
    with pytest.raises(WeightSumError):
        svint.decomposable_combination(V, [0.2, 0.2], rng)


def test_walsh_certificate():
    cert = svint.certify_separation(svint.WalshFamily(), 256, 0.0, 1.0)
    assert cert.eps == pytest.approx(0.5)


def test_constant_family_gap_shrinks():
    e8 = svint.certify_separation(svint.ConstantFamily(), 8, 0.0, 1.0).eps
    e64 = svint.certify_separation(svint.ConstantFamily(), 64, 0.0, 1.0).eps
    assert e64 < e8


def test_unboundedness_small_run():
    rep = svint.unboundedness_experiment(1.5, [2, 8, 32], reps=400, seed=1)
    est = [r.estimate for r in rep.rows if r.experiment == "unbounded-growth:emax"]
    assert est[0] < est[-1]


def test_boundedness_isometry_compound_poisson():
    spec = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(3.0, "uniform", 1.0))
    fam = svint.SelectorFamily((svint.mark_linear_selector(4, 1.0),))
    rep = svint.boundedness_bound_check(spec, fam, K.make_exponential(1.0), reps=4000, seed=3,
                                        n_combinations=10)
    assert rep.passed, rep.to_csv()


def test_boundedness_rejects_non_multiplier():
    spec = levy.LevyDriverSpec(jumps=levy.SymmetricStable(0.5))
    fam = svint.SelectorFamily((svint.mark_linear_selector(4, np.cos),))
    with pytest.raises(ParameterDomainError):
        svint.boundedness_bound_check(spec, fam, K.make_exponential(1.0), reps=2)


def test_stable_max_n1_self_consistent():
    e1, s1 = svint.stable_vector_maximum(1.5, 1, reps=2000, seed=0)
    e2, s2 = svint.stable_vector_maximum(1.5, 1, reps=8000, seed=1)
    assert abs(e1 - e2) <= 3 * math.hypot(s1, s2)
    assert s2 < s1
