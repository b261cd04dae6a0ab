import io
import math

import numpy as np
import pytest

from convolev import levy
from convolev.errors import ParameterDomainError, TruncationTooSmallError
from oracles import stable_mass


def test_large_jump_mass_holtsmark():
    d = levy.stable_levy_density_integrals(1.5, 1.0, 1.0, math.inf)
    assert d.mass == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert d.mass == pytest.approx(stable_mass(1.5, 1.0, 1.0, math.inf), rel=1e-10)


def test_abs_moment_divergent_and_finite():
    assert "abs_moment" in levy.stable_levy_density_integrals(1.5, 1.0, 0.0, 1.0).divergent
    assert levy.stable_levy_density_integrals(0.5, 1.0, 0.0, 1.0).abs_moment == pytest.approx(4.0)


@pytest.mark.parametrize("alpha,eps,ref", [(1.5, 0.01, 0.4), (1.9, 0.1, 20 * 0.1 ** 0.1)])
def test_truncation_error_variance(alpha, eps, ref):
    spec = levy.LevyDriverSpec(jumps=levy.SymmetricStable(alpha), eps=eps)
    assert levy.truncation_error_variance(spec) == pytest.approx(ref, rel=1e-12)


def test_truncation_error_variance_frozen():
    spec = levy.LevyDriverSpec(jumps=levy.SymmetricStable(1.9), eps=0.1)
    assert levy.truncation_error_variance(spec) == pytest.approx(15.886564694485639, rel=1e-12)


def test_small_jump_count_matches_mass():
    spec = levy.LevyDriverSpec(jumps=levy.holtsmark(), eps=0.01)
    counts = np.array([np.count_nonzero(~levy.sample_path(spec, 2, 7, r).jump_large)
                       for r in range(2000)])
    mass = (2 / 1.5) * (0.01 ** -1.5 - 1.0)
    assert abs(counts.mean() - mass) <= 3 * counts.std(ddof=1) / math.sqrt(counts.size)


def test_large_jumps_have_unit_norm_or_more():
    spec = levy.LevyDriverSpec(jumps=levy.holtsmark(), eps=0.05)
    p = levy.sample_path(spec, 8, 1, 0)
    norms = np.abs(p.jump_marks[:, 0])
    assert np.all(norms[p.jump_large] >= 1.0)
    assert np.all((norms[~p.jump_large] >= 0.05) & (norms[~p.jump_large] < 1.0))
    assert np.all(np.diff(p.jump_times) >= 0)


def test_brownian_variance():
    spec = levy.LevyDriverSpec(T=2.0)
    W = np.array([levy.sample_path(spec, 16, 3, r).brownian()[-1, 0] for r in range(4000)])
    assert W.var() == pytest.approx(2.0, rel=0.1)


def test_streams_are_reproducible_and_distinct():
    spec = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(3.0))
    a, b, c = (levy.sample_path(spec, 32, 11, s) for s in (0, 0, 1))
    assert np.array_equal(a.dW, b.dW) and np.array_equal(a.jump_times, b.jump_times)
    assert not np.array_equal(a.dW, c.dW)


def test_violations():
    bad = levy.LevyDriverSpec(jumps=levy.SymmetricStable(1.5, skew=0.3))
    assert "asymmetric infinite-variation small-jump measure is not supported" in bad.violations()
    assert levy.LevyDriverSpec(jumps=levy.SymmetricStable(0.5, skew=0.3)).violations() == []
    with pytest.raises(ParameterDomainError):
        levy.LevyDriverSpec(eps=2.0).validate()


def test_truncation_guard():
    spec = levy.LevyDriverSpec(jumps=levy.SymmetricStable(1.9), eps=1e-6)
    with pytest.raises(TruncationTooSmallError):
        levy.sample_path(spec, 2, 0)


def test_compound_poisson_class_intensity():
    spec = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(2.0, "normal", 1.0))
    large, small = spec.class_intensity()
    assert large == pytest.approx(2.0 * 0.31731050786291415, rel=1e-8)
    assert large + small == pytest.approx(2.0)


def test_driver_from_mapping():
    spec = levy.driver_from_mapping({"alpha": 0.5, "eps": 0.01, "mu": 0.1}, T=2.0)
    assert isinstance(spec.jumps, levy.SymmetricStable) and spec.T == 2.0
    assert spec.drift_vector[0] == 0.1


def test_csv_schemas():
    spec = levy.LevyDriverSpec(jumps=levy.CompoundPoisson(5.0))
    p = levy.sample_path(spec, 4, 0)
    buf = io.StringIO()
    levy.write_increments_csv(p, buf)
    assert buf.getvalue().splitlines()[0] == "time,component,value"
    assert len(buf.getvalue().splitlines()) == 5
    buf = io.StringIO()
    levy.write_jumps_csv(p, buf)
    assert buf.getvalue().splitlines()[0] == "time,z1,class"
