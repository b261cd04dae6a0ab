import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from convolev import setval as sv
from convolev.errors import DimensionError, EmptyIntersectionError, ParameterDomainError


def clouds(d):
    return arrays(np.float64, st.tuples(st.integers(1, 7), st.just(d)),
                  elements=st.floats(-10, 10, allow_nan=False, width=32))


def test_hausdorff_points():
    A = sv.SetValue([[0.0, 0.0], [1.0, 0.0]])
    B = sv.SetValue([[0.0, 1.0]])
    assert sv.hausdorff(A, B) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_convex_distance_uses_hull_interior():
    square = sv.SetValue([[0, 0], [1, 0], [1, 1], [0, 1]], convexified=True)
    inner = sv.SetValue([[0.5, 0.5]], convexified=True)
    assert sv.hausdorff(square, inner) == pytest.approx(math.sqrt(0.5))
    seg = sv.SetValue([[0, 0, 0], [2, 0, 0]], convexified=True)
    mid = sv.SetValue([[1, 0, 0]], convexified=True)
    assert sv.hausdorff(seg, mid) == pytest.approx(1.0)


@pytest.mark.parametrize("d", [1, 2, 3])
@given(data=st.data())
@settings(max_examples=30, deadline=None)
def test_hausdorff_metric_axioms(d, data):
    A, B, C = (sv.SetValue(data.draw(clouds(d))) for _ in range(3))
    ab, bc, ac = sv.hausdorff(A, B), sv.hausdorff(B, C), sv.hausdorff(A, C)
    assert ab == pytest.approx(sv.hausdorff(B, A))
    assert sv.hausdorff(A, A) == 0.0
    assert ac <= ab + bc + 1e-9


@pytest.mark.parametrize("d", [1, 2, 3])
@given(data=st.data())
@settings(max_examples=30, deadline=None)
def test_hull_keeps_extremes(d, data):
    P = data.draw(clouds(d))
    H = sv.convex_hull(sv.SetValue(P))
    # every input point lies in the hull and the hull vertices are input points
    assert sv.hausdorff(sv.convex_hull(sv.SetValue(P)), H) <= 1e-9
    assert sv._dist_to_hull(P, H.points).max() <= 1e-7
    assert H.norm() == pytest.approx(np.linalg.norm(P, axis=1).max())


@given(clouds(2), clouds(2))
@settings(max_examples=30, deadline=None)
def test_minkowski_commutes_with_hull(P, Q):
    A, B = sv.SetValue(P), sv.SetValue(Q)
    lhs = sv.convex_hull(sv.minkowski_sum(A, B))
    rhs = sv.minkowski_sum(sv.convex_hull(A), sv.convex_hull(B))
    assert sv.hausdorff(lhs, rhs) <= 1e-9


def test_minkowski_of_intervals():
    S = sv.minkowski_sum(sv.Interval(-1, 2), sv.Interval(0.5, 1))
    assert S.bounds() == (-0.5, 3.0)


def test_scale_by_matrix():
    A = sv.SetValue([[1.0, 0.0]])
    R = sv.scale(np.array([[0.0, -1.0], [1.0, 0.0]]), A)
    assert np.allclose(R.points, [[0.0, 1.0]])
    with pytest.raises(DimensionError):
        sv.scale(np.eye(3), A)


def test_intervals():
    assert sv.intersect(sv.Interval(0, 2), sv.Interval(1, 3)) == sv.Interval(1, 2)
    assert sv.union_hull(sv.Interval(0, 1), sv.Interval(3, 4)) == sv.Interval(0, 4)
    with pytest.raises(EmptyIntersectionError):
        sv.intersect(sv.Interval(0, 1), sv.Interval(2, 3))
    with pytest.raises(ParameterDomainError):
        sv.Interval(1, 0)


def test_extended_value():
    e = sv.ExtendedSetValue(sv.Exploded(((1.0,),)))
    assert e.exploded and e.norm() == math.inf and e.finite is None
    with pytest.raises(ParameterDomainError):
        sv.Exploded(())


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        sv.hausdorff(sv.SetValue([[0.0]]), sv.SetValue([[0.0, 0.0]]))


def test_csv_schemas():
    buf = io.StringIO()
    sv.write_sets_csv(buf, [(0, 0.5, sv.SetValue([[1.0, 2.0]]))])
    assert buf.getvalue().splitlines() == ["set_id,t,x1,x2", "0,0.5,1,2"]
    buf = io.StringIO()
    sv.write_intervals_csv(buf, [(1, 1.0, sv.Interval(-1, 1))])
    assert buf.getvalue().splitlines() == ["set_id,t,lo,hi", "1,1,-1,1"]
