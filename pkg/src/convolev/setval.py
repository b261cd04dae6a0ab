"""Finite representations of closed set values in R^d.

A ``SetValue`` is a finite point cloud, optionally standing for its convex
hull.  Convexified values are stored canonically as hull vertices for
``d <= 3``; in one dimension that is just ``[min, max]``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import cdist

from .errors import DimensionError, EmptyIntersectionError, ParameterDomainError


def _monotone_chain(P: np.ndarray) -> np.ndarray:
    """2-D convex hull vertices in counter-clockwise order, collinear points dropped."""
    pts = np.unique(P, axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _canonical(P: np.ndarray) -> np.ndarray:
    d = P.shape[1]
    if d == 1:
        return np.array([[P.min()], [P.max()]]) if P.min() < P.max() else P[:1].copy()
    if d == 2:
        return _monotone_chain(P)
    if d == 3:
        pts = np.unique(P, axis=0)
        if len(pts) <= 4:
            return pts
        try:
            hull = ConvexHull(pts)
        except QhullError:
            # degenerate (coplanar or collinear) clouds keep all points
            return pts
        return pts[np.sort(hull.vertices)]
    return np.unique(P, axis=0)


@dataclass(frozen=True, eq=False)
class SetValue:
    points: np.ndarray
    convexified: bool = False

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or P.shape[0] == 0:
            raise ParameterDomainError("a set value needs at least one point")
        if not np.all(np.isfinite(P)):
            raise ParameterDomainError("set value points must be finite")
        if self.convexified:
            P = _canonical(P)
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def norm(self) -> float:
        """Hausdorff distance to ``{0}``."""
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def equals(self, other: "SetValue", tol: float = 0.0) -> bool:
        return hausdorff(self, other) <= tol

    def bounds(self) -> tuple[float, float]:
        if self.d != 1:
            raise DimensionError("bounds are only defined for d = 1")
        return float(self.points.min()), float(self.points.max())


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ParameterDomainError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_set(self) -> SetValue:
        return SetValue(np.array([[self.lo], [self.hi]]), convexified=True)

    def norm(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class Exploded:
    """The directed-infinity value ``{inf * n : n in directions}``."""

    directions: tuple

    def __post_init__(self):
        if not self.directions:
            raise ParameterDomainError("an exploded value needs at least one direction")


@dataclass(frozen=True)
class ExtendedSetValue:
    value: Union[SetValue, Exploded]

    @property
    def exploded(self) -> bool:
        return isinstance(self.value, Exploded)

    @property
    def finite(self) -> Optional[SetValue]:
        return None if self.exploded else self.value

    def norm(self) -> float:
        return float("inf") if self.exploded else self.value.norm()


def unit_direction(v) -> tuple:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    return tuple((v / n).tolist())


def _as_set(A) -> SetValue:
    if isinstance(A, Interval):
        return A.to_set()
    return A


def _same_dim(A: SetValue, B: SetValue) -> None:
    if A.d != B.d:
        raise DimensionError(f"dimension mismatch {A.d} vs {B.d}")


def _segment_dist(P: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    L = float(ab @ ab)
    lam = np.zeros(len(P)) if L == 0.0 else np.clip((P - a) @ ab / L, 0.0, 1.0)
    return np.linalg.norm(P - (a + lam[:, None] * ab), axis=1)


def _triangle_dist(P: np.ndarray, a, b, c) -> np.ndarray:
    n = np.cross(b - a, c - a)
    nn = float(n @ n)
    out = np.minimum(np.minimum(_segment_dist(P, a, b), _segment_dist(P, b, c)),
                     _segment_dist(P, c, a))
    if nn == 0.0:
        return out
    h = (P - a) @ n / nn
    Q = P - h[:, None] * n
    # barycentric signs of the projection
    s1 = np.cross(b - a, Q - a) @ n
    s2 = np.cross(c - b, Q - b) @ n
    s3 = np.cross(a - c, Q - c) @ n
    inside = (s1 >= 0) & (s2 >= 0) & (s3 >= 0)
    out[inside] = np.abs(h[inside]) * np.sqrt(nn)
    return out


def _dist_to_hull(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of ``P`` to ``conv(V)`` for ``d <= 3``."""
    d = V.shape[1]
    if len(V) == 1:
        return np.linalg.norm(P - V[0], axis=1)
    if len(V) == 2 and d > 1:
        return _segment_dist(P, V[0], V[1])
    if d == 1:
        lo, hi = V.min(), V.max()
        x = P[:, 0]
        return np.maximum(np.maximum(lo - x, x - hi), 0.0)
    if d == 2:
        ring = np.vstack([V, V[:1]])
        dist = np.min([_segment_dist(P, ring[i], ring[i + 1]) for i in range(len(V))], axis=0)
        if len(V) >= 3:
            # counter-clockwise hull: inside iff left of every edge
            e = ring[1:] - ring[:-1]
            rel = P[:, None, :] - ring[None, :-1, :]
            cr = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
            dist[np.all(cr >= 0, axis=1)] = 0.0
        return dist
    try:
        hull = ConvexHull(V)
    except QhullError:
        hull = None
    if hull is None:
        tris = [(V[i], V[j], V[k]) for i in range(len(V)) for j in range(i + 1, len(V))
                for k in range(j + 1, len(V))]
        return np.min([_triangle_dist(P, *t) for t in tris], axis=0)
    dist = np.min([_triangle_dist(P, *V[s]) for s in hull.simplices], axis=0)
    inside = np.all(P @ hull.equations[:, :-1].T + hull.equations[:, -1] <= 1e-12, axis=1)
    dist[inside] = 0.0
    return dist


def _directed(A: SetValue, B: SetValue) -> float:
    if B.convexified and B.d <= 3:
        return float(_dist_to_hull(A.points, B.points).max())
    return float(cdist(A.points, B.points).min(axis=1).max())


def hausdorff(A, B) -> float:
    """Hausdorff distance.

    A convexified value stands for its hull.  When exactly one argument is
    convexified the other is convexified too, so the sup of the (convex)
    distance function is attained at vertices.
    """
    A, B = _as_set(A), _as_set(B)
    _same_dim(A, B)
    if A.convexified != B.convexified:
        A, B = convex_hull(A), convex_hull(B)
    return max(_directed(A, B), _directed(B, A))


def minkowski_sum(A, B) -> SetValue:
    A, B = _as_set(A), _as_set(B)
    _same_dim(A, B)
    P = (A.points[:, None, :] + B.points[None, :, :]).reshape(-1, A.d)
    return SetValue(P, convexified=A.convexified or B.convexified)


def convex_hull(A) -> SetValue:
    A = _as_set(A)
    return A if A.convexified else SetValue(A.points, convexified=True)


def scale(c, A) -> SetValue:
    """Image of ``A`` under ``x -> c x`` for a scalar or ``d x d`` matrix ``c``."""
    A = _as_set(A)
    c = np.asarray(c, dtype=float)
    if c.ndim == 0:
        P = float(c) * A.points
    else:
        if c.shape != (A.d, A.d):
            raise DimensionError(f"matrix of shape {c.shape} cannot act on d={A.d}")
        P = A.points @ c.T
    return SetValue(P, convexified=A.convexified)


def intersect(A: Interval, B: Interval) -> Interval:
    lo, hi = max(A.lo, B.lo), min(A.hi, B.hi)
    if lo > hi:
        raise EmptyIntersectionError(f"[{A.lo}, {A.hi}] and [{B.lo}, {B.hi}] are disjoint")
    return Interval(lo, hi)


def union_hull(A: Interval, B: Interval) -> Interval:
    return Interval(min(A.lo, B.lo), max(A.hi, B.hi))


def write_sets_csv(fh, items: Iterable[tuple]) -> None:
    """Rows ``set_id,t,x1..xd`` for ``(set_id, t, SetValue)`` items."""
    w = csv.writer(fh, lineterminator="\n")
    header_done = False
    for set_id, t, A in items:
        A = _as_set(A)
        if not header_done:
            w.writerow(["set_id", "t", *[f"x{i + 1}" for i in range(A.d)]])
            header_done = True
        for p in A.points:
            w.writerow([set_id, f"{t:.17g}", *[f"{v:.17g}" for v in p]])


def write_intervals_csv(fh, items: Iterable[tuple]) -> None:
    """Rows ``set_id,t,lo,hi`` for ``(set_id, t, Interval)`` items."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["set_id", "t", "lo", "hi"])
    for set_id, t, I in items:
        w.writerow([set_id, f"{t:.17g}", f"{I.lo:.17g}", f"{I.hi:.17g}"])
