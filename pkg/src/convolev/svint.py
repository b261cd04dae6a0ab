"""Convoluted integral functionals on finite selector families.

``integral_functional`` evaluates one of the four single-valued integrals

* ``q = 1``: ``int g(t, s) h(s-) ds``
* ``q = 2``: ``int g(t, s) h(s-) dW_s``
* ``q = 3``: sum of ``g(t, s_k) h(s_k-, z_k)`` over jumps with ``|z_k| >= 1``
* ``q = 4``: the same over truncated small jumps (compensator zero by symmetry)

on a sampled path.  Set values are finite families of such integrals; the
decomposable hull is reached through finite combinations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import kernels as kern
from . import quadrature
from .errors import (DimensionError, DomainError, ParameterDomainError, PreconditionError,
                     WeightSumError)
from .kernels import Kernel
from .levy import (CompoundPoisson, LevyDriverSpec, PathRealization, SymmetricStable, make_rng,
                   sample_path, stable_levy_density_integrals, truncation_error_variance)
from .parallel import map_reps
from .report import ExperimentReport, mean_stderr
from .setval import Exploded, ExtendedSetValue, SetValue, unit_direction

# ---------------------------------------------------------------------------
# Selectors
# ---------------------------------------------------------------------------


def _const_q12(s, value):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.broadcast_to(value, (s.size, *value.shape))


def _const_q34(s, z, value):
    z = np.atleast_2d(z)
    return np.broadcast_to(value, (z.shape[0], value.shape[0]))


def _mark_linear(s, z, b):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    B = np.asarray(b(np.atleast_1d(s)) if callable(b) else b, dtype=float)
    if B.ndim == 0:
        return B * z
    if B.ndim == 1:
        # one scalar multiplier per jump
        return B[:, None] * z
    if B.ndim == 2:
        return z @ B.T
    return np.einsum("nij,nj->ni", B, z)


def _sum_f(*args, fs, coefs):
    out = coefs[0] * np.asarray(fs[0](*args), dtype=float)
    for c, f in zip(coefs[1:], fs[1:]):
        out = out + c * np.asarray(f(*args), dtype=float)
    return out


@dataclass(frozen=True, eq=False)
class Selector:
    """A deterministic integrand for one of the four integral classes.

    ``f`` is vectorised: for ``q`` in {1, 2} it maps times ``(n,)`` to
    ``(n, d)`` or ``(n, d, m)``; for ``q`` in {3, 4} it maps times ``(n,)`` and
    marks ``(n, d)`` to ``(n, d)``.
    """

    q: int
    f: Callable
    d: int = 1
    m: int = 1
    bound: float = math.inf
    odd_in_mark: bool = True
    label: str = ""
    multiplier: Optional[float] = None

    def __post_init__(self):
        if self.q not in (1, 2, 3, 4):
            raise ParameterDomainError(f"selector class q must be 1..4, got {self.q}")

    def __call__(self, s, z=None) -> np.ndarray:
        """Values in canonical shape: ``(n, d, m)`` for q = 2, ``(n, d)`` otherwise."""
        n = np.size(s)
        out = np.asarray(self.f(s) if self.q in (1, 2) else self.f(s, z), dtype=float)
        shape = (n, self.d, self.m) if self.q == 2 else (n, self.d)
        return np.broadcast_to(out.reshape(n, -1), (n, int(np.prod(shape[1:])))).reshape(shape)

    def _combine(self, other: "Selector", a: float, b: float) -> "Selector":
        if (self.q, self.d, self.m) != (other.q, other.d, other.m):
            raise DimensionError("selectors must share class and dimensions")
        mult = None
        if self.multiplier is not None and other.multiplier is not None:
            mult = a * self.multiplier + b * other.multiplier
        return Selector(self.q, partial(_sum_f, fs=(self, other), coefs=(a, b)), self.d, self.m,
                        abs(a) * self.bound + abs(b) * other.bound,
                        self.odd_in_mark and other.odd_in_mark,
                        f"({self.label}+{other.label})", mult)

    def __add__(self, other: "Selector") -> "Selector":
        return self._combine(other, 1.0, 1.0)

    def __rmul__(self, a: float) -> "Selector":
        a = float(a)
        mult = None if self.multiplier is None else a * self.multiplier
        return Selector(self.q, partial(_sum_f, fs=(self,), coefs=(a,)), self.d, self.m,
                        abs(a) * self.bound, self.odd_in_mark, f"{a:g}*{self.label}", mult)

    def check_bound(self, samples: int = 64, T: float = 1.0, seed: int = 0) -> bool:
        """Check ``|f| <= bound`` on sampled times (and unit-ball marks for q = 3, 4)."""
        rng = make_rng(seed, 0)
        s = T * rng.random(samples)
        if self.q in (1, 2):
            vals = self(s).reshape(samples, -1)
        else:
            z = rng.uniform(-1.0, 1.0, (samples, self.d))
            vals = self(s, z) / np.maximum(np.linalg.norm(z, axis=1), 1e-300)[:, None]
        return bool(np.all(np.linalg.norm(vals, axis=1) <= self.bound * (1 + 1e-12)))


def constant_selector(q: int, value, label: str = "") -> Selector:
    """``h(s) = value`` (q = 1, 2) or ``h(s, z) = value`` (q = 3, 4)."""
    v = np.array(value, dtype=float, ndmin=1 if q != 2 else 2)
    d = v.shape[0]
    m = v.shape[1] if q == 2 else 1
    fn = partial(_const_q12 if q in (1, 2) else _const_q34, value=v)
    return Selector(q, fn, d, m, float(np.linalg.norm(v)), odd_in_mark=not np.any(v) or q < 3,
                    label=label or f"const({value})")


def mark_linear_selector(q: int, b, d: int = 1, label: str = "") -> Selector:
    """``h(s, z) = b(s) z`` with ``b`` a scalar, a ``d x d`` matrix, or a callable of ``s``."""
    if q not in (3, 4):
        raise ParameterDomainError("mark-linear selectors belong to the jump classes q = 3, 4")
    mult = float(b) if np.ndim(b) == 0 and not callable(b) else None
    bound = abs(mult) if mult is not None else (math.inf if callable(b) else float(np.linalg.norm(b, 2)))
    return Selector(q, partial(_mark_linear, b=b), d, 1, bound, True,
                    label or (f"{mult:g}*z" if mult is not None else "b(s)z"), mult)


def function_selector(q: int, fn: Callable, d: int = 1, m: int = 1, bound: float = math.inf,
                      odd_in_mark: bool = True, label: str = "") -> Selector:
    return Selector(q, fn, d, m, bound, odd_in_mark, label or getattr(fn, "__name__", "f"))


@dataclass(frozen=True)
class SelectorFamily:
    selectors: tuple
    label: str = ""

    def __post_init__(self):
        sel = tuple(self.selectors)
        if not sel:
            raise ParameterDomainError("selector family must be nonempty")
        if len({(h.q, h.d, h.m) for h in sel}) != 1:
            raise ParameterDomainError("selector family must be homogeneous in class and shape")
        object.__setattr__(self, "selectors", sel)

    @property
    def q(self) -> int:
        return self.selectors[0].q

    def __len__(self) -> int:
        return len(self.selectors)

    def __iter__(self):
        return iter(self.selectors)

    def minkowski(self, other: "SelectorFamily") -> "SelectorFamily":
        """The family ``{h + k : h in self, k in other}`` in row-major order."""
        return SelectorFamily(tuple(h + k for h in self for k in other),
                              f"{self.label}+{other.label}")

    def convex_combinations(self, weights: np.ndarray) -> "SelectorFamily":
        """Append the convex combinations given by the rows of ``weights``."""
        extra = []
        for w in np.atleast_2d(weights):
            if abs(math.fsum(w) - 1.0) > 1e-12 or np.any(w < 0):
                raise WeightSumError("convex weights must be nonnegative and sum to 1")
            acc = float(w[0]) * self.selectors[0]
            for c, h in zip(w[1:], self.selectors[1:]):
                acc = acc + float(c) * h
            extra.append(acc)
        return SelectorFamily(self.selectors + tuple(extra), f"co({self.label})")


# ---------------------------------------------------------------------------
# Integral functionals
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8192)
def _brownian_weights(k: Kernel, T: float, M: int, t0: float, t: float):
    """Left points, cell indices and ``int g(t, u) du`` over grid cells clipped to ``[t0, t]``."""
    grid = np.linspace(0.0, T, M + 1)
    inner = grid[(grid > t0) & (grid < t)]
    edges = np.concatenate([[t0], inner, [t]])
    left = edges[:-1]
    idx = np.minimum(np.searchsorted(grid, left, side="right") - 1, M - 1)
    G = kern.cell_integrals(k, t, edges)
    return left, idx, G


def _check_times(k: Kernel, path: PathRealization, t0: float, t: float) -> None:
    if not 0.0 <= t0 < t:
        raise DomainError(f"need 0 <= t0 < t, got t0={t0}, t={t}")
    if t > min(k.T, path.spec.T) * (1 + 1e-12):
        raise DomainError(f"t={t} beyond the kernel or path horizon")


def integral_functional(q: int, kernel: Kernel, h: Selector, path: PathRealization,
                        t0: float, t: float) -> Union[np.ndarray, Exploded]:
    """Single-valued convoluted integral of class ``q`` for selector ``h``.

    Returns a ``d``-vector, or ``Exploded`` when a singular kernel meets a jump
    at exactly ``s = t`` with a nonzero integrand.
    """
    if h.q != q:
        raise ParameterDomainError(f"selector of class {h.q} used for q={q}")
    d = path.spec.d
    if h.d != d or (q == 2 and h.m != path.spec.m):
        raise DimensionError(f"selector shape (d={h.d}, m={h.m}) does not match the path "
                             f"(d={d}, m={path.spec.m})")
    _check_times(kernel, path, t0, t)
    if q == 1:
        s, w = kern.weighted_rule(kernel, float(t), float(t0), float(t))
        return w @ h(s).reshape(s.size, d)
    if q == 2:
        left, idx, G = _brownian_weights(kernel, path.spec.T, path.M, float(t0), float(t))
        H = h(left).reshape(left.size, d, h.m)
        inc = path.dW[idx] / path.dt
        return np.einsum("n,nij,nj->i", G, H, inc)
    if q == 4:
        if not path.spec.jumps.symmetric:
            raise PreconditionError("q=4 requires a symmetric small-jump measure")
        if not h.odd_in_mark:
            raise PreconditionError("q=4 selectors must be odd in the mark; the compensator of a "
                                    "non-odd integrand is not represented")
    times, marks = path.jumps_in(t0, t, large=(q == 3))
    if times.size == 0:
        return np.zeros(d)
    H = h(times, marks).reshape(times.size, d)
    at_t = times >= t
    if kernel.singular and at_t.any():
        hits = H[at_t]
        nz = np.linalg.norm(hits, axis=1) > 0
        if nz.any():
            return Exploded(tuple(sorted({unit_direction(v) for v in hits[nz]})))
    g = np.empty(times.size)
    g[~at_t] = kernel.func(t, times[~at_t])
    if at_t.any():
        g[at_t] = 0.0 if kernel.singular else kernel.diagonal_limit(t)
    return g @ H


def sv_integral(q: int, kernel: Kernel, family: SelectorFamily, path: PathRealization,
                t0: float, t: float) -> ExtendedSetValue:
    """Finite set value ``{I(h) : h in family}``; exploded if any member explodes."""
    vals = [integral_functional(q, kernel, h, path, t0, t) for h in family]
    dirs = sorted({u for v in vals if isinstance(v, Exploded) for u in v.directions})
    if dirs:
        return ExtendedSetValue(Exploded(tuple(dirs)))
    return ExtendedSetValue(SetValue(np.array(vals)))


def _signed_parts(kernel: Kernel, t0: float, t: float) -> tuple[float, float]:
    """``(int g_+, int g_-)`` over ``[t0, t]`` with ``g_- = min(g, 0)``."""
    if kernel.nonnegative:
        if kernel.primitive is not None:
            P = float(kern.cell_integrals(kernel, t, np.array([t0, t]))[0])
        else:
            P = float(np.sum(kern.weighted_rule(kernel, t, t0, t)[1]))
        return P, 0.0
    gam = kernel.endpoint_exponent
    tt = np.asarray(t, dtype=float)

    def pos(x):
        return max(float(kernel.lagfunc(tt, np.asarray(x))), 0.0)

    def neg(x):
        return min(float(kernel.lagfunc(tt, np.asarray(x))), 0.0)

    P = quadrature.integrate(pos, 0.0, t - t0, left_exponent=gam)
    N = quadrature.integrate(neg, 0.0, t - t0, left_exponent=gam)
    return P, N


def aumann_interval_integral(kernel: Kernel, lo: float, hi: float,
                             path: Optional[PathRealization] = None,
                             t0: float = 0.0, t: Optional[float] = None):
    """Decomposable-hull integral of the interval integrand ``[lo, hi]``.

    Selectors switch between the extremes with the sign of ``g``, giving
    ``[lo P + hi N, hi P + lo N]`` with ``P = int g_+`` and ``N = int min(g, 0)``.
    """
    from .setval import Interval

    if lo > hi:
        raise ParameterDomainError(f"need lo <= hi, got [{lo}, {hi}]")
    t = kernel.T if t is None else float(t)
    if path is not None:
        _check_times(kernel, path, t0, t)
    P, N = _signed_parts(kernel, float(t0), t)
    a, b = lo * P + hi * N, hi * P + lo * N
    return Interval(min(a, b), max(a, b))


# ---------------------------------------------------------------------------
# Decomposable combinations
# ---------------------------------------------------------------------------


def _check_weights(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
        raise WeightSumError(f"partition weights must be nonnegative and sum to 1, got {math.fsum(w)}")
    return w


def decomposable_combination(values, weights, rng: np.random.Generator):
    """Sample the partition index ``J ~ weights`` and return ``values[J]``.

    ``values`` may carry trailing rep axes, in which case one index is drawn
    per rep: shape ``(n, reps, ...)`` maps to ``(reps, ...)``.
    """
    w = _check_weights(weights)
    V = np.asarray(values, dtype=float)
    if V.shape[0] != w.size:
        raise DimensionError("one weight per value required")
    if V.ndim <= 2:
        return V[int(rng.choice(w.size, p=w))]
    J = rng.choice(w.size, size=V.shape[1], p=w)
    return V[J, np.arange(V.shape[1])]


def maximizing_combination(values) -> tuple[np.ndarray, np.ndarray]:
    """Per-rep value of largest norm; ties go to the lowest index.

    ``values`` has shape ``(n, reps)`` or ``(n, reps, d)``; returns the chosen
    values and the index array.
    """
    V = np.asarray(values, dtype=float)
    norms = np.abs(V) if V.ndim == 2 else np.linalg.norm(V, axis=-1)
    J = np.argmax(norms, axis=0)
    return V[J, np.arange(V.shape[1])], J


# ---------------------------------------------------------------------------
# b-families and separation certificates
# ---------------------------------------------------------------------------


class BFamily:
    """Scalar coefficient functions ``b_1, ..., b_n`` on ``[t0, t]``."""

    label = "b"

    def values(self, s: np.ndarray, n: int, t0: float, t: float) -> np.ndarray:
        """Array of shape ``(n, len(s))``."""
        raise NotImplementedError

    def breakpoints(self, n: int, t0: float, t: float) -> np.ndarray:
        return np.array([t0, t], dtype=float)


class WalshFamily(BFamily):
    """``b_j = 1 + amplitude * w_{j-1}`` with Walsh functions in Paley order.

    Distinct Walsh functions disagree on exactly half of ``[t0, t]``, so every
    pair is separated by ``amplitude**r (t - t0)`` in the ``r``-th power
    integral, uniformly in ``n``.
    """

    label = "walsh"

    def __init__(self, amplitude: float = 0.5):
        if not 0.0 < amplitude < 1.0:
            raise ParameterDomainError("Walsh amplitude must lie in (0, 1) to keep b_j nonzero")
        self.amplitude = float(amplitude)

    @staticmethod
    def levels(n: int) -> int:
        return max(0, int(math.ceil(math.log2(max(n, 1)))))

    def breakpoints(self, n: int, t0: float, t: float) -> np.ndarray:
        return np.linspace(t0, t, 2 ** self.levels(n) + 1)

    def values(self, s, n, t0, t):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        L = self.levels(n)
        cell = np.clip(np.floor((s - t0) / (t - t0) * 2 ** L).astype(np.int64), 0, 2 ** L - 1)
        j = np.arange(n, dtype=np.int64)
        # Paley order: w_j(u) = (-1)^{sum_k bit_k(j) * digit_{k+1}(u)}
        parity = np.zeros((n, s.size), dtype=np.int64)
        for k in range(L):
            bit = (j >> k) & 1
            digit = (cell >> (L - 1 - k)) & 1
            parity ^= bit[:, None] & digit[None, :]
        return 1.0 + self.amplitude * (1 - 2 * parity)


class ConstantFamily(BFamily):
    """``b_j = 1 + j / (n + 1)``; pairwise gaps shrink with ``n``."""

    label = "constant"

    def values(self, s, n, t0, t):
        s = np.atleast_1d(s)
        return np.repeat((1.0 + np.arange(1, n + 1) / (n + 1.0))[:, None], s.size, axis=1)


class HarmonicFamily(BFamily):
    """``b_j = 1 + 1/j``; values accumulate at 1."""

    label = "harmonic"

    def values(self, s, n, t0, t):
        s = np.atleast_1d(s)
        return np.repeat((1.0 + 1.0 / np.arange(1, n + 1))[:, None], s.size, axis=1)


class ArithmeticFamily(BFamily):
    """``b_j = 1 + j * delta``; fixed gap ``delta``."""

    label = "arithmetic"

    def __init__(self, delta: float = 0.1):
        if delta <= 0:
            raise ParameterDomainError("delta must be > 0")
        self.delta = float(delta)

    def values(self, s, n, t0, t):
        s = np.atleast_1d(s)
        return np.repeat((1.0 + self.delta * np.arange(1, n + 1))[:, None], s.size, axis=1)


B_FAMILIES = {"walsh": WalshFamily, "constant": ConstantFamily, "harmonic": HarmonicFamily,
              "arithmetic": ArithmeticFamily}


def make_b_family(name: str, **kw) -> BFamily:
    try:
        return B_FAMILIES[name](**kw)
    except KeyError:
        raise ParameterDomainError(f"unknown b-family {name!r}; choose from {sorted(B_FAMILIES)}")


def _panel_rule(edges: np.ndarray, nodes: int = 16):
    x, w = quadrature.legendre_rule(nodes)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    s = (0.5 * (lo + hi)[:, None] + half[:, None] * x[None, :]).ravel()
    return s, (half[:, None] * w[None, :]).ravel()


@dataclass(frozen=True)
class SeparationCertificate:
    r: float
    eps: float
    i_star: int = 1
    n: int = 0
    argmin_pair: tuple = field(default=(0, 0))


def certify_separation(family: BFamily, n: int, t0: float, t: float, r: float = 1.0,
                       tol: float = 1e-12) -> SeparationCertificate:
    """Quadrature check of ``inf_{j<j'} int |b_j - b_j'|**r ds >= eps > 0``.

    Composite Gauss--Legendre on the family breakpoints makes the value exact
    for piecewise-constant families.
    """
    if not 1.0 <= r < 2.0:
        raise ParameterDomainError(f"r must lie in [1, 2), got {r}")
    if n < 2:
        return SeparationCertificate(r, math.inf, 1, n)
    s, w = _panel_rule(family.breakpoints(n, t0, t))
    B = family.values(s, n, t0, t)
    if np.any(B == 0):
        raise PreconditionError("b-family values must be nonzero")
    best, pair = math.inf, (0, 0)
    for j in range(n - 1):
        vals = np.abs(B[j + 1:] - B[j]) ** r @ w
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, pair = float(vals[k]), (j + 1, j + 2 + k)
    if not best > tol:
        raise PreconditionError(f"separation fails: pair b_{pair[0]}, b_{pair[1]} integrates to {best:.3g}")
    return SeparationCertificate(r, best, 1, n, pair)


# ---------------------------------------------------------------------------
# Unboundedness experiment
# ---------------------------------------------------------------------------


def _unbounded_rep(rep, *, spec, kernel, B, edges, t0, t, n_values, seed):
    path = sample_path(spec, 2, seed, rep)
    times, marks = path.jumps_in(t0, t)
    inside = times < t
    v = kernel.func(t, times[inside]) * marks[inside, 0]
    cell = np.clip(np.searchsorted(edges, times[inside], side="right") - 1, 0, B.shape[1] - 1)
    V = np.bincount(cell, weights=v, minlength=B.shape[1])
    running = np.maximum.accumulate(np.abs(B @ V))
    return running[np.asarray(n_values) - 1]


def unboundedness_experiment(alpha: float, n_values: Sequence[int], family: Optional[BFamily] = None,
                             kernel: Optional[Kernel] = None, t: float = 1.0, reps: int = 1000,
                             seed: int = 0, t0: float = 0.0, C: float = 1.0, eps: float = 0.01,
                             r: float = 1.0, workers: int = 1) -> ExperimentReport:
    """Monte Carlo growth of ``E max_{j<=n} |Y_j|`` for ``Y_j = int g b_j z dN``.

    All ``Y_j`` share one stable path per rep, integrating large jumps and the
    ``eps``-truncated small jumps.  Reports per-``n`` estimates, a
    nondecreasing check on paired differences, and the OLS slope against
    ``log(n)**(r (alpha - 1) / alpha)``.
    """
    if not 1.0 < alpha < 2.0:
        raise ParameterDomainError(f"alpha must lie in (1, 2), got {alpha}")
    n_values = sorted(int(n) for n in n_values)
    if n_values[0] < 1:
        raise ParameterDomainError("n values must be >= 1")
    family = family or WalshFamily()
    kernel = kernel or kern.make_riemann_liouville(2.0, t)
    nmax = n_values[-1]
    cert = certify_separation(family, nmax, t0, t, r)
    edges = family.breakpoints(nmax, t0, t)
    mids = 0.5 * (edges[:-1] + edges[1:])
    B = family.values(mids, nmax, t0, t)
    spec = LevyDriverSpec(jumps=SymmetricStable(alpha, C), eps=eps, T=t)
    fn = partial(_unbounded_rep, spec=spec, kernel=kernel, B=B, edges=edges, t0=t0, t=t,
                 n_values=tuple(n_values), seed=seed)
    X = np.asarray(map_reps(fn, reps, workers))
    est, se = mean_stderr(X)
    rep = ExperimentReport("unbounded-growth", metadata={
        "seed": seed, "reps": reps, "alpha": alpha, "eps": eps, "C": C, "r": r,
        "family": family.label, "kernel": kernel.label, "t0": t0, "t": t,
        "certificate_eps": cert.eps, "truncation_error_variance": truncation_error_variance(spec)})
    claim = "E max_j |Y_j| estimate"
    for n, e, s in zip(n_values, est, se):
        rep.add("unbounded-growth:emax", n, e, s, claim=claim)
    ok_mono = True
    for k in range(1, len(n_values)):
        _, sd = mean_stderr(X[:, k] - X[:, k - 1])
        good = est[k] >= est[k - 1] - 3.0 * sd
        ok_mono &= bool(good)
        rep.add("unbounded-growth:nondecreasing", n_values[k], est[k] - est[k - 1], sd, 0.0,
                "pass" if good else "fail",
                claim="E max over a superset is not smaller (within 3 SE of the paired difference)")
    expo = r * (alpha - 1.0) / alpha
    x = np.log(np.asarray(n_values, dtype=float)) ** expo
    fit = stats.linregress(x, est)
    tstat = fit.slope / fit.stderr if fit.stderr > 0 else math.inf
    rep.add("unbounded-growth:slope", "all", fit.slope, fit.stderr, 0.0,
            "pass" if fit.slope > 0 and tstat > 3.0 else "fail",
            claim=f"OLS slope of E max against log(n)^{expo:.4g} is positive with t > 3")
    rep.metadata.update(slope=fit.slope, slope_t=tstat, intercept=fit.intercept,
                        nondecreasing=ok_mono)
    return rep


# ---------------------------------------------------------------------------
# Boundedness bound check
# ---------------------------------------------------------------------------


def _bounded_rep(rep, *, spec, kernel, family, t0, t, seed):
    path = sample_path(spec, 2, seed, rep)
    return np.array([integral_functional(4, kernel, h, path, t0, t) for h in family])


def small_jump_measure(spec: LevyDriverSpec) -> dict:
    """``V0 = nu(0<|z|<1)``, ``V1 = int |z| nu`` and ``V2 = int |z|^2 nu`` over small jumps.

    Stable measures are integrated over ``eps <= |z| < 1`` (the simulated
    range) and, separately, over ``0 < |z| < 1`` for the bound.
    """
    j = spec.jumps
    if isinstance(j, SymmetricStable):
        full = stable_levy_density_integrals(j.alpha, j.C, 0.0, 1.0)
        trunc = stable_levy_density_integrals(j.alpha, j.C, spec.eps, 1.0)
        return {"V0": spec.d * full.mass, "V1": spec.d * full.abs_moment,
                "V2": spec.d * full.second_moment, "V2_simulated": spec.d * trunc.second_moment}
    if isinstance(j, CompoundPoisson):
        if spec.d != 1:
            raise DimensionError("compound Poisson small-jump moments are available for d = 1")
        v2 = j.restricted_moment(2.0, 0.0, 1.0)
        return {"V0": j.restricted_moment(0.0, 0.0, 1.0), "V1": j.restricted_moment(1.0, 0.0, 1.0),
                "V2": v2, "V2_simulated": v2}
    return {"V0": 0.0, "V1": 0.0, "V2": 0.0, "V2_simulated": 0.0}


def boundedness_bound_check(spec: LevyDriverSpec, family: SelectorFamily, kernel: Kernel,
                            t: float = 1.0, reps: int = 1000, seed: int = 0, t0: float = 0.0,
                            n_combinations: int = 1000, workers: int = 1) -> ExperimentReport:
    """Compare sampled decomposable combinations of ``I^(4)`` with the a priori bound.

    The family must consist of constant mark multipliers ``c_j z``.  The bound
    is ``4 V0 (t - t0) max c^2 V2 int g^2`` for finite activity and
    ``4 sqrt(V1 (t - t0)) (max c^2 V1 int g^2)^(1/2)`` for finite variation.
    """
    spec.validate()
    if family.q != 4:
        raise ParameterDomainError("the boundedness check concerns the q = 4 integral")
    mults = [h.multiplier for h in family]
    if any(c is None for c in mults):
        raise ParameterDomainError("family members must be constant mark multipliers c z")
    j = spec.jumps
    if not (j.finite_activity or j.finite_variation):
        raise PreconditionError("bound requires finite activity or int_{|z|<1} |z| nu(dz) < inf")
    mom = small_jump_measure(spec)
    g2 = kern.integrate_against(kernel, t, lambda s: 1.0, t0, t, power=2)
    cmax2 = max(c * c for c in mults)
    if j.finite_activity:
        bound = 4.0 * mom["V0"] * (t - t0) * cmax2 * mom["V2"] * g2
        which = "finite activity"
    else:
        bound = 4.0 * math.sqrt(mom["V1"] * (t - t0)) * math.sqrt(cmax2 * mom["V1"] * g2)
        which = "finite variation"
    fn = partial(_bounded_rep, spec=spec, kernel=kernel, family=family, t0=t0, t=t, seed=seed)
    Y = np.asarray(map_reps(fn, reps, workers))          # (reps, n, d)
    Y = np.moveaxis(Y, 0, 1)                              # (n, reps, d)
    sq = np.sum(Y ** 2, axis=-1)                          # (n, reps)
    best, _ = maximizing_combination(Y)
    max_est, max_se = mean_stderr(np.sum(best ** 2, axis=-1))
    rng = make_rng(seed, 2 ** 32 - 1)
    n = len(family)
    sampled = [max_est]
    norms = np.sqrt(sq)
    for _ in range(n_combinations - 1):
        w = rng.dirichlet(np.ones(n))
        if rng.random() < 0.5:
            # partition independent of the path
            val = math.fsum(w * np.array([mean_stderr(s)[0] for s in sq]))
        else:
            # path-dependent partition: argmax of weighted norms
            J = np.argmax(w[:, None] * norms, axis=0)
            val = mean_stderr(sq[J, np.arange(sq.shape[1])])[0]
        sampled.append(val)
    sup = max(sampled)
    rep = ExperimentReport("bounded-check", metadata={
        "seed": seed, "reps": reps, "regime": which, "kernel": kernel.label, "t0": t0, "t": t,
        "multipliers": mults, "n_combinations": n_combinations, **mom,
        "truncation_error_variance": truncation_error_variance(spec)})
    rep.add("bounded-check:max-combination", n, max_est, max_se, bound,
            "pass" if max_est <= bound else "fail",
            claim=f"E|eta|^2 of the maximizing combination is below the {which} bound")
    rep.add("bounded-check:sup-sampled", n_combinations, sup, max_se, bound,
            "pass" if sup <= bound else "fail",
            claim=f"sup over sampled decomposable combinations of E|eta|^2 is below the {which} bound")
    if j.finite_activity:
        iso = cmax2 * mom["V2"] * g2
        k = int(np.argmax(np.abs(mults)))
        e, s = mean_stderr(sq[k])
        rep.add("bounded-check:isometry", 1, e, s, iso, "pass" if abs(e - iso) <= 3 * s else "fail",
                claim="E|I(h)|^2 equals int int g^2 |h|^2 nu(dz) ds within 3 SE")
    return rep


# ---------------------------------------------------------------------------
# Stable vectors
# ---------------------------------------------------------------------------


def sample_symmetric_stable(alpha: float, size, rng: np.random.Generator, scale: float = 1.0):
    """Standard symmetric alpha-stable draws, ``E exp(iuX) = exp(-|scale u|^alpha)``."""
    return stats.levy_stable.rvs(alpha, 0.0, loc=0.0, scale=scale, size=size, random_state=rng)


def stable_vector_maximum(alpha: float, n: int, scale: float = 1.0, reps: int = 10_000,
                          seed: int = 0) -> tuple[float, float]:
    """MC estimate and SE of ``E max_j |Y_j|`` for a symmetric stable vector with iid axes."""
    if not 1.0 < alpha < 2.0:
        raise ParameterDomainError(f"alpha must lie in (1, 2), got {alpha}")
    if n < 1:
        raise ParameterDomainError("n must be >= 1")
    rng = make_rng(seed, n)
    Y = sample_symmetric_stable(alpha, (reps, n), rng, scale)
    return mean_stderr(np.max(np.abs(Y), axis=1))


def stable_max_report(alpha: float, n_values: Sequence[int], scale: float = 1.0,
                      reps: int = 10_000, seed: int = 0) -> ExperimentReport:
    rep = ExperimentReport("stable-max", metadata={"seed": seed, "reps": reps, "alpha": alpha,
                                                   "scale": scale})
    ests = []
    for n in n_values:
        e, s = stable_vector_maximum(alpha, n, scale, reps, seed)
        ests.append(e)
        rep.add("stable-max:emax", n, e, s, claim="E max_j |Y_j| estimate")
    if len(n_values) >= 3:
        x = np.log(np.asarray(n_values, dtype=float)) ** ((alpha - 1.0) / alpha)
        fit = stats.linregress(x, ests)
        rep.add("stable-max:slope", "all", fit.slope, fit.stderr, 0.0,
                "pass" if fit.slope > 0 else "fail",
                claim="positive coefficient on log(n)^((alpha-1)/alpha)")
    return rep
