"""Set-monotone processes built from interval-valued convoluted integrals.

``SetPathBuilder`` evaluates, on a grid augmented with every jump time,

    X_t = X0 + int g K1 ds + int g co(K2) dW + int g K3 dN + int g co(K4) dN~

for one-dimensional ingredients: ``K1`` and ``K3`` are intervals (the latter a
multiplier of the mark), ``K2`` and ``K4`` are finite lists of constant
coefficients.  With ``convolute_drift=False`` the drift term is the plain
Aumann integral ``[k1.lo t, k1.hi t]``.  ``decreasing_process`` and ``increasing_process`` fold the
resulting interval path into the running intersection (stopped at the first
singleton) and the running convex union.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import kernels as kern
from .errors import DimensionError, EmptyIntersectionError, ParameterDomainError, PreconditionError
from .kernels import Kernel
from .levy import (CompoundPoisson, LevyDriverSpec, NoJumps, PathRealization, SymmetricStable,
                   sample_path, stable_levy_density_integrals)
from .parallel import map_reps
from .report import ExperimentReport, fmt, mean_stderr
from .setval import Exploded, Interval, intersect, union_hull
from .svint import (SelectorFamily, _brownian_weights, aumann_interval_integral, mark_linear_selector,
                    sv_integral)


@dataclass(frozen=True, eq=False)
class SetPath:
    """Interval-valued path; exploded rows carry directions and ``nan`` bounds."""

    times: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    exploded: np.ndarray
    directions: tuple
    provenance: dict = field(default_factory=dict)
    scalar: dict = field(default_factory=dict)
    tau_hit: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.times.size

    def value(self, i: int):
        if self.exploded[i]:
            return Exploded(self.directions[i])
        return Interval(float(self.lo[i]), float(self.hi[i]))

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "lo", "hi", "exploded", "tau_hit"])
        hit = self.tau_hit if self.tau_hit is not None else np.zeros(len(self), dtype=bool)
        for i in range(len(self)):
            w.writerow([fmt(self.times[i]), fmt(self.lo[i]), fmt(self.hi[i]),
                        int(self.exploded[i]), int(hit[i])])


@dataclass(frozen=True)
class Tau:
    index: Optional[int] = None
    time: float = math.inf
    reason: str = "not hit"

    @property
    def hit(self) -> bool:
        return self.index is not None


def evaluation_times(path: PathRealization) -> np.ndarray:
    """Grid times together with every jump time (jumps must never fall between nodes)."""
    return np.union1d(path.grid, path.jump_times)


def _jump_interval(v: np.ndarray, lo_mult: float, hi_mult: float) -> tuple[float, float]:
    """Decomposable sum over jumps of ``[lo_mult, hi_mult] * v_k``."""
    a, b = lo_mult * v, hi_mult * v
    return math.fsum(np.minimum(a, b)), math.fsum(np.maximum(a, b))


def _explosion_dirs(zsign: np.ndarray, mults: Sequence[float]) -> set:
    dirs = set()
    for s in zsign:
        for c in mults:
            if c != 0 and s != 0:
                dirs.add((float(np.sign(c * s)),))
    return dirs


@dataclass
class SetPathBuilder:
    """Ingredients of the one-dimensional process; see the module docstring."""

    x0: Interval
    kernel: Kernel
    k1: Interval = Interval(0.0, 0.0)
    k2: tuple = (0.0,)
    k3: Interval = Interval(0.0, 0.0)
    k4: tuple = (0.0,)
    convolute_drift: bool = True

    def __post_init__(self):
        self.k2 = tuple(float(c) for c in self.k2)
        self.k4 = tuple(float(c) for c in self.k4)
        if not self.k2 or not self.k4:
            raise ParameterDomainError("K2 and K4 must be nonempty")

    def provenance(self, path: PathRealization) -> dict:
        return {"x0": [self.x0.lo, self.x0.hi], "kernel": self.kernel.label,
                "K1": [self.k1.lo, self.k1.hi], "K2": list(self.k2), "K3": [self.k3.lo, self.k3.hi],
                "K4": list(self.k4), "convolute_drift": self.convolute_drift, "driver": repr(path.spec.jumps), "seed": path.seed,
                "stream": path.stream}

    def build(self, path: PathRealization, times: Optional[np.ndarray] = None) -> SetPath:
        if path.spec.d != 1 or path.spec.m != 1:
            raise DimensionError("monotone constructions are one-dimensional")
        if not path.spec.jumps.symmetric:
            raise PreconditionError("small-jump integrals need a symmetric measure")
        times = evaluation_times(path) if times is None else np.union1d(times, path.jump_times)
        k = self.kernel
        n = times.size
        lo, hi = np.empty(n), np.empty(n)
        exploded = np.zeros(n, dtype=bool)
        dirs: list = [()] * n
        I2 = np.zeros(n)
        I4 = np.zeros(n)
        lo[0], hi[0] = self.x0.lo, self.x0.hi
        k3m = (self.k3.lo, self.k3.hi)
        for i in range(1, n):
            t = float(times[i])
            if (self.k1.lo, self.k1.hi) == (0.0, 0.0):
                drift = Interval(0.0, 0.0)
            elif self.convolute_drift:
                drift = aumann_interval_integral(k, self.k1.lo, self.k1.hi, None, 0.0, t)
            else:
                drift = Interval(self.k1.lo * t, self.k1.hi * t)
            left, idx, G = _brownian_weights(k, path.spec.T, path.M, 0.0, t)
            I2[i] = G @ (path.dW[idx, 0] / path.dt)
            bvals = [c * I2[i] for c in self.k2]
            js, jz = path.jumps_in(0.0, t)
            jl = path.jumps_in(0.0, t, large=True)[0].size
            big = path.jump_large[(path.jump_times > 0) & (path.jump_times <= t)]
            at_t = js >= t
            g = np.zeros(js.size)
            g[~at_t] = k.func(t, js[~at_t])
            if at_t.any():
                if k.singular:
                    zs = np.sign(jz[at_t, 0])
                    d3 = _explosion_dirs(zs[big[at_t]], k3m)
                    d4 = _explosion_dirs(zs[~big[at_t]], self.k4)
                    if d3 or d4:
                        exploded[i] = True
                        dirs[i] = tuple(sorted(d3 | d4))
                else:
                    g[at_t] = k.diagonal_limit(t)
            v = g * jz[:, 0]
            j3 = _jump_interval(v[big], *k3m) if jl else (0.0, 0.0)
            I4[i] = math.fsum(v[~big])
            kvals = [c * I4[i] for c in self.k4]
            if exploded[i]:
                lo[i] = hi[i] = math.nan
                continue
            lo[i] = self.x0.lo + drift.lo + min(bvals) + j3[0] + min(kvals)
            hi[i] = self.x0.hi + drift.hi + max(bvals) + j3[1] + max(kvals)
        return SetPath(times, lo, hi, exploded, tuple(dirs), self.provenance(path),
                       {"brownian_integral": I2, "small_jump_integral": I4})


def decreasing_process(sp: SetPath, width_tol: float = 1e-9) -> tuple[SetPath, Tau]:
    """Running intersection, frozen at the first singleton (width <= ``width_tol``).

    Exploded inputs are skipped because a finite prior value always exists.
    An empty intersection freezes the value at the previous step and stops
    the fold at that index with reason ``"empty"``.
    """
    n = len(sp)
    lo, hi = np.empty(n), np.empty(n)
    cur = sp.value(0)
    if isinstance(cur, Exploded):
        raise PreconditionError("the initial value must be finite")
    tau = Tau()
    if cur.width <= width_tol:
        tau = Tau(0, float(sp.times[0]), "singleton")
    for i in range(n):
        if i > 0 and not tau.hit and not sp.exploded[i]:
            try:
                cur = intersect(cur, sp.value(i))
            except EmptyIntersectionError:
                tau = Tau(i, float(sp.times[i]), "empty")
            else:
                if cur.width <= width_tol:
                    tau = Tau(i, float(sp.times[i]), "singleton")
        lo[i], hi[i] = cur.lo, cur.hi
    hit = np.zeros(n, dtype=bool)
    if tau.hit:
        hit[tau.index:] = True
    prov = dict(sp.provenance, fold="decreasing", tau_reason=tau.reason)
    return SetPath(sp.times, lo, hi, np.zeros(n, dtype=bool), ((),) * n, prov, sp.scalar, hit), tau


def increasing_process(sp: SetPath) -> SetPath:
    """Running closed convex hull of the union; explosion is absorbing."""
    n = len(sp)
    lo, hi = np.empty(n), np.empty(n)
    exploded = np.zeros(n, dtype=bool)
    dirs: list = [()] * n
    cur = None
    acc: set = set()
    for i in range(n):
        if sp.exploded[i] or acc:
            acc |= set(sp.directions[i])
            exploded[i] = True
            dirs[i] = tuple(sorted(acc))
            lo[i] = hi[i] = math.nan
            continue
        v = sp.value(i)
        cur = v if cur is None else union_hull(cur, v)
        lo[i], hi[i] = cur.lo, cur.hi
    return SetPath(sp.times, lo, hi, exploded, tuple(dirs), dict(sp.provenance, fold="increasing"),
                   sp.scalar)


def coarsen(path: PathRealization) -> PathRealization:
    """The same realization on a grid with half as many cells (pairs of increments summed)."""
    if path.M % 2:
        raise ParameterDomainError("grid size must be even to coarsen")
    dW = path.dW.reshape(path.M // 2, 2, -1).sum(axis=1)
    return PathRealization(path.grid[::2].copy(), dW, path.jump_times, path.jump_marks,
                           path.jump_large, path.seed, path.stream, path.spec)


def refinement_diagnostic(builder: SetPathBuilder, path: PathRealization) -> float:
    """Max change of the increasing process at coarse grid times when the grid is halved.

    Reported only: right-continuity cannot be asserted at grid resolution.
    """
    fine = increasing_process(builder.build(path))
    coarse_path = coarsen(path)
    coarse = increasing_process(builder.build(coarse_path))
    common = np.isin(fine.times, coarse_path.grid)
    cf = np.isin(coarse.times, coarse_path.grid)
    ok = ~(fine.exploded[common] | coarse.exploded[cf])
    if not ok.any():
        return 0.0
    d = np.maximum(np.abs(fine.lo[common] - coarse.lo[cf]), np.abs(fine.hi[common] - coarse.hi[cf]))
    return float(np.max(d[ok]))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _first_explosion(path: PathRealization, kernel: Kernel) -> bool:
    for s, big in zip(path.jump_times, path.jump_large):
        fam = SelectorFamily((mark_linear_selector(3 if big else 4, 1.0),))
        if sv_integral(3 if big else 4, kernel, fam, path, 0.0, float(s)).exploded:
            return True
    return False


def _explosion_rep(rep, *, spec, kernel, seed):
    path = sample_path(spec, 2, seed, rep)
    return (float(_first_explosion(path, kernel)), float(path.jump_times.size > 0))


def explosion_probability_experiment(kernel: Kernel, rate: float, T: float = 1.0, reps: int = 10_000,
                                     seed: int = 0, law: str = "normal", scale: float = 1.0,
                                     workers: int = 1) -> ExperimentReport:
    """Fraction of paths on which the jump integrals with integrand ``z`` explode.

    Each jump time is an evaluation time; the fraction is compared with
    ``1 - exp(-rate T)``.
    """
    if not kernel.singular:
        raise PreconditionError("explosion needs a singular kernel")
    jumps = CompoundPoisson(rate, law, scale) if rate > 0 else NoJumps()
    spec = LevyDriverSpec(jumps=jumps, T=T).validate()
    fn = partial(_explosion_rep, spec=spec, kernel=kernel, seed=seed)
    X = np.asarray(map_reps(fn, reps, workers))
    p, se = mean_stderr(X[:, 0])
    pj, sej = mean_stderr(X[:, 1])
    target = 1.0 - math.exp(-rate * T)
    tol = 3.0 * max(se, math.sqrt(target * (1 - target) / reps))
    rep = ExperimentReport("explosion", metadata={"seed": seed, "reps": reps, "rate": rate, "T": T,
                                                  "kernel": kernel.label, "law": law})
    rep.add("explosion:fraction", reps, p, se, target, "pass" if abs(p - target) <= tol else "fail",
            claim="explosion fraction equals 1 - exp(-rate T) within 3 SE")
    rep.add("explosion:any-jump", reps, pj, sej, target, "pass" if p == pj else "fail",
            claim="explosion happens exactly on paths with at least one jump")
    return rep


def explosion_fraction_stable(kernel: Kernel, alpha: float, eps_values: Sequence[float],
                              T: float = 1.0, reps: int = 1000, seed: int = 0,
                              C: float = 1.0) -> ExperimentReport:
    """Explosion fraction under a truncated stable driver for decreasing ``eps``."""
    rep = ExperimentReport("explosion-stable", metadata={"seed": seed, "reps": reps, "alpha": alpha})
    last = -1.0
    for k, eps in enumerate(sorted(eps_values, reverse=True)):
        spec = LevyDriverSpec(jumps=SymmetricStable(alpha, C), eps=eps, T=T)
        fn = partial(_explosion_rep, spec=spec, kernel=kernel, seed=seed)
        X = np.asarray(map_reps(fn, reps))
        p, se = mean_stderr(X[:, 0])
        mass = stable_levy_density_integrals(alpha, C, eps, math.inf).mass
        target = 1.0 - math.exp(-mass * T)
        rep.add("explosion-stable:fraction", eps, p, se, target,
                "pass" if p >= last - 3 * se else "fail",
                claim="explosion fraction is monotone as eps decreases and tends to 1")
        last = p
    return rep


def covariance_decay_check(kernel: Kernel, t: float = 1.0,
                           u_values: Optional[Sequence[float]] = None, reps: int = 0,
                           seed: int = 0, M: int = 1024, r2_min: float = 0.99) -> ExperimentReport:
    """Exponent of ``|Cov(X_t, X_{t+u}) - Var X_t|`` for ``X_t = int_0^t g(t, s) dW_s``.

    Quadrature gives ``Cov - Var = int_0^t g(t,s) (g(t+u,s) - g(t,s)) ds``; a
    log-log fit over ``u`` estimates the exponent.  The expected side is
    ``> 1`` when ``g(t, t-) = 0`` and ``(0, 1)`` for singular kernels.
    Optional Monte Carlo rows compare sampled covariances with quadrature.
    """
    if u_values is None:
        u_values = [2.0 ** -k for k in range(3, 11)]
    u = np.asarray(sorted(u_values), dtype=float)
    if t + u[-1] > kernel.T * (1 + 1e-12):
        raise ParameterDomainError(f"kernel horizon {kernel.T} is shorter than t + max u")
    var = kern.l2_norm_sq(kernel, t)
    cov = np.array([kern.integrate_against(kernel, t, partial(_shifted, kernel, t + du)) for du in u])
    diff = np.abs(cov - var)
    fit = stats.linregress(np.log(u), np.log(diff))
    r2 = fit.rvalue ** 2
    gam = kernel.endpoint_exponent
    if kernel.singular:
        good, side = 0.0 < fit.slope < 1.0, "(0, 1)"
    elif gam > 0:
        good, side = fit.slope > 1.0, "> 1"
    else:
        good, side = True, "unrestricted"
    rep = ExperimentReport("covariance", metadata={"kernel": kernel.label, "t": t, "var": var,
                                                   "r2": r2, "seed": seed, "reps": reps})
    for du, c, dv in zip(u, cov, diff):
        rep.add("covariance:cov-minus-var", du, c - var, 0.0, math.nan, "info",
                claim="quadrature value of Cov(X_t, X_{t+u}) - Var X_t")
    rep.add("covariance:exponent", "fit", fit.slope, fit.stderr, math.nan,
            "pass" if good else "fail", claim=f"fitted exponent lies in {side}")
    rep.add("covariance:r2", "fit", r2, math.nan, r2_min, "pass" if r2 > r2_min else "fail",
            claim=f"log-log regression R^2 exceeds {r2_min}")
    if reps > 0:
        T = float(t + u[-1])
        spec = LevyDriverSpec(T=T)
        fn = partial(_cov_rep, spec=spec, kernel=kernel, t=t, u=tuple(u), M=M, seed=seed)
        X = np.asarray(map_reps(fn, reps))
        for k, du in enumerate(u):
            prod = X[:, 0] * X[:, k + 1]
            c, se = mean_stderr(prod)
            rep.add("covariance:mc", du, c, se, cov[k], "pass" if abs(c - cov[k]) <= 3 * se else "fail",
                    claim="Monte Carlo covariance matches quadrature within 3 SE")
    return rep


def _shifted(kernel, tu, s):
    return float(kernel.func(tu, s))


def _cov_rep(rep, *, spec, kernel, t, u, M, seed):
    path = sample_path(spec, M, seed, rep)
    out = []
    for tt in (t, *[t + du for du in u]):
        left, idx, G = _brownian_weights(kernel, spec.T, M, 0.0, float(tt))
        out.append(G @ (path.dW[idx, 0] / path.dt))
    return out


def integrability_condition_check(k1: Interval, k3: Interval, spec: LevyDriverSpec) -> ExperimentReport:
    """Finiteness of ``sup d_H(K1, {0})`` and ``int_{|z|>=1} d_H(K3(z), {0}) nu(dz)``.

    ``K3`` acts as a multiplier of the mark, so the second quantity is
    ``max|gamma| int_{|z|>=1} |z| nu(dz)``.
    """
    s1 = k1.norm()
    j = spec.jumps
    if isinstance(j, SymmetricStable):
        big = spec.d * stable_levy_density_integrals(j.alpha, j.C, 1.0, math.inf).abs_moment
    elif isinstance(j, CompoundPoisson):
        big = j.restricted_moment(1.0, 1.0, math.inf) if spec.d == 1 else math.nan
    else:
        big = 0.0
    s3 = k3.norm() * big if k3.norm() > 0 else 0.0
    rep = ExperimentReport("integrability", metadata={"driver": repr(j)})
    rep.add("integrability:K1", 1, s1, math.nan, math.inf, "pass" if math.isfinite(s1) else "fail",
            claim="sup_s d_H(K1(s-), {0}) is finite")
    rep.add("integrability:K3", 3, s3, math.nan, math.inf, "pass" if math.isfinite(s3) else "fail",
            claim="sup_s int_{|z|>=1} d_H(K3(s-, z), {0}) nu(dz) is finite")
    return rep
