"""Lévy driver specification and path sampling.

A path consists of Brownian increments on a uniform grid and an explicit list
of jump events.  Large jumps (``|z| >= 1``) are sampled exactly; small jumps of
an infinite-activity stable measure are truncated at ``eps``.  Only symmetric
small-jump measures are sampled, so no compensating drift is needed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy import integrate, stats

from .errors import DimensionError, ParameterDomainError, TruncationTooSmallError

MAX_EVENTS = 10_000_000
MARK_LAWS = ("normal", "uniform", "rademacher")


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator fully determined by ``(seed, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Jump measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoJumps:
    finite_activity = True
    finite_variation = True
    symmetric = True


@dataclass(frozen=True)
class CompoundPoisson:
    """Finite-activity jumps at rate ``rate`` with iid symmetric marks.

    Each mark component is drawn from ``law`` (normal, uniform on
    ``[-scale, scale]``, or ``+-scale``) independently.
    """

    rate: float
    law: str = "normal"
    scale: float = 1.0

    finite_activity = True
    finite_variation = True
    symmetric = True

    def _dist(self):
        if self.law == "normal":
            return stats.norm(scale=self.scale)
        if self.law == "uniform":
            return stats.uniform(loc=-self.scale, scale=2 * self.scale)
        return None

    def restricted_moment(self, p: float, a: float = 0.0, b: float = math.inf) -> float:
        """``rate * E[|z|**p ; a <= |z| < b]`` for a one-dimensional mark."""
        if self.law == "rademacher":
            return self.rate * self.scale ** p if a <= self.scale < b else 0.0
        dist = self._dist()
        hi = min(b, self.scale) if self.law == "uniform" else b
        if hi <= a:
            return 0.0
        val, _ = integrate.quad(lambda z: z ** p * dist.pdf(z), a, hi)
        return self.rate * 2.0 * val

    def sample_marks(self, rng: np.random.Generator, n: int, d: int) -> np.ndarray:
        if self.law == "normal":
            return self.scale * rng.standard_normal((n, d))
        if self.law == "uniform":
            return self.scale * rng.uniform(-1.0, 1.0, (n, d))
        return self.scale * (2.0 * rng.integers(0, 2, (n, d)) - 1.0)


@dataclass(frozen=True)
class SymmetricStable:
    """Stable Lévy measure ``C |z|**(-alpha-1) dz`` on each coordinate axis.

    ``skew`` in ``[-1, 1]`` tilts the sign of the marks; anything nonzero is
    only accepted in the finite-variation regime ``alpha < 1``.
    """

    alpha: float
    C: float = 1.0
    skew: float = 0.0

    finite_activity = False

    @property
    def finite_variation(self) -> bool:
        return self.alpha < 1.0

    @property
    def symmetric(self) -> bool:
        return self.skew == 0.0


def holtsmark(C: float = 1.0) -> SymmetricStable:
    """The symmetric 3/2-stable measure ``C |z|**(-5/2) dz``."""
    return SymmetricStable(alpha=1.5, C=C)


JumpSpec = Union[NoJumps, CompoundPoisson, SymmetricStable]


class DensityIntegrals(NamedTuple):
    mass: float
    abs_moment: float
    second_moment: float

    @property
    def divergent(self) -> tuple:
        return tuple(name for name, v in zip(self._fields, self) if math.isinf(v))


def _power_integral(p: float, a: float, b: float) -> float:
    """``int_a^b z**p dz`` for ``0 <= a < b <= inf``, ``inf`` when divergent."""
    if p == -1.0:
        if a == 0.0 or math.isinf(b):
            return math.inf
        return math.log(b / a)
    e = p + 1.0
    if e > 0:
        return math.inf if math.isinf(b) else (b ** e - a ** e) / e
    if a == 0.0:
        return math.inf
    return (a ** e - (0.0 if math.isinf(b) else b ** e)) / (-e)


def stable_levy_density_integrals(alpha: float, C: float, a: float, b: float) -> DensityIntegrals:
    """Mass, first and second absolute moments of ``C|z|**(-alpha-1)`` over ``a < |z| < b``."""
    if not 0.0 < alpha < 2.0:
        raise ParameterDomainError(f"alpha must lie in (0, 2), got {alpha}")
    if not 0.0 <= a < b:
        raise ParameterDomainError(f"need 0 <= a < b, got a={a}, b={b}")
    two_c = 2.0 * C
    return DensityIntegrals(two_c * _power_integral(-alpha - 1.0, a, b),
                            two_c * _power_integral(-alpha, a, b),
                            two_c * _power_integral(1.0 - alpha, a, b))


# ---------------------------------------------------------------------------
# Driver spec and paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyDriverSpec:
    d: int = 1
    m: int = 1
    drift: tuple = (0.0,)
    sigma: tuple = ((1.0,),)
    jumps: JumpSpec = field(default_factory=NoJumps)
    eps: float = 1e-3
    T: float = 1.0

    @property
    def drift_vector(self) -> np.ndarray:
        return np.asarray(self.drift, dtype=float).reshape(self.d)

    @property
    def sigma_matrix(self) -> np.ndarray:
        return np.asarray(self.sigma, dtype=float).reshape(self.d, self.m)

    def violations(self) -> list[str]:
        out = []
        if self.d < 1 or self.m < 1:
            out.append("dimensions d and m must be positive")
        if np.asarray(self.drift).size != self.d:
            out.append(f"drift must have {self.d} entries")
        if np.asarray(self.sigma).size != self.d * self.m:
            out.append(f"sigma must be a {self.d}x{self.m} matrix")
        if not (self.T > 0 and math.isfinite(self.T)):
            out.append("horizon T must be positive")
        if not 0.0 < self.eps < 1.0:
            out.append("truncation eps must lie in (0, 1)")
        j = self.jumps
        if isinstance(j, CompoundPoisson):
            if j.rate < 0:
                out.append("compound Poisson rate must be >= 0")
            if j.law not in MARK_LAWS:
                out.append(f"mark law must be one of {MARK_LAWS}")
            if j.scale <= 0:
                out.append("mark scale must be > 0")
        elif isinstance(j, SymmetricStable):
            if not 0.0 < j.alpha < 2.0:
                out.append("stable index alpha must lie in (0, 2)")
            if j.C <= 0:
                out.append("stable scale C must be > 0")
            if not -1.0 <= j.skew <= 1.0:
                out.append("skew must lie in [-1, 1]")
            elif j.skew != 0.0 and j.alpha >= 1.0:
                out.append("asymmetric infinite-variation small-jump measure is not supported")
        return out

    def validate(self) -> "LevyDriverSpec":
        v = self.violations()
        if v:
            raise ParameterDomainError("; ".join(v))
        return self

    def class_intensity(self) -> tuple[float, float]:
        """Expected (large, small) jump counts per unit time, summed over axes."""
        j = self.jumps
        if isinstance(j, SymmetricStable):
            large = stable_levy_density_integrals(j.alpha, j.C, 1.0, math.inf).mass
            small = stable_levy_density_integrals(j.alpha, j.C, self.eps, 1.0).mass
            return self.d * large, self.d * small
        if isinstance(j, CompoundPoisson):
            if self.d == 1:
                p_large = j.restricted_moment(0.0, 1.0) / j.rate if j.rate > 0 else 0.0
                return j.rate * p_large, j.rate * (1 - p_large)
            return math.nan, math.nan
        return 0.0, 0.0


def truncation_error_variance(spec: LevyDriverSpec) -> float:
    """Per-unit-time variance ``int_{|z|<eps} |z|**2 nu(dz)`` dropped by truncation.

    Zero for finite-activity drivers, which are simulated without truncation.
    """
    j = spec.jumps
    if not isinstance(j, SymmetricStable):
        return 0.0
    return spec.d * 2.0 * j.C * spec.eps ** (2.0 - j.alpha) / (2.0 - j.alpha)


@dataclass(frozen=True, eq=False)
class PathRealization:
    """One sample of the driver on ``[0, T]``.

    ``dW[i]`` is the Brownian increment over ``[grid[i], grid[i+1]]``.  Jump
    arrays are sorted by time; ``jump_large[k]`` is True for ``|z_k| >= 1``.
    """

    grid: np.ndarray
    dW: np.ndarray
    jump_times: np.ndarray
    jump_marks: np.ndarray
    jump_large: np.ndarray
    seed: int
    stream: int
    spec: LevyDriverSpec

    @property
    def M(self) -> int:
        return self.dW.shape[0]

    @property
    def dt(self) -> float:
        return self.spec.T / self.M

    def brownian(self) -> np.ndarray:
        """``W`` on the grid, shape ``(M + 1, m)``."""
        return np.vstack([np.zeros((1, self.dW.shape[1])), np.cumsum(self.dW, axis=0)])

    def brownian_at(self, s) -> np.ndarray:
        """``W(s)`` by linear interpolation between grid values."""
        W = self.brownian()
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([np.interp(s, self.grid, W[:, c]) for c in range(W.shape[1])], axis=-1)

    def jumps_in(self, t0: float, t: float, large: Optional[bool] = None):
        """Times and marks of jumps in ``(t0, t]``, optionally filtered by class."""
        sel = (self.jump_times > t0) & (self.jump_times <= t)
        if large is not None:
            sel &= self.jump_large == large
        return self.jump_times[sel], self.jump_marks[sel]


def _axis_stable_jumps(rng, j: SymmetricStable, eps: float, T: float, axis: int, d: int):
    times, marks, large = [], [], []
    big = stable_levy_density_integrals(j.alpha, j.C, 1.0, math.inf).mass
    small = stable_levy_density_integrals(j.alpha, j.C, eps, 1.0).mass
    for rate, is_large in ((big, True), (small, False)):
        lam = rate * T
        if lam > MAX_EVENTS:
            raise TruncationTooSmallError(f"expected {lam:.3g} jumps exceeds {MAX_EVENTS}; raise eps")
        n = int(rng.poisson(lam))
        if n > MAX_EVENTS:
            raise TruncationTooSmallError(f"{n} sampled jumps exceeds {MAX_EVENTS}")
        tt = T * (1.0 - rng.random(n))
        u = rng.random(n)
        if is_large:
            mag = (1.0 - u) ** (-1.0 / j.alpha)
        else:
            top = eps ** (-j.alpha)
            mag = (top - u * (top - 1.0)) ** (-1.0 / j.alpha)
        sign = np.where(rng.random(n) < 0.5 * (1.0 + j.skew), 1.0, -1.0)
        z = np.zeros((n, d))
        z[:, axis] = sign * mag
        times.append(tt)
        marks.append(z)
        large.append(np.full(n, is_large))
    return times, marks, large


def sample_path(spec: LevyDriverSpec, M: int, seed: int, stream: int = 0) -> PathRealization:
    """Sample one path on the uniform grid with ``M`` cells."""
    spec.validate()
    if M < 2:
        raise ParameterDomainError(f"grid size M must be >= 2, got {M}")
    rng = make_rng(seed, stream)
    grid = np.linspace(0.0, spec.T, M + 1)
    dW = math.sqrt(spec.T / M) * rng.standard_normal((M, spec.m))
    j = spec.jumps
    times, marks, large = [np.zeros(0)], [np.zeros((0, spec.d))], [np.zeros(0, dtype=bool)]
    if isinstance(j, CompoundPoisson):
        lam = j.rate * spec.T
        if lam > MAX_EVENTS:
            raise TruncationTooSmallError(f"expected {lam:.3g} jumps exceeds {MAX_EVENTS}")
        n = int(rng.poisson(lam))
        tt = spec.T * (1.0 - rng.random(n))
        z = j.sample_marks(rng, n, spec.d)
        times.append(tt)
        marks.append(z)
        large.append(np.linalg.norm(z, axis=1) >= 1.0)
    elif isinstance(j, SymmetricStable):
        for axis in range(spec.d):
            tt, zz, ll = _axis_stable_jumps(rng, j, spec.eps, spec.T, axis, spec.d)
            times += tt
            marks += zz
            large += ll
    times = np.concatenate(times)
    order = np.argsort(times, kind="stable")
    return PathRealization(grid=grid, dW=dW, jump_times=times[order],
                           jump_marks=np.concatenate(marks)[order],
                           jump_large=np.concatenate(large)[order],
                           seed=int(seed), stream=int(stream), spec=spec)


def check_dimensions(path: PathRealization, d: int, m: Optional[int] = None) -> None:
    if path.spec.d != d or (m is not None and path.spec.m != m):
        raise DimensionError(f"path has d={path.spec.d}, m={path.spec.m}; expected d={d}, m={m}")


def write_increments_csv(path: PathRealization, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["time", "component", "value"])
    for i in range(path.M):
        for c in range(path.dW.shape[1]):
            w.writerow([f"{path.grid[i + 1]:.17g}", c + 1, f"{path.dW[i, c]:.17g}"])


def write_jumps_csv(path: PathRealization, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    d = path.spec.d
    w.writerow(["time", *[f"z{i + 1}" for i in range(d)], "class"])
    for s, z, big in zip(path.jump_times, path.jump_marks, path.jump_large):
        w.writerow([f"{s:.17g}", *[f"{v:.17g}" for v in z], "large" if big else "small"])


def jump_spec_from_mapping(cfg: dict) -> JumpSpec:
    """Jump measure from a config mapping (``type = "stable" | "holtsmark" | "compound_poisson" | "none"``)."""
    kind = str(cfg.get("type", "none")).lower()
    if kind == "none":
        return NoJumps()
    if kind in ("compound_poisson", "cp"):
        return CompoundPoisson(float(cfg.get("rate", 1.0)), str(cfg.get("law", "normal")),
                               float(cfg.get("scale", 1.0)))
    if kind == "holtsmark":
        return holtsmark(float(cfg.get("C", 1.0)))
    if kind in ("stable", "symmetric_stable"):
        return SymmetricStable(float(cfg["alpha"]), float(cfg.get("C", 1.0)),
                               float(cfg.get("skew", 0.0)))
    raise ParameterDomainError(f"unknown jump type {kind!r}")


def driver_from_mapping(cfg: dict, T: float = 1.0) -> LevyDriverSpec:
    d = int(cfg.get("d", 1))
    m = int(cfg.get("m", 1))
    drift = tuple(np.broadcast_to(np.asarray(cfg.get("mu", 0.0), dtype=float), (d,)).tolist())
    sig = np.asarray(cfg.get("sigma", 1.0), dtype=float)
    if sig.ndim == 0:
        sig = sig * np.eye(d, m)
    sigma = tuple(map(tuple, sig.reshape(d, m).tolist()))
    jumps_cfg = dict(cfg)
    if "alpha" in cfg and "type" not in cfg:
        jumps_cfg["type"] = "stable"
    return LevyDriverSpec(d=d, m=m, drift=drift, sigma=sigma, jumps=jump_spec_from_mapping(jumps_cfg),
                          eps=float(cfg.get("eps", 1e-3)), T=float(cfg.get("T", T)))
