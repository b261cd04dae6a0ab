"""Numeric comparison of the stable tail level ``phi_n(rho)`` with the conjugate-measure level.

For symmetric alpha-stable drivers the comparison measure gives

    A3 = 2 (C / alpha) rho^(-alpha/2),                        constant in n,
    A4 = (2 C / rho^(alpha/2)) int |g|^alpha min_{j'} |b_a - b_j'|^alpha ds,

with ``C`` the normalisation (taken as 1).  ``A4`` depends on the anchor index
``a``.  Since the first coordinate is only a label, ``anchor="worst"`` picks the
anchor with the smallest value (the closest competitor), which tends to zero
for any bounded family; ``anchor="first"`` keeps ``a = 1`` literally.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels as kern
from . import quadrature
from .errors import ParameterDomainError, PreconditionError
from .kernels import Kernel
from .report import ExperimentReport, fmt
from .svint import BFamily, HarmonicFamily

ANCHORS = ("worst", "first")


def _default_kernel() -> Kernel:
    return kern.make_riemann_liouville(2.0, 4.0)


@dataclass
class SlepianConfig:
    alpha: float = 1.5
    rho: float = 1.0
    kernel: Kernel = field(default_factory=_default_kernel)
    t0: float = 0.0
    t: float = 4.0
    family: BFamily = field(default_factory=HarmonicFamily)
    anchor: str = "worst"
    C: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ParameterDomainError(f"alpha must lie in (1, 2), got {self.alpha}")
        if not self.rho > 0:
            raise ParameterDomainError(f"rho must be > 0, got {self.rho}")
        if self.anchor not in ANCHORS:
            raise ParameterDomainError(f"anchor must be one of {ANCHORS}")
        if not 0.0 <= self.t0 < self.t <= self.kernel.T:
            raise ParameterDomainError("need 0 <= t0 < t <= kernel horizon")

    def check_family(self, n: int, samples: int = 33) -> None:
        s = np.linspace(self.t0, self.t, samples)
        B = self.family.values(s, n, self.t0, self.t)
        if not np.all(np.isfinite(B)):
            raise PreconditionError("b-family must be bounded")
        Bs = np.sort(B, axis=0)
        if n > 1 and np.any(np.diff(Bs, axis=0) == 0):
            raise PreconditionError("b-family values must be pairwise distinct")


def eval_A3(config: SlepianConfig, n: int = 2) -> float:
    """``phi_n(rho) = 2 (C / alpha) rho^(-alpha/2)``; independent of ``n``."""
    return 2.0 * config.C / config.alpha * config.rho ** (-config.alpha / 2.0)


def _gaps(B: np.ndarray, anchor: str) -> np.ndarray:
    """Per node, the distance from each anchor to its nearest competitor: shape ``(n, nodes)``."""
    n = B.shape[0]
    if anchor == "first":
        return np.min(np.abs(B[1:] - B[0]), axis=0)[None, :]
    order = np.argsort(B, axis=0)
    Bs = np.take_along_axis(B, order, axis=0)
    d = np.diff(Bs, axis=0)
    near = np.empty_like(Bs)
    near[0], near[-1] = d[0], d[-1]
    if n > 2:
        near[1:-1] = np.minimum(d[:-1], d[1:])
    out = np.empty_like(B)
    np.put_along_axis(out, order, near, axis=0)
    return out


def _abs_power_integral(config: SlepianConfig, weight=None) -> float:
    """``int_{t0}^t |g(t, s)|^alpha w(s) ds``."""
    k, t, a = config.kernel, config.t, config.alpha
    tt = np.asarray(t, dtype=float)

    def f(x):
        v = abs(float(k.lagfunc(tt, np.asarray(x)))) ** a
        return v if weight is None else v * weight(t - x)

    return quadrature.integrate(f, 0.0, t - config.t0, left_exponent=a * k.endpoint_exponent)


def eval_A4(config: SlepianConfig, n: int) -> float:
    """Quadrature value of the conjugate-measure level for a family of size ``n``."""
    if n < 2:
        raise ParameterDomainError("need n >= 2 competitors")
    a = config.alpha
    pref = 2.0 * config.C / config.rho ** (a / 2.0)
    fam = config.family
    probe = np.linspace(config.t0, config.t, 17)
    B = fam.values(probe, n, config.t0, config.t)
    if np.all(B == B[:, :1]):
        # coefficients constant in time: the gap factors out of the integral
        gap = _gaps(B[:, :1], config.anchor)[:, 0]
        return pref * float(np.min(gap)) ** a * _abs_power_integral(config)
    anchors = [0] if config.anchor == "first" else range(n)
    vals = []
    for j in anchors:
        def w(s, j=j):
            Bv = fam.values(np.atleast_1d(s), n, config.t0, config.t)[:, 0]
            return float(np.min(np.abs(np.delete(Bv, j) - Bv[j]))) ** a
        vals.append(_abs_power_integral(config, w))
    return pref * min(vals)


def comparison_report(config: SlepianConfig, n_values: Sequence[int]) -> ExperimentReport:
    """Table of ``(n, A3, A4)`` and the first ``n`` at which ``A4 < A3``.

    A crossover is reported only when ``A4`` actually decreases across the
    table; a family with an ``n``-independent gap has none.
    """
    n_values = sorted(int(n) for n in n_values)
    config.check_family(n_values[-1])
    a3 = [eval_A3(config, n) for n in n_values]
    a4 = [eval_A4(config, n) for n in n_values]
    decreasing = all(y < x for x, y in zip(a4, a4[1:]))
    constant_a3 = all(v == a3[0] for v in a3)
    accumulating = len(a4) > 1 and a4[-1] < a4[0] * (1.0 - 1e-9)
    n_star = next((n for n, x, y in zip(n_values, a3, a4) if y < x), None) if accumulating else None
    rep = ExperimentReport("slepian", metadata={
        "alpha": config.alpha, "rho": config.rho, "kernel": config.kernel.label, "t0": config.t0,
        "t": config.t, "family": config.family.label, "anchor": config.anchor, "C": config.C,
        "n_star": n_star, "A3": a3, "A4": a4})
    for n, x, y in zip(n_values, a3, a4):
        rep.add("slepian:A4", n, y, 0.0, x, "info", claim="A4 against the n-constant level A3")
    rep.add("slepian:A3-constant", "all", a3[0], 0.0, math.nan, "pass" if constant_a3 else "fail",
            claim="A3 does not depend on n")
    rep.add("slepian:A4-decreasing", "all", a4[-1], 0.0, a4[0], "pass" if decreasing else "fail",
            claim="A4 is strictly decreasing in n")
    rep.add("slepian:crossover", n_star if n_star is not None else "none",
            a4[n_values.index(n_star)] if n_star is not None else math.nan, 0.0,
            a3[0], "pass" if n_star is not None else "info",
            claim="comparison fails beyond the crossover n*")
    return rep


def write_table_csv(fh, config: SlepianConfig, n_values: Sequence[int]) -> Optional[int]:
    """CSV ``n,A3,A4,ratio``; returns the crossover ``n*`` (or None)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "A3", "A4", "ratio"])
    rep = comparison_report(config, n_values)
    for n, x, y in zip(sorted(n_values), rep.metadata["A3"], rep.metadata["A4"]):
        w.writerow([n, fmt(x), fmt(y), fmt(y / x)])
    return rep.metadata["n_star"]
