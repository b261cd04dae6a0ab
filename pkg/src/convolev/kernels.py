"""Volterra-type kernels g(t, s) on the triangle 0 <= s < t <= T.

All evaluation functions are vectorised over ``s`` (and broadcast over ``t``)
and are built from module-level callables so that kernels pickle cleanly into
worker processes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import gamma as _gamma

from . import quadrature
from .errors import DomainError, NumericDomainError, ParameterDomainError, QuadratureError

_DOMAIN_SLACK = 1e-12

# ---------------------------------------------------------------------------
# Gauss hypergeometric function on the real half-line x <= 0
# ---------------------------------------------------------------------------

_SERIES_RADIUS = 0.9
_MAX_TERMS = 20000


def _hyp2f1_series(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for n in range(_MAX_TERMS):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * x
        total = total + np.where(active, term, 0.0)
        active &= np.abs(term) >= 1e-15 * np.abs(total)
        if not active.any():
            return total
    raise NumericDomainError(f"2F1({a}, {b}; {c}; x) series did not converge for max|x|="
                             f"{float(np.max(np.abs(x)))}")


def hyp2f1(a: float, b: float, c: float, x) -> np.ndarray:
    """Real ``2F1(a, b; c; x)`` for ``x < 0.9``.

    Uses the power series for ``|x| < 0.9`` and the Pfaff transformation
    ``(1 - x)**(-a) * 2F1(a, c - b; c; x / (x - 1))`` for ``x <= -0.9``.
    """
    x = np.asarray(x, dtype=float)
    if c <= 0 and float(c).is_integer():
        raise NumericDomainError("c must not be a nonpositive integer")
    if np.any(~np.isfinite(x)) or np.any(x >= _SERIES_RADIUS):
        raise NumericDomainError("2F1 argument outside the supported domain (-inf, 0.9)")
    out = np.empty_like(x)
    near = np.abs(x) < _SERIES_RADIUS
    if near.any():
        out[near] = _hyp2f1_series(a, b, c, x[near])
    far = ~near
    if far.any():
        xf = x[far]
        out[far] = (1.0 - xf) ** (-a) * _hyp2f1_series(a, c - b, c, xf / (xf - 1.0))
    return out


# ---------------------------------------------------------------------------
# Kernel type
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Kernel:
    """A Volterra-type kernel.

    ``lagfunc(t, x)`` is the raw vectorised formula in terms of the lag
    ``x = t - s`` (kept separate so singular quadrature never loses the lag to
    cancellation); calling the kernel checks the domain first.  ``endpoint_exponent`` is the power ``gamma`` with
    ``|g(t, s)| ~ (t - s)**gamma`` as ``s -> t`` and drives the singular
    quadrature.  ``primitive(t, s)``, when given, satisfies
    ``d/ds primitive(t, s) = g(t, s)``.
    """

    lagfunc: Callable
    T: float
    stationary: bool
    singular: bool
    endpoint_exponent: float
    label: str
    params: Mapping[str, float] = field(default_factory=dict)
    primitive: Optional[Callable] = None
    nonnegative: bool = False
    square_integrable: bool = True

    def __call__(self, t, s):
        t_arr = np.asarray(t, dtype=float)
        s_arr = np.asarray(s, dtype=float)
        if np.any(t_arr > self.T * (1 + _DOMAIN_SLACK)) or np.any(t_arr <= 0.0):
            raise DomainError(f"t outside (0, {self.T}] for kernel {self.label}")
        if np.any(s_arr < 0.0) or np.any(s_arr >= t_arr):
            raise DomainError(f"s outside [0, t) for kernel {self.label}")
        return self.lagfunc(t_arr, t_arr - s_arr)

    def func(self, t, s):
        """Unchecked evaluation at ``(t, s)``."""
        t = np.asarray(t, dtype=float)
        return self.lagfunc(t, t - np.asarray(s, dtype=float))

    def diagonal_limit(self, t: float) -> float:
        """``lim_{s -> t-} g(t, s)``; ``inf`` for singular kernels."""
        if self.singular:
            return math.inf
        return float(self.lagfunc(np.asarray(t, dtype=float), np.asarray(0.0)))

    def l2_norm_sq(self, t: float) -> float:
        return l2_norm_sq(self, t)

    def cell_integrals(self, t: float, edges: np.ndarray) -> np.ndarray:
        return cell_integrals(self, t, edges)


def _check_T(T: float) -> None:
    if not (T > 0 and math.isfinite(T)):
        raise ParameterDomainError(f"horizon T must be positive and finite, got {T}")


def _exp_eval(t, x, kappa):
    return np.exp(-kappa * x)


def _exp_primitive(t, s, kappa):
    return np.exp(-kappa * (t - s)) / kappa


def make_exponential(kappa: float, T: float = 1.0) -> Kernel:
    """``g(t, s) = exp(-kappa (t - s))``."""
    if not kappa > 0:
        raise ParameterDomainError(f"kappa must be > 0, got {kappa}")
    _check_T(T)
    return Kernel(lagfunc=partial(_exp_eval, kappa=float(kappa)), T=float(T), stationary=True,
                  singular=False, endpoint_exponent=0.0, label=f"exp(kappa={kappa})",
                  params={"kappa": float(kappa)},
                  primitive=partial(_exp_primitive, kappa=float(kappa)), nonnegative=True)


def _rl_eval(t, x, beta, norm):
    return x ** (beta - 1.0) / norm


def _rl_primitive(t, s, beta, norm):
    return -((t - s) ** beta) / (beta * norm)


def make_riemann_liouville(beta: float, T: float = 1.0) -> Kernel:
    """``g(t, s) = (t - s)**(beta - 1) / Gamma(beta)``, square integrable iff beta > 1/2."""
    if not beta > 0.5:
        raise ParameterDomainError(f"β ≤ 1/2 (got beta={beta}): g(t, .) is not square integrable")
    _check_T(T)
    b = float(beta)
    norm = float(_gamma(b))
    return Kernel(lagfunc=partial(_rl_eval, beta=b, norm=norm), T=float(T), stationary=True,
                  singular=b < 1.0, endpoint_exponent=b - 1.0, label=f"rl(beta={beta})",
                  params={"beta": b}, primitive=partial(_rl_primitive, beta=b, norm=norm),
                  nonnegative=True)


MG_ARGUMENT_CONVENTIONS = ("t", "s")


def _mg_eval(t, lag, beta, convention):
    t, lag = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(lag, dtype=float))
    denom = t if convention == "t" else t - lag
    if convention == "s" and np.any(denom <= 0.0):
        raise NumericDomainError("Molchan-Golosov argument -(t-s)/s is undefined at s = 0")
    x = -lag / denom
    return lag ** (beta - 1.0) * hyp2f1(-beta, beta - 1.0, beta, x)


def make_molchan_golosov(beta: float, T: float = 1.0, convention: str = "t") -> Kernel:
    """``g(t, s) = (t - s)**(beta - 1) 2F1(-beta, beta - 1; beta; x)``.

    ``convention`` selects the hypergeometric argument: ``"t"`` gives
    ``x = -(t - s)/t`` (default), ``"s"`` gives ``x = -(t - s)/s``.  The latter
    blows up like ``s**(-beta)`` as ``s -> 0`` and is not square integrable there.
    """
    if not beta > 0.5:
        raise ParameterDomainError(f"β ≤ 1/2 (got beta={beta}): g(t, .) is not square integrable")
    if convention not in MG_ARGUMENT_CONVENTIONS:
        raise ParameterDomainError(f"unknown argument convention {convention!r}")
    _check_T(T)
    b = float(beta)
    return Kernel(lagfunc=partial(_mg_eval, beta=b, convention=convention), T=float(T),
                  stationary=False, singular=b < 1.0, endpoint_exponent=b - 1.0,
                  label=f"mg(beta={beta},x=-(t-s)/{convention})",
                  params={"beta": b}, nonnegative=False,
                  # s**(-beta) blow-up at s = 0 under the "s" argument
                  square_integrable=convention == "t")


def _product_eval(t, x, a, b):
    return a.lagfunc(t, x) * b.lagfunc(t, x)


def make_product(a: Kernel, b: Kernel) -> Kernel:
    """Pointwise product of two kernels sharing the same horizon."""
    if a.T != b.T:
        raise ParameterDomainError(f"kernels have different horizons {a.T} and {b.T}")
    return Kernel(lagfunc=partial(_product_eval, a=a, b=b), T=a.T,
                  stationary=a.stationary and b.stationary, singular=a.singular or b.singular,
                  endpoint_exponent=a.endpoint_exponent + b.endpoint_exponent,
                  label=f"{a.label}*{b.label}", params={**a.params, **b.params},
                  nonnegative=a.nonnegative and b.nonnegative,
                  square_integrable=a.square_integrable and b.square_integrable)


def make_kernel(spec: Mapping, T: float = 1.0) -> Kernel:
    """Build a kernel from a config mapping such as ``{"type": "rl", "beta": 0.75}``."""
    kind = str(spec.get("type", "")).lower()
    T = float(spec.get("T", T))
    if kind in ("exp", "exponential"):
        return make_exponential(float(spec["kappa"]), T)
    if kind in ("rl", "riemann_liouville", "riemann-liouville"):
        return make_riemann_liouville(float(spec["beta"]), T)
    if kind in ("mg", "molchan_golosov", "molchan-golosov"):
        return make_molchan_golosov(float(spec["beta"]), T, str(spec.get("convention", "t")))
    if kind in ("exp_rl", "product"):
        return make_product(make_exponential(float(spec["kappa"]), T),
                            make_riemann_liouville(float(spec["beta"]), T))
    raise ParameterDomainError(f"unknown kernel type {kind!r}")


# ---------------------------------------------------------------------------
# Integrals of the kernel
# ---------------------------------------------------------------------------


def _check_time(k: Kernel, t: float) -> None:
    if not (0.0 < t <= k.T * (1 + _DOMAIN_SLACK)):
        raise DomainError(f"t={t} outside (0, {k.T}]")


def integrate_against(k: Kernel, t: float, fn: Callable, a: float = 0.0, b: Optional[float] = None,
                      power: int = 1) -> float:
    """``int_a^b g(t, s)**power * fn(s) ds`` with the singular endpoint handled.

    Integrates in the lag variable ``x = t - s`` so the singularity sits at
    ``x = 0`` where floating point has full resolution.
    """
    _check_time(k, t)
    b = t if b is None else b
    if b > t * (1 + _DOMAIN_SLACK) or a < 0.0:
        raise DomainError(f"integration range [{a}, {b}] outside [0, {t}]")
    touches = b >= t
    gamma_ = power * k.endpoint_exponent if touches else 0.0
    tt = np.asarray(t, dtype=float)

    def f(x):
        g = k.lagfunc(tt, np.asarray(x))
        return float(g ** power * fn(t - x))

    return quadrature.integrate(f, max(t - b, 0.0), t - a, left_exponent=gamma_)


def l2_norm_sq(k: Kernel, t: float) -> float:
    """``int_0^t g(t, s)**2 ds``."""
    _check_time(k, t)
    if not k.square_integrable:
        raise QuadratureError(f"{k.label}: g(t, .)**2 is not integrable on [0, t)")
    return integrate_against(k, t, _one, power=2)


def _one(s):
    return 1.0


_GL_NODES = 16


def cell_integrals(k: Kernel, t: float, edges: np.ndarray) -> np.ndarray:
    """``int_{e_i}^{e_{i+1}} g(t, u) du`` for consecutive edges inside ``[0, t]``.

    Uses the primitive when available.  Otherwise interior cells use 16-point
    Gauss--Legendre and a cell ending at ``t`` uses Gauss--Jacobi with the
    weight ``(t - u)**endpoint_exponent``.
    """
    _check_time(k, t)
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.zeros(0)
    if np.any(np.diff(edges) < 0) or edges[0] < 0 or edges[-1] > t * (1 + _DOMAIN_SLACK):
        raise DomainError("cell edges must be sorted inside [0, t]")
    edges = np.minimum(edges, t)
    if k.primitive is not None:
        vals = k.primitive(np.asarray(t), edges)
        return np.diff(vals)
    lo, hi = edges[:-1], edges[1:]
    out = np.zeros(lo.size)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    last = hi >= t
    inner = (~last) & (half > 0)
    if inner.any():
        x, w = quadrature.legendre_rule(_GL_NODES)
        nodes = mid[inner, None] + half[inner, None] * x[None, :]
        vals = k.func(np.asarray(t), nodes)
        out[inner] = half[inner] * (vals @ w)
    tail = last & (half > 0)
    if tail.any():
        gam = k.endpoint_exponent
        x, w = quadrature.jacobi_rule(_GL_NODES, float(gam))
        lag = half[tail, None] * (1.0 - x[None, :])
        smooth = k.lagfunc(np.asarray(t), lag) / lag ** gam
        out[tail] = half[tail] ** (gam + 1.0) * (smooth @ w)
    return out


_GRADING_LEVELS = 24
_UNIFORM_PANELS = 8


@lru_cache(maxsize=4096)
def weighted_rule(k: Kernel, t: float, a: float = 0.0, b: Optional[float] = None):
    """Nodes ``s`` and weights ``w`` with ``sum(w * phi(s)) ~ int_a^b g(t, s) phi(s) ds``.

    The rule is fixed for given ``(k, t, a, b)``, so it is an exactly linear
    functional of ``phi``.  When ``[a, b]`` reaches ``t`` and the kernel has a
    power-law endpoint, panels are graded geometrically toward ``t`` and the
    innermost panel uses Gauss--Jacobi; otherwise uniform Gauss--Legendre
    panels are used.
    """
    _check_time(k, t)
    b = t if b is None else float(b)
    if not 0.0 <= a < b <= t * (1 + _DOMAIN_SLACK):
        raise DomainError(f"integration range [{a}, {b}] outside [0, {t}]")
    b = min(b, t)
    tt = np.asarray(t, dtype=float)
    x, w = quadrature.legendre_rule(_GL_NODES)
    gam = k.endpoint_exponent
    lag_lo, lag_hi = t - b, t - a
    if lag_lo == 0.0 and gam != 0.0:
        edges = lag_hi * 2.0 ** -np.arange(_GRADING_LEVELS, -1, -1.0)
        xj, wj = quadrature.jacobi_rule(_GL_NODES, float(gam))
        h0 = 0.5 * edges[0]
        lag0 = h0 * (1.0 - xj)
        w0 = h0 ** (gam + 1.0) * wj * k.lagfunc(tt, lag0) / lag0 ** gam
        lo, hi = edges[:-1], edges[1:]
        lags = [lag0]
        weights = [w0]
    else:
        edges = np.linspace(lag_lo, lag_hi, _UNIFORM_PANELS + 1)
        lo, hi = edges[:-1], edges[1:]
        lags, weights = [], []
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    lag = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    lags.append(lag)
    weights.append((half[:, None] * w[None, :]).ravel() * k.lagfunc(tt, lag))
    lag = np.concatenate(lags)
    wts = np.concatenate(weights)
    s = t - lag
    s.setflags(write=False)
    wts.setflags(write=False)
    return s, wts
