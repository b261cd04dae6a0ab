"""Adaptive quadrature with power-law endpoint singularities removed by substitution.

The workhorse is :func:`scipy.integrate.quad` (QUADPACK Gauss--Kronrod with
extrapolation).  When the integrand behaves like ``(b - s)**gamma`` near the
right endpoint (or ``(s - a)**gamma`` near the left one) with ``gamma < 0``,
the change of variables ``u = (b - s)**(gamma + 1)`` turns it into a bounded,
smooth function before it reaches QUADPACK.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate as _integrate
from scipy.special import roots_jacobi, roots_legendre

from .errors import QuadratureError

EPSABS = 1e-10
EPSREL = 1e-8


def _quad(f: Callable[[float], float], a: float, b: float, epsabs: float, epsrel: float,
          limit: int) -> float:
    val, err, info = _integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                                     full_output=True)[:3]
    tol = max(epsabs, epsrel * abs(val))
    # QUADPACK reports roundoff stalls (ier=2) even when the error is already tiny.
    if not math.isfinite(val) or err > 10.0 * tol:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: "
                              f"value={val}, error estimate={err}, tolerance={tol}")
    return val


def _right_substituted(f, a, b, gamma, epsabs, epsrel, limit):
    p = 1.0 / (gamma + 1.0)
    umax = (b - a) ** (gamma + 1.0)

    def h(u):
        if u <= 0.0:
            return 0.0
        return f(b - u ** p) * p * u ** (p - 1.0)

    return _quad(h, 0.0, umax, epsabs, epsrel, limit)


def _left_substituted(f, a, b, gamma, epsabs, epsrel, limit):
    p = 1.0 / (gamma + 1.0)
    umax = (b - a) ** (gamma + 1.0)

    def h(u):
        if u <= 0.0:
            return 0.0
        return f(a + u ** p) * p * u ** (p - 1.0)

    return _quad(h, 0.0, umax, epsabs, epsrel, limit)


def integrate(f: Callable[[float], float], a: float, b: float, *, right_exponent: float = 0.0,
              left_exponent: float = 0.0, epsabs: float = EPSABS, epsrel: float = EPSREL,
              limit: int = 200) -> float:
    """Integrate a scalar function over ``[a, b]``.

    ``right_exponent``/``left_exponent`` give the power-law behaviour of ``f`` at
    the corresponding endpoint.  Exponents in ``(-1, 0)`` trigger the
    substitution; nonnegative exponents are integrated directly.

    Raises :class:`QuadratureError` when the error estimate exceeds the tolerance.
    """
    if b < a:
        return -integrate(f, b, a, right_exponent=left_exponent, left_exponent=right_exponent,
                          epsabs=epsabs, epsrel=epsrel, limit=limit)
    if b == a:
        return 0.0
    for g in (right_exponent, left_exponent):
        if g <= -1.0:
            raise QuadratureError(f"endpoint exponent {g} is not integrable")
    right = right_exponent < 0.0
    left = left_exponent < 0.0
    if right and left:
        mid = 0.5 * (a + b)
        return (_left_substituted(f, a, mid, left_exponent, epsabs / 2, epsrel, limit)
                + _right_substituted(f, mid, b, right_exponent, epsabs / 2, epsrel, limit))
    if right:
        return _right_substituted(f, a, b, right_exponent, epsabs, epsrel, limit)
    if left:
        return _left_substituted(f, a, b, left_exponent, epsabs, epsrel, limit)
    return _quad(f, a, b, epsabs, epsrel, limit)


@lru_cache(maxsize=None)
def legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


@lru_cache(maxsize=None)
def jacobi_rule(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for the weight ``(1 - x)**alpha`` on ``[-1, 1]``."""
    x, w = roots_jacobi(n, alpha, 0.0)
    return x, w
