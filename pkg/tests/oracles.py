"""Independent reference values (mpmath closed forms and brute force)."""
import itertools
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 30


def exp_l2(kappa, t):
    return float((1 - mp.e ** (-2 * kappa * t)) / (2 * kappa))


def rl_l2(beta, t):
    return float(mp.mpf(t) ** (2 * beta - 1) / ((2 * beta - 1) * mp.gamma(beta) ** 2))


def mg_value(beta, t, s):
    lag = mp.mpf(t) - s
    return float(lag ** (beta - 1) * mp.hyp2f1(-beta, beta - 1, beta, -lag / t))


def stable_mass(alpha, C, a, b):
    return float(2 * C * mp.quad(lambda z: z ** (-alpha - 1), [a, b]))


def brute_force_extremes(cell_ints, lo, hi):
    """Min and max of sum_c h_c G_c over all 2^m choices h_c in {lo, hi}."""
    G = np.asarray(cell_ints, dtype=float)
    vals = [math.fsum(np.where(np.array(c), hi, lo) * G)
            for c in itertools.product((False, True), repeat=G.size)]
    return min(vals), max(vals)


def _sine_lag(t, x, m):
    return np.sin(m * np.pi * np.asarray(x, dtype=float))


def sine_kernel(m=12):
    """Sign-changing test kernel ``sin(m pi (t - s))`` with zeros on the ``1/m`` grid."""
    from functools import partial

    from convolev.kernels import Kernel

    return Kernel(lagfunc=partial(_sine_lag, m=m), T=1.0, stationary=True, singular=False,
                  endpoint_exponent=0.0, label=f"sin({m}pi x)")


def sine_cell_integrals(m=12):
    """Exact ``int g(1, s) ds`` over the cells ``[k/m, (k+1)/m]``."""
    k = np.arange(m)
    # lag x = 1 - s runs over [(m-k-1)/m, (m-k)/m]
    j = m - k - 1
    return (np.cos(np.pi * j) - np.cos(np.pi * (j + 1))) / (m * np.pi)
