"""Independent reference computations used by the tests.

None of these call into the library's own BCH, quasi-norm or sequence code.
"""
import itertools
import math

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq


def _E(size, a, b):
    m = np.zeros((size, size))
    m[a, b] = 1.0
    return m


def heisenberg_rep():
    return [_E(3, 0, 1), _E(3, 1, 2), _E(3, 0, 2)]


def engel_rep():
    # Y1 = E12 + E23, Y2 = E01, [Y1,Y2] = -E02 =: Y3, [Y1,Y3] = E03 =: Y4
    return [_E(4, 1, 2) + _E(4, 2, 3), _E(4, 0, 1), -_E(4, 0, 2), _E(4, 0, 3)]


def upper_rep(size):
    return [_E(size, a, b) for a in range(size) for b in range(a + 1, size)]


def _nilpotent_log(M):
    n = M.shape[0]
    N = M - np.eye(n)
    out = np.zeros_like(M)
    P = np.eye(n)
    for k in range(1, n + 1):
        P = P @ N
        out += ((-1) ** (k + 1) / k) * P
    return out


def matrix_product(basis, x, y):
    """Coordinates of ``log(exp X exp Y)`` in a faithful nilpotent matrix representation."""
    X = sum(c * E for c, E in zip(x, basis))
    Y = sum(c * E for c, E in zip(y, basis))
    L = _nilpotent_log(expm(X) @ expm(Y))
    design = np.stack([E.ravel() for E in basis], axis=1)
    coef, *_ = np.linalg.lstsq(design, L.ravel(), rcond=None)
    return coef


def diagonal_quasi_norm(weights, x):
    """Root of ``sum x_i^2 r^{-2 w_i} = 1`` by bracketing."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return 0.0
    w = np.asarray(weights, dtype=float)
    f = lambda r: float(np.sum(x**2 * r ** (-2 * w))) - 1.0  # noqa: E731
    lo, hi = 1e-6, 1.0
    while f(hi) > 0:
        hi *= 2
    while f(lo) < 0:
        lo /= 2
    return brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)


def semigroup_bruteforce(weights, cap):
    """All sums ``sum k_i w_i <= cap`` by exhaustive enumeration, deduplicated."""
    w = list(weights)
    bound = [int(cap // wi) for wi in w]
    vals = set()
    for ks in itertools.product(*[range(b + 1) for b in bound]):
        s = sum(k * wi for k, wi in zip(ks, w))
        if s <= cap + 1e-12:
            vals.add(round(s, 9))
    return sorted(vals)


def diagonal_dj(a, b, j):
    """Smallest integer m with ``max_i (j a_i - (floor(eps j) + m) b_i) <= 0``, in closed form."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    F = math.floor(a.sum() / b.sum() * j + 1e-9)
    return math.ceil(max(j * a / b) - F - 1e-12)


def triangle(x):
    """``(1_[0,1] * 1_[0,1])(x)``."""
    return np.clip(1.0 - np.abs(np.asarray(x) - 1.0), 0.0, None)
