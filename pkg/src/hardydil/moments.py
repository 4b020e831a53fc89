"""Multi-indices, homogeneous degrees, the semigroup of degrees and monomials."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dilations import DilationMatrix, as_dilation
from .errors import DimensionMismatch

_DEDUP = 1e-9


def multi_indices(n: int, max_degree: int):
    """All ``I`` in N_0^n with ``|I| <= max_degree``, ordered by degree then lexicographically."""
    out = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            I = [0] * n
            for c in combo:
                I[c] += 1
            out.append(tuple(I))
    return sorted(set(out), key=lambda I: (sum(I), tuple(-i for i in I)))


def count_multi_indices(n: int, max_degree: int) -> int:
    """``n_alpha = #{I : |I| <= alpha} = C(alpha + n, n)``."""
    return math.comb(max_degree + n, n)


def homogeneous_degree(I, A: DilationMatrix) -> float:
    I = np.asarray(I)
    v = A.eigenvalues if isinstance(A, DilationMatrix) else np.asarray(A, dtype=float)
    if I.shape[-1] != v.shape[0]:
        raise DimensionMismatch(f"multi-index of length {I.shape[-1]} for {v.shape[0]} eigenvalues")
    return float(np.dot(I, v))


def delta_semigroup(A, cap: float):
    """Elements of the semigroup generated by 0 and the eigenvalues, up to ``cap``."""
    v = A.eigenvalues if isinstance(A, DilationMatrix) else np.asarray(A, dtype=float)
    if cap < 0:
        return []
    found = [0.0]
    frontier = [0.0]
    while frontier:
        nxt = []
        for a in frontier:
            for w in v:
                b = float(a + w)
                if b > cap + _DEDUP:
                    continue
                if all(abs(b - c) > _DEDUP for c in found):
                    found.append(b)
                    nxt.append(b)
        frontier = nxt
    return sorted(found)


def min_admissible_alpha(A, p: float) -> float:
    """``max{a in Delta_A : a <= tr(A)(1/p - 1)}``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    tr = A.trace if isinstance(A, DilationMatrix) else float(np.sum(A))
    thresh = tr * (1.0 / p - 1.0)
    return max(delta_semigroup(A, thresh + _DEDUP))


def shared_alpha(A, B, p: float) -> int:
    """Smallest natural number admissible for both matrices."""
    return int(math.ceil(max(min_admissible_alpha(A, p), min_admissible_alpha(B, p)) - _DEDUP))


@dataclass(frozen=True, eq=False)
class PolynomialBasis:
    """Coordinate functionals: isotropic (``change=I``) or A-adapted (``change=V^{-1}``)."""

    kind: str
    change: np.ndarray

    @classmethod
    def isotropic(cls, n: int):
        return cls("isotropic", np.eye(n))

    @classmethod
    def adapted(cls, A: DilationMatrix):
        return cls("adapted", A.eigenbasis_inv)

    def functionals(self, x):
        return np.asarray(x, dtype=float) @ self.change.T


def eval_monomial(basis: PolynomialBasis, I, x):
    """``eta^I(x) = prod_k eta_k(x)^{i_k}``."""
    eta = basis.functionals(x)
    return np.prod(eta ** np.asarray(I), axis=-1)


def monomial_matrix(basis: PolynomialBasis, indices, x):
    """Rows: points, columns: monomials."""
    eta = basis.functionals(np.atleast_2d(x))
    return np.stack([np.prod(eta ** np.asarray(I), axis=-1) for I in indices], axis=-1)


def adapted_indices(A: DilationMatrix, alpha: float):
    """Multi-indices with ``d_A(I) <= alpha`` (the monomials spanning P_alpha^A)."""
    v = A.eigenvalues
    max_iso = int(math.floor(alpha / v[0] + _DEDUP))
    return [I for I in multi_indices(A.dim, max_iso) if np.dot(I, v) <= alpha + _DEDUP]


def fit_isotropic(values, points, max_degree: int):
    """Least-squares coefficients in the isotropic monomial basis up to ``max_degree``."""
    n = points.shape[1]
    idx = multi_indices(n, max_degree)
    V = monomial_matrix(PolynomialBasis.isotropic(n), idx, points)
    coef, *_ = np.linalg.lstsq(V, values, rcond=None)
    return dict(zip(idx, coef))


def poly_degree_closure_check(N: int, Lam, t: float, samples: int = 200, rng=None, poly=None, tol: float = 1e-9):
    """Check that ``P o delta_t^Lam`` still has isotropic degree <= N.

    ``poly`` is a dict ``{I: coefficient}``; by default a random element of
    P_N.  The composition is re-expanded by least squares on sample points in
    the monomials of degree <= N+1, and the coefficients above degree N must
    vanish.  Returns ``(passed, residual)``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    D = as_dilation(Lam)
    n = D.dim
    if poly is None:
        poly = {I: rng.normal() for I in multi_indices(n, N)}
    top = max(N, max(sum(I) for I in poly)) + 1
    pts = rng.uniform(-1, 1, size=(max(samples, 4 * count_multi_indices(n, top)), n))
    basis = PolynomialBasis.isotropic(n)
    moved = pts @ D.power(t).T
    vals = sum(c * eval_monomial(basis, I, moved) for I, c in poly.items())
    coef = fit_isotropic(vals, pts, top)
    scale = max(1.0, max(abs(c) for c in coef.values()))
    residual = max((abs(c) for I, c in coef.items() if sum(I) > N), default=0.0) / scale
    return residual <= tol, float(residual)


def adapted_in_isotropic_check(A: DilationMatrix, N: float, tol: float = 1e-9, rng=None):
    """Every A-adapted monomial of homogeneous degree <= N re-expands with isotropic degree <= N."""
    rng = np.random.default_rng(0) if rng is None else rng
    n = A.dim
    iso_top = int(math.floor(N)) + 1
    pts = rng.uniform(-1, 1, size=(4 * count_multi_indices(n, iso_top) + 50, n))
    ad = PolynomialBasis.adapted(A)
    worst = 0.0
    for I in adapted_indices(A, N):
        vals = eval_monomial(ad, I, pts)
        coef = fit_isotropic(vals, pts, iso_top)
        scale = max(1.0, max(abs(c) for c in coef.values()))
        worst = max(worst, max((abs(c) for J, c in coef.items() if sum(J) > N + 1e-9), default=0.0) / scale)
    return worst <= tol, worst
