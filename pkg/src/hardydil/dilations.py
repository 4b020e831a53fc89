"""Dilation matrices and the dilations they generate on points and functions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionMismatch,
    NonpositiveEigenvalue,
    NonpositiveScale,
    NotDerivation,
    NotDiagonalizable,
    NotInvertible,
)
from .lie import GroupPoint, LieAlgebra, _coords, _frozen

_EIG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DilationMatrix:
    """An admissible matrix together with its eigendata.

    ``eigenbasis[:, k]`` is the eigenvector for ``eigenvalues[k]``; eigenvalues
    are sorted increasingly.  For symmetric matrices the eigenbasis is
    orthonormal.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenbasis: np.ndarray
    is_derivation: bool = True

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def eigenbasis_inv(self) -> np.ndarray:
        return np.linalg.inv(self.eigenbasis)

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def power(self, r: float) -> np.ndarray:
        """The linear map ``exp(ln(r) A)``."""
        if r <= 0:
            raise NonpositiveScale(f"dilation scale must be positive, got {r}")
        return self.exp_times(np.log(r))

    def exp_times(self, s: float) -> np.ndarray:
        """``exp(s A)`` through the eigendecomposition."""
        V = self.eigenbasis
        return (V * np.exp(s * self.eigenvalues)) @ np.linalg.inv(V)

    def scaled(self, c: float) -> "DilationMatrix":
        return DilationMatrix(
            _frozen(c * self.matrix), _frozen(c * self.eigenvalues), self.eigenbasis, self.is_derivation
        )

    def normalized(self) -> "DilationMatrix":
        """Rescale so that the minimum eigenvalue is 1."""
        return self.scaled(1.0 / self.min_eigenvalue)

    @property
    def is_normalized(self) -> bool:
        return abs(self.min_eigenvalue - 1.0) <= 1e-12


@dataclass(frozen=True, eq=False)
class GeneralDilation:
    """Arbitrary invertible matrix; its dilations need not be automorphisms."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("dilation matrix must be square")
        scale = max(1.0, float(np.abs(m).max())) ** m.shape[0]
        if abs(np.linalg.det(m)) <= 1e-14 * scale:
            raise NotInvertible("dilation matrix is singular")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def exp_times(self, s: float) -> np.ndarray:
        return expm(s * self.matrix)

    def power(self, r: float) -> np.ndarray:
        if r <= 0:
            raise NonpositiveScale(f"dilation scale must be positive, got {r}")
        return self.exp_times(np.log(r))

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def _eigendata(A):
    A = np.asarray(A, dtype=float)
    if np.allclose(A, A.T, atol=1e-14, rtol=0):
        w, V = np.linalg.eigh((A + A.T) / 2)
        return w, V
    w, V = np.linalg.eig(A)
    if np.abs(w.imag).max() > _EIG_TOL * max(1.0, np.abs(w).max()):
        raise NonpositiveEigenvalue(f"matrix has non-real eigenvalues {w}")
    w, V = w.real, V.real
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    V = V / np.linalg.norm(V, axis=0)
    if np.linalg.cond(V) > 1e10:
        raise NotDiagonalizable("eigenvectors are (numerically) linearly dependent")
    return w, V


def derivation_residual(A, algebra: LieAlgebra):
    """``A[Y_i,Y_j] - [AY_i,Y_j] - [Y_i,AY_j]`` for all basis pairs, shape (n, n, n)."""
    A = np.asarray(A, dtype=float)
    c = algebra.structure_constants
    lhs = np.einsum("ijk,lk->ijl", c, A)
    # [A Y_i, Y_j] = sum_m A[m, i] c[m, j, :]
    t1 = np.einsum("mi,mjk->ijk", A, c)
    t2 = np.einsum("mj,imk->ijk", A, c)
    return lhs - t1 - t2


def check_admissible(A, algebra: LieAlgebra) -> DilationMatrix:
    """Validate an admissible dilation matrix for ``algebra``.

    Raises NotDiagonalizable, NonpositiveEigenvalue or NotDerivation.
    """
    A = np.array(A, dtype=float)
    if A.shape != (algebra.dim, algebra.dim):
        raise DimensionMismatch(f"matrix shape {A.shape} does not match algebra dimension {algebra.dim}")
    w, V = _eigendata(A)
    if w[0] <= 0:
        raise NonpositiveEigenvalue(f"eigenvalues must be positive, got {w}")
    res = derivation_residual(A, algebra)
    tol = 1e-10 * max(1.0, float(np.abs(A).max()))
    n = algebra.dim
    for i in range(n):
        for j in range(n):
            r = float(np.abs(res[i, j]).max())
            if r > tol:
                raise NotDerivation(i, j, r)
    return DilationMatrix(_frozen(A), _frozen(w), _frozen(V), True)


def as_dilation(Lam):
    if isinstance(Lam, (DilationMatrix, GeneralDilation)):
        return Lam
    return GeneralDilation(np.asarray(Lam, dtype=float))


def dilate_coords(Lam, r: float, coords):
    """``delta_r^Lam`` applied to coordinate arrays of shape (..., n)."""
    M = as_dilation(Lam).power(r)
    return np.asarray(coords, dtype=float) @ M.T


def dilate_point(Lam, r: float, x) -> GroupPoint:
    return GroupPoint(dilate_coords(Lam, r, _coords(x)))


def commute_identity_check(Lam, r: float, t: float, x) -> float:
    """Residual of ``delta_t^I delta_r^Lam x = delta_r^Lam delta_t^I x``."""
    if r <= 0 or t <= 0:
        raise NonpositiveScale("scales must be positive")
    x = _coords(x)
    M = as_dilation(Lam).power(r)
    return float(np.linalg.norm(t * (M @ x) - M @ (t * x)))


def dilate_function(Lam, t: float, p: float, f, method: str = "multilinear"):
    """``D_t^{Lam,p} f(x) = t^{tr(Lam)/p} f(delta_t^Lam x)``.

    ``method`` is ``"multilinear"`` or ``"nearest"`` (resampling onto the grid of
    ``f``) or ``"transport"``, which keeps the values and moves the nodes: the
    node ``y`` of ``f`` becomes ``delta_t^{-1} y`` of the result.  Transport is
    exact and is what the counterexample atoms use.
    """
    from .grid import GridFunction

    if t <= 0:
        raise NonpositiveScale(f"dilation scale must be positive, got {t}")
    if not isinstance(f, GridFunction):
        raise TypeError("dilate_function expects a GridFunction")
    D = as_dilation(Lam)
    factor = t ** (D.trace / p)
    if method == "transport":
        return f.transported(D.power(1.0 / t), factor)
    targets = f.grid.nodes() @ D.power(t).T
    vals = f.sample(targets, method=method)
    return GridFunction(f.grid, factor * vals.reshape(f.values.shape))


def random_derivation_basis(algebra: LieAlgebra):
    """Orthonormal basis (as n x n matrices) of the derivation algebra."""
    n = algebra.dim
    cols = []
    for a in range(n):
        for b in range(n):
            E = np.zeros((n, n))
            E[a, b] = 1.0
            cols.append(derivation_residual(E, algebra).ravel())
    M = np.array(cols).T
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10))
    null = vt[rank:]
    return [v.reshape(n, n) for v in null]


def diagonal_derivation_weights(algebra: LieAlgebra):
    """Basis of weight vectors w for which diag(w) is a derivation."""
    n = algebra.dim
    rows = []
    c = algebra.structure_constants
    for i, j, k in zip(*np.nonzero(np.abs(c) > 1e-14)):
        row = np.zeros(n)
        row[i] += 1
        row[j] += 1
        row[k] -= 1
        rows.append(row)
    if not rows:
        return np.eye(n)
    _, s, vt = np.linalg.svd(np.array(rows))
    rank = int(np.sum(s > 1e-10))
    return vt[rank:]


def random_weights(algebra: LieAlgebra, rng, weight_range=(0.5, 3.0)):
    """Positive weights w with diag(w) a derivation."""
    n = algebra.dim
    W = diagonal_derivation_weights(algebra)
    P = W.T @ np.linalg.pinv(W.T)
    for _ in range(1000):
        w = P @ rng.uniform(*weight_range, size=n)
        if w.min() > 0.1:
            return w
    raise NonpositiveEigenvalue("no positive diagonal derivation found")  # pragma: no cover


def weight_projector(algebra: LieAlgebra):
    W = diagonal_derivation_weights(algebra)
    return W.T @ np.linalg.pinv(W.T)


def random_twist(algebra: LieAlgebra, rng, size: float = 0.5):
    """A random derivation N with operator norm at most ``size``."""
    n = algebra.dim
    basis = random_derivation_basis(algebra)
    N = sum(rng.normal() * B for B in basis) if basis else np.zeros((n, n))
    return N * (size / max(np.linalg.norm(N, 2), 1e-12) * rng.uniform(0.2, 1.0))


def admissible_from(algebra: LieAlgebra, w, N) -> DilationMatrix:
    """``exp(N) diag(w) exp(-N)``: exp(N) is an automorphism, so this is a diagonalizable derivation."""
    S = expm(N)
    return check_admissible(S @ np.diag(w) @ np.linalg.inv(S), algebra)


def random_admissible(algebra: LieAlgebra, rng, weight_range=(0.5, 3.0), twist: float = 0.5) -> DilationMatrix:
    """Random admissible matrix ``exp(N) diag(w) exp(-N)`` with N a derivation."""
    w = random_weights(algebra, rng, weight_range)
    return admissible_from(algebra, w, random_twist(algebra, rng, twist))
