"""Group convolution on grids and the radial maximal function.

All convolutions are direct node sums ``sum_y f(y) g(y^{-1} x) h^n`` over the
support of ``f``; the kernel is evaluated exactly when it is a callable and
by multilinear interpolation when it is a grid function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dilations import DilationMatrix
from .errors import GridMismatch, LadderEmpty
from .grid import GridFunction, GridSpec
from .lie import LieAlgebra, bch_coords

_PAIR_BUDGET = 2_000_000


@dataclass(frozen=True)
class Ladder:
    """Geometric scales ``t = exp(k/q)`` for the listed integers ``k``."""

    q: int = 8
    ks: tuple = tuple(range(-48, 49))

    @classmethod
    def symmetric(cls, q: int = 8, K: int = 48) -> "Ladder":
        return cls(q, tuple(range(-K, K + 1)))

    @classmethod
    def span(cls, q: int, k_min: int, k_max: int) -> "Ladder":
        return cls(q, tuple(range(k_min, k_max + 1)))

    @property
    def log_scales(self) -> np.ndarray:
        return np.asarray(self.ks, dtype=float) / self.q

    @property
    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    def refined(self, factor: int = 2) -> "Ladder":
        lo, hi = min(self.ks), max(self.ks)
        return Ladder.span(self.q * factor, lo * factor, hi * factor)

    def __len__(self):
        return len(self.ks)


@dataclass
class MaximalResult:
    values: np.ndarray
    t_ladder: np.ndarray
    argmax_t: np.ndarray
    grid: GridSpec | None = None
    terms: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def as_grid_function(self) -> GridFunction:
        if self.grid is None:
            raise ValueError("result was evaluated at scattered points")
        return GridFunction(self.grid, self.values)


def _kernel_fn(phi):
    if isinstance(phi, GridFunction):
        return lambda w: phi.sample(w.reshape(-1, w.shape[-1]), "multilinear").reshape(w.shape[:-1])
    return phi


def _pairwise_terms(src_pts, src_w, targets, algebra: LieAlgebra, kernels):
    """``out[k, i] = sum_y src_w[y] kernels[k](y^{-1} targets[i])``."""
    out = np.zeros((len(kernels), len(targets)))
    if len(src_pts) == 0:
        return out
    step = max(1, _PAIR_BUDGET // len(src_pts))
    neg = -src_pts
    for a in range(0, len(targets), step):
        x = targets[a:a + step]
        rel = bch_coords(neg[:, None, :], x[None, :, :], algebra)
        for k, ker in enumerate(kernels):
            out[k, a:a + step] = src_w @ ker(rel)
    return out


def group_convolve(f: GridFunction, g: GridFunction, algebra: LieAlgebra) -> GridFunction:
    """``(f*g)(x) = int f(y) g(y^{-1} x) dmu(y)`` on the common grid."""
    if not f.grid.same_as(g.grid):
        raise GridMismatch("convolution factors must share a grid")
    pts, vals = f.support()
    ker = _kernel_fn(g)
    out = _pairwise_terms(pts, vals * f.grid.weight, f.nodes(), algebra, [ker])[0]
    return GridFunction(f.grid, out)


def dilated_kernel(phi, A: DilationMatrix, log_t: float):
    """``phi_t^A(w) = t^{tr A} phi(delta_t^A w)`` with ``t = e^{log_t}``."""
    D = A.exp_times(log_t)
    amp = math.exp(log_t * A.trace)
    ker = _kernel_fn(phi)
    return lambda w: amp * ker(w @ D.T)


def _check_normalized(phi, tol=1e-6):
    if isinstance(phi, GridFunction):
        total = phi.integral()
        if abs(total - 1.0) > tol:
            raise ValueError(f"test function integrates to {total}, expected 1")
    elif getattr(phi, "normalized", True) is False:
        raise ValueError("test function must be normalized")


def ladder_terms(f: GridFunction, phi, A: DilationMatrix, log_scales, algebra: LieAlgebra, points):
    """``|f * phi_t^A|`` at ``points`` for every scale; shape (scales, points)."""
    pts, vals = f.support()
    kernels = [dilated_kernel(phi, A, s) for s in log_scales]
    return np.abs(_pairwise_terms(pts, vals * f.grid.weight, points, algebra, kernels))


def radial_maximal(f: GridFunction, phi, A: DilationMatrix, ladder: Ladder, algebra: LieAlgebra,
                   points=None, eval_grid: GridSpec | None = None, keep_terms: bool = False) -> MaximalResult:
    """``sup_t |f * phi_t^A|`` over the ladder, at grid nodes or scattered points.

    Defaults to the nodes of ``f``'s grid.  Records the maximizing scale.
    """
    if len(ladder) == 0:
        raise LadderEmpty("ladder has no scales")
    _check_normalized(phi)
    grid = None
    if points is None:
        grid = eval_grid if eval_grid is not None else f.grid
        points = grid.nodes()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    terms = ladder_terms(f, phi, A, ladder.log_scales, algebra, points)
    k = np.argmax(terms, axis=0)
    vals = terms[k, np.arange(terms.shape[1])]
    return MaximalResult(vals, ladder.scales, ladder.scales[k], grid, terms if keep_terms else None)


def scaling_invariance_check(f: GridFunction, phi, A: DilationMatrix, c: float, ladder: Ladder,
                             algebra: LieAlgebra, matched: bool = True, points=None) -> float:
    """Max node difference between the ladder sups for ``A`` and for ``cA``.

    Matched: the ``cA`` ladder uses ``t^{1/c}``, so each term equals a term of
    the ``A`` ladder (``phi_{t^{1/c}}^{cA} = phi_t^A``).  Unmatched: the same
    scales for both, a negative control.
    """
    logs = ladder.log_scales
    mA = radial_maximal(f, phi, A, ladder, algebra, points=points)
    cA = A.scaled(c)
    other = logs / c if matched else logs
    terms = ladder_terms(f, phi, cA, other, algebra,
                         f.nodes() if points is None else np.atleast_2d(points))
    return float(np.abs(terms.max(axis=0) - mA.values).max())


def grand_maximal_proxy(f: GridFunction, dictionary, A: DilationMatrix, ladder: Ladder,
                        algebra: LieAlgebra, points=None, eval_grid=None) -> np.ndarray:
    """Pointwise max of radial maximal functions over a finite dictionary of test functions."""
    if not dictionary:
        raise ValueError("dictionary must not be empty")
    out = None
    for phi in dictionary:
        v = radial_maximal(f, phi, A, ladder, algebra, points=points, eval_grid=eval_grid).values
        out = v if out is None else np.maximum(out, v)
    return out
