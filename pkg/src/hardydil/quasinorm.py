"""Homogeneous quasi-norms, balls and their comparison constants.

The quasi-norm is the implicit unit-sphere gauge: ``rho_A(x)`` is the unique
``r > 0`` with ``|delta_{1/r}^A x|_A = 1``.  Here ``|.|_A`` is the Euclidean
norm of the eigen-coordinates ``V^{-1} x``; for symmetric ``A`` (orthonormal
eigenbasis) this is the coordinate norm itself.  In eigen-coordinates the
dilation is diagonal with positive factors, so the map ``r -> |delta_{1/r} x|_A``
is strictly decreasing and the root is unique.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .dilations import DilationMatrix
from .errors import NotNormalized, SolverBracketFailure
from .grid import unit_ball_volume
from .lie import GroupPoint, LieAlgebra, _coords, bch_coords


@dataclass(frozen=True, eq=False)
class QuasiNormHandle:
    dilation: DilationMatrix
    algebra: LieAlgebra
    solver_tolerance: float = 1e-15
    constants: dict = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        return 1.0 / self.dilation.max_eigenvalue

    def eigen_coords(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.dilation.eigenbasis_inv.T

    def __call__(self, x):
        return quasi_norm(self, x)

    def unit_ball_measure(self) -> float:
        """``mu(B^A(e,1))``: the unit ball is ``V`` applied to the Euclidean unit ball."""
        return abs(float(np.linalg.det(self.dilation.eigenbasis))) * unit_ball_volume(self.dilation.dim)

    def sample_ball(self, R: float, count: int, rng):
        """Uniform samples from ``B^A(e,R)`` (a linear image of a Euclidean ball, dilated)."""
        n = self.dilation.dim
        g = rng.standard_normal((count, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        w = g * rng.random((count, 1)) ** (1.0 / n)
        unit = w @ self.dilation.eigenbasis.T
        return unit @ self.dilation.power(R).T


def quasi_norm(h: QuasiNormHandle, x):
    """``rho_A`` at one point or an array of points (shape (..., n)).

    Solved by bisection in ``s = ln r`` on the bracket
    ``[ln|y|/v_max, ln|y|/v_min]`` (in either order), where ``y`` are the
    eigen-coordinates; the root always lies between those two values.
    """
    scalar = isinstance(x, GroupPoint) or np.ndim(x) == 1
    y = h.eigen_coords(_coords(x))
    ya = np.abs(np.atleast_2d(y))
    v = h.dilation.eigenvalues
    zero = ~np.any(ya > 0, axis=-1)
    # log form throughout: |y|^2 and e^{-2 s v} over/underflow for extreme |x|
    with np.errstate(divide="ignore"):
        ly = 2.0 * np.log(np.where(zero[:, None], 1.0, ya))
    ln = 0.5 * logsumexp(ly, axis=-1)
    a = np.minimum(ln / v[-1], ln / v[0])
    b = np.maximum(ln / v[-1], ln / v[0])
    a = a - 1e-12 * (1 + np.abs(a))
    b = b + 1e-12 * (1 + np.abs(b))

    def g(s):
        return logsumexp(ly - 2.0 * s[:, None] * v[None, :], axis=-1)

    ga, gb = g(a), g(b)
    if np.any((ga < 0) & ~zero) or np.any((gb > 0) & ~zero):
        raise SolverBracketFailure("quasi-norm root not bracketed")
    tol = h.solver_tolerance
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = g(mid)
        upper = gm < 0
        b = np.where(upper, mid, b)
        a = np.where(upper, a, mid)
        if np.all(b - a <= tol * (1 + np.abs(mid))):
            break
    r = np.exp(0.5 * (a + b))
    r = np.where(zero, 0.0, r)
    if scalar:
        return float(r.reshape(-1)[0])
    return r.reshape(np.shape(y)[:-1])


def explicit_quasi_norm(h: QuasiNormHandle, x, N: int | None = None):
    """The explicit gauge ``(sum |y_i|^{2N/v_i})^{1/(2N)}`` in eigen-coordinates.

    ``N`` defaults to the smallest integer with ``2N/v_i >= 1`` for all i.
    Homogeneous of degree one for the same dilations, hence equivalent to
    :func:`quasi_norm`.
    """
    v = h.dilation.eigenvalues
    if N is None:
        N = max(1, math.ceil(v.max() / 2))
    y = np.abs(h.eigen_coords(_coords(x)))
    return np.sum(y ** (2 * N / v), axis=-1) ** (1.0 / (2 * N))


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float
    norm_kind: str = "quasi"  # "quasi" for B^A, "euclid" for B
    handle: QuasiNormHandle | None = None
    algebra: LieAlgebra | None = None


def ball_membership(b: Ball, x) -> np.ndarray | bool:
    """``rho_A(x0^{-1} x) < r`` (or ``|x0^{-1} x| < r`` for Euclidean balls)."""
    alg = b.algebra if b.algebra is not None else b.handle.algebra
    pts = _coords(x)
    rel = bch_coords(-np.asarray(_coords(b.center), dtype=float), pts, alg)
    if b.norm_kind == "euclid":
        val = np.linalg.norm(rel, axis=-1)
    else:
        val = quasi_norm(b.handle, rel)
    out = val < b.radius
    return bool(out) if np.ndim(out) == 0 else out


def _seeded_chunks(seed: int, count: int, chunk: int = 1000):
    """Deterministic per-chunk generators; prefixes agree across counts."""
    ss = np.random.SeedSequence(seed)
    nchunks = -(-count // chunk)
    for i, child in enumerate(ss.spawn(nchunks)):
        yield np.random.default_rng(child), min(chunk, count - i * chunk)


def estimate_quasi_triangle_C(h: QuasiNormHandle, sample_count: int, seed: int = 0, R: float = 10.0) -> dict:
    """Sampled ``max rho(xy)/(rho(x)+rho(y))`` over pairs in ``B^A(e,R)``.

    Nondecreasing in ``sample_count`` for a fixed seed: a larger run sees the
    same pairs first.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    best = 0.0
    for rng, k in _seeded_chunks(seed, sample_count):
        x = h.sample_ball(R, k, rng)
        y = h.sample_ball(R, k, rng)
        xy = bch_coords(x, y, h.algebra)
        ratio = quasi_norm(h, xy) / (quasi_norm(h, x) + quasi_norm(h, y))
        best = max(best, float(np.max(ratio)))
    return {"C": best, "samples": sample_count, "seed": seed, "R": R}


def _refine_extreme(h, R, starts, objective):
    """Locally improve ``objective`` (minimized) over ``x = delta_R V w``, |w| <= 1."""
    V = h.dilation.eigenbasis
    DR = h.dilation.power(R)

    def point(w):
        nw = np.linalg.norm(w)
        if nw > 1:
            w = w / nw
        return DR @ (V @ w)

    best = None
    for w0 in starts:
        res = minimize(lambda w: objective(point(w)), w0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        val = objective(point(res.x))
        if best is None or val < best:
            best = val
    return best


def estimate_eta_constants(h: QuasiNormHandle, R: float, sample_count: int, seed: int = 0, refine: int = 8) -> dict:
    """Constants ``gamma, c1, c2`` with ``c1 |x| <= rho(x) <= c2 |x|^gamma`` on ``B^A(e,R)``.

    ``gamma = 1/v_n``.  ``c1``/``c2`` are the sampled extremes of the two
    ratios, pushed further by a few local searches started from the best
    samples so that fresh samples are unlikely to exceed them.
    """
    if not h.dilation.is_normalized:
        raise NotNormalized(f"minimum eigenvalue is {h.dilation.min_eigenvalue}, expected 1")
    gamma = h.gamma
    rng = np.random.default_rng(seed)
    x = h.sample_ball(R, sample_count, rng)
    nx = np.linalg.norm(x, axis=1)
    keep = nx > 0
    x, nx = x[keep], nx[keep]
    rho = quasi_norm(h, x)
    low = rho / nx
    high = rho / nx**gamma
    c1 = float(low.min())
    c2 = float(high.max())
    if refine:
        Vinv = h.dilation.eigenbasis_inv
        DRinv = h.dilation.power(1.0 / R)
        to_w = lambda pts: pts @ DRinv.T @ Vinv.T  # noqa: E731

        def lowf(p):
            n = np.linalg.norm(p)
            return quasi_norm(h, p) / n if n > 0 else np.inf

        def highf(p):
            n = np.linalg.norm(p)
            return -quasi_norm(h, p) / n**gamma if n > 0 else np.inf

        starts = to_w(x[np.argsort(low)[:refine]])
        c1 = min(c1, _refine_extreme(h, R, starts, lowf))
        starts = to_w(x[np.argsort(-high)[:refine]])
        c2 = max(c2, -_refine_extreme(h, R, starts, highf))
    return {"gamma": gamma, "c1": c1, "c2": c2, "R": R, "samples": sample_count, "seed": seed}


def euclid_quasi_triangle(h: QuasiNormHandle, R: float, x, y, gamma: float | None = None):
    """``|xy| / (|x|^gamma + |y|^gamma)`` for points in the closed Euclidean ball of radius R.

    Returns ``(C_required, inside)`` where ``inside`` flags pairs that satisfy
    the precondition.
    """
    gamma = h.gamma if gamma is None else gamma
    x = np.asarray(_coords(x), dtype=float)
    y = np.asarray(_coords(y), dtype=float)
    xy = bch_coords(x, y, h.algebra)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.linalg.norm(xy, axis=-1) / (nx**gamma + ny**gamma)
    inside = (nx <= R) & (ny <= R)
    return c, inside


def sample_euclid_ball(n: int, R: float, count: int, rng):
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return R * g * rng.random((count, 1)) ** (1.0 / n)
