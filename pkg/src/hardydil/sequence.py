"""The counterexample sequence: d_j, the maps M_j = exp(Q_j), and auxiliary atoms.

For two admissible matrices with ``eps = tr(A)/tr(B)`` we use

    M_j = exp(A)^j exp(B)^(-floor(eps j) - d_j),

with ``d_j`` the smallest integer giving ``|M_j| <= 1``.  ``Q_j`` itself is
never formed: ``tr(Q_j) = ln det M_j``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .atoms import Atom
from .dilations import DilationMatrix
from .errors import DegenerateSingularGap, NotNormalized
from .grid import GridSpec
from .lie import bch_coords

_FLOOR_SLACK = 1e-9
_NORM_SLACK = 1e-12
_GAP_TOL = 1e-12


def log_norm_product(A: DilationMatrix, s: float, B: DilationMatrix, t: float) -> float:
    """``ln |exp(sA) exp(tB)|_2`` without overflow.

    Commuting matrices give ``exp(sA + tB)``, evaluated directly so that
    cancelling exponents never meet round-off.  Otherwise both factors are
    expanded in eigenbases and the largest exponent is pulled out before
    multiplying; then the result is only as accurate as
    ``e^{max exponent} * machine epsilon`` allows.
    """
    if _commute(A, B):
        X = s * A.matrix + t * B.matrix
        nx = float(np.linalg.norm(X, 2))
        if nx < 600:
            return math.log(np.linalg.norm(expm(X), 2))
        k = int(math.ceil(math.log2(nx / 100)))
        # exp(X) = exp(X/2^k)^(2^k), renormalizing each square
        E = expm(X / 2**k)
        logscale = 0.0
        for _ in range(k):
            nrm = np.linalg.norm(E, 2)
            E = E / nrm
            logscale = 2 * (logscale + math.log(nrm))
            E = E @ E
        return logscale + math.log(np.linalg.norm(E, 2))
    C = A.eigenbasis_inv @ B.eigenbasis
    E = s * A.eigenvalues[:, None] + t * B.eigenvalues[None, :]
    m = float(E.max())
    K = A.eigenbasis @ (C * np.exp(E - m)) @ B.eigenbasis_inv
    return m + math.log(np.linalg.norm(K, 2))


def _commute(A: DilationMatrix, B: DilationMatrix) -> bool:
    a, b = A.matrix, B.matrix
    return float(np.linalg.norm(a @ b - b @ a)) <= 1e-13 * float(np.linalg.norm(a) * np.linalg.norm(b))


def eps_ratio(A: DilationMatrix, B: DilationMatrix) -> float:
    return A.trace / B.trace


def floor_term(eps: float, j: int) -> int:
    """``floor(eps j)``, robust to round-off just below an integer."""
    return int(math.floor(eps * j + _FLOOR_SLACK))


def compute_dj(A: DilationMatrix, B: DilationMatrix, j: int, max_steps: int = 100000) -> int:
    """Smallest integer ``m`` with ``|exp(A)^j exp(B)^(-floor(eps j) - m)| <= 1``.

    The search starts at 0 and walks in the direction that keeps the
    predicate's transition point; the norm is decreasing in ``m`` once ``B``
    is normalized to minimum eigenvalue 1.
    """
    if B.min_eigenvalue < 1.0 - _NORM_SLACK:
        raise NotNormalized(f"B has minimum eigenvalue {B.min_eigenvalue} < 1")
    F = floor_term(eps_ratio(A, B), j)

    def ok(m):
        return log_norm_product(A, j, B, -(F + m)) <= _NORM_SLACK

    m = 0
    if ok(m):
        for _ in range(max_steps):
            if not ok(m - 1):
                return m
            m -= 1
    else:
        for _ in range(max_steps):
            m += 1
            if ok(m):
                return m
    raise RuntimeError("d_j search did not terminate")


def _top_singular_vector(M, strict: bool):
    _, s, vt = np.linalg.svd(M)
    gap = (s[0] - s[1]) / s[0] if len(s) > 1 else 1.0
    tie = gap <= _GAP_TOL
    if tie:
        if strict:
            raise DegenerateSingularGap(f"top singular value has multiplicity > 1 (gap {gap:.2e})")
        top = vt[s >= s[0] * (1 - _GAP_TOL)]
        # project e_1, e_2, ... onto the top right-singular subspace; first nonzero wins
        for k in range(M.shape[1]):
            z = top.T @ top[:, k]
            if np.linalg.norm(z) > 1e-8:
                break
        z = z / np.linalg.norm(z)
        warnings.warn("degenerate top singular value; using the deterministic tie-break", RuntimeWarning, stacklevel=3)
    else:
        z = vt[0].copy()
    nz = np.flatnonzero(np.abs(z) > 1e-14)
    if z[nz[0]] < 0:
        z = -z
    return z, float(s[0]), float(gap), bool(tie)


def rotation_to(X, Z):
    """A rotation (det +1) mapping the unit vector X to the unit vector Z.

    Product of two reflections: first across X-perp (X -> -X), then across
    (-X - Z)-perp (-X -> Z).
    """
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n = len(X)
    if np.allclose(X, Z, atol=1e-15, rtol=0):
        return np.eye(n)
    R1 = np.eye(n) - 2.0 * np.outer(X, X)
    u = -X - Z
    if np.linalg.norm(u) < 1e-12:
        # Z = -X: rotate by pi in the plane of X and the first basis vector not parallel to it
        for k in range(n):
            e = np.eye(n)[k] - X[k] * X
            if np.linalg.norm(e) > 1e-8:
                e /= np.linalg.norm(e)
                return np.eye(n) - 2.0 * np.outer(X, X) - 2.0 * np.outer(e, e)
    u /= np.linalg.norm(u)
    R2 = np.eye(n) - 2.0 * np.outer(u, u)
    return R2 @ R1


@dataclass(frozen=True, eq=False)
class CounterexampleState:
    j: int
    d_j: int
    eps_ratio: float
    floor_term: int
    M: np.ndarray
    trace_Q: float
    trace_Q_numeric: float
    tau: float
    Z: np.ndarray
    O: np.ndarray
    singular_gap: float
    tie_broken: bool

    @property
    def j2(self) -> int:
        """Exponent of ``exp(B)``: ``-floor(eps j) - d_j``."""
        return -self.floor_term - self.d_j

    @property
    def det_M(self) -> float:
        return math.exp(self.trace_Q)

    @property
    def frame(self) -> np.ndarray:
        """The linear map ``M_j O_j`` carrying ``a_0``'s nodes to ``a_j``'s."""
        return self.M @ self.O

    @property
    def witness_center(self) -> np.ndarray:
        return self.M @ self.Z

    def to_json(self):
        return {
            "j": self.j,
            "d_j": self.d_j,
            "eps_ratio": self.eps_ratio,
            "floor_term": self.floor_term,
            "tau_j": self.tau,
            "det_Mj": self.det_M,
            "trace_Q": self.trace_Q,
            "trace_Q_numeric": self.trace_Q_numeric,
            "Z_j": self.Z.tolist(),
            "singular_gap": self.singular_gap,
            "tie_broken": self.tie_broken,
        }


def build_counterexample_state(A: DilationMatrix, B: DilationMatrix, j: int, X=None, strict: bool = False):
    n = A.dim
    X = np.eye(n)[0] if X is None else np.asarray(X, dtype=float) / np.linalg.norm(X)
    eps = eps_ratio(A, B)
    F = floor_term(eps, j)
    d = compute_dj(A, B, j)
    if _commute(A, B):
        # one exponential: the cancelling factors never meet round-off
        M = expm(j * A.matrix - (F + d) * B.matrix)
    else:
        M = A.exp_times(j) @ B.exp_times(-(F + d))
    # det exp(X) = e^{tr X} exactly; slogdet of the product is only a cross-check
    # and loses all accuracy once M_j is severely ill-conditioned
    sign, logdet = np.linalg.slogdet(M)
    Z, tau, gap, tie = _top_singular_vector(M, strict)
    O = rotation_to(X, Z)
    return CounterexampleState(
        j=j,
        d_j=d,
        eps_ratio=eps,
        floor_term=F,
        M=M,
        trace_Q=j * A.trace - (F + d) * B.trace,
        trace_Q_numeric=float(logdet) if sign > 0 else float("nan"),
        tau=tau,
        Z=Z,
        O=O,
        singular_gap=gap,
        tie_broken=tie,
    )


def build_aux_atom(state: CounterexampleState, a0: Atom, A: DilationMatrix, B: DilationMatrix) -> Atom:
    """``a_j = omega_j a_0 o exp(-U_j) o exp(-Q_j)`` realized by moving nodes.

    ``omega_j = exp(-tr(Q_j)/p) omega_0`` since ``tr(U_j) = 0``; the values
    of ``a_0`` (already carrying ``omega_0``) are scaled by ``exp(-tr Q_j/p)``.
    """
    p = a0.p
    factor = math.exp(-state.trace_Q / p)
    vals = a0.values.transported(state.frame, factor)
    params = dict(a0.params)
    params.update(
        j=state.j,
        j1=state.j,
        j2=state.j2,
        omega=a0.params["omega0"] * factor,
        tau=state.tau,
        trace_Q=state.trace_Q,
    )
    return Atom(vals, "family", p, a0.alpha, params, a0.moment_residual * factor * state.det_M)


def aux_support_check(state: CounterexampleState, aj: Atom, algebra) -> dict:
    """Fraction of support nodes of ``a_j`` inside ``B(e, tau theta)`` or ``M_j B(Z_j, eps)``.

    Exact in the abelian case; on non-abelian groups ``O_j`` is not an
    automorphism, so the image of ``B(X, eps)`` need not be a ball.
    """
    pts, _ = aj.values.support()
    theta = aj.params["theta"]
    eps = aj.params["eps_ball"]
    near = np.linalg.norm(pts, axis=1) < state.tau * theta * (1 + 1e-12)
    pulled = np.linalg.solve(state.M, pts.T).T
    far = np.linalg.norm(bch_coords(-state.Z, pulled, algebra), axis=1) < eps * (1 + 1e-12)
    ok = near | far
    return {"fraction_inside": float(ok.mean()) if len(ok) else 1.0, "outside": int((~ok).sum())}


# ----------------------------------------------------------- singular limit


def _direct_grid(aj: Atom, m: int, margin: float = 0.05) -> GridSpec:
    pts, _ = aj.values.support()
    g = aj.values.grid
    # the interpolant of a node's value reaches one cell (|frame| h) beyond it
    reach = np.abs(g.frame) @ np.full(g.n, g.h)
    half = (np.abs(pts).max(axis=0) + reach) * (1 + margin)
    return GridSpec(1.0, m, len(half), np.diag(half))


def _cell_rule(g: GridSpec, order: int, lower: bool):
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * g.h * (x + 1.0) if lower else 0.5 * g.h * x
    w = 0.5 * g.h * w
    offs = np.stack(np.meshgrid(*([x] * g.n), indexing="ij"), -1).reshape(-1, g.n)
    wts = np.prod(np.stack(np.meshgrid(*([w] * g.n), indexing="ij"), -1).reshape(-1, g.n), axis=1)
    return offs, wts


def pairing_change_of_variables(state: CounterexampleState, a0: Atom, phi, order: int = 4,
                                method: str = "multilinear") -> float:
    """``e^{tr Q (1-1/p)} int a_0(z) phi(M O z) dz`` computed cell by cell.

    ``a_0`` is read as its multilinear interpolant (or as constant on the
    cells around its nodes with ``method="nearest"``); every cell meeting
    the support gets a tensor Gauss-Legendre rule.
    """
    f = a0.values
    g = f.grid
    pts, vals = f.support()
    if method == "nearest":
        offs, wts = _cell_rule(g, order, lower=False)
        total = float(np.sum(vals * (phi((pts[:, None, :] + offs) @ state.frame.T) @ wts)))
    else:
        corners = np.array(np.meshgrid(*([[0.0, 1.0]] * g.n), indexing="ij")).reshape(g.n, -1).T
        low = np.unique(np.rint((pts[:, None, :] - g.h * corners[None]).reshape(-1, g.n) / g.h), axis=0) * g.h
        offs, wts = _cell_rule(g, order, lower=True)
        q = (low[:, None, :] + offs).reshape(-1, g.n)
        fv = f.sample(q, "multilinear").reshape(len(low), -1)
        total = float(np.sum((fv * phi(q @ state.frame.T).reshape(len(low), -1)) @ wts))
    return total * math.exp(state.trace_Q * (1 - 1 / a0.p))


def pairing_transport(aj: Atom, phi) -> float:
    """``int a_j phi dmu`` as the node sum on ``a_j``'s transported grid."""
    f = aj.values
    return float(np.sum(f.flat * phi(f.nodes())) * f.grid.weight)


def pairing_direct(aj: Atom, phi, m: int = 801, method: str = "multilinear") -> float:
    """Same pairing with ``a_j`` resampled onto an axis-aligned uniform grid over its support."""
    g = _direct_grid(aj, m)
    nodes = g.nodes()
    vals = aj.values.sample(nodes, method=method)
    return float(np.sum(vals * phi(nodes)) * g.weight)


@dataclass(frozen=True)
class ShiftedGaussian:
    center: tuple
    width: float

    def __call__(self, x):
        c = np.asarray(self.center)
        return np.exp(-np.sum((np.asarray(x) - c) ** 2, axis=-1) / (2 * self.width**2))


def random_test_functions(count: int, center, rng, width_range=(0.1, 0.3), jitter: float = 0.1):
    center = np.asarray(center, dtype=float)
    out = []
    for _ in range(count):
        c = center + rng.uniform(-jitter, jitter, size=center.shape)
        out.append(ShiftedGaussian(tuple(c), float(rng.uniform(*width_range))))
    return out


def singular_limit_diagnostics(A, B, a0: Atom, j_values, phis=None, count: int = 5, seed: int = 0,
                               direct_m: int = 801, X=None) -> dict:
    """Table of ``det M_j``, its bound and the pairing computed two ways.

    The pairing ``int a_j phi`` is evaluated through the change of variables
    back to ``a_0`` and independently on a fresh grid over the support of
    ``a_j``; both read ``a_0`` as its multilinear interpolant.
    If ``d_j`` stays bounded the pair is in the bounded regime and there is
    no singular limit; the table is still produced.
    """
    rng = np.random.default_rng(seed)
    rows = []
    states = [build_counterexample_state(A, B, int(j), X=X) for j in j_values]
    if phis is None:
        phis = random_test_functions(count, states[-1].witness_center, rng)
    for st in states:
        aj = build_aux_atom(st, a0, A, B)
        cv_vals, dr_vals, rel = [], [], []
        for phi in phis:
            t = pairing_change_of_variables(st, a0, phi)
            d = pairing_direct(aj, phi, direct_m)
            cv_vals.append(t)
            dr_vals.append(d)
            rel.append(abs(t - d) / max(abs(t), 1e-300))
        rows.append({
            "j": st.j,
            "d_j": st.d_j,
            "det_Mj": st.det_M,
            "det_bound": math.exp((1 - st.d_j) * B.trace),
            "pairing_change_of_variables": cv_vals,
            "pairing_direct": dr_vals,
            "relative_difference": rel,
        })
    # d_j is bounded exactly when A is a positive multiple of B
    c = eps_ratio(A, B)
    bounded = np.linalg.norm(A.matrix - c * B.matrix) <= 1e-9 * np.linalg.norm(A.matrix)
    limit = states[-1].M
    return {
        "regime": "bounded" if bounded else "divergent",
        "note": "d_j bounded: no singular limit" if bounded else "d_j unbounded: M_j degenerates",
        "limit_map_estimate": limit.tolist(),
        "rows": rows,
        "phis": [{"center": list(p.center), "width": p.width} for p in phis if isinstance(p, ShiftedGaussian)],
    }


def pairing_identity_residual(state: CounterexampleState, a0: Atom, phi) -> float:
    """Difference between ``int a_j phi`` and ``e^{tr Q (1-1/p)} sum a_0(z) phi(M O z) h^n``."""
    p = a0.p
    f = a0.values
    lhs = float(np.sum(f.flat * phi(f.nodes() @ state.frame.T)) * f.grid.weight)
    lhs *= math.exp(state.trace_Q * (1 - 1 / p))
    aj_vals = f.transported(state.frame, math.exp(-state.trace_Q / p))
    rhs = pairing_transport(Atom(aj_vals, "family", p, a0.alpha), phi)
    return abs(lhs - rhs)

