"""Atoms with vanishing moments: classical, modified and the auxiliary family.

Moments are node sums on the atom's grid, so "vanishing moments" means the
discrete moments vanish up to round-off.  Because linear changes of
variables preserve isotropic degree, transporting a grid function by a
linear map keeps its discrete isotropic moments at zero exactly; the
counterexample sequence relies on this.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dilations import DilationMatrix
from .errors import (
    BallsOverlap,
    MomentSolveSingular,
    SupportNotCovered,
    ValidationError,
)
from .grid import GridFunction, GridSpec, unit_ball_volume
from .lie import LieAlgebra, bch_coords
from .moments import (
    PolynomialBasis,
    adapted_indices,
    count_multi_indices,
    monomial_matrix,
    multi_indices,
)
from .quasinorm import QuasiNormHandle, quasi_norm, sample_euclid_ball

KINDS = ("classical", "modified", "family")


@dataclass(frozen=True, eq=False)
class Atom:
    values: GridFunction
    kind: str
    p: float
    alpha: float
    params: dict = field(default_factory=dict)
    moment_residual: float = float("nan")

    def to_header(self):
        def clean(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "kind": self.kind,
            "p": self.p,
            "alpha": self.alpha,
            "params": {k: clean(v) for k, v in self.params.items()},
            "moment_residual": self.moment_residual,
            "grid": self.values.grid.to_json(),
        }


def isotropic_moments(f: GridFunction, alpha: int):
    """``int f eta^I dmu`` for all ``|I| <= alpha``."""
    pts, vals = f.support()
    idx = multi_indices(f.grid.n, int(alpha))
    if len(vals) == 0:
        return idx, np.zeros(len(idx)), np.zeros(len(idx))
    V = monomial_matrix(PolynomialBasis.isotropic(f.grid.n), idx, pts)
    w = f.grid.weight
    return idx, (vals @ V) * w, (np.abs(vals) @ np.abs(V)) * w


def adapted_moments(f: GridFunction, A: DilationMatrix, alpha: float):
    """``int f eta_A^I dmu`` for all ``d_A(I) <= alpha``."""
    pts, vals = f.support()
    idx = adapted_indices(A, alpha)
    if len(vals) == 0:
        return idx, np.zeros(len(idx)), np.zeros(len(idx))
    V = monomial_matrix(PolynomialBasis.adapted(A), idx, pts)
    w = f.grid.weight
    return idx, (vals @ V) * w, (np.abs(vals) @ np.abs(V)) * w


def check_disjoint_balls(algebra, x1, eps_ball, theta, R, samples=4000, rng=None):
    """Sampled check that ``B(x1,eps)`` misses ``B(e,theta)`` and lies in ``B(e,R)``."""
    rng = np.random.default_rng(0) if rng is None else rng
    n = algebra.dim
    u = sample_euclid_ball(n, eps_ball, samples, rng)
    # include the sphere of radius eps, where the distance to e is extremal
    sph = rng.standard_normal((samples, n))
    sph = eps_ball * (1 - 1e-12) * sph / np.linalg.norm(sph, axis=1, keepdims=True)
    pts = bch_coords(np.asarray(x1, dtype=float), np.vstack([u, sph]), algebra)
    norms = np.linalg.norm(pts, axis=1)
    if norms.min() < theta:
        raise BallsOverlap(
            f"B(x1,{eps_ball}) meets B(e,{theta}): sampled point at distance {norms.min():.4f} from e"
        )
    if norms.max() >= R:
        raise SupportNotCovered(f"B(x1,{eps_ball}) is not inside B(e,{R}) (max |y| = {norms.max():.4f})")
    return pts


def build_base_atom(
    algebra: LieAlgebra,
    alpha: int,
    theta: float = 0.2,
    eps_ball: float = 0.2,
    R: float = 2.0,
    x1=None,
    grid: GridSpec | None = None,
    p: float = 1.0,
    rng=None,
) -> Atom:
    """The function ``a_0``: least-norm moment correction on ``B(e,theta)`` plus 1 on ``B(x1,eps)``.

    The central piece solves the discretized moment equations
    ``T f = -(moments of the indicator of B(x1,eps))`` with the minimum
    Euclidean-norm solution; the whole function is then scaled by
    ``omega_0 = min(1, 1/sup|a~_0|)``.
    """
    n = algebra.dim
    x1 = np.eye(n)[0] if x1 is None else np.asarray(x1, dtype=float)
    grid = GridSpec(2.0, 129, n) if grid is None else grid
    if grid.frame is not None:
        raise ValueError("base atoms live on an unframed grid")
    check_disjoint_balls(algebra, x1, eps_ball, theta, R, rng=rng)
    # the sampled ball around x1 has to sit inside the box with a margin of one cell
    pts = check_disjoint_balls(algebra, x1, eps_ball, 0.0, np.inf, samples=2000, rng=rng)
    if np.abs(pts).max() > grid.L - grid.h:
        raise SupportNotCovered(f"B(x1,{eps_ball}) leaves the grid box [-{grid.L},{grid.L}]^{n}")
    nodes = grid.nodes()
    central = np.linalg.norm(nodes, axis=1) < theta
    shifted = bch_coords(-x1, nodes, algebra)
    outer = np.linalg.norm(shifted, axis=1) < eps_ball
    if not outer.any():
        raise MomentSolveSingular("no grid node inside B(x1, eps); refine the grid")
    idx = multi_indices(n, int(alpha))
    basis = PolynomialBasis.isotropic(n)
    w = grid.weight
    T = monomial_matrix(basis, idx, nodes[central]).T * w
    v = -(monomial_matrix(basis, idx, nodes[outer]).sum(axis=0) * w)
    n_alpha = count_multi_indices(n, int(alpha))
    rank = np.linalg.matrix_rank(T) if T.size else 0
    if rank < n_alpha:
        raise MomentSolveSingular(
            f"moment matrix has rank {rank} < {n_alpha} ({int(central.sum())} nodes in B(e,theta)); refine the grid"
        )
    f, *_ = np.linalg.lstsq(T, v, rcond=None)
    vals = np.zeros(grid.size)
    vals[central] = f
    vals[outer] = 1.0
    omega0 = min(1.0, 1.0 / np.abs(vals).max())
    a0 = GridFunction(grid, omega0 * vals)
    _, mom, _ = isotropic_moments(a0, alpha)
    params = {
        "x0": np.zeros(n),
        "j1": 0,
        "j2": 0,
        "R": R,
        "theta": theta,
        "eps_ball": eps_ball,
        "x1": x1,
        "omega": omega0,
        "omega0": omega0,
        "central_nodes": int(central.sum()),
        "outer_nodes": int(outer.sum()),
    }
    return Atom(a0, "family", p, alpha, params, float(np.abs(mom).max()))


def build_classical_atom(
    handle: QuasiNormHandle,
    x0,
    r: float,
    alpha: float,
    p: float,
    grid: GridSpec,
    rng=None,
) -> Atom:
    """A (p, alpha)-atom supported in ``B^A(x0, r)``.

    Random node values are projected off the A-adapted monomials of
    homogeneous degree <= alpha and scaled to the size bound.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    x0 = np.asarray(x0, dtype=float)
    nodes = grid.nodes()
    rel = bch_coords(-x0, nodes, handle.algebra)
    inside = quasi_norm(handle, rel) < r
    idx = adapted_indices(handle.dilation, alpha)
    V = monomial_matrix(PolynomialBasis.adapted(handle.dilation), idx, nodes[inside])
    if np.linalg.matrix_rank(V) < len(idx):
        raise MomentSolveSingular("too few nodes in the ball for the requested moments")
    g = rng.standard_normal(int(inside.sum()))
    coef, *_ = np.linalg.lstsq(V, g, rcond=None)
    g = g - V @ coef
    measure = r ** handle.dilation.trace * handle.unit_ball_measure()
    g *= measure ** (-1.0 / p) / np.abs(g).max()
    vals = np.zeros(grid.size)
    vals[inside] = g
    a = GridFunction(grid, vals)
    _, mom, _ = adapted_moments(a, handle.dilation, alpha)
    return Atom(a, "classical", p, alpha, {"x0": x0, "r": r}, float(np.abs(mom).max()))


# --------------------------------------------------------------- validation


@dataclass
class AtomReport:
    kind: str
    support_ok: bool
    size_ok: bool
    moments_ok: bool
    support_leakage: float
    linf: float
    linf_bound: float
    linf_excess: float
    worst_moment: float
    worst_moment_relative: float
    trivial: bool = False
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.support_ok and self.size_ok and self.moments_ok

    def to_json(self):
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _support_mask(kind, nodes, params, algebra):
    x0 = np.asarray(params.get("x0", np.zeros(nodes.shape[1])), dtype=float)
    rel = bch_coords(-x0, nodes, algebra)
    if kind == "classical":
        return quasi_norm(params["handle"], rel) < params["r"]
    if kind == "modified":
        A = params["A"]
        y = rel @ A.power(math.exp(-params["k"])).T
        return np.linalg.norm(y, axis=1) < params["R"]
    # family: x0 delta^A_{e^j1} delta^B_{e^j2} B(e,R)
    A, B = params["A"], params["B"]
    y = rel @ A.exp_times(-params["j1"]).T @ B.exp_times(-params["j2"]).T
    return np.linalg.norm(y, axis=1) < params["R"]


def _size_bound(kind, params, p, n):
    if kind == "classical":
        h = params["handle"]
        return (params["r"] ** h.dilation.trace * h.unit_ball_measure()) ** (-1.0 / p)
    if kind == "modified":
        A = params["A"]
        mu = math.exp(params["k"] * A.trace) * unit_ball_volume(n) * params["R"] ** n
        return mu ** (-1.0 / p)
    A, B = params["A"], params["B"]
    return math.exp(-params["j1"] * A.trace / p - params["j2"] * B.trace / p)


def validate_atom(a, kind: str, params: dict, algebra: LieAlgebra, p=None, alpha=None,
                  moment_tol: float = 1e-8, size_rtol: float = 1e-12) -> AtomReport:
    """Check the support, size and moment conditions of one atom notion.

    ``params`` carries the kind-specific data: classical ``x0, r, handle``;
    modified ``x0, k, R, A``; family ``x0, j1, j2, R, A, B``.  Moments are
    judged relative to ``int |a| |P| dmu`` for each monomial.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown atom kind {kind!r}")
    f = a.values if isinstance(a, Atom) else a
    p = a.p if p is None and isinstance(a, Atom) else p
    alpha = a.alpha if alpha is None and isinstance(a, Atom) else alpha
    nodes = f.nodes()
    vals = f.flat
    nz = vals != 0
    trivial = not nz.any()
    inside = _support_mask(kind, nodes[nz], params, algebra) if not trivial else np.zeros(0, bool)
    leak = float(np.abs(vals[nz][~inside]).sum() * f.grid.weight) if not trivial else 0.0
    linf = f.sup_norm()
    bound = _size_bound(kind, params, p, f.grid.n)
    excess = max(0.0, linf - bound) / bound
    if kind == "family":
        _, mom, scale = isotropic_moments(f, alpha)
    else:
        _, mom, scale = adapted_moments(f, params["A"] if kind == "modified" else params["handle"].dilation, alpha)
    worst = float(np.abs(mom).max()) if len(mom) else 0.0
    rel = float((np.abs(mom) / np.where(scale > 0, scale, 1.0)).max()) if len(mom) else 0.0
    notes = ["trivial (zero)"] if trivial else []
    return AtomReport(
        kind,
        support_ok=leak == 0.0,
        size_ok=excess <= size_rtol,
        moments_ok=rel <= moment_tol,
        support_leakage=leak,
        linf=linf,
        linf_bound=bound,
        linf_excess=excess,
        worst_moment=worst,
        worst_moment_relative=rel,
        trivial=trivial,
        notes=notes,
    )


def family_params(atom: Atom, A, B) -> dict:
    d = {k: atom.params[k] for k in ("x0", "j1", "j2", "R")}
    d.update(A=A, B=B)
    return d


def modified_exponent(r: float, R: float, c1: float) -> int:
    """``k = floor(ln(r/(R c1))) + 1``, so that ``e^k >= r/(R c1)``."""
    return int(math.floor(math.log(r / (R * c1)))) + 1


def lemma_constant(handle: QuasiNormHandle, R: float, c1: float) -> float:
    """Lower bound ``C(A,R)`` for ``mu(B^A(x0,r)) / mu(x0 delta_{e^k} B(e,R))``."""
    n = handle.dilation.dim
    tr = handle.dilation.trace
    return (c1 * R / math.e) ** tr * handle.unit_ball_measure() / (unit_ball_volume(n) * R**n)


def convert_classical_to_modified(atom: Atom, R: float, c1: float, handle: QuasiNormHandle,
                                  samples: int = 2000, rng=None):
    """Re-certify a classical atom as ``multiplier * (modified (p, alpha, R)-atom)``.

    Returns ``(modified_atom, multiplier)`` with ``multiplier = C(A,R)^{-1/p}``.
    Raises ValidationError if the support inclusion fails.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    if atom.kind != "classical":
        raise ValueError("expected a classical atom")
    x0 = np.asarray(atom.params["x0"], dtype=float)
    r = float(atom.params["r"])
    k = modified_exponent(r, R, c1)
    A = handle.dilation
    f = atom.values
    pts, _ = f.support()
    mod_params = {"x0": x0, "k": k, "R": R, "A": A}
    inside = _support_mask("modified", pts, mod_params, handle.algebra)
    if not inside.all():
        raise ValidationError(
            f"{int((~inside).sum())} support nodes lie outside x0 delta_(e^{k}) B(e,{R})"
        )
    # sampled inclusion B^A(x0, r) in x0 delta_{e^k} B(e, R)
    unit = handle.sample_ball(1.0, samples, rng)
    ball = bch_coords(x0, unit @ A.power(r).T * (1 - 1e-12), handle.algebra)
    inside = _support_mask("modified", ball, mod_params, handle.algebra)
    if not inside.all():
        raise ValidationError(f"B^A(x0,{r}) is not inside x0 delta_(e^{k}) B(e,{R}) on samples")
    C = lemma_constant(handle, R, c1)
    mult = C ** (-1.0 / atom.p)
    mod = Atom(f.scaled(1.0 / mult), "modified", atom.p, atom.alpha,
               {"x0": x0, "k": k, "R": R}, atom.moment_residual / mult)
    return mod, mult
