"""Divergence of ``int |M0 a_j|^p`` along the counterexample atoms.

For each j the auxiliary atom ``a_j`` is built by transport, its radial
maximal function is evaluated on a fixed grid plus a witness ball around
``M_j Z_j``, and the p-th power integral is recorded.

The integral is a composite rule: the cells of ``a_j``'s own (transported)
lattice carry the near field, the fixed grid the rest.  The sup runs over
the ladder and the limit ``t -> infinity``, where ``a_j * phi_t -> a_j``.

The ladder is capped per atom: a scale is used only while the support of
``phi_t`` pulled back to the atom's own lattice still spans ``cells`` grid
cells in every direction.  Finer scales would sample the kernel below the
atom's resolution and report quadrature noise.  The cap transforms with
the atom under dilations, so the ladder sups stay comparable across j.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .atoms import build_base_atom
from .dilations import DilationMatrix
from .errors import ConfigInfeasible, ConfigInvalid, LadderEmpty
from .grid import Bump, GridSpec, unit_ball_volume
from .lie import LieAlgebra, bch_coords
from .maximal import Ladder, ladder_terms
from .moments import shared_alpha
from .quasinorm import sample_euclid_ball
from .sequence import build_aux_atom, build_counterexample_state

CSV_COLUMNS = ("j", "d_j", "tau_j", "det_Mj", "witness_min", "integral_p", "marker")


@dataclass
class BlowupResult:
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name):
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r["j"], r["d_j"]] + [repr(float(r[c])) for c in CSV_COLUMNS[2:]])
        return buf.getvalue()


def plateau_scale(B: DilationMatrix) -> tuple[float, float]:
    """``(sigma, |exp B|^{-sigma})`` with ``sigma = 1/gamma^2`` and ``gamma = v_min/v_max``."""
    gamma = B.min_eigenvalue / B.max_eigenvalue
    sigma = 1.0 / gamma**2
    return sigma, float(np.linalg.norm(B.exp_times(1.0), 2)) ** (-sigma)


def capped_ladder(frame, A: DilationMatrix, r_out: float, h_atom: float, box: float, q: int,
                  cells: float = 3.0) -> Ladder:
    """Scales ``e^{k/q}`` whose kernel support spans ``cells`` atom cells yet stays below ``4 box``.

    The kernel ``phi_t`` lives on ``delta_{1/t} B(e, r_out)``; in the atom's
    lattice coordinates its smallest semi-axis is
    ``sigma_min(frame^{-1} delta_{1/t}) r_out``.
    """
    Finv = np.linalg.inv(frame)
    ks = []
    k_range = int(300 * q / A.max_eigenvalue)
    for k in range(-k_range, k_range + 1):
        D = A.exp_times(-k / q)
        small = np.linalg.svd(Finv @ D, compute_uv=False)[-1] * r_out
        if small < cells * h_atom:
            continue
        if np.linalg.svd(D, compute_uv=False)[-1] * r_out > 4 * box:
            continue
        ks.append(k)
    if not ks:
        raise LadderEmpty("no admissible scales between the resolution cap and the box size")
    return Ladder(q, tuple(ks))


def _witness_points(center, radius, count, algebra, rng):
    n = len(center)
    u = np.vstack([np.zeros((1, n)), sample_euclid_ball(n, radius, count, rng)])
    return bch_coords(np.asarray(center)[None, :], u, algebra)


def check_feasibility(state, a0, eps_ball, theta, beta, eps1, eps2, s, algebra, rng, samples=400):
    """Sampled smallness conditions; raises ConfigInfeasible naming the first failure."""
    if not 0 < eps1 < eps2 < 1:
        raise ConfigInfeasible("need 0 < eps1 < eps2 < 1")
    if not 0 < beta < 1:
        raise ConfigInfeasible("need 0 < beta < 1")
    if beta + eps1 > eps2:
        raise ConfigInfeasible("beta + eps1 must not exceed eps2: the plateau of phi would leave its support")
    if eps1 * s / state.tau >= eps_ball:
        raise ConfigInfeasible("tau_j^{-1} eps1 |exp B|^{-sigma} must be below eps")
    z = _witness_points(state.witness_center, beta * s, samples, algebra, rng)
    u = sample_euclid_ball(z.shape[1], eps2 * s, len(z), rng)
    x = bch_coords(z, u, algebra)
    if np.linalg.norm(x, axis=1).min() <= state.tau * theta:
        raise ConfigInfeasible("the kernel around the witness ball reaches B(e, tau_j theta)")


def blowup_experiment(A: DilationMatrix, B: DilationMatrix, p: float, j_max: int, algebra: LieAlgebra,
                      theta: float = 0.2, eps_ball: float = 0.2, beta: float = 0.2, eps1: float = 0.25,
                      eps2: float = 0.5, R: float = 2.0, atom_grid: GridSpec | None = None,
                      eval_grid: GridSpec | None = None, q: int = 8, cells: float = 3.0,
                      witness_samples: int = 16, seed: int = 0, X=None, alpha=None, a0=None,
                      j_values=None) -> BlowupResult:
    if not 0 < p < 1:
        raise ConfigInvalid("p", f"blow-up needs 0 < p < 1, got {p}")
    n = A.dim
    rng = np.random.default_rng(seed)
    atom_grid = GridSpec(2.0, 129, n) if atom_grid is None else atom_grid
    eval_grid = GridSpec(2.0, 65, n) if eval_grid is None else eval_grid
    alpha = shared_alpha(A, B, p) if alpha is None else alpha
    if a0 is None:
        a0 = build_base_atom(algebra, alpha, theta, eps_ball, R, X, atom_grid, p, rng=rng)
    atom_grid = a0.values.grid
    sigma, s = plateau_scale(B)
    phi = Bump(n, outer=eps2 * s, inner=eps1 * s, normalized=True)
    c = A.trace / B.trace
    same = bool(np.linalg.norm(A.matrix - c * B.matrix) <= 1e-9 * np.linalg.norm(A.matrix))
    nodes = eval_grid.nodes()
    w_eval = eval_grid.weight
    rows = []
    for j in (range(1, j_max + 1) if j_values is None else j_values):
        st = build_counterexample_state(A, B, j, X=X)
        check_feasibility(st, a0, eps_ball, theta, beta, eps1, eps2, s, algebra, rng)
        aj = build_aux_atom(st, a0, A, B)
        lad = capped_ladder(st.frame, A, phi.outer, a0.values.grid.h, eval_grid.L, q, cells)
        wit = _witness_points(st.witness_center, beta * s, witness_samples, algebra, rng)
        near, near_vals = aj.values.support()
        # eval nodes inside the atom's own cells are covered by the near-field sum
        far = nodes[aj.values.sample(nodes, "nearest") == 0]
        pts = np.vstack([far, near, wit])
        terms = ladder_terms(aj.values, phi, A, lad.log_scales, algebra, pts)
        finite = terms.max(axis=0)
        # t -> infinity: phi_t is an approximate identity, so the sup also dominates |a_j|
        limit = np.abs(aj.values.sample(pts, "multilinear"))
        limit[len(far):len(far) + len(near)] = np.abs(near_vals)
        full = np.maximum(finite, limit)
        nf, nn = len(far), len(near)
        integral = float(np.sum(full[:nf] ** p) * w_eval + np.sum(full[nf:nf + nn] ** p) * aj.values.grid.weight)
        wit_full, wit_finite = full[nf + nn:], finite[nf + nn:]
        kmax = np.argmax(terms[:, nf + nn:], axis=0)
        omega = aj.params["omega"]
        inner = st.tau ** -1 * eps1 * s
        bound = 0.1 * omega * st.det_M * unit_ball_volume(n) * inner**n * phi.height
        rows.append({
            "j": st.j,
            "d_j": st.d_j,
            "tau_j": st.tau,
            "det_Mj": st.det_M,
            "witness_min": float(wit_full.min()),
            "integral_p": integral,
            "marker": math.exp((1 / p - 1) * B.trace * st.d_j),
            "witness_bound": bound,
            "omega_j": omega,
            "ladder_log_range": [min(lad.ks) / q, max(lad.ks) / q],
            "ladder_size": len(lad),
            "witness_min_finite_scales": float(wit_finite.min()),
            "near_field_p": float(np.sum(np.abs(near_vals) ** p) * aj.values.grid.weight),
            "witness_argmax_at_cap": bool(np.all(kmax == len(lad) - 1)),
        })
    meta = {
        "p": p,
        "alpha": alpha,
        "sigma": sigma,
        "phi_outer": phi.outer,
        "phi_inner": phi.inner,
        "regime": "same Hardy space regime" if same else "divergent regime",
        "omega0": a0.params["omega0"],
        "atom_grid": atom_grid.to_json(),
        "eval_grid": eval_grid.to_json(),
        "q": q,
        "cells": cells,
    }
    return BlowupResult(rows, meta)
