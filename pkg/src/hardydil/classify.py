"""Decisions: equivalence of quasi-norms and equality of Hardy spaces.

Both decisions are exact matrix tests.  Quasi-norms are equivalent iff the
matrices coincide; the Hardy spaces coincide iff ``A = c B`` for some
``c > 0``, and then necessarily ``c = tr(A)/tr(B)``.  The scans reported
alongside (growth profile, sampled norm ratios) are certificates only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .dilations import (
    DilationMatrix,
    admissible_from,
    check_admissible,
    random_admissible,
    random_twist,
    random_weights,
    weight_projector,
)
from .errors import HardyDilError, NotAdmissible
from .sequence import compute_dj, floor_term, log_norm_product

DEFAULT_TOL = 1e-9
ALARM_FACTOR = 10.0


@dataclass
class ClassificationReport:
    verdict: str
    c_star: float
    matrix_residual: float
    trace_A: float
    trace_B: float
    norm_residual: float = float("nan")
    growth_profile: list = field(default_factory=list)
    log_growth_profile: list = field(default_factory=list)
    growth_window: int = 0
    apriori_bound: float = float("nan")
    growth_bounded: bool | None = None
    alarm: bool | None = None
    alarm_j: int | None = None
    d_sequence: list = field(default_factory=list)
    ratio_sup_estimate: float = float("nan")
    log_ratio_sup_estimate: float = float("nan")

    def to_json(self):
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, float) and not math.isfinite(v):
                v = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
            out[k] = v
        return out


def _admissible(M, algebra):
    if isinstance(M, DilationMatrix):
        return M
    try:
        return check_admissible(M, algebra)
    except HardyDilError as exc:
        raise NotAdmissible(str(exc)) from exc


def _rel_frobenius(X, Y, ref):
    return float(np.linalg.norm(X - Y) / np.linalg.norm(ref))


def apriori_bound(A: DilationMatrix, c_star: float, samples: int = 201) -> float:
    """``max_{r in [-1/c, 0]} |exp(rA)|``: grid over r, then a bounded local refinement."""
    r = np.linspace(-1.0 / c_star, 0.0, samples)

    def f(x):
        return float(np.linalg.norm(A.exp_times(x), 2))

    vals = [f(x) for x in r]
    k = int(np.argmax(vals))
    lo, hi = r[max(k - 1, 0)], r[min(k + 1, samples - 1)]
    best = vals[k]
    if hi > lo:
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def boundedness_scan(A: DilationMatrix, B: DilationMatrix, J: int = 64):
    """``ln |exp(A)^{-j} exp(B)^{floor(eps j)}|`` for ``j = -J..J``.

    Log-magnitudes so that large windows cannot overflow.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    eps = A.trace / B.trace
    js = list(range(-J, J + 1))
    logs = [log_norm_product(A, -j, B, floor_term(eps, j)) for j in js]
    return js, logs


def ratio_sup_estimate(A: DilationMatrix, B: DilationMatrix, S: float = 10.0, samples: int = 401) -> float:
    """Sampled ``ln sup_r sup_x |delta_r^A x| / |delta_r^B x|``.

    Substituting ``y = delta_r^B x`` the inner sup is the operator norm of
    ``exp(sA) exp(-sB)`` with ``s = ln r``; it is scanned over ``|s| <= S``.
    """
    s = np.linspace(-S, S, samples)
    return max(log_norm_product(A, x, B, -x) for x in s)


def equiv_norm_decision(A, B, algebra=None, tol: float = DEFAULT_TOL, S: float = 10.0) -> ClassificationReport:
    A = _admissible(A, algebra)
    B = _admissible(B, algebra)
    res = _rel_frobenius(A.matrix, B.matrix, A.matrix)
    c = A.trace / B.trace
    hres = _rel_frobenius(A.matrix, c * B.matrix, A.matrix)
    equiv = res <= tol
    equal = hres <= tol
    lr = ratio_sup_estimate(A, B, S)
    return ClassificationReport(
        verdict=_verdict(equiv, equal),
        c_star=c,
        matrix_residual=hres,
        norm_residual=res,
        trace_A=A.trace,
        trace_B=B.trace,
        ratio_sup_estimate=math.exp(lr) if lr < 700 else math.inf,
        log_ratio_sup_estimate=lr,
    )


def _verdict(equiv: bool, equal: bool) -> str:
    if equiv and equal:
        return "both"
    if equal:
        return "equal-hardy"
    if equiv:  # pragma: no cover - A = B forces A = 1 * B
        return "equivalent-norms"
    return "neither"


def hardy_equal_decision(A, B, algebra=None, tol: float = DEFAULT_TOL, J: int = 64, d_window: int = 16):
    """Exact test ``A = (tr A / tr B) B`` plus the growth-profile certificate.

    The alarm fires when the scanned profile exceeds ``ALARM_FACTOR`` times
    the a-priori bound that holds whenever ``A = c B``; ``alarm_j`` is the
    first ``|j|`` at which it does.
    """
    A = _admissible(A, algebra)
    B = _admissible(B, algebra)
    c = A.trace / B.trace
    hres = _rel_frobenius(A.matrix, c * B.matrix, A.matrix)
    equiv = _rel_frobenius(A.matrix, B.matrix, A.matrix) <= tol
    js, logs = boundedness_scan(A, B, J)
    bound = apriori_bound(A, c)
    log_bound = math.log(bound)
    bounded = max(logs) <= log_bound + 1e-9
    thresh = log_bound + math.log(ALARM_FACTOR)
    alarm_j = None
    for k in range(0, J + 1):
        if any(logs[J + s] > thresh for s in {k, -k}):
            alarm_j = k
            break
    ds = []
    if B.min_eigenvalue >= 1.0 - 1e-12:
        ds = [compute_dj(A, B, j) for j in range(1, d_window + 1)]
    return ClassificationReport(
        verdict=_verdict(equiv, hres <= tol),
        c_star=c,
        matrix_residual=hres,
        trace_A=A.trace,
        trace_B=B.trace,
        growth_profile=[math.exp(x) if x < 700 else math.inf for x in logs],
        log_growth_profile=logs,
        growth_window=J,
        apriori_bound=bound,
        growth_bounded=bool(bounded),
        alarm=alarm_j is not None,
        alarm_j=alarm_j,
        d_sequence=ds,
    )


def is_positive_multiple(A: DilationMatrix, B: DilationMatrix, tol: float = DEFAULT_TOL) -> bool:
    c = A.trace / B.trace
    return _rel_frobenius(A.matrix, c * B.matrix, A.matrix) <= tol


# ---------------------------------------------------------- random pairs


def random_multiple_pair(algebra, rng, c_range=(0.1, 10.0)):
    A = random_admissible(algebra, rng)
    c = float(rng.uniform(*c_range))
    return A, A.scaled(c), c


def random_perturbed_pair(algebra, rng, min_relative: float = 0.05, spread: float = 0.2, max_tries: int = 1000):
    """An admissible pair with ``|A - eps B|_F >= min_relative |A|_F`` (eps = tr A / tr B).

    B perturbs A's weights multiplicatively and its conjugating derivation
    additively, both by about ``spread``; draws below the threshold are
    rejected.
    """
    P = weight_projector(algebra)
    for _ in range(max_tries):
        w = random_weights(algebra, rng)
        N = random_twist(algebra, rng)
        A = admissible_from(algebra, w, N)
        w2 = P @ (w * np.exp(spread * rng.standard_normal(len(w))))
        if w2.min() <= 0.1:
            continue
        B = admissible_from(algebra, w2, N + random_twist(algebra, rng, spread))
        if _rel_frobenius(A.matrix, (A.trace / B.trace) * B.matrix, A.matrix) >= min_relative:
            return A, B
    raise RuntimeError("could not draw a sufficiently perturbed pair")
