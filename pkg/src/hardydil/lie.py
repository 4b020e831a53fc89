"""Nilpotent Lie algebras and the group law in exponential coordinates.

A point of the simply connected group G is stored through its exponential
coordinates, i.e. as a vector of the Lie algebra.  The product is then the
Baker-Campbell-Hausdorff series, which terminates because the algebra is
nilpotent.  Inversion is negation and Haar measure is Lebesgue measure.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import (
    AntisymmetryViolation,
    ConfigError,
    DimensionMismatch,
    JacobiViolation,
    NegativeSideLength,
    NotNilpotent,
)

_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Real Lie algebra given by structure constants in an orthonormal basis.

    ``structure_constants[i, j, k]`` is the ``Y_k`` component of ``[Y_i, Y_j]``.
    Build instances with :func:`validate_algebra` (or the presets) so that the
    invariants are checked.
    """

    structure_constants: np.ndarray
    nilpotency_step: int
    name: str = ""

    @property
    def dim(self) -> int:
        return self.structure_constants.shape[0]

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.structure_constants)

    def bracket(self, x, y):
        """Lie bracket, broadcasting over leading axes."""
        return np.einsum("...i,...j,ijk->...k", x, y, self.structure_constants)

    def ad(self, x):
        """Matrix of ``ad_x`` acting on coordinate vectors."""
        x = np.asarray(x, dtype=float)
        return np.einsum("i,ijk->kj", x, self.structure_constants)

    def bracket_matrix(self, i, j):
        return self.structure_constants[i, j]

    def to_json(self):
        return {
            "dim": self.dim,
            "structure_constants": self.structure_constants.ravel().tolist(),
            "name": self.name,
        }


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """Point of G in exponential coordinates."""

    coords: np.ndarray = field()

    def __post_init__(self):
        object.__setattr__(self, "coords", _frozen(self.coords))

    @property
    def euclidean_norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def inverse(self) -> "GroupPoint":
        return GroupPoint(-self.coords)

    def __len__(self):
        return self.coords.shape[0]


def _coords(x):
    if isinstance(x, GroupPoint):
        return x.coords
    return np.asarray(x, dtype=float)


def _lower_central_series_dims(c):
    n = c.shape[0]
    current = np.eye(n)
    dims = [n]
    for _ in range(n + 1):
        # [g, g_k] spanned by brackets of basis vectors with a basis of g_k
        brackets = np.einsum("ia,ajk->ijk", current, c.transpose(1, 0, 2))
        # brackets[i, j, :] = [Y_j, v_i]
        stacked = brackets.reshape(-1, n)
        if stacked.size == 0 or not np.any(np.abs(stacked) > _TOL):
            dims.append(0)
            return dims, None
        u, s, vt = np.linalg.svd(stacked, full_matrices=False)
        rank = int(np.sum(s > _TOL * max(1.0, s[0])))
        nxt = vt[:rank]
        dims.append(rank)
        if rank == current.shape[0]:
            return dims, current
        current = nxt
    return dims, current


def validate_algebra(raw, name: str = "") -> LieAlgebra:
    """Check raw structure constants and return a :class:`LieAlgebra`.

    ``raw`` is an ``n x n x n`` array or a flat row-major array of length n^3.
    """
    c = np.array(raw, dtype=float)
    if c.ndim == 1:
        n = round(len(c) ** (1 / 3))
        if n**3 != len(c):
            raise DimensionMismatch(f"flat structure constants of length {len(c)} is not a cube")
        c = c.reshape(n, n, n)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise DimensionMismatch(f"structure constants must be n x n x n, got {c.shape}")
    n = c.shape[0]
    if n == 0:
        raise DimensionMismatch("dimension must be positive")

    for i, j, k in itertools.product(range(n), repeat=3):
        s = c[i, j, k] + c[j, i, k]
        if abs(s) > _TOL:
            raise AntisymmetryViolation(i, j, k, s)

    # J[i,j,k,:] = [Y_i,[Y_j,Y_k]] + [Y_j,[Y_k,Y_i]] + [Y_k,[Y_i,Y_j]]
    inner = np.einsum("jkl,ilm->ijkm", c, c)
    jac = inner + inner.transpose(1, 2, 0, 3) + inner.transpose(2, 0, 1, 3)
    bad = np.argwhere(np.abs(jac).max(axis=3) > _TOL)
    if len(bad):
        i, j, k = (int(v) for v in bad[0])
        raise JacobiViolation(i, j, k, float(np.abs(jac[i, j, k]).max()))

    dims, stalled = _lower_central_series_dims(c)
    if stalled is not None:
        # find a bracket that keeps the stalled ideal alive
        proj = stalled.T @ stalled
        for i, j in itertools.product(range(n), repeat=2):
            comp = proj @ c[i, j]
            if np.abs(comp).max() > _TOL:
                k = int(np.argmax(np.abs(comp)))
                raise NotNilpotent(i, j, k, stalled.shape[0])
        raise NotNilpotent(0, 0, 0, stalled.shape[0])
    step = len(dims) - 1  # dims = [n, dim g_2, ..., 0]
    return LieAlgebra(_frozen(c), max(step, 1), name)


# ---------------------------------------------------------------- presets


def abelian(n: int) -> LieAlgebra:
    return validate_algebra(np.zeros((n, n, n)), name=f"abelian:{n}")


def heisenberg() -> LieAlgebra:
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = -1.0
    return validate_algebra(c, name="heisenberg")


def engel() -> LieAlgebra:
    c = np.zeros((4, 4, 4))
    c[0, 1, 2], c[1, 0, 2] = 1.0, -1.0
    c[0, 2, 3], c[2, 0, 3] = 1.0, -1.0
    return validate_algebra(c, name="engel")


def strictly_upper_triangular(size: int) -> LieAlgebra:
    """Algebra of strictly upper triangular matrices, basis E_ab (a < b)."""
    pairs = [(a, b) for a in range(size) for b in range(a + 1, size)]
    index = {p: i for i, p in enumerate(pairs)}
    n = len(pairs)
    c = np.zeros((n, n, n))
    for (i, (a, b)), (j, (cc, d)) in itertools.product(enumerate(pairs), repeat=2):
        # [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
        if b == cc:
            c[i, j, index[(a, d)]] += 1.0
        if d == a:
            c[i, j, index[(cc, b)]] -= 1.0
    return validate_algebra(c, name=f"upper:{size}")


def preset(name: str) -> LieAlgebra:
    """Resolve ``abelian:n``, ``heisenberg``, ``engel`` or ``upper:n``."""
    key = name.strip().lower()
    if key.startswith("abelian"):
        _, _, n = key.partition(":")
        return abelian(int(n) if n else 2)
    if key.startswith("upper:"):
        return strictly_upper_triangular(int(key.split(":")[1]))
    if key == "heisenberg":
        return heisenberg()
    if key == "engel":
        return engel()
    raise ConfigError(f"unknown group preset {name!r}")


def load_group(spec) -> LieAlgebra:
    """Preset name, path to a JSON group file, or an already-built algebra."""
    if isinstance(spec, LieAlgebra):
        return spec
    if isinstance(spec, dict):
        data = spec
    else:
        path = Path(str(spec))
        if not path.suffix == ".json":
            return preset(str(spec))
        if not path.exists():
            raise ConfigError(f"group file {path} does not exist")
        data = json.loads(path.read_text())
    try:
        n = int(data["dim"])
        flat = np.asarray(data["structure_constants"], dtype=float)
    except KeyError as exc:
        raise ConfigError(f"group definition lacks key {exc}") from None
    if flat.size != n**3:
        raise DimensionMismatch(f"expected {n**3} structure constants, got {flat.size}")
    return validate_algebra(flat.reshape(n, n, n), name=data.get("name", ""))


# ---------------------------------------------------------------- BCH


@lru_cache(maxsize=None)
def _dynkin_words(step: int):
    """Right-nested bracket words (letters 0=X, 1=Y) with rational weights.

    Dynkin's form of the BCH series, truncated at total degree ``step``.
    """
    weights: dict[tuple[int, ...], Fraction] = {}
    for k in range(1, step + 1):
        # k factors, each (r_i, s_i) with r_i + s_i >= 1, total degree <= step
        blocks = [(r, s) for r in range(step + 1) for s in range(step + 1) if 1 <= r + s <= step]
        for combo in itertools.product(blocks, repeat=k):
            deg = sum(r + s for r, s in combo)
            if deg > step:
                continue
            denom = deg
            for r, s in combo:
                denom *= math.factorial(r) * math.factorial(s)
            word = tuple(letter for r, s in combo for letter in (0,) * r + (1,) * s)
            if len(word) >= 2 and word[-1] == word[-2]:
                continue  # innermost bracket [X,X] or [Y,Y]
            coef = Fraction((-1) ** (k - 1), k * denom)
            weights[word] = weights.get(word, Fraction(0)) + coef
    return tuple((w, float(c)) for w, c in sorted(weights.items(), key=lambda t: (len(t[0]), t[0])) if c != 0)


def bch_coords(x, y, algebra: LieAlgebra):
    """Group product in exponential coordinates, broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if algebra.is_abelian:
        return x + y
    x, y = np.broadcast_arrays(x, y)
    out = x + y
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def nested(word):
        if word in cache:
            return cache[word]
        if len(word) == 1:
            val = x if word[0] == 0 else y
        else:
            head = x if word[0] == 0 else y
            val = algebra.bracket(head, nested(word[1:]))
        cache[word] = val
        return val

    for word, coef in _dynkin_words(algebra.nilpotency_step):
        if len(word) == 1:
            continue
        out = out + coef * nested(word)
    return out


def bch_product(x, y, algebra: LieAlgebra) -> GroupPoint:
    """``x * y`` for two group points."""
    cx, cy = _coords(x), _coords(y)
    if cx.shape[-1] != algebra.dim or cy.shape[-1] != algebra.dim:
        raise DimensionMismatch("point dimension does not match the algebra")
    return GroupPoint(bch_coords(cx, cy, algebra))


def group_inverse(x) -> GroupPoint:
    return GroupPoint(-_coords(x))


def left_translate(x0, points, algebra: LieAlgebra):
    """``x0^{-1} * points`` for an array of points (used for ball membership)."""
    return bch_coords(-_coords(x0), np.asarray(points, dtype=float), algebra)


def haar_measure_box(lower, upper) -> float:
    """Haar measure of an axis-aligned coordinate box (Lebesgue measure)."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape:
        raise DimensionMismatch("box corners have different dimensions")
    sides = upper - lower
    if np.any(sides < 0):
        raise NegativeSideLength(f"box has negative side lengths {sides}")
    return float(np.prod(sides))


def monte_carlo_volume(indicator, lower, upper, samples: int, rng, chunk: int = 200_000):
    """Estimate ``mu(E)`` for ``E`` contained in a box, returning (volume, stderr).

    ``indicator`` maps an ``(N, n)`` array of coordinates to booleans.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    box = haar_measure_box(lower, upper)
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        pts = lower + (upper - lower) * rng.random((k, lower.size))
        hits += int(np.count_nonzero(indicator(pts)))
        done += k
    frac = hits / samples
    return box * frac, box * math.sqrt(max(frac * (1 - frac), 0.0) / samples)
