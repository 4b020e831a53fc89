"""Sampled functions on uniform boxes in exponential coordinates.

A grid is the lattice ``{-L + k h : k = 0..m-1}^n`` with ``h = 2L/(m-1)``,
optionally pushed forward by an invertible linear ``frame``.  Quadrature is
the node sum with weight ``h^n |det frame|``; Haar measure is Lebesgue
measure in coordinates, so this is the plain Riemann sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, special

from .errors import ConfigInvalid, GridCoverage, GridMismatch


@dataclass(frozen=True, eq=False)
class GridSpec:
    L: float
    m: int
    n: int
    frame: np.ndarray | None = None

    def __post_init__(self):
        if self.m < 2 or self.m % 2 == 0:
            raise ConfigInvalid("m", f"nodes per axis must be odd and >= 3, got {self.m}")
        if self.L <= 0:
            raise ConfigInvalid("L", "box half-width must be positive")
        if self.frame is not None:
            fr = np.array(self.frame, dtype=float)
            fr.setflags(write=False)
            object.__setattr__(self, "frame", fr)

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.m - 1)

    @property
    def shape(self):
        return (self.m,) * self.n

    @property
    def size(self) -> int:
        return self.m**self.n

    @property
    def weight(self) -> float:
        w = self.h**self.n
        if self.frame is not None:
            w *= abs(float(np.linalg.det(self.frame)))
        return w

    def axis(self):
        return -self.L + self.h * np.arange(self.m)

    def lattice_nodes(self):
        axes = np.meshgrid(*([self.axis()] * self.n), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def nodes(self):
        pts = self.lattice_nodes()
        if self.frame is not None:
            pts = pts @ self.frame.T
        return pts

    def with_frame(self, frame) -> "GridSpec":
        frame = np.asarray(frame, dtype=float)
        if self.frame is not None:
            frame = frame @ self.frame
        return GridSpec(self.L, self.m, self.n, frame)

    def same_as(self, other: "GridSpec") -> bool:
        if (self.L, self.m, self.n) != (other.L, other.m, other.n):
            return False
        if self.frame is None and other.frame is None:
            return True
        a = np.eye(self.n) if self.frame is None else self.frame
        b = np.eye(self.n) if other.frame is None else other.frame
        return bool(np.array_equal(a, b))

    def to_json(self):
        return {
            "L": self.L,
            "m": self.m,
            "n": self.n,
            "frame": None if self.frame is None else self.frame.tolist(),
        }

    @classmethod
    def from_json(cls, d):
        return cls(float(d["L"]), int(d["m"]), int(d["n"]), None if d.get("frame") is None else np.array(d["frame"]))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: GridSpec
    values: np.ndarray = field()

    def __post_init__(self):
        v = np.array(self.values)
        if v.size != self.grid.size:
            raise GridMismatch(f"{v.size} values for a grid of {self.grid.size} nodes")
        v = v.reshape(self.grid.shape)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: GridSpec, fn):
        return cls(grid, fn(grid.nodes()))

    @classmethod
    def zeros(cls, grid: GridSpec):
        return cls(grid, np.zeros(grid.size))

    @property
    def flat(self):
        return self.values.ravel()

    def nodes(self):
        return self.grid.nodes()

    def integral(self, weight_fn=None) -> float:
        v = self.flat
        if weight_fn is not None:
            v = v * weight_fn(self.nodes())
        return float(np.sum(v) * self.grid.weight)

    def sup_norm(self) -> float:
        return float(np.abs(self.flat).max()) if self.flat.size else 0.0

    def support(self, tol: float = 0.0):
        """Nodes (coordinates) where the function is nonzero, and their values."""
        mask = np.abs(self.flat) > tol
        return self.nodes()[mask], self.flat[mask]

    def scaled(self, c) -> "GridFunction":
        return GridFunction(self.grid, c * self.flat)

    def transported(self, linear, factor=1.0) -> "GridFunction":
        """Same values on the nodes moved by ``linear``, times ``factor``."""
        return GridFunction(self.grid.with_frame(linear), factor * self.flat)

    def _boundary_nonzero(self) -> bool:
        v = np.abs(self.values)
        for ax in range(v.ndim):
            if np.any(np.take(v, 0, axis=ax)) or np.any(np.take(v, -1, axis=ax)):
                return True
        return False

    def sample(self, points, method: str = "multilinear"):
        """Evaluate at arbitrary coordinates; zero outside the grid.

        Extension by zero is only legitimate if the function vanishes on the
        boundary layer; otherwise targets outside raise GridCoverage.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.grid.frame is not None:
            pts = np.linalg.solve(self.grid.frame, pts.T).T
        g = self.grid
        idx = (pts + g.L) / g.h
        # tolerate round-off at the box faces
        idx = np.where(np.abs(idx) < 1e-9, 0.0, idx)
        idx = np.where(np.abs(idx - (g.m - 1)) < 1e-9, g.m - 1.0, idx)
        outside = np.any((idx < 0) | (idx > g.m - 1), axis=1)
        if np.any(outside) and self._boundary_nonzero():
            raise GridCoverage(f"{int(outside.sum())} sample points fall outside the source grid")
        v = self.values
        if method == "nearest":
            k = np.clip(np.rint(idx), 0, g.m - 1).astype(int)
            out = v[tuple(k.T)].astype(v.dtype)
        elif method == "multilinear":
            base = np.clip(np.floor(idx), 0, g.m - 2).astype(int)
            frac = idx - base
            out = np.zeros(len(pts), dtype=np.result_type(v.dtype, float))
            for corner in range(2**g.n):
                bits = np.array([(corner >> d) & 1 for d in range(g.n)])
                w = np.prod(np.where(bits, frac, 1.0 - frac), axis=1)
                out = out + w * v[tuple((base + bits).T)]
        else:
            raise ValueError(f"unknown resampling method {method!r}")
        out = np.where(outside, 0.0, out)
        return out


def lp_quasinorm(f: GridFunction, p: float) -> float:
    """Discrete ``(sum |f|^p h^n)^{1/p}``."""
    if p <= 0:
        raise ValueError("p must be positive")
    return float((np.sum(np.abs(f.flat) ** p) * f.grid.weight) ** (1.0 / p))


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / special.gamma(n / 2 + 1)


# ------------------------------------------------------------------ bumps


def _smooth_step(u):
    """C-infinity transition: 1 for u <= 0, 0 for u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u < 1, np.exp(-1.0 / np.maximum(1 - u, 1e-300)), 0.0)
        b = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class Bump:
    """Radial smooth bump: ``height`` on |x| <= inner, supported in |x| < outer.

    ``inner = 0`` gives the classical ``exp(-1/(1-|x|^2))`` shape.  With
    ``normalized=True`` the height is chosen so that the integral is 1.
    """

    n: int
    outer: float = 1.0
    inner: float = 0.0
    normalized: bool = True

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        if self.inner > 0:
            return _smooth_step((r - self.inner) / (self.outer - self.inner))
        u = r / self.outer
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(u < 1, np.exp(1.0 - 1.0 / np.maximum(1 - u * u, 1e-300)), 0.0)

    @cached_property
    def mass_unnormalized(self) -> float:
        surf = self.n * unit_ball_volume(self.n)
        val, _ = integrate.quad(lambda r: self.profile(r) * r ** (self.n - 1), 0, self.outer, limit=200, epsabs=0, epsrel=1e-13)
        return surf * val

    @cached_property
    def height(self) -> float:
        return 1.0 / self.mass_unnormalized if self.normalized else 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.height * self.profile(np.linalg.norm(x, axis=-1))


@dataclass(frozen=True)
class Gaussian:
    """Normalized Gaussian ``exp(-|x-c|^2/(2 s^2))`` (not compactly supported)."""

    n: int
    width: float = 1.0
    center: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center, dtype=float) if self.center else 0.0
        r2 = np.sum((x - c) ** 2, axis=-1)
        return np.exp(-r2 / (2 * self.width**2)) / (2 * math.pi * self.width**2) ** (self.n / 2)
