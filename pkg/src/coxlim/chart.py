"""The affine chart {v : sum o_i v_i = 1} and the normalized action on it.

Points are plain numpy arrays in simple-root coordinates; batches are stacked
along the first axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coxsys import CoxeterSystem

BOUNDARY_TOL = 1e-10
SIMPLEX_TOL = -1e-12
SINGULAR_TOL = 1e-13


class ChartSingularityError(ArithmeticError):
    """Vector with |v|_1 = 0 cannot be normalized onto the chart."""


class DomainError(ValueError):
    """Point outside the region an operation is defined on."""


@dataclass(frozen=True)
class ChartPoint:
    coords: np.ndarray
    kind: str  # interior | boundary | exterior


class Chart:
    def __init__(self, system: CoxeterSystem, boundary_tol: float = BOUNDARY_TOL):
        self.system = system
        self.o = system.o
        self.gram = system.gram
        self.lam = system.neg_eigenvalue
        self.n = system.rank
        self.boundary_tol = boundary_tol
        # orthonormal basis of o^perp = V_0; q is positive definite there
        u, _, _ = np.linalg.svd(self.o.reshape(-1, 1))
        self._perp = u[:, 1:]
        self._perp_gram = self._perp.T @ self.gram @ self._perp

    def weighted_norm(self, v):
        return np.asarray(v) @ self.o

    def normalize(self, v):
        v = np.asarray(v, dtype=float)
        w = v @ self.o
        scale = np.linalg.norm(v, axis=-1)
        if np.any(np.abs(w) <= SINGULAR_TOL * np.maximum(scale, 1e-300)):
            raise ChartSingularityError("vector lies on V_0 (|v|_1 = 0)")
        return v / w[..., None] if v.ndim > 1 else v / w

    def quadratic(self, v):
        v = np.asarray(v)
        return np.einsum("...i,ij,...j->...", v, self.gram, v)

    def bilinear(self, u, v):
        return np.einsum("...i,ij,...j->...", np.asarray(u), self.gram, np.asarray(v))

    def classify(self, x) -> str:
        qx = float(self.quadratic(x))
        if abs(qx) <= self.boundary_tol:
            return "boundary"
        return "interior" if qx < 0 else "exterior"

    def point(self, v) -> ChartPoint:
        x = self.normalize(v)
        return ChartPoint(x, self.classify(x))

    def in_D(self, x):
        return self.quadratic(x) < 0

    def in_simplex(self, x, tol: float = SIMPLEX_TOL):
        """x in conv of the normalized simple roots iff every coordinate is >= 0."""
        return np.all(np.asarray(x) >= tol, axis=-1)

    def act(self, matrix, x):
        """Normalized action x -> (w x)^ for a matrix or a stack of matrices."""
        matrix = np.asarray(matrix)
        x = np.asarray(x)
        if matrix.ndim == 3:
            if x.ndim == 1:
                y = matrix @ x
            else:
                y = np.einsum("kij,kj->ki", matrix, x)
        else:
            y = x @ matrix.T
        return self.normalize(y)

    # boundary of D: o + t u with u in o^perp, q(o + t u) = lam + t^2 q(u)
    def boundary_point(self, direction):
        """Boundary point of D hit by the chart ray from o in a V_0 direction."""
        u = np.asarray(direction, dtype=float)
        u = u - np.multiply.outer(u @ self.o, self.o) if u.ndim > 1 else u - (u @ self.o) * self.o
        qu = self.quadratic(u)
        t = np.sqrt(-self.lam / qu)
        return self.o + (t[..., None] * u if u.ndim > 1 else t * u)

    def boundary_sample(self, k: int, rng: Optional[np.random.Generator] = None):
        rng = np.random.default_rng(0) if rng is None else rng
        z = rng.standard_normal((k, self.n - 1))
        return self.boundary_point(z @ self._perp.T)

    def interior_sample(self, k: int, rng: Optional[np.random.Generator] = None, max_fraction=1.0):
        """Points o + s t u with s uniform in [0, max_fraction) (not volume-uniform)."""
        rng = np.random.default_rng(0) if rng is None else rng
        b = self.boundary_sample(k, rng)
        s = rng.uniform(0.0, max_fraction, size=(k, 1))
        return self.o + s * (b - self.o)

    def coordinate_minima(self):
        """Exact minimum of each simple-root coordinate over the closure of D.

        Returns ``(minima, witnesses)``; ``witnesses[i]`` is the boundary point
        attaining the minimum of coordinate i.
        """
        qinv = np.linalg.inv(self._perp_gram)
        mins, wit = np.empty(self.n), np.empty((self.n, self.n))
        for i in range(self.n):
            c = self._perp[i, :]
            mins[i] = self.o[i] - np.sqrt(-self.lam) * np.sqrt(c @ qinv @ c)
            z = -qinv @ c
            wit[i] = self.boundary_point(self._perp @ z)
        return mins, wit

    def protrusion(self, tol: float = 1e-9):
        """Whether D sticks out of conv(simplex), i.e. R is non-empty, with a witness."""
        mins, wit = self.coordinate_minima()
        i = int(np.argmin(mins))
        return bool(mins[i] < -tol), wit[i], mins


def chart_basis(chart: Chart) -> np.ndarray:
    """Orthonormal basis (columns) of the chart's direction space V_0."""
    return chart._perp
