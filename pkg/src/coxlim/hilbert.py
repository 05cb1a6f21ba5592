"""Hilbert metric on the ellipsoid D and its hyperbolic structure.

Distances follow d(x, y) = log [a, x, y, b] with no factor 1/2, so every
closed form borrowed from the hyperboloid model carries an explicit factor 2
(d = 2 * d_hyp).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .chart import Chart, DomainError
from .coxsys import CoxeterSystem

XI_TOL = 1e-8


class DegenerateChordError(ValueError):
    pass


def _negative_root(a2, a1, a0):
    """Negative root of a2 t^2 + 2 a1 t + a0 (a2 > 0, a0 < 0), cancellation-free."""
    s = np.sqrt(a1 * a1 - a0 * a2)
    big = -(a1 + np.copysign(s, a1))
    return np.where(a1 >= 0, big / a2, a0 / big)


def _chord_log_ratio(qx, bxd, qd, qy, byd):
    # t_a < 0 measured from x, s_b > 0 measured from y (s_b = t_b - 1)
    ta = _negative_root(qd, bxd, qx)
    sb = -_negative_root(qd, -byd, qy)
    return np.log1p(1.0 / -ta) + np.log1p(1.0 / sb)


def ball_distance(y1, y2):
    """Hilbert metric of the open unit ball (Klein model picture), log cross ratio."""
    y1, y2 = np.asarray(y1, float), np.asarray(y2, float)
    d = y2 - y1
    qd = np.sum(d * d, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _chord_log_ratio(np.sum(y1 * y1, -1) - 1, np.sum(y1 * d, -1), np.where(qd > 0, qd, 1.0),
                               np.sum(y2 * y2, -1) - 1, np.sum(y2 * d, -1))
    return np.where(qd > 0, out, 0.0)


@dataclass(frozen=True)
class ModelMap:
    """Linear map g taking B to diag(1,...,1,-1), then the projection v -> v / v_n."""

    L: np.ndarray
    Lp: np.ndarray
    A: np.ndarray

    @classmethod
    def build(cls, system: CoxeterSystem) -> "ModelMap":
        lam, vecs = np.linalg.eigh(system.gram)
        if not (lam[0] < 0 and np.all(lam[1:] > 0)):
            raise DomainError(f"model map needs signature (n-1,1), eigenvalues {lam}")
        order = list(range(1, len(lam))) + [0]
        L = vecs[:, order].copy()
        ev = lam[order]
        if (L.T @ system.o)[-1] < 0:
            L[:, -1] *= -1
        Lp = np.diag(1.0 / np.sqrt(np.abs(ev)))
        A = np.diag(np.sign(ev))
        return cls(L, Lp, A)

    def g(self, v):
        # g = Lp^{-1} L^{-1}; L orthogonal
        return (np.asarray(v) @ self.L) / np.diag(self.Lp)

    def g_inverse(self, u):
        return (np.asarray(u) * np.diag(self.Lp)) @ self.L.T

    def to_ball(self, x):
        u = self.g(x)
        return u[..., :-1] / u[..., -1:]

    def from_ball(self, y, chart: Chart):
        y = np.asarray(y, float)
        u = np.concatenate([y, np.ones(y.shape[:-1] + (1,))], axis=-1)
        return chart.normalize(self.g_inverse(u))

    def residual(self, gram) -> float:
        M = self.L @ self.Lp
        return float(np.max(np.abs(M.T @ gram @ M - self.A)))


class HilbertGeometry:
    def __init__(self, system: CoxeterSystem, chart: Optional[Chart] = None):
        self.system = system
        self.chart = chart if chart is not None else Chart(system)
        self.gram = system.gram
        self.o = system.o
        self.model = ModelMap.build(system)
        self._o_hat = self.lift(self.o)

    # -- basic forms -----------------------------------------------------
    def B(self, u, v):
        return self.chart.bilinear(u, v)

    def q(self, v):
        return self.chart.quadratic(v)

    def lift(self, x):
        """Hyperboloid representative x / sqrt(-q(x)) of a point of D."""
        x = np.asarray(x, float)
        qx = self.q(x)
        if np.any(qx >= 0):
            raise DomainError("point is not in D")
        return x / np.sqrt(-qx)[..., None] if x.ndim > 1 else x / np.sqrt(-qx)

    def _check_inside(self, *pts):
        for p in pts:
            if np.any(self.q(p) >= 0):
                raise DomainError("point is not in D")

    # -- chords and distance ---------------------------------------------
    def boundary_chord(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        """Endpoints (a, b) on the boundary with a, x, y, b in this order."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        self._check_inside(x, y)
        d = y - x
        qd = self.q(d)
        if qd <= 0 or np.allclose(d, 0, atol=1e-15):
            raise DegenerateChordError("x and y coincide")
        ta = _negative_root(qd, self.B(x, d), self.q(x))
        sb = -_negative_root(qd, -self.B(y, d), self.q(y))
        return x + ta * d, y + sb * d

    def distance(self, x, y):
        """Hilbert distance; broadcasts over leading axes."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        self._check_inside(x, y)
        d = y - x
        qd = self.q(d)
        same = qd <= 0
        qd_safe = np.where(same, 1.0, qd)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = _chord_log_ratio(self.q(x), self.B(x, d), qd_safe, self.q(y), self.B(y, d))
        out = np.where(same, 0.0, out)
        if np.any(np.isnan(out)):
            raise DomainError("distance undefined (point on the boundary?)")
        return float(out) if np.ndim(out) == 0 else out

    def hyperboloid_distance(self, x, y):
        """Closed form 2 * d_hyp = 4 asinh(sqrt(q(u - v)) / 2) on lifted points."""
        u, v = self.lift(x), self.lift(y)
        return 4.0 * np.arcsinh(np.sqrt(np.maximum(self.q(u - v), 0.0)) / 2.0)

    def model_distance(self, x, y):
        """Distance computed after mapping both points into the unit ball."""
        return ball_distance(self.model.to_ball(x), self.model.to_ball(y))

    def model_isometry_check(self, x, y):
        return np.abs(self.distance(x, y) - self.model_distance(x, y))

    def gromov_product(self, x, y, base=None):
        base = self.o if base is None else base
        return 0.5 * (self.distance(base, x) + self.distance(base, y) - self.distance(x, y))

    # -- geodesics ---------------------------------------------------------
    def ray_point(self, xi, t):
        """Chart point at distance t from o along the ray towards the boundary point xi."""
        xi = self._check_boundary(xi)
        oh = self._o_hat
        e = xi / (-self.B(oh, xi)) - oh
        t = np.asarray(t, float)
        pts = np.multiply.outer(np.cosh(t / 2), oh) + np.multiply.outer(np.sinh(t / 2), e)
        return self.chart.normalize(pts)

    def ray_hyperboloid_point(self, xi, t):
        xi = self._check_boundary(xi)
        oh = self._o_hat
        e = xi / (-self.B(oh, xi)) - oh
        return np.cosh(t / 2) * oh + np.sinh(t / 2) * e

    def segment_point(self, x, y, s):
        return (1 - s) * np.asarray(x) + s * np.asarray(y)

    # -- Busemann functions -------------------------------------------------
    def _check_boundary(self, xi):
        xi = np.asarray(xi, float)
        scale = np.maximum(np.sum(xi * xi, axis=-1), 1.0)
        if np.any(np.abs(self.q(xi)) > XI_TOL * scale):
            raise DomainError("xi is not on the boundary of D")
        if np.any(self.B(xi, self.o) >= 0):
            raise DomainError("xi is not in the closure of the future cone")
        return xi

    def busemann(self, xi, x):
        """Busemann function of the ray o -> xi, normalized to vanish at o."""
        xi = self._check_boundary(xi)
        x = np.asarray(x, float)
        val = 2.0 * (np.log(-self.B(xi, self.lift(x))) - np.log(-self.B(xi, self._o_hat)))
        return float(val) if np.ndim(val) == 0 else val

    def busemann_limit(self, xi, x, T: float = 40.0):
        """d(c(T), x) - T evaluated in the hyperboloid (test oracle for busemann)."""
        c = self.ray_hyperboloid_point(xi, T)
        u = self.lift(x)
        z = -self.B(c, u)
        return 2.0 * np.arccosh(np.maximum(z, 1.0)) - T

    # -- horoballs ------------------------------------------------------
    def horoball(self, xi, level: float) -> "Horoball":
        return Horoball(self, np.asarray(xi, float), float(level))

    def horoball_from_null(self, eta) -> "Horoball":
        eta = np.asarray(eta, float)
        xi = self.chart.normalize(eta)
        level = -2.0 * np.log(-self.B(eta, self._o_hat))
        return Horoball(self, xi, float(level))


class Horoball:
    """Sublevel set {x : busemann(xi, x) < level}, stored as a null vector eta.

    x lies in the horoball iff -B(eta, x_hat) < 1 with x_hat on the hyperboloid.
    """

    def __init__(self, geom: HilbertGeometry, xi, level: float):
        self.geom = geom
        self.xi = geom._check_boundary(xi)
        self.level = level
        self.eta = self.xi * np.exp(-level / 2.0) / (-geom.B(self.xi, geom._o_hat))

    def __repr__(self):
        return f"Horoball(xi={np.round(self.xi, 6)}, level={self.level:.6g})"

    def busemann(self, x):
        return self.geom.busemann(self.xi, x)

    def depth(self, x):
        """-B(eta, x_hat); the point is inside iff this is < 1."""
        return -self.geom.B(self.eta, self.geom.lift(x))

    def contains(self, x):
        return self.depth(x) < 1.0

    def image(self, matrix) -> "Horoball":
        return self.geom.horoball_from_null(np.asarray(matrix) @ self.eta)

    def disjoint_from(self, other: "Horoball", tol: float = 1e-9) -> bool:
        return -self.geom.B(self.eta, other.eta) >= 2.0 - tol

    def distance_from_base(self) -> float:
        """Hilbert distance from o to the horoball (= -level)."""
        return -self.level

    def horosphere_sample(self, k: int, rng=None, scale: float = 1.0, radii=(1e-2, 1e2)):
        """Chart points on the horosphere, spread over several length scales.

        Horospherical radii are log-uniform in ``radii``; much beyond 1e2 the
        chart point sits so close to xi that q(x) loses most of its digits.
        """
        rng = np.random.default_rng(0) if rng is None else rng
        geom = self.geom
        eta, oh = self.eta, geom._o_hat
        a = -geom.B(eta, oh)
        zeta = (oh - eta / (2 * a)) / a
        G = geom.gram
        cons = np.stack([G @ eta, G @ zeta])
        _, _, vt = np.linalg.svd(cons)
        comp = vt[2:].T
        # B-orthonormalize the spacelike complement
        cg = comp.T @ G @ comp
        w, v = np.linalg.eigh(cg)
        basis = comp @ v / np.sqrt(w)
        m = basis.shape[1]
        direc = rng.standard_normal((k, m))
        direc /= np.linalg.norm(direc, axis=1, keepdims=True)
        radius = scale * np.exp(rng.uniform(np.log(radii[0]), np.log(radii[1]), size=(k, 1)))
        s = direc * radius
        u = ((1 + np.sum(s * s, 1, keepdims=True)) / 2) * eta + zeta + s @ basis.T
        return geom.chart.normalize(u)

    def chord_interval(self, x, y):
        """Parameter interval (t0, t1) within [0, 1] where x + t(y - x) is inside, or None."""
        geom = self.geom
        x, y = np.asarray(x, float), np.asarray(y, float)
        d = y - x
        al, be = geom.B(x, self.eta), geom.B(d, self.eta)
        a2 = be * be + geom.q(d)
        a1 = al * be + geom.B(x, d)
        a0 = al * al + geom.q(x)
        disc = a1 * a1 - a0 * a2
        if disc <= 0:
            return None
        s = np.sqrt(disc)
        big = -(a1 + np.copysign(s, a1))
        r1, r2 = sorted((big / a2, a0 / big))
        lo, hi = max(r1, 0.0), min(r2, 1.0)
        if lo >= hi:
            return None
        return lo, hi

    def arc_length(self, p, r):
        """Length of the horospherical geodesic between two horosphere points."""
        geom = self.geom
        u, v = geom.lift(p), geom.lift(r)
        return 2.0 * np.sqrt(max(float(geom.q(u - v)), 0.0))
