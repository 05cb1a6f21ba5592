"""Cusps, the trichotomy of actions, isometry types, horoball families and
finite-depth evidence for the boundary map w -> w . o.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .chart import Chart, DomainError
from .coxsys import INF, CoxeterSystem, classify_subsystems
from .hilbert import HilbertGeometry, Horoball
from .words import CayleyBall, WordEngine, format_word

log = logging.getLogger(__name__)

CUSP_TOL = 1e-10
SPECTRAL_BAND = 1e-6
FIXED_TOL = 1e-8
MP_DIGITS = 60


class DegeneracyError(ArithmeticError):
    pass


class NumericalAmbiguityError(ArithmeticError):
    pass


class SearchFailure(RuntimeError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


# --------------------------------------------------------------------------
# cusps and classification

@dataclass(frozen=True)
class CuspPoint:
    delta_prime: Tuple[int, ...]
    point: np.ndarray = field(compare=False)
    rank: int
    closure_margin: float = field(compare=False, default=0.0)  # max_beta B(p, beta) outside delta'

    def __str__(self):
        sub = "{" + ",".join(str(i + 1) for i in self.delta_prime) + "}"
        return f"rank {self.rank} cusp at {sub}: " + " ".join(f"{c:.17g}" for c in self.point)


def compute_cusps(system: CoxeterSystem, tol: float = CUSP_TOL) -> List[CuspPoint]:
    """Boundary points fixed by irreducible affine special subgroups."""
    n = system.rank
    G = system.gram
    out: List[CuspPoint] = []
    for sub in classify_subsystems(system.form, max_rank=n - 1, tol=system.tol):
        if sub.kind != "affine":
            continue
        idx = list(sub.subset)
        lam, vecs = np.linalg.eigh(G[np.ix_(idx, idx)])
        cut = system.tol * max(1.0, np.max(np.abs(lam)))
        if np.sum(np.abs(lam) <= cut) != 1:
            raise DegeneracyError(f"affine block {idx} has nullity != 1")
        v = vecs[:, 0]
        v = v if v.sum() > 0 else -v
        full = np.zeros(n)
        full[idx] = v
        p = full / (full @ system.o)
        bp = G @ p
        outside = [j for j in range(n) if j not in idx]
        margin = float(max(bp[outside])) if outside else -np.inf
        checks = {
            "q(p)": abs(p @ bp) <= tol,
            "B(p,alpha)=0 on delta'": np.all(np.abs(bp[idx]) <= 1e-9),
            "p >= 0 on delta'": np.all(p[idx] > 0),
            "p in closure of K": margin <= 1e-9,
        }
        failed = [k for k, ok in checks.items() if not ok]
        if failed:
            raise DegeneracyError(f"cusp for {idx} fails {failed}")
        p.setflags(write=False)
        out.append(CuspPoint(tuple(idx), p, len(idx), margin))
    # support determines delta', so distinct subsets give distinct points
    return out


CASES = ("cocompact", "with_cusps", "convex_cocompact")


@dataclass
class ClassificationResult:
    case: str
    witnesses: Dict[str, object]

    @property
    def roman(self) -> str:
        return {"cocompact": "i", "with_cusps": "ii", "convex_cocompact": "iii"}[self.case]


def classify_action(system: CoxeterSystem, chart: Optional[Chart] = None) -> ClassificationResult:
    n = system.rank
    subs = classify_subsystems(system.form, max_rank=n - 1, tol=system.tol)
    chart = chart or Chart(system)
    protrudes, witness, minima = chart.protrusion()
    geometry = {"coordinate_minima": minima, "protrudes": protrudes}
    affine = [s for s in subs if s.kind == "affine"]
    if affine:
        return ClassificationResult("with_cusps", {
            "affine_subsystems": [s.subset for s in affine],
            "cusps": compute_cusps(system), **geometry})
    top = [s for s in subs if len(s.subset) == n - 1]
    if all(s.kind == "finite" for s in top):
        return ClassificationResult("cocompact", {"rank_n-1_subsystems": [s.subset for s in top], **geometry})
    return ClassificationResult("convex_cocompact", {
        "non_finite_subsystems": [(s.subset, s.kind) for s in subs if s.kind != "finite"],
        "protrusion_witness": witness, **geometry})


# --------------------------------------------------------------------------
# isometry types

@dataclass
class IsometryType:
    kind: str
    spectral_radius: float
    order: Optional[int] = None
    fixed_points: List[np.ndarray] = field(default_factory=list)
    eigenvalues: List[complex] = field(default_factory=list)


def _mp_reflections(system: CoxeterSystem):
    n = system.rank
    G = mpmath.eye(n)
    for i, j in itertools.combinations(range(n), 2):
        m = system.matrix.m(i, j)
        if m == INF:
            c = mpmath.mpf(system.matrix.weight(i, j))
        elif m == 2:
            c = mpmath.mpf(0)
        else:
            c = -mpmath.cos(mpmath.pi / int(m))
        G[i, j] = G[j, i] = c
    gens = []
    for i in range(n):
        s = mpmath.eye(n)
        for j in range(n):
            s[i, j] -= 2 * G[i, j]
        gens.append(s)
    return gens


def isometry_type(system: CoxeterSystem, word: Sequence[int], order_bound: Optional[int] = None,
                  band: float = SPECTRAL_BAND) -> IsometryType:
    """Elliptic / hyperbolic / parabolic, with spectral evidence.

    The spectrum is computed in 60-digit arithmetic: a parabolic element has
    a unipotent Jordan block, whose eigenvalues double precision would smear
    by about eps**(1/3).
    """
    word = tuple(word)
    if not word:
        raise ValueError("identity has no isometry type")
    n = system.rank
    engine = WordEngine(system)
    M = engine.matrix(word)
    bound = order_bound or 2 * system.matrix.largest_finite_m() ** 2
    P = np.eye(n)
    for k in range(1, bound + 1):
        P = P @ M
        if np.max(np.abs(P - np.eye(n))) <= FIXED_TOL:
            return IsometryType("elliptic", 1.0, order=k)
        if np.max(np.abs(P)) > 1e12:
            break
    with mpmath.workdps(MP_DIGITS):
        gens = _mp_reflections(system)
        Mm = mpmath.eye(n)
        for a in word:
            Mm = Mm * gens[a]
        ev, er = mpmath.eig(Mm)
        mods = [abs(e) for e in ev]
        rho = max(mods)
        eigs = [complex(e) for e in ev]
        if rho > 1 + band:
            i_max = mods.index(rho)
            i_min = mods.index(min(mods))
            pts = []
            for i in (i_max, i_min):
                v = np.array([float(mpmath.re(er[r, i])) for r in range(n)])
                pts.append(v / (v @ system.o))
            return IsometryType("hyperbolic", float(rho), fixed_points=pts, eigenvalues=eigs)
        if abs(rho - 1) > band:
            raise NumericalAmbiguityError(f"spectral radius {rho} below 1 by more than {band}")
    # parabolic: the 1-eigenspace meets the light cone in exactly one ray
    u, s, vt = np.linalg.svd(M - np.eye(n))
    kern = vt[s <= 1e-8 * max(1.0, s[0])].T
    if kern.shape[1] == 0:
        raise NumericalAmbiguityError(f"no fixed vectors; margin {float(rho) - 1:.3g}")
    R = kern.T @ system.gram @ kern
    lam, vecs = np.linalg.eigh(R)
    null = np.abs(lam) <= 1e-9
    if np.sum(null) != 1 or np.any(lam < -1e-9):
        raise NumericalAmbiguityError(f"fixed subspace form has eigenvalues {lam}; expected one null direction")
    v = kern @ vecs[:, np.flatnonzero(null)[0]]
    return IsometryType("parabolic", float(rho), fixed_points=[v / (v @ system.o)], eigenvalues=eigs)


def coxeter_element(subset: Sequence[int]) -> Tuple[int, ...]:
    return tuple(sorted(subset))


# --------------------------------------------------------------------------
# limit sets

@dataclass
class LimitSample:
    points: np.ndarray
    mode: str
    depth: int
    levels: Tuple[int, int]
    q_max: float


def limit_set_sample(system: CoxeterSystem, depth: int, mode: str = "orbit",
                     window: Optional[int] = None, q_max: float = 0.05,
                     generators: Optional[Sequence[int]] = None,
                     engine: Optional[WordEngine] = None, chart: Optional[Chart] = None) -> LimitSample:
    """Normalized orbit points w.o (or normalized roots w(alpha)) close to the boundary.

    Uses elements with length in [depth - window + 1, depth]; the default
    window is the upper half of the ball.
    """
    if mode not in ("orbit", "roots"):
        raise ValueError(f"mode must be 'orbit' or 'roots', not {mode!r}")
    engine = engine or WordEngine(system)
    chart = chart or Chart(system)
    ball = engine.enumerate_ball(depth, generators=generators)
    window = depth - depth // 2 if window is None else window
    lo = max(0, depth - window + 1)
    sel = ball.lengths >= lo
    mats = ball.matrices[sel]
    if mode == "orbit":
        pts = chart.act(mats, np.broadcast_to(chart.o, (len(mats), chart.n)))
    else:
        gens = range(system.rank) if generators is None else sorted(generators)
        roots = np.concatenate([mats[:, :, s] for s in gens]) if len(mats) else np.empty((0, chart.n))
        roots = roots[np.all(roots >= -1e-9 * np.max(np.abs(roots), axis=1, keepdims=True), axis=1)]
        pts = chart.normalize(roots) if len(roots) else roots
    if len(pts):
        pts = pts[np.abs(chart.quadratic(pts)) <= q_max]
    return LimitSample(np.asarray(pts).reshape(-1, chart.n), mode, depth, (lo, depth), q_max)


def write_limit_csv(path, sample: LimitSample) -> None:
    with open(path, "w") as fh:
        fh.write(f"# coxeter-limits v1, mode={sample.mode}, depth={sample.depth}\n")
        for row in sample.points:
            fh.write(",".join(f"{c:.17g}" for c in row) + "\n")


def read_limit_csv(path) -> Tuple[Dict[str, str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# coxeter-limits v1"):
            raise ValueError(f"{path}: not a coxeter-limits v1 file")
        meta = dict(part.strip().split("=", 1) for part in header[len("# coxeter-limits v1,"):].split(","))
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    return meta, np.array(rows)


# --------------------------------------------------------------------------
# fundamental polytope and horoballs

def polytope_vertices(system: CoxeterSystem, tol: float = 1e-9) -> List[Tuple[np.ndarray, frozenset]]:
    """Vertices of {B(alpha, v) <= 0, v_i >= 0} in the chart, with active constraints.

    Constraint labels: ("H", i) for B(alpha_i, v) = 0 and ("P", i) for v_i = 0.
    """
    n = system.rank
    G, o = system.gram, system.o
    rows = [(("H", i), G[i]) for i in range(n)] + [(("P", i), np.eye(n)[i]) for i in range(n)]
    found: List[Tuple[np.ndarray, frozenset]] = []
    for combo in itertools.combinations(range(2 * n), n - 1):
        A = np.vstack([o] + [rows[c][1] for c in combo])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        rhs = np.zeros(n)
        rhs[0] = 1.0
        v = np.linalg.solve(A, rhs)
        if np.any(G @ v > tol) or np.any(v < -tol):
            continue
        active = frozenset(lbl for lbl, r in rows if abs(r @ v) <= tol)
        for i, (w, act) in enumerate(found):
            if np.allclose(w, v, atol=1e-9):
                found[i] = (w, act | active)
                break
        else:
            found.append((v, active))
    return found


def _distance_to_segment(geom: HilbertGeometry, a, b) -> float:
    """Hilbert distance from o to the part of the chord [a, b] inside D (inf if none)."""
    chart = geom.chart
    d = b - a
    q2, q1, q0 = chart.quadratic(d), chart.bilinear(a, d), chart.quadratic(a)
    if q2 > 0:
        disc = q1 * q1 - q0 * q2
        if disc <= 0:
            return math.inf
        r1, r2 = sorted(((-q1 - math.sqrt(disc)) / q2, (-q1 + math.sqrt(disc)) / q2))
    else:
        r1, r2 = -math.inf, math.inf
    lo, hi = max(r1, 0.0), min(r2, 1.0)
    if lo >= hi:
        return math.inf
    eps = 1e-12 * (hi - lo)
    f = lambda t: geom.distance(geom.o, a + t * d)
    res = minimize_scalar(f, bounds=(lo + eps, hi - eps), method="bounded", options={"xatol": 1e-10})
    return float(res.fun)


def base_radius(system: CoxeterSystem, geom: Optional[HilbertGeometry] = None) -> float:
    """Radius r around o beyond which only cusp neighbourhoods of the polytope remain.

    Maximum distance from o to the edges of the fundamental polytope and to its
    finite vertices (edges between two cusps are complete geodesics).
    """
    geom = geom or HilbertGeometry(system)
    verts = polytope_vertices(system)
    n = system.rank
    r = 0.0
    for (va, aa), (vb, ab) in itertools.combinations(verts, 2):
        if len(aa & ab) >= n - 2:
            dist = _distance_to_segment(geom, va, vb)
            if math.isfinite(dist):
                r = max(r, dist)
    for v, _ in verts:
        if geom.q(v) < -1e-12:
            r = max(r, geom.distance(geom.o, v))
    return r


@dataclass
class HoroballFamily:
    """Distinct horoball images w . O_p for cusps p and |w| <= depth, at level 0."""

    etas0: np.ndarray  # null vectors at level 0, one row per distinct horoball
    points: np.ndarray
    cusp_index: np.ndarray
    depth: int


def horoball_family(system: CoxeterSystem, cusps: Sequence[CuspPoint], ball: CayleyBall,
                    geom: HilbertGeometry) -> HoroballFamily:
    etas, pts, which = [], [], []
    for ci, c in enumerate(cusps):
        eta0 = geom.horoball(c.point, 0.0).eta
        imgs = ball.matrices @ eta0
        etas.append(imgs)
        pts.append(geom.chart.normalize(imgs))
        which.append(np.full(len(imgs), ci))
    etas, pts, which = np.concatenate(etas), np.concatenate(pts), np.concatenate(which)
    key = np.round(pts, 9)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    uniq = etas[first]
    return HoroballFamily(uniq, pts[first], which[first], ball.depth)


def _pairwise_products(G, etas):
    return -(etas @ G @ etas.T)


def level_diagnostics(system, fam: HoroballFamily, geom: HilbertGeometry, k: float, r: float) -> Dict[str, object]:
    scale = math.exp(-k)
    P = _pairwise_products(system.gram, fam.etas0) * scale
    np.fill_diagonal(P, np.inf)
    min_pair = float(P.min()) if len(P) > 1 else math.inf
    etas = fam.etas0 * math.exp(-k / 2)
    segs_ok = True
    for s in range(system.rank):
        so = geom.chart.act(system.reflections[s], system.o)
        for eta in etas:
            if _chord_hits(geom, eta, system.o, so):
                segs_ok = False
                break
    return {"k": k, "misses_base_ball": -k > r, "min_pair_product": min_pair,
            "pairwise_disjoint": min_pair >= 2.0, "generator_segments_clear": segs_ok}


def _chord_hits(geom, eta, x, y) -> bool:
    d = y - x
    al, be = geom.B(x, eta), geom.B(d, eta)
    a2 = be * be + geom.q(d)
    a1 = al * be + geom.B(x, d)
    a0 = al * al + geom.q(x)
    disc = a1 * a1 - a0 * a2
    if disc <= 0:
        return False
    s = math.sqrt(disc)
    r1, r2 = (-a1 - s) / a2, (-a1 + s) / a2
    return max(r1, 0.0) < min(r2, 1.0)


def horoball_level_search(system: CoxeterSystem, cusps: Sequence[CuspPoint], orbit_depth: int = 6,
                          geom: Optional[HilbertGeometry] = None, engine: Optional[WordEngine] = None,
                          max_doublings: int = 16, refine_steps: int = 20):
    """Largest admissible level k < 0: grid -1, -2, -4, ... then bisection.

    Admissible: horoballs at the cusps miss B(o, r), all distinct images over
    |w| <= orbit_depth are pairwise disjoint, and every segment [o, s.o] stays
    outside them. Returns ``(k, diagnostics)``.
    """
    if not cusps:
        raise SearchFailure("no cusps: nothing to truncate")
    geom = geom or HilbertGeometry(system)
    engine = engine or WordEngine(system)
    ball = engine.enumerate_ball(orbit_depth)
    fam = horoball_family(system, cusps, ball, geom)
    r = base_radius(system, geom)

    def ok(k):
        dg = level_diagnostics(system, fam, geom, k, r)
        return dg["misses_base_ball"] and dg["pairwise_disjoint"] and dg["generator_segments_clear"], dg

    k_bad, k_good = 0.0, None
    k = -1.0
    tried = []
    for _ in range(max_doublings):
        good, dg = ok(k)
        tried.append(dg)
        if good:
            k_good = k
            break
        k_bad = k
        k *= 2
    if k_good is None:
        raise SearchFailure("no admissible horoball level on the grid", {"tried": tried, "radius": r})
    for _ in range(refine_steps):
        mid = 0.5 * (k_good + k_bad)
        good, _ = ok(mid)
        if good:
            k_good = mid
        else:
            k_bad = mid
    _, dg = ok(k_good)
    dg.update(radius=r, n_horoballs=len(fam.etas0), orbit_depth=orbit_depth)
    return k_good, dg


# --------------------------------------------------------------------------
# truncated space and the path metric on it

class TruncatedSpace:
    """D'' = D' minus the horoball orbit, realised over a finite orbit depth."""

    def __init__(self, system: CoxeterSystem, level: float, orbit_depth: int = 6,
                 cusps: Optional[Sequence[CuspPoint]] = None,
                 geom: Optional[HilbertGeometry] = None, engine: Optional[WordEngine] = None):
        self.system = system
        self.geom = geom or HilbertGeometry(system)
        self.engine = engine or WordEngine(system)
        self.cusps = list(compute_cusps(system) if cusps is None else cusps)
        self.level = float(level)
        self.orbit_depth = orbit_depth
        self.ball = self.engine.enumerate_ball(orbit_depth)
        if self.cusps:
            self.family = horoball_family(system, self.cusps, self.ball, self.geom)
            self.etas = self.family.etas0 * math.exp(-self.level / 2)
        else:
            self.family = None
            self.etas = np.empty((0, system.rank))
        self.protrudes = self.geom.chart.protrusion()[0]

    @property
    def horoballs(self) -> List[Horoball]:
        return [self.geom.horoball_from_null(e) for e in self.etas]

    def depths(self, x):
        """-B(eta_j, x_hat) for every horoball (inside iff < 1)."""
        u = self.geom.lift(x)
        return -(np.atleast_2d(u) @ self.system.gram @ self.etas.T)

    def in_horoballs(self, x):
        if not len(self.etas):
            return np.zeros(np.atleast_2d(x).shape[0], bool)
        return np.any(self.depths(x) < 1.0, axis=1)

    def in_D_prime(self, x):
        """Not in any w . R for |w| <= orbit depth (always true when R is empty)."""
        x = np.atleast_2d(x)
        if not self.protrudes:
            return np.ones(len(x), bool)
        imgs = np.einsum("kij,pj->pki", self.ball.inverses, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = imgs @ self.system.o
            pts = imgs / w[..., None]
        return ~np.any(np.any(pts < -1e-12, axis=2), axis=1)

    def contains(self, x):
        x = np.atleast_2d(x)
        return (self.geom.q(x) < 0) & ~self.in_horoballs(x) & self.in_D_prime(x)

    def crossings(self, x, y):
        """Sorted (t0, t1, j) for horoballs j crossed by the chord x -> y."""
        g = self.geom
        d = y - x
        G = self.system.gram
        al, be = self.etas @ G @ x, self.etas @ G @ d
        a2 = be * be + g.q(d)
        a1 = al * be + g.B(x, d)
        a0 = al * al + g.q(x)
        disc = a1 * a1 - a0 * a2
        hit = np.flatnonzero(disc > 0)
        out = []
        for j in hit:
            s = math.sqrt(disc[j])
            big = -(a1[j] + math.copysign(s, a1[j]))
            r1, r2 = sorted((big / a2[j], a0[j] / big))
            lo, hi = max(r1, 0.0), min(r2, 1.0)
            if lo < hi:
                out.append((lo, hi, int(j)))
        return sorted(out)

    def truncated_distance(self, x, y) -> float:
        """Length of the chord with each horoball crossing replaced by a horospherical arc.

        This is an upper approximation of d'. The arcs stay on the horospheres,
        which miss every other (disjoint, open) horoball, so one round of
        surgery is already a fixed point.
        """
        x, y = np.asarray(x, float), np.asarray(y, float)
        if np.any(self.in_horoballs(np.vstack([x, y]))):
            raise DomainError("endpoint lies inside a horoball")
        g = self.geom
        if np.allclose(x, y, atol=1e-15):
            return 0.0
        cross = self.crossings(x, y)
        if not cross:
            return g.distance(x, y)
        total, t_prev = 0.0, 0.0
        d = y - x
        for lo, hi, j in cross:
            p, r = x + lo * d, x + hi * d
            if lo > t_prev:
                total += g.distance(x + t_prev * d, p)
            u, v = g.lift(p), g.lift(r)
            total += 2.0 * math.sqrt(max(float(g.q(u - v)), 0.0))
            t_prev = hi
        if t_prev < 1.0:
            total += g.distance(x + t_prev * d, y)
        return total

    def surgered_path(self, x, y, samples: int = 16) -> np.ndarray:
        """Chart points along the surgered path (for Hausdorff estimates)."""
        g = self.geom
        x, y = np.asarray(x, float), np.asarray(y, float)
        d = y - x
        pts, t_prev = [], 0.0
        s = np.linspace(0, 1, samples)
        for lo, hi, j in self.crossings(x, y):
            pts.append(x + np.outer(np.linspace(t_prev, lo, samples), d))
            u, v = g.lift(x + lo * d), g.lift(x + hi * d)
            eta = self.etas[j]
            # horospherical geodesic: straight in horosphere coordinates
            arc = self._onto_horosphere(np.outer(1 - s, u) + np.outer(s, v), eta)
            pts.append(g.chart.normalize(arc))
            t_prev = hi
        pts.append(x + np.outer(np.linspace(t_prev, 1, samples), d))
        return np.concatenate(pts)

    def _onto_horosphere(self, pts, eta):
        # u + c*eta keeps -B(u, eta) and fixes q(u) = -1 for the right c
        G = self.system.gram
        qv = np.einsum("ij,jk,ik->i", pts, G, pts)
        be = pts @ G @ eta
        c = (-1.0 - qv) / (2 * be)
        return pts + np.outer(c, eta)


@dataclass
class QuasiIsometryReport:
    depth: int
    l_lower: float
    l_upper: float
    C: float
    P_estimate: float
    max_generator_step: float
    n_elements: int


def quasi_isometry_report(ball: CayleyBall, ts: Optional[TruncatedSpace], system: CoxeterSystem,
                          geom: Optional[HilbertGeometry] = None, p_samples: int = 100,
                          seed: int = 0) -> QuasiIsometryReport:
    """Empirical l, l', C (and a Hausdorff estimate P) over the ball.

    d'(o, w.o) is bounded above by both the surgered chord and the orbit path
    along the word of w (whose segments [w_i.o, w_i s.o] lie in D'').
    """
    geom = geom or (ts.geom if ts is not None else HilbertGeometry(system))
    o = system.o
    steps = np.array([geom.distance(o, geom.chart.act(s, o)) for s in system.reflections])
    sel = np.flatnonzero(ball.lengths >= 1)
    pts = geom.chart.act(ball.matrices[sel], np.broadcast_to(o, (len(sel), system.rank)))
    lengths = ball.lengths[sel].astype(float)
    d = geom.distance(np.broadcast_to(o, pts.shape), pts)
    path = np.array([steps[list(ball.words[i])].sum() for i in sel])
    if ts is not None and len(ts.etas):
        chord = np.array([ts.truncated_distance(o, p) for p in pts])
        dprime = np.minimum(chord, path)
    else:
        dprime = np.minimum(d, path)
    ratio = dprime / lengths
    C = float(np.max(2 * np.log(lengths) - d))
    # Hausdorff distance between orbit path of the ShortLex word and the surgered chord
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(sel), size=min(p_samples, len(sel)), replace=False)
    P = 0.0
    engine = WordEngine(system.form)
    for i in pick:
        word = ball.words[sel[i]]
        verts = geom.chart.act(engine.prefix_matrices(word), np.broadcast_to(o, (len(word) + 1, system.rank)))
        curve = ts.surgered_path(o, pts[i]) if ts is not None and len(ts.etas) else \
            o + np.outer(np.linspace(0, 1, 32), pts[i] - o)
        dm = geom.distance(verts[:, None, :], curve[None, :, :])
        P = max(P, float(dm.min(axis=1).max()), float(dm.min(axis=0).max()))
    return QuasiIsometryReport(ball.depth, float(ratio.min()), float(ratio.max()), C, P,
                               float(steps.max()), len(sel))


# --------------------------------------------------------------------------
# boundary map evidence

def power_orbit_limit(M, x, chart: Chart, k0: int = 200, levels: int = 4) -> np.ndarray:
    """Limit of M^k . x by Richardson extrapolation over k0, 2 k0, 4 k0, ...

    Parabolic orbits approach their limit like 1/k, so the raw iterate at
    k0 = 200 is still ~1e-2 away; eliminating the 1/k^j terms recovers it.
    """
    pts = []
    for j in range(levels):
        k = k0 * 2 ** j
        pts.append(chart.act(np.linalg.matrix_power(M, k), x))
    table = [np.array(pts)]
    for order in range(1, levels):
        prev = table[-1]
        f = 2.0 ** order
        table.append((f * prev[1:] - prev[:-1]) / (f - 1))
    return table[-1][-1]


@dataclass
class CTReport:
    rays: List[Dict[str, object]]
    cusp_witnesses: List[Dict[str, object]]
    tol: float
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures


def _ray_check(engine, chart, o, length, tol, seed, trial, interleave_tol):
    rng = np.random.default_rng([seed, trial])
    word = engine.random_reduced_word(length, rng)
    pref = engine.prefix_matrices(word)
    pts = chart.act(pref, np.broadcast_to(o, (len(pref), len(o))))
    start = int(math.ceil(0.8 * len(word)))
    tail = pts[start:]
    diam = float(np.max(np.linalg.norm(tail[:, None] - tail[None], axis=-1))) if len(tail) > 1 else 0.0
    even, odd = pts[0::2], pts[1::2]
    inter = float(np.linalg.norm(even[-1] - odd[-1])) if len(odd) else 0.0
    return {"trial": trial, "word": format_word(word), "length": len(word), "tail_diameter": diam,
            "interleaved_gap": inter, "ok": diam <= tol and inter <= interleave_tol}


def ct_verify(system: CoxeterSystem, trials: int = 20, word_length: int = 40, tol: float = 1e-3,
              seed: int = 0, interleave_tol: float = 1e-6, cusp_tol: float = 1e-6,
              k0: int = 200, threads: Optional[int] = None) -> CTReport:
    """Finite-sample evidence that w -> w.o extends to the boundary.

    Rays: tails of random geodesic rays have small diameter, and the even and
    odd subsequences of a ray end at the same point. Rank-2 cusps {s, t}: the
    orbits of (st)^k and (ts)^k have the same limit although their word
    Gromov products stay 0.
    """
    engine = WordEngine(system)
    chart = Chart(system)
    o = system.o
    threads = threads or int(os.environ.get("COXLIM_THREADS", "1") or 1)
    args = [(engine, chart, o, word_length, tol, seed, t, interleave_tol) for t in range(trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rays = list(ex.map(lambda a: _ray_check(*a), args))
    else:
        rays = [_ray_check(*a) for a in args]
    failures = [f"ray {r['trial']}: tail diameter {r['tail_diameter']:.3g}, interleaved gap "
                f"{r['interleaved_gap']:.3g}" for r in rays if not r["ok"]]
    witnesses = []
    for c in compute_cusps(system):
        if c.rank != 2:
            continue
        s, t = c.delta_prime
        st = engine.matrix((s, t))
        ts = engine.matrix((t, s))
        lim_st = power_orbit_limit(st, o, chart, k0)
        lim_ts = power_orbit_limit(ts, o, chart, k0)
        raw_gap = float(np.linalg.norm(chart.act(np.linalg.matrix_power(st, k0), o)
                                       - chart.act(np.linalg.matrix_power(ts, k0), o)))
        products = [engine.gromov_product((s, t) * k, (t, s) * k) for k in range(1, 21)]
        gap = float(np.linalg.norm(lim_st - lim_ts))
        to_cusp = float(max(np.linalg.norm(lim_st - c.point), np.linalg.norm(lim_ts - c.point)))
        ok = gap <= cusp_tol and to_cusp <= cusp_tol and max(products) == 0
        witnesses.append({"cusp": c.delta_prime, "limit_gap": gap, "limit_to_cusp": to_cusp,
                          "raw_gap_at_k0": raw_gap, "max_gromov_product": max(products), "ok": ok})
        if not ok:
            failures.append(f"rank-2 cusp {format_word(c.delta_prime)}: limit gap {gap:.3g}, "
                            f"distance to cusp {to_cusp:.3g}, gromov products {set(products)}")
    return CTReport(rays, witnesses, tol, failures)
