"""Invariant suites run by ``coxlim verify``; each check reports a residual."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from .chart import Chart
from .coxsys import CoxeterSystem, classify_subsystems, signature
from .hilbert import HilbertGeometry
from .limits import (DegeneracyError, SearchFailure, TruncatedSpace, classify_action, compute_cusps,
                     ct_verify, horoball_level_search, isometry_type)
from .words import WordEngine


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.note}" if self.note else ""
        return f"{status}  {self.name}: {self.value:.17g} (threshold {self.threshold:.3g}){extra}"


def _le(name, value, thr, note=""):
    return Check(name, float(value), thr, bool(value <= thr), note)


def _ge(name, value, thr, note=""):
    return Check(name, float(value), thr, bool(value >= thr), note)


def sample_K(system: CoxeterSystem, k: int, rng, chart: Optional[Chart] = None, max_rounds: int = 200):
    """Random points of the fundamental chamber K = {x in D : B(alpha_i, x) <= 0}."""
    chart = chart or Chart(system)
    out = []
    got = 0
    for _ in range(max_rounds):
        x = chart.interior_sample(4 * k, rng, max_fraction=0.999)
        x = x[np.all(x @ system.gram <= 0, axis=1)]
        out.append(x)
        got += len(x)
        if got >= k:
            break
    return np.concatenate(out)[:k]


def random_words(engine: WordEngine, max_len: int, count: int, rng):
    lens = rng.integers(0, max_len + 1, size=count)
    return [engine.random_reduced_word(int(L), rng) for L in lens]


def isometry_residual(system, pairs: int = 1000, max_len: int = 8, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    geom = HilbertGeometry(system)
    engine = WordEngine(system)
    x = geom.chart.interior_sample(pairs, rng, max_fraction=0.95)
    y = geom.chart.interior_sample(pairs, rng, max_fraction=0.95)
    mats = np.array([engine.matrix(w) for w in random_words(engine, max_len, pairs, rng)])
    d0 = geom.distance(x, y)
    d1 = geom.distance(geom.chart.act(mats, x), geom.chart.act(mats, y))
    return float(np.max(np.abs(d1 - d0)))


def dirichlet_margin(system, samples: int = 100, depth: int = 6, seed: int = 0) -> float:
    """min over x in K and 0 < |w| <= depth of d(o, w.x) - d(o, x)."""
    rng = np.random.default_rng(seed)
    geom = HilbertGeometry(system)
    ball = WordEngine(system).enumerate_ball(depth)
    mats = ball.matrices[1:]
    xs = sample_K(system, samples, rng, geom.chart)
    worst = math.inf
    for x in xs:
        wx = geom.chart.act(mats, x)
        margin = geom.distance(np.broadcast_to(system.o, wx.shape), wx) - geom.distance(system.o, x)
        worst = min(worst, float(margin.min()))
    return worst


def brute_force_counts(engine: WordEngine, depth: int, decimals: int = 6) -> List[int]:
    """Sphere sizes by plain BFS with matrix deduplication (no descent logic)."""
    seen = {(np.round(np.eye(engine.n), decimals) + 0.0).tobytes()}
    frontier = [np.eye(engine.n)]
    counts = [1]
    for _ in range(depth):
        nxt = []
        for m in frontier:
            for g in engine.gens:
                p = m @ g
                key = (np.round(p, decimals) + 0.0).tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(p)
        counts.append(len(nxt))
        frontier = nxt
    return counts


def suite_geometry(system: CoxeterSystem, seed: int = 0, pairs: int = 1000) -> List[Check]:
    rng = np.random.default_rng(seed)
    geom = HilbertGeometry(system)
    x = geom.chart.interior_sample(pairs, rng, max_fraction=0.95)
    y = geom.chart.interior_sample(pairs, rng, max_fraction=0.95)
    d = geom.distance(x, y)
    checks = [
        _le("perron vector positive (min coordinate, negated)", -system.o.min(), 0.0),
        _le("q(o) - lambda", abs(geom.q(system.o) - system.neg_eigenvalue), 1e-12),
        _le("model map residual", geom.model.residual(system.gram), 1e-9),
        _le("hilbert vs model distance", np.max(np.abs(d - geom.model_distance(x, y))), 1e-9),
        _le("hilbert vs hyperboloid closed form", np.max(np.abs(d - geom.hyperboloid_distance(x, y))), 1e-9),
        _le("symmetry", np.max(np.abs(d - geom.distance(y, x))), 1e-12),
        _le("isometry invariance |w| <= 8", isometry_residual(system, pairs, 8, seed), 1e-9),
        _ge("dirichlet margin |w| <= 6", dirichlet_margin(system, 100, 6, seed), 0.0),
    ]
    z = geom.chart.interior_sample(pairs, rng, max_fraction=0.95)
    tri = geom.distance(x, z) + geom.distance(z, y) - d
    checks.append(_ge("triangle inequality slack", tri.min(), -1e-9))
    return checks


def suite_words(system: CoxeterSystem, seed: int = 0, depth: int = 6) -> List[Check]:
    engine = WordEngine(system)
    ball = engine.enumerate_ball(depth, check_hash=True)
    brute = brute_force_counts(engine, depth)
    mismatch = sum(abs(a - b) for a, b in zip(ball.counts, brute))
    rng = np.random.default_rng(seed)
    bad_reduce = 0
    for _ in range(200):
        w = tuple(int(a) for a in rng.integers(0, system.rank, size=rng.integers(0, 12)))
        r = engine.reduce_word(w)
        if np.max(np.abs(r.matrix - engine.matrix(w))) > 1e-8 or engine.reduce_word(r.word).word != r.word:
            bad_reduce += 1
    bad_shortlex = sum(engine.reduce_word(w).word != w for w in ball.words[: min(len(ball), 2000)])
    return [
        _le("ball counts vs brute force (total abs diff)", mismatch, 0, f"counts {ball.counts}"),
        _le("reduce_word failures", bad_reduce, 0),
        _le("enumerated words not in ShortLex form", bad_shortlex, 0),
    ]


def suite_cusps(system: CoxeterSystem, seed: int = 0) -> List[Check]:
    checks: List[Check] = []
    result = classify_action(system)
    checks.append(Check(f"classification = {result.case}", 0.0, 0.0, True))
    try:
        cusps = compute_cusps(system)
    except DegeneracyError as exc:
        return checks + [Check(f"cusp computation: {exc}", 1.0, 0.0, False)]
    chart = Chart(system)
    for c in cusps:
        tag = "{" + ",".join(str(i + 1) for i in c.delta_prime) + "}"
        fix = max(np.max(np.abs(chart.act(system.reflections[i], c.point) - c.point)) for i in c.delta_prime)
        checks.append(_le(f"cusp {tag}: |q(p)|", abs(chart.quadratic(c.point)), 1e-10))
        checks.append(_le(f"cusp {tag}: fixed by its affine subgroup", fix, 1e-9))
        cox = isometry_type(system, tuple(c.delta_prime))
        gap = np.max(np.abs(cox.fixed_points[0] - c.point)) if cox.kind == "parabolic" else math.inf
        checks.append(Check(f"cusp {tag}: Coxeter element parabolic, fixed point gap", float(gap), 1e-8,
                            cox.kind == "parabolic" and gap <= 1e-8 and abs(cox.spectral_radius - 1) <= 1e-8))
    k = 0.0
    if cusps:
        try:
            k, dg = horoball_level_search(system, cusps)
        except SearchFailure as exc:
            return checks + [Check(f"horoball level search: {exc}", 1.0, 0.0, False)]
        checks.append(_ge(f"horoball level {k:.17g}: min -B(eta_i, eta_j)", dg["min_pair_product"], 2.0))
        checks.append(Check("generator segments avoid horoballs", 0.0, 0.0, dg["generator_segments_clear"]))
    checks.append(_le("D'' invariance under generators (violations)", invariance_violations(system, k, seed), 0))
    return checks


def invariance_violations(system: CoxeterSystem, level: float, seed: int = 0, samples: int = 500,
                          depth: int = 6) -> int:
    """Points of D'' (orbit depth + 1) whose generator images leave D'' (orbit depth).

    The extra level on the source side makes the comparison exact for a finite
    orbit: s.x in w.O with |w| <= depth forces x into (s w).O.
    """
    outer = TruncatedSpace(system, level, orbit_depth=depth + 1)
    inner = TruncatedSpace(system, level, orbit_depth=depth, cusps=outer.cusps, geom=outer.geom)
    chart = outer.geom.chart
    pts = chart.interior_sample(samples, np.random.default_rng(seed), max_fraction=0.99)
    pts = pts[outer.contains(pts)]
    return int(sum(np.sum(~inner.contains(chart.act(s, pts))) for s in system.reflections))


def suite_ct(system: CoxeterSystem, seed: int = 0) -> List[Check]:
    rep = ct_verify(system, seed=seed)
    checks = [_le(f"ray {r['trial']} tail diameter", r["tail_diameter"], rep.tol, f"word {r['word']}")
              for r in rep.rays]
    checks += [_le(f"ray {r['trial']} interleaved gap", r["interleaved_gap"], 1e-6) for r in rep.rays]
    for w in rep.cusp_witnesses:
        tag = ",".join(str(i + 1) for i in w["cusp"])
        checks.append(_le(f"rank-2 cusp {{{tag}}}: orbit limit gap", w["limit_gap"], 1e-6))
        checks.append(_le(f"rank-2 cusp {{{tag}}}: max word Gromov product", w["max_gromov_product"], 0.0))
    return checks


SUITES: Dict[str, Callable[..., List[Check]]] = {
    "geometry": suite_geometry,
    "words": suite_words,
    "cusps": suite_cusps,
    "ct": suite_ct,
}
