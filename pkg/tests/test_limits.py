import itertools

import numpy as np
import pytest

from coxlim import catalog
from coxlim.chart import Chart, DomainError
from coxlim.coxsys import CoxeterSystem, parse_system
from coxlim.hilbert import HilbertGeometry
from coxlim.limits import (DegeneracyError, LimitSample, SearchFailure, TruncatedSpace, base_radius,
                           classify_action, compute_cusps, ct_verify, horoball_level_search, isometry_type,
                           limit_set_sample, polytope_vertices, power_orbit_limit, quasi_isometry_report,
                           read_limit_csv, write_limit_csv)
from coxlim.words import WordEngine


@pytest.fixture(scope="module")
def r4_level(r4):
    return horoball_level_search(r4, compute_cusps(r4))


def test_cusps_rank4(r4):
    cusps = compute_cusps(r4)
    assert len(cusps) == 4 and all(c.rank == 3 for c in cusps)
    expected = {tuple(np.roll([2 / 3, 2 / 3, 2 / 3, 0], k)) for k in range(4)}
    for c in cusps:
        assert min(np.max(np.abs(c.point - np.array(e))) for e in expected) < 1e-10
        assert set(np.flatnonzero(c.point > 0)) == set(c.delta_prime)


def test_cusp_invariants(systems):
    for s in systems.values():
        ch = Chart(s)
        for c in compute_cusps(s):
            assert abs(ch.quadratic(c.point)) <= 1e-10
            np.testing.assert_allclose((s.gram @ c.point)[list(c.delta_prime)], 0, atol=1e-10)
            for i in c.delta_prime:
                np.testing.assert_allclose(ch.act(s.reflections[i], c.point), c.point, atol=1e-9)


def test_cusp_stabilizer_separation(r4):
    """Elements outside the affine subgroup move p off the face spanned by delta'."""
    e = WordEngine(r4)
    ball = e.enumerate_ball(6)
    for c in compute_cusps(r4):
        sub = set(c.delta_prime)
        outside = [j for j in range(4) if j not in sub]
        for w, m in zip(ball.words, ball.matrices):
            img = Chart(r4).act(m, c.point)
            in_sub = set(w) <= sub
            assert (np.max(np.abs(img[outside])) > 1e-9) != in_sub


def test_cusp_examples(t334, cusp3):
    assert compute_cusps(t334) == []
    (c,) = compute_cusps(cusp3)
    assert c.rank == 2 and c.delta_prime == (0, 1)
    np.testing.assert_allclose(c.point, Chart(cusp3).normalize(np.array([1.0, 1.0, 0.0])), atol=1e-12)


def test_rank5_cusp_not_adjacent_to_all():
    s = CoxeterSystem(parse_system("rank 5\nm 1 2 3\nm 2 3 3\nm 3 4 3\nm 4 5 3\ninf 1 5\n"))
    cusps = compute_cusps(s)
    assert [c.delta_prime for c in cusps] == [(0, 4)]
    assert cusps[0].closure_margin == 0.0


def test_classification_witnesses(systems):
    for case, name in catalog.TRICHOTOMY.items():
        assert classify_action(systems[name]).case == case
    # exclusive and total on the catalog, with the geometric cross-check
    for name, s in systems.items():
        res = classify_action(s)
        assert res.case in ("cocompact", "with_cusps", "convex_cocompact")
        assert res.witnesses["protrudes"] == (res.case == "convex_cocompact"), name


def test_isometry_types(r4, t334):
    assert isometry_type(r4, (2,)).kind == "elliptic"
    assert isometry_type(r4, (2,)).order == 2
    assert isometry_type(t334, (1, 2)).order == 4
    par = isometry_type(r4, (0, 1, 2))
    assert par.kind == "parabolic" and abs(par.spectral_radius - 1) <= 1e-8
    np.testing.assert_allclose(par.fixed_points[0], [2 / 3, 2 / 3, 2 / 3, 0], atol=1e-8)
    hyp = isometry_type(t334, (0, 1, 2))
    assert hyp.kind == "hyperbolic" and hyp.spectral_radius > 1 + 1e-6
    ch = Chart(t334)
    e = WordEngine(t334)
    for p in hyp.fixed_points:
        assert abs(ch.quadratic(p)) < 1e-10
        np.testing.assert_allclose(ch.act(e.matrix((0, 1, 2)), p), p, atol=1e-9)
    with pytest.raises(ValueError):
        isometry_type(r4, ())


def test_limit_samples_infinite_dihedral(cusp3):
    (c,) = compute_cusps(cusp3)
    gaps = []
    for depth in (8, 16, 32):
        pts = limit_set_sample(cusp3, depth, mode="roots", generators=[0, 1], q_max=1.0).points
        gaps.append(np.max(np.linalg.norm(pts - c.point, axis=1)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.05


def test_limit_samples_rank4(r4):
    ch = Chart(r4)
    prev = np.inf
    for depth in (4, 6, 8):
        s = limit_set_sample(r4, depth, q_max=10.0)
        assert np.all(ch.in_simplex(s.points))
        worst = np.max(np.abs(ch.quadratic(s.points)))
        assert worst < prev
        prev = worst
    s = limit_set_sample(r4, 7)
    assert len(s.points) and np.all(np.abs(ch.quadratic(s.points)) <= 0.05)
    assert len(limit_set_sample(r4, 0).points) == 0


def test_limit_samples_subgroup_face(r4):
    s = limit_set_sample(r4, 8, mode="roots", generators=[0, 1, 2])
    assert np.all(s.points[:, 3] == 0)


def test_csv_round_trip(tmp_path, t334):
    s = limit_set_sample(t334, 6)
    path = tmp_path / "x.csv"
    write_limit_csv(path, s)
    meta, pts = read_limit_csv(path)
    assert meta == {"mode": "orbit", "depth": "6"}
    np.testing.assert_array_equal(pts, s.points)
    assert path.read_text().splitlines()[0] == "# coxeter-limits v1, mode=orbit, depth=6"


def test_polytope_vertices_rank4(r4):
    verts = polytope_vertices(r4)
    pts = np.array([v for v, _ in verts])
    assert len(pts) == 4
    expected = np.array([np.roll([2 / 3, 2 / 3, 2 / 3, 0], k) for k in range(4)])
    for p in pts:
        assert np.min(np.max(np.abs(expected - p), axis=1)) < 1e-9


def test_level_search(r4, r4_level):
    k, dg = r4_level
    r = base_radius(r4)
    assert k <= -r and dg["pairwise_disjoint"] and dg["generator_segments_clear"]
    with pytest.raises(SearchFailure):
        horoball_level_search(catalog.system("tri334"), [])


def test_horoball_equivariance(r4, r4_level):
    k, _ = r4_level
    geom = HilbertGeometry(r4)
    e = WordEngine(r4)
    rng = np.random.default_rng(0)
    pts = geom.chart.interior_sample(1000, rng, 0.999)
    for c in compute_cusps(r4)[:2]:
        hb = geom.horoball(c.point, k)
        for m in e.enumerate_ball(4).matrices[1:40]:
            img = hb.image(m)
            np.testing.assert_allclose(img.xi, geom.chart.act(m, c.point), atol=1e-9)
            inv = np.linalg.inv(m)
            # w.O_p = O_{w.p}: x in the image iff w^-1 x in O_p
            assert np.array_equal(img.contains(pts), hb.contains(geom.chart.act(inv, pts)))


def test_truncated_space(r4, r4_level):
    k, _ = r4_level
    ts = TruncatedSpace(r4, k)
    o = r4.o
    assert ts.contains(o)[0]
    c = ts.cusps[0]
    deep = ts.geom.ray_point(c.point, -k + 1.0)
    with pytest.raises(DomainError):
        ts.truncated_distance(o, deep)
    rng = np.random.default_rng(1)
    pts = ts.geom.chart.interior_sample(400, rng, 0.99)
    pts = pts[ts.contains(pts)]
    crossing = 0
    for x, y in zip(pts[::2], pts[1::2]):
        d = ts.geom.distance(x, y)
        dp = ts.truncated_distance(x, y)
        assert dp >= d - 1e-12
        assert abs(dp - ts.truncated_distance(y, x)) <= 1e-8
        if ts.crossings(x, y):
            crossing += 1
            assert 2 * np.log(dp) <= d
        else:
            assert dp == d
    assert crossing > 0


def test_quasi_isometry_cocompact(t334):
    ball = WordEngine(t334).enumerate_ball(8)
    rep = quasi_isometry_report(ball, None, t334)
    assert rep.l_lower > 0 and np.isfinite(rep.C)
    assert rep.l_upper <= rep.max_generator_step + 1e-12


def test_quasi_isometry_cusped(r4, r4_level):
    ts = TruncatedSpace(r4, r4_level[0])
    rep = quasi_isometry_report(WordEngine(r4).enumerate_ball(6), ts, r4, p_samples=20)
    assert 0 < rep.l_lower <= rep.l_upper <= rep.max_generator_step + 1e-12
    assert np.isfinite(rep.P_estimate)


def test_power_orbit_limit(cusp3):
    (c,) = compute_cusps(cusp3)
    e = WordEngine(cusp3)
    lim = power_orbit_limit(e.matrix((0, 1)), cusp3.o, Chart(cusp3))
    assert np.max(np.abs(lim - c.point)) < 1e-8


def test_ct_verify(r4, cusp3):
    rep = ct_verify(r4, trials=5)
    assert rep.passed and len(rep.rays) == 5 and rep.cusp_witnesses == []
    rep = ct_verify(cusp3, trials=3)
    assert rep.passed and rep.cusp_witnesses[0]["max_gromov_product"] == 0
    assert rep.cusp_witnesses[0]["raw_gap_at_k0"] > 1e-6  # the slow 1/k approach
    bad = ct_verify(r4, trials=2, word_length=3, tol=1e-12)
    assert not bad.passed and bad.failures


def test_ct_verify_threads_deterministic(r4, monkeypatch):
    a = ct_verify(r4, trials=6, seed=3)
    monkeypatch.setenv("COXLIM_THREADS", "3")
    b = ct_verify(r4, trials=6, seed=3)
    assert [r["word"] for r in a.rays] == [r["word"] for r in b.rays]
    assert [r["tail_diameter"] for r in a.rays] == [r["tail_diameter"] for r in b.rays]
