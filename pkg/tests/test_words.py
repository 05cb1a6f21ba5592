import numpy as np
import pytest

import oracles
from coxlim import catalog
from coxlim.coxsys import build_form
from coxlim.words import (DescentAmbiguityError, ResourceError, WordEngine, format_word, parse_word,
                          root_signs, sequence_path)
from coxlim.chart import Chart

BALL_GROUPS = ["I2(4)", "A3", "tri333", "tri334", "rank4-all3", "witness-iii", "all-inf3", "H3"]


def engine(name):
    return WordEngine(build_form(catalog.matrix(name)))


@pytest.mark.parametrize("name", BALL_GROUPS)
def test_ball_counts_vs_bruteforce(name):
    e = engine(name)
    ball = e.enumerate_ball(6, check_hash=True)
    counts, mats = oracles.brute_ball(e.gram, 6)
    assert ball.counts == counts
    # same set of matrices, not just the same sizes
    key = lambda m: tuple(np.round(m, 6).ravel() + 0.0)
    assert {key(m) for m in ball.matrices} == {key(m) for m in mats}


def test_known_growth():
    assert engine("I2(4)").enumerate_ball(6).counts == [1, 2, 2, 2, 1, 0, 0]
    assert len(engine("I2(4)").enumerate_ball(10)) == 8
    assert len(engine("A3").enumerate_ball(8)) == 24
    assert len(engine("H3").enumerate_ball(20)) == 120
    assert engine("rank4-all3").enumerate_ball(4).counts == [1, 4, 12, 30, 72]


def test_ball_words_shortlex_and_matrices():
    e = engine("tri334")
    ball = e.enumerate_ball(7)
    assert ball.words[0] == ()
    for w, m, inv, L in zip(ball.words, ball.matrices, ball.inverses, ball.lengths):
        assert len(w) == L
        np.testing.assert_allclose(m, e.matrix(w), atol=1e-10)
        np.testing.assert_allclose(m @ inv, np.eye(3), atol=1e-9)
        assert e.reduce_word(w).word == w
    for k in range(8):
        level = ball.words[ball.level(k)]
        assert level == sorted(level)


def test_word_lengths_vs_bruteforce():
    e = engine("tri334")
    rng = np.random.default_rng(0)
    for _ in range(15):
        w = tuple(int(a) for a in rng.integers(0, 3, size=rng.integers(0, 9)))
        assert e.length(w) == oracles.word_length_bruteforce(e.gram, w, max_len=8)


def test_descents():
    e = engine("rank4-all3")
    assert e.is_descent((0, 1), 0, "left") and not e.is_descent((0, 1), 1, "left")
    assert e.is_descent((0, 1), 1, "right") and not e.is_descent((0, 1), 0, "right")
    assert e.descents((), "left") == []
    with pytest.raises(ValueError):
        e.is_descent((0,), 0, "middle")


def test_root_signs_ambiguous():
    with pytest.raises(DescentAmbiguityError):
        root_signs(np.array([1.0, -1.0]))
    assert list(root_signs(np.array([[0.0, 2.0], [-1e-12, -3.0]]))) == [1, -1]


def test_gromov_product_words():
    e = engine("cusp3")
    for k in range(1, 8):
        assert e.gromov_product((0, 1) * k, (1, 0) * k) == 0
    assert e.gromov_product((0, 1, 2), (0, 1)) == 2


def test_random_reduced_word_is_reduced():
    e = engine("rank4-all3")
    rng = np.random.default_rng(1)
    for _ in range(10):
        w = e.random_reduced_word(25, rng)
        assert len(w) == 25 and e.length(w) == 25
    # finite group: stops at the longest element
    w = engine("A3").random_reduced_word(20, rng)
    assert len(w) == 6


def test_resource_error_carries_partial():
    e = engine("all-inf3")
    with pytest.raises(ResourceError) as info:
        e.enumerate_ball(20, max_elements=100)
    part = info.value.partial
    assert part is not None and not part.complete and len(part) <= 100


def test_word_io():
    assert format_word((0, 2, 1)) == "1 3 2"
    assert parse_word("1,3 2") == (0, 2, 1)


def test_generators_subgroup():
    e = engine("cusp3")
    ball = e.enumerate_ball(5, generators=[0, 1])
    assert ball.counts == [1, 2, 2, 2, 2, 2]
    assert all(set(w) <= {0, 1} for w in ball.words)


def test_sequence_path(r4):
    e = WordEngine(r4)
    ch = Chart(r4)
    els = [e.element(()), e.element((0,)), e.element((0, 1))]
    p = sequence_path(els, ch)
    np.testing.assert_allclose(p[0], r4.o)
    dense = sequence_path(els, ch, samples_per_segment=4)
    assert len(dense) == 2 * 5 + 1
    # a constant sequence stays at one point
    const = sequence_path([e.element((0, 1))] * 5, ch)
    assert np.ptp(const, axis=0).max() == 0
