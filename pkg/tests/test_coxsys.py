import math

import numpy as np
import pytest

import oracles
from coxlim import catalog
from coxlim.coxsys import (INF, CoxeterMatrix, CoxeterSystem, InvalidInputError, ParseError,
                           ReducibilityError, UnsupportedTypeError, build_form, classify_form,
                           classify_subsystems, irreducible_components, parse_system, perron_eigenvector,
                           reflection_matrix, signature)


@pytest.mark.parametrize("name", list(catalog.names()))
def test_signature_matches_mp_oracle(name):
    m = catalog.matrix(name)
    G = oracles.mp_gram(m.rank, m.entries, m.infinity_weights)
    assert signature(build_form(m)).counts == oracles.mp_sign_counts(G) == catalog.expected_signature(name)


def test_closed_form_spectra():
    lam = signature(build_form(catalog.matrix("tri333"))).eigenvalues
    np.testing.assert_allclose(sorted(lam), [0, 1.5, 1.5], atol=1e-12)
    lam = signature(build_form(catalog.matrix("rank4-all3"))).eigenvalues
    np.testing.assert_allclose(sorted(lam), [-0.5, 1.5, 1.5, 1.5], atol=1e-12)


def test_tri334_determinant():
    # 1 + 2abc - (a^2 + b^2 + c^2) with a = b = -1/2, c = -sqrt(2)/2
    G = build_form(catalog.matrix("tri334")).gram
    assert np.linalg.det(G) == pytest.approx(-math.sqrt(2) / 4, abs=1e-12)


def test_gram_entries():
    G = build_form(parse_system("rank 3\nm 1 2 4\ninf 2 3 -1.5\n")).gram
    assert G[0, 1] == pytest.approx(-math.sqrt(2) / 2)
    assert G[1, 2] == -1.5 and G[0, 2] == 0.0
    assert np.all(np.diag(G) == 1.0)


@pytest.mark.parametrize("text,line", [
    ("rank 3\nm 1 2 3\nm 1 3 x\n", 3),
    ("m 1 2 3\n", 1),
    ("rank 3\nm 1 1 3\n", 2),
    ("rank 3\nm 1 2 1\n", 2),
    ("rank 3\ninf 1 2 -0.5\n", 2),
    ("rank 3\nm 1 4 3\n", 2),
    ("rank 3\nm 1 2 3\nm 2 1 4\n", 3),
    ("rank 3\nfoo 1 2\n", 2),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert info.value.lineno == line
    assert f"line {line}" in str(info.value)


def test_parse_comments_and_default_weight():
    m = parse_system("# header\nrank 2  # two\n\ninf 1 2\n")
    assert m.rank == 2 and m.m(0, 1) == INF and m.weight(0, 1) == -1.0
    assert parse_system(m.to_text()) == m


def test_matrix_validation():
    with pytest.raises(InvalidInputError):
        CoxeterMatrix(2, {(0, 1): 2.5})
    with pytest.raises(InvalidInputError):
        CoxeterMatrix(2, {(0, 1): 3}, {(0, 1): -1.0})


def test_perron_vector_rank4():
    o, lam = perron_eigenvector(build_form(catalog.matrix("rank4-all3")))
    np.testing.assert_allclose(o, [0.5] * 4, atol=1e-12)
    assert lam == pytest.approx(-0.5)


@pytest.mark.parametrize("name", catalog.lorentzian_names())
def test_perron_vector_vs_oracle(name):
    m = catalog.matrix(name)
    o, lam = perron_eigenvector(build_form(m))
    o2, lam2 = oracles.lorentz_frame(oracles.mp_gram(m.rank, m.entries, m.infinity_weights))
    np.testing.assert_allclose(o, o2, atol=1e-12)
    assert lam == pytest.approx(lam2, abs=1e-12)
    assert np.all(o > 0)


def test_rejections():
    with pytest.raises(UnsupportedTypeError):
        CoxeterSystem(catalog.matrix("tri333"))
    with pytest.raises(UnsupportedTypeError):
        CoxeterSystem(catalog.matrix("A3"))
    # (3,3,4) plus an isolated generator: (3,1) but reducible
    m = parse_system("rank 4\nm 1 2 3\nm 1 3 3\nm 2 3 4\n")
    assert signature(build_form(m)).counts == (3, 1, 0)
    with pytest.raises(ReducibilityError):
        CoxeterSystem(m)
    assert irreducible_components(m) == [[0, 1, 2], [3]]
    sub = CoxeterSystem(m.restrict([0, 1, 2]))
    assert sub.signature.counts == (2, 1, 0)


def test_reflection_is_B_isometry_and_involution():
    form = build_form(catalog.matrix("witness-iii"))
    for i in range(3):
        s = reflection_matrix(form, i)
        np.testing.assert_allclose(s @ s, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(s.T @ form.gram @ s, form.gram, atol=1e-14)
        np.testing.assert_allclose(s[:, i], -np.eye(3)[i], atol=1e-15)


@pytest.mark.parametrize("name", list(catalog.names()))
def test_subsystem_kinds_vs_brute_signs(name):
    m = catalog.matrix(name)
    form = build_form(m)
    for sub in classify_subsystems(form, max_rank=4):
        mm = m.restrict(sub.subset)
        counts = oracles.mp_sign_counts(oracles.mp_gram(mm.rank, mm.entries, mm.infinity_weights))
        assert sub.signature.counts == counts
        k = len(sub.subset)
        if counts == (k, 0, 0):
            assert sub.kind == "finite"
        elif counts == (k - 1, 0, 1) and sub.irreducible:
            assert sub.kind == "affine"
        elif counts == (k - 1, 1, 0):
            assert sub.kind == "lorentzian"
        else:
            assert sub.kind == "higher"


def test_subsystem_examples():
    form = build_form(catalog.matrix("rank4-all3"))
    kinds = {s.subset: s.kind for s in classify_subsystems(form)}
    assert kinds[(0, 1, 2)] == "affine"
    assert kinds[(0, 1)] == "finite"
    assert kinds[(0, 1, 2, 3)] == "lorentzian"
    kinds = {s.subset: s.kind for s in classify_subsystems(build_form(catalog.matrix("witness-iii")))}
    assert kinds[(0, 1)] == "lorentzian" and kinds[(0, 2)] == "finite"
    assert classify_form(build_form(catalog.matrix("inf-dihedral")))[0] == "affine"
