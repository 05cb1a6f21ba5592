"""Named Coxeter matrices used by the tests, the verify suites and the CLI."""

from __future__ import annotations

import itertools
from typing import Dict, Iterable, Optional, Tuple

from .coxsys import (INF, CoxeterError, CoxeterMatrix, CoxeterSystem, build_form, classify_form,
                     classify_subsystems, irreducible_components, parse_system, signature)

# name -> (system text, expected sign counts)
CATALOG: Dict[str, Tuple[str, Tuple[int, int, int]]] = {
    "I2(4)": ("rank 2\nm 1 2 4\n", (2, 0, 0)),
    "inf-dihedral": ("rank 2\ninf 1 2\n", (1, 0, 1)),
    "A3": ("rank 3\nm 1 2 3\nm 2 3 3\n", (3, 0, 0)),
    "H3": ("rank 3\nm 1 2 3\nm 2 3 5\n", (3, 0, 0)),
    "tri333": ("rank 3\nm 1 2 3\nm 1 3 3\nm 2 3 3\n", (2, 0, 1)),
    "C2-affine": ("rank 3\nm 1 2 4\nm 2 3 4\n", (2, 0, 1)),
    "tri334": ("rank 3\nm 1 2 3\nm 1 3 3\nm 2 3 4\n", (2, 1, 0)),
    "tri237": ("rank 3\nm 1 2 2\nm 1 3 3\nm 2 3 7\n", (2, 1, 0)),
    "cusp3": ("rank 3\ninf 1 2\nm 1 3 3\nm 2 3 3\n", (2, 1, 0)),
    "witness-iii": ("rank 3\ninf 1 2 -1.1\nm 1 3 3\nm 2 3 3\n", (2, 1, 0)),
    "all-inf3": ("rank 3\ninf 1 2\ninf 1 3\ninf 2 3\n", (2, 1, 0)),
    "rank4-all3": ("rank 4\nm 1 2 3\nm 1 3 3\nm 1 4 3\nm 2 3 3\nm 2 4 3\nm 3 4 3\n", (3, 1, 0)),
}

# one witness per case of the trichotomy
TRICHOTOMY = {"cocompact": "tri334", "with_cusps": "rank4-all3", "convex_cocompact": "witness-iii"}


def names() -> Iterable[str]:
    return CATALOG.keys()


def matrix(name: str) -> CoxeterMatrix:
    try:
        return parse_system(CATALOG[name][0])
    except KeyError:
        raise KeyError(f"unknown catalog system {name!r}; known: {', '.join(CATALOG)}") from None


def system(name: str) -> CoxeterSystem:
    return CoxeterSystem(matrix(name))


def expected_signature(name: str) -> Tuple[int, int, int]:
    return CATALOG[name][1]


def lorentzian_names(rank: Optional[int] = None):
    return [k for k, (_, sig) in CATALOG.items()
            if sig[1] == 1 and sig[2] == 0 and (rank is None or sum(sig) == rank)]


def find_embedding_witness(values=(2, 3, 4, 5, 6, INF), base: str = "tri334") -> CoxeterMatrix:
    """First irreducible rank-4 system of type (3,1) whose subset {1,2,3} is ``base``.

    ``base`` should be a cocompact rank-3 system; the extra generator's
    edges run over ``values`` in order.
    """
    sub = matrix(base)
    sub_kind, sub_sig, _ = classify_form(build_form(sub))
    if sub_kind != "lorentzian":
        raise CoxeterError(f"{base} is not of type (2,1)")
    for ms in itertools.product(values, repeat=3):
        entries = dict(sub.entries)
        weights = dict(sub.infinity_weights)
        for i, m in enumerate(ms):
            entries[(i, 3)] = m
            if m == INF:
                weights[(i, 3)] = -1.0
        cand = CoxeterMatrix(4, entries, weights)
        form = build_form(cand)
        if len(irreducible_components(form)) != 1 or not signature(form).is_lorentzian():
            continue
        subs = {s.subset: s for s in classify_subsystems(form, max_rank=3)}
        if subs[(0, 1, 2)].kind != "lorentzian":
            continue
        return cand
    raise CoxeterError("no rank-4 extension of type (3,1) found")
