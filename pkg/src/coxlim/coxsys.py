"""Coxeter matrices, their bilinear forms, and the spectral data built on them.

Indices are 0-based everywhere in the library; the text format and the CLI
use 1-based generator labels.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

INF = math.inf

#: relative to the largest |eigenvalue|
ZERO_TOLERANCE = 1e-8


class CoxeterError(ValueError):
    """Base class for invalid or unsupported Coxeter input."""


class InvalidInputError(CoxeterError):
    pass


class ParseError(CoxeterError):
    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        self.line = line
        self.reason = reason
        super().__init__(f"line {lineno}: {reason}: {line.strip()!r}")


class UnsupportedTypeError(CoxeterError):
    """The form does not have signature (n-1, 1)."""


class ReducibilityError(CoxeterError):
    """The form is block diagonal; analyze the Lorentzian component instead."""


@dataclass(frozen=True)
class CoxeterMatrix:
    rank: int
    entries: Dict[Tuple[int, int], float] = field(default_factory=dict)
    infinity_weights: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidInputError(f"rank must be positive, got {self.rank}")
        entries = {}
        for (i, j), m in self.entries.items():
            self._check_pair(i, j)
            key = (min(i, j), max(i, j))
            if m != INF and (m != int(m) or m < 2):
                raise InvalidInputError(f"m[{i},{j}] = {m} is not an integer >= 2 or inf")
            if key in entries and entries[key] != m:
                raise InvalidInputError(f"conflicting values for pair {key}")
            entries[key] = m
        weights = {}
        for (i, j), c in self.infinity_weights.items():
            key = (min(i, j), max(i, j))
            if entries.get(key) != INF:
                raise InvalidInputError(f"weight given for pair {key} which is not an inf edge")
            if c > -1:
                raise InvalidInputError(f"inf-edge weight {c} for pair {key} must be <= -1")
            weights[key] = float(c)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "infinity_weights", weights)

    def _check_pair(self, i, j):
        if not (0 <= i < self.rank and 0 <= j < self.rank):
            raise InvalidInputError(f"index pair ({i},{j}) out of range for rank {self.rank}")
        if i == j:
            raise InvalidInputError(f"diagonal pair ({i},{j}) cannot be set; m_ii = 1")

    def m(self, i: int, j: int) -> float:
        if i == j:
            return 1
        return self.entries.get((min(i, j), max(i, j)), 2)

    def weight(self, i: int, j: int) -> float:
        return self.infinity_weights.get((min(i, j), max(i, j)), -1.0)

    def largest_finite_m(self) -> int:
        finite = [int(m) for m in self.entries.values() if m != INF]
        return max(finite + [2])

    def restrict(self, subset: Sequence[int]) -> "CoxeterMatrix":
        """Coxeter matrix of the special subsystem on ``subset`` (relabelled 0..k-1)."""
        subset = list(subset)
        entries, weights = {}, {}
        for a, b in itertools.combinations(range(len(subset)), 2):
            i, j = subset[a], subset[b]
            m = self.m(i, j)
            if m != 2:
                entries[(a, b)] = m
            if m == INF:
                weights[(a, b)] = self.weight(i, j)
        return CoxeterMatrix(len(subset), entries, weights)

    def to_text(self) -> str:
        lines = [f"rank {self.rank}"]
        for (i, j), m in sorted(self.entries.items()):
            if m == INF:
                lines.append(f"inf {i + 1} {j + 1} {self.weight(i, j):.17g}")
            elif m != 2:
                lines.append(f"m {i + 1} {j + 1} {int(m)}")
        return "\n".join(lines) + "\n"


def parse_system(text: str) -> CoxeterMatrix:
    """Parse the line-based system format (``rank N`` / ``m i j k`` / ``inf i j [w]``)."""
    rank = None
    entries: Dict[Tuple[int, int], float] = {}
    weights: Dict[Tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0].lower()
        try:
            if head == "rank":
                if len(tok) != 2:
                    raise ParseError(lineno, raw, "expected 'rank N'")
                if rank is not None:
                    raise ParseError(lineno, raw, "rank given twice")
                rank = int(tok[1])
                if rank < 1:
                    raise ParseError(lineno, raw, "rank must be positive")
                continue
            if rank is None:
                raise ParseError(lineno, raw, "'rank N' must come first")
            if head == "m":
                if len(tok) != 4:
                    raise ParseError(lineno, raw, "expected 'm i j k'")
                i, j, k = int(tok[1]), int(tok[2]), int(tok[3])
                if k < 2:
                    raise ParseError(lineno, raw, "m_ij must be >= 2")
                value = float(k)
            elif head == "inf":
                if len(tok) not in (3, 4):
                    raise ParseError(lineno, raw, "expected 'inf i j [w]'")
                i, j = int(tok[1]), int(tok[2])
                w = float(tok[3]) if len(tok) == 4 else -1.0
                if not w <= -1:
                    raise ParseError(lineno, raw, "inf-edge weight must be <= -1")
                value = INF
            else:
                raise ParseError(lineno, raw, f"unknown directive {tok[0]!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(lineno, raw, "malformed number") from None
        if not (1 <= i <= rank and 1 <= j <= rank) or i == j:
            raise ParseError(lineno, raw, f"bad index pair for rank {rank}")
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in entries:
            raise ParseError(lineno, raw, "pair specified twice")
        entries[key] = value
        if value == INF:
            weights[key] = w
    if rank is None:
        raise ParseError(0, "", "missing 'rank N' line")
    return CoxeterMatrix(rank, entries, weights)


def load_system(path) -> CoxeterMatrix:
    with open(path) as fh:
        return parse_system(fh.read())


@dataclass(frozen=True)
class BilinearForm:
    gram: np.ndarray

    @property
    def rank(self) -> int:
        return self.gram.shape[0]

    def __call__(self, u, v):
        return np.asarray(u) @ self.gram @ np.asarray(v)

    def restrict(self, subset: Sequence[int]) -> "BilinearForm":
        idx = np.asarray(list(subset), dtype=int)
        return BilinearForm(self.gram[np.ix_(idx, idx)].copy())


def build_form(matrix: CoxeterMatrix) -> BilinearForm:
    n = matrix.rank
    gram = np.eye(n)
    for i, j in itertools.combinations(range(n), 2):
        m = matrix.m(i, j)
        if m == INF:
            c = matrix.weight(i, j)
            if c > -1:
                raise InvalidInputError(f"inf-edge weight {c} must be <= -1")
        elif m == 2:
            c = 0.0
        else:
            c = -math.cos(math.pi / m)
        gram[i, j] = gram[j, i] = c
    gram.setflags(write=False)
    return BilinearForm(gram)


@dataclass(frozen=True)
class SignatureReport:
    n_pos: int
    n_neg: int
    n_zero: int
    eigenvalues: Tuple[float, ...]
    zero_tolerance: float

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (self.n_pos, self.n_neg, self.n_zero)

    def is_lorentzian(self) -> bool:
        return self.n_neg == 1 and self.n_zero == 0

    def __str__(self):
        if self.n_zero:
            return f"({self.n_pos},{self.n_neg},{self.n_zero})"
        return f"({self.n_pos},{self.n_neg})"


def signature(form: BilinearForm, tol: float = ZERO_TOLERANCE) -> SignatureReport:
    """Sign counts of the eigenvalues; |lambda| <= tol * max|lambda| counts as zero."""
    lam = np.linalg.eigvalsh(form.gram)
    cut = tol * max(1.0, float(np.max(np.abs(lam))))
    pos = int(np.sum(lam > cut))
    neg = int(np.sum(lam < -cut))
    return SignatureReport(pos, neg, len(lam) - pos - neg, tuple(float(x) for x in lam), cut)


def irreducible_components(gram_or_matrix) -> List[List[int]]:
    """Connected components of the graph with an edge wherever B_ij != 0."""
    if isinstance(gram_or_matrix, CoxeterMatrix):
        gram = build_form(gram_or_matrix).gram
    elif isinstance(gram_or_matrix, BilinearForm):
        gram = gram_or_matrix.gram
    else:
        gram = np.asarray(gram_or_matrix)
    n = gram.shape[0]
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if not seen[j] and j != i and gram[i, j] != 0:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def perron_eigenvector(form: BilinearForm, tol: float = ZERO_TOLERANCE) -> Tuple[np.ndarray, float]:
    """Unit eigenvector of the negative eigenvalue, oriented with positive coordinates.

    Returns ``(o, lambda_min)``.
    """
    sig = signature(form, tol)
    if not sig.is_lorentzian():
        raise UnsupportedTypeError(f"signature {sig} is not (n-1,1)")
    comps = irreducible_components(form)
    if len(comps) > 1:
        raise ReducibilityError(
            f"form splits into components {[[i + 1 for i in c] for c in comps]}; "
            "analyze the component of signature (n_k-1,1) on its own")
    lam, vecs = np.linalg.eigh(form.gram)
    o = vecs[:, 0]
    if o.sum() < 0:
        o = -o
    o = o / np.linalg.norm(o)
    if np.min(o) <= 0:
        raise CoxeterError(f"eigenvector of the negative eigenvalue is not positive: {o}")
    o.setflags(write=False)
    return o, float(lam[0])


def reflection_matrix(form: BilinearForm, i: int) -> np.ndarray:
    """Matrix of v -> v - 2 B(alpha_i, v) alpha_i in simple-root coordinates."""
    n = form.rank
    if not 0 <= i < n:
        raise IndexError(f"generator {i} out of range")
    s = np.eye(n)
    s[i, :] -= 2.0 * form.gram[i, :]
    return s


def reflection_matrices(form: BilinearForm) -> List[np.ndarray]:
    return [reflection_matrix(form, i) for i in range(form.rank)]


KINDS = ("finite", "affine", "lorentzian", "higher")


@dataclass(frozen=True)
class SubsystemClass:
    subset: Tuple[int, ...]
    kind: str
    signature: SignatureReport
    irreducible: bool


def classify_form(form: BilinearForm, tol: float = ZERO_TOLERANCE) -> Tuple[str, SignatureReport, bool]:
    """Kind of a (sub)form: finite / affine / lorentzian / higher.

    Reducible forms are finite only when every component is; an affine label
    is reserved for irreducible forms. Anything else that is not Lorentzian
    lands in ``higher``.
    """
    sig = signature(form, tol)
    k = form.rank
    irreducible = len(irreducible_components(form)) == 1
    if sig.n_pos == k:
        kind = "finite"
    elif irreducible and sig.n_neg == 0 and sig.n_pos == k - 1:
        kind = "affine"
    elif sig.n_neg == 1 and sig.n_pos == k - 1:
        kind = "lorentzian"
    else:
        kind = "higher"
    return kind, sig, irreducible


def classify_subsystems(form: BilinearForm, max_rank: Optional[int] = None,
                        tol: float = ZERO_TOLERANCE, min_rank: int = 2) -> List[SubsystemClass]:
    n = form.rank
    max_rank = n if max_rank is None else min(max_rank, n)
    out = []
    for k in range(min_rank, max_rank + 1):
        for subset in itertools.combinations(range(n), k):
            kind, sig, irr = classify_form(form.restrict(subset), tol)
            out.append(SubsystemClass(subset, kind, sig, irr))
    return out


class CoxeterSystem:
    """A Coxeter system of type (n-1,1): the analysis entry point.

    Reducible or non-Lorentzian input is rejected here; use
    :func:`irreducible_components` and :meth:`CoxeterMatrix.restrict` to pull
    out the Lorentzian component first.
    """

    def __init__(self, matrix: CoxeterMatrix, tol: float = ZERO_TOLERANCE):
        self.matrix = matrix
        self.tol = tol
        self.form = build_form(matrix)
        self.signature = signature(self.form, tol)
        self.o, self.neg_eigenvalue = perron_eigenvector(self.form, tol)
        self.reflections = reflection_matrices(self.form)

    @classmethod
    def from_text(cls, text: str, **kw) -> "CoxeterSystem":
        return cls(parse_system(text), **kw)

    @property
    def rank(self) -> int:
        return self.matrix.rank

    @property
    def gram(self) -> np.ndarray:
        return self.form.gram

    def __repr__(self):
        return f"CoxeterSystem(rank={self.rank}, signature={self.signature})"
