"""Reduced words, descents and Cayley-ball enumeration for a Coxeter system.

Everything here works for any Coxeter matrix (finite, affine or Lorentzian);
only the bilinear form is needed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .coxsys import BilinearForm, CoxeterSystem, reflection_matrices

log = logging.getLogger(__name__)

DESCENT_TOL = 1e-9
MAX_ELEMENTS = 2_000_000


class DescentAmbiguityError(ArithmeticError):
    """A root image has coordinates of both signs beyond tolerance."""


class ResourceError(MemoryError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


def format_word(word: Sequence[int]) -> str:
    return " ".join(str(a + 1) for a in word)


def parse_word(text: str) -> Tuple[int, ...]:
    return tuple(int(tok) - 1 for tok in text.replace(",", " ").split())


@dataclass(frozen=True)
class GroupElement:
    word: Tuple[int, ...]
    matrix: np.ndarray = field(repr=False, compare=False)

    @property
    def length(self) -> int:
        return len(self.word)

    def __str__(self):
        return format_word(self.word) if self.word else "id"


def root_signs(vecs, tol: float = DESCENT_TOL, scale=None) -> np.ndarray:
    """+1 for positive roots, -1 for negative ones (rows of ``vecs``).

    ``scale`` is the size of the matrix the roots were read from (per row or
    scalar): rounding error in a product of reflections grows like
    eps * max|M|, so the zero band is ``tol * max(1, scale, max|v|)``.
    """
    vecs = np.atleast_2d(vecs)
    big = np.max(np.abs(vecs), axis=1)
    if scale is not None:
        big = np.maximum(big, scale)
    scale = tol * np.maximum(1.0, big)
    pos = np.all(vecs >= -scale[:, None], axis=1)
    neg = np.all(vecs <= scale[:, None], axis=1)
    bad = ~(pos ^ neg)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DescentAmbiguityError(
            f"root image {vecs[i]} is neither positive nor negative (tol {scale[i]:.3g})")
    return np.where(pos, 1, -1)


@dataclass
class CayleyBall:
    depth: int
    words: List[Tuple[int, ...]]
    matrices: np.ndarray
    inverses: np.ndarray
    lengths: np.ndarray
    counts: List[int]
    complete: bool = True
    _index: Optional[Dict[Tuple[int, ...], int]] = field(default=None, repr=False)

    def __len__(self):
        return len(self.words)

    def elements(self) -> Iterator[GroupElement]:
        for w, m in zip(self.words, self.matrices):
            yield GroupElement(w, m)

    def index(self, word) -> int:
        if self._index is None:
            self._index = {w: i for i, w in enumerate(self.words)}
        return self._index[tuple(word)]

    def __contains__(self, word):
        try:
            self.index(word)
        except KeyError:
            return False
        return True

    def level(self, k: int) -> slice:
        start = sum(self.counts[:k])
        return slice(start, start + self.counts[k])


class WordEngine:
    def __init__(self, form, descent_tol: float = DESCENT_TOL):
        if isinstance(form, CoxeterSystem):
            form = form.form
        if not isinstance(form, BilinearForm):
            form = BilinearForm(np.asarray(form, float))
        self.form = form
        self.gram = form.gram
        self.n = form.rank
        self.gens = np.array(reflection_matrices(form))
        self.tol = descent_tol

    # -- matrices ---------------------------------------------------------
    def matrix(self, word: Sequence[int]) -> np.ndarray:
        m = np.eye(self.n)
        for a in word:
            m = m @ self.gens[a]
        return m

    def inverse_matrix(self, word: Sequence[int]) -> np.ndarray:
        return self.matrix(tuple(reversed(tuple(word))))

    def prefix_matrices(self, word: Sequence[int]) -> np.ndarray:
        """Stack of matrices of the prefixes w_0 = id, w_1, ..., w_L."""
        out = np.empty((len(word) + 1, self.n, self.n))
        out[0] = np.eye(self.n)
        for k, a in enumerate(word):
            out[k + 1] = out[k] @ self.gens[a]
        return out

    def element(self, word: Sequence[int]) -> GroupElement:
        """The reduced ShortLex representative of the element spelled by ``word``."""
        return self.reduce_word(word)

    # -- descents -----------------------------------------------------------
    def is_descent(self, w, s: int, side: str = "left") -> bool:
        word = w.word if isinstance(w, GroupElement) else tuple(w)
        if side == "right":
            m = self.matrix(word)
        elif side == "left":
            m = self.inverse_matrix(word)
        else:
            raise ValueError(f"side must be 'left' or 'right', not {side!r}")
        return bool(root_signs(m[:, s], self.tol, np.abs(m).max())[0] < 0)

    def descents(self, w, side: str = "left") -> List[int]:
        word = w.word if isinstance(w, GroupElement) else tuple(w)
        m = self.matrix(word) if side == "right" else self.inverse_matrix(word)
        return [int(s) for s in np.flatnonzero(root_signs(m.T, self.tol, np.abs(m).max()) < 0)]

    # -- reduction ----------------------------------------------------------
    def reduce_word(self, word: Sequence[int]) -> GroupElement:
        """ShortLex normal form by repeatedly stripping the least left descent."""
        word = tuple(word)
        inv = self.inverse_matrix(word)
        # rounding error from the full product stays after entries shrink
        size = np.abs(inv).max()
        out: List[int] = []
        for _ in range(len(word) + 1):
            signs = root_signs(inv.T, self.tol, size)
            neg = np.flatnonzero(signs < 0)
            if neg.size == 0:
                break
            t = int(neg[0])
            out.append(t)
            inv = inv @ self.gens[t]
        else:  # pragma: no cover - lengths can only drop len(word) times
            raise DescentAmbiguityError("descent stripping did not terminate")
        out_t = tuple(out)
        return GroupElement(out_t, self.matrix(out_t))

    def length(self, word: Sequence[int]) -> int:
        return self.reduce_word(word).length

    def gromov_product(self, w1, w2) -> float:
        """(|w1| + |w2| - |w1^-1 w2|) / 2 at the identity."""
        a = w1.word if isinstance(w1, GroupElement) else tuple(w1)
        b = w2.word if isinstance(w2, GroupElement) else tuple(w2)
        la, lb = self.length(a), self.length(b)
        lab = self.length(tuple(reversed(a)) + b)
        return (la + lb - lab) / 2

    # -- enumeration ----------------------------------------------------------
    def enumerate_ball(self, depth: int, max_elements: int = MAX_ELEMENTS,
                       generators: Optional[Sequence[int]] = None,
                       check_hash: bool = False) -> CayleyBall:
        """All elements of length <= depth, each once, in ShortLex order.

        Extension happens on the left: x = t y is accepted iff t is not a left
        descent of y and t is the least left descent of x, which makes the
        ShortLex word of x equal to t followed by the word of y.
        """
        if depth < 0:
            raise ValueError("depth must be >= 0")
        n = self.n
        gens = list(range(n)) if generators is None else sorted(generators)
        G = self.gram
        words: List[Tuple[int, ...]] = [()]
        mats = [np.eye(n)[None]]
        invs = [np.eye(n)[None]]
        counts = [1]
        cur_w, cur_m, cur_i = [()], mats[0], invs[0]
        total = 1
        complete = True
        for L in range(depth):
            new_w, new_m, new_i = [], [], []
            size = np.abs(cur_i).max(axis=(1, 2))
            for t in gens:
                col_t = cur_i[:, :, t]
                ok = root_signs(col_t, self.tol, size) > 0
                for u in gens:
                    if u >= t:
                        break
                    col = cur_i[:, :, u] - 2.0 * G[t, u] * col_t
                    ok &= root_signs(col, self.tol, size) > 0
                idx = np.flatnonzero(ok)
                if idx.size == 0:
                    continue
                new_w.extend((t,) + cur_w[i] for i in idx)
                new_m.append(self.gens[t] @ cur_m[idx])
                new_i.append(cur_i[idx] @ self.gens[t])
            if not new_w:
                counts.append(0)
                cur_w, cur_m, cur_i = [], np.empty((0, n, n)), np.empty((0, n, n))
                continue
            cur_w = new_w
            cur_m = np.concatenate(new_m)
            cur_i = np.concatenate(new_i)
            if total + len(cur_w) > max_elements:
                complete = False
                log.warning("ball enumeration stopped at length %d: budget %d exceeded", L + 1, max_elements)
                ball = self._ball(L, words, mats, invs, counts, complete)
                raise ResourceError(f"more than {max_elements} elements up to length {L + 1}", ball)
            words.extend(cur_w)
            mats.append(cur_m)
            invs.append(cur_i)
            counts.append(len(cur_w))
            total += len(cur_w)
        ball = self._ball(depth, words, mats, invs, counts, complete)
        if check_hash:
            keys = {(np.round(m, 6) + 0.0).tobytes() for m in ball.matrices}
            assert len(keys) == len(ball), "quantized-matrix hash found a duplicate element"
        return ball

    @staticmethod
    def _ball(depth, words, mats, invs, counts, complete):
        return CayleyBall(depth, list(words), np.concatenate(mats), np.concatenate(invs),
                          np.repeat(np.arange(len(counts)), counts), list(counts), complete)

    # -- random reduced words ---------------------------------------------------
    def random_reduced_word(self, length: int, rng: np.random.Generator,
                            generators: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
        """Random geodesic word built by right multiplication by non-descents."""
        gens = np.arange(self.n) if generators is None else np.asarray(sorted(generators))
        m = np.eye(self.n)
        word: List[int] = []
        for _ in range(length):
            signs = root_signs(m[:, gens].T, self.tol, np.abs(m).max())
            choices = gens[signs > 0]
            if choices.size == 0:
                break  # longest element of a finite group
            s = int(rng.choice(choices))
            word.append(s)
            m = m @ self.gens[s]
        return tuple(word)


def sequence_path(seq, chart, samples_per_segment: int = 0) -> np.ndarray:
    """Polyline through w_k . o for a sequence of elements (or matrices).

    With ``samples_per_segment`` > 0 the chart segments are densified.
    """
    mats = [s.matrix if isinstance(s, GroupElement) else np.asarray(s) for s in seq]
    if not mats:
        raise ValueError("empty sequence")
    verts = chart.act(np.array(mats), np.broadcast_to(chart.o, (len(mats), chart.n)))
    if samples_per_segment <= 0 or len(verts) == 1:
        return verts
    s = np.linspace(0.0, 1.0, samples_per_segment + 1, endpoint=False)
    pts = [(1 - s)[:, None] * a + s[:, None] * b for a, b in zip(verts[:-1], verts[1:])]
    pts.append(verts[-1:])
    return np.concatenate(pts)
