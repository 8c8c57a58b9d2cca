"""Truncated moment and cumulant tables of two-faced families.

A *letter* is a variable sitting on the left or the right face; a *word*
is a tuple of letters and stands for the operator product read left to
right.  Tables are dense: every word up to ``max_order`` has an entry.

The transforms run over bi-non-crossing partitions of the word's face
pattern, weighted by the Moebius function of the non-crossing lattice::

    kappa(w) = sum_{pi in BNC(chi(w))} phi_pi(w) * mu(s_chi^{-1} pi, 1_n)
    phi(w)   = sum_{pi in BNC(chi(w))} kappa_pi(w)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy

from .partitions import (
    DimensionError,
    DomainError,
    SetPartition,
    chi_permutation,
    enumerate_noncrossing,
    is_bnc,
    mobius_to_top,
)

__all__ = [
    "Letter",
    "Word",
    "TruncationError",
    "AlphabetMismatchError",
    "MissingEntryError",
    "faces",
    "words_up_to",
    "MomentFunctional",
    "CumulantFunctional",
    "phi_partitioned",
    "cumulant",
    "cumulant_partitioned",
    "moment_from_cumulants",
    "moments_to_cumulants",
    "cumulants_to_moments",
    "BifreenessReport",
    "bifreeness_test",
    "convolve",
    "scale",
]


class TruncationError(ValueError):
    """A word is longer than the table's truncation order."""


class AlphabetMismatchError(ValueError):
    pass


class MissingEntryError(KeyError):
    pass


@dataclass(frozen=True, order=True)
class Letter:
    face: str
    label: str

    def __post_init__(self):
        if self.face not in ("l", "r"):
            raise ValueError(f"face must be 'l' or 'r', got {self.face!r}")
        if not self.label or any(c.isspace() for c in self.label):
            raise ValueError(f"label must be a nonempty token, got {self.label!r}")

    def __repr__(self):
        return f"{self.label}[{self.face}]"


Word = tuple  # tuple[Letter, ...]


def faces(word: Sequence[Letter]) -> str:
    """Face pattern of a word, e.g. ``'llr'``."""
    return "".join(a.face for a in word)


def words_up_to(alphabet: Sequence[Letter], max_order: int, min_order: int = 0) -> list[tuple]:
    """All words of length ``min_order..max_order``, shortest first."""
    out = []
    for n in range(min_order, max_order + 1):
        out.extend(product(alphabet, repeat=n))
    return out


class _Table:
    kind = ""

    def __init__(self, alphabet: Iterable[Letter], max_order: int,
                 table: Mapping[tuple, complex]):
        alphabet = tuple(alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("repeated letter in alphabet")
        labels = [a.label for a in alphabet]
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique within an alphabet: {labels}")
        if max_order < 1:
            raise ValueError("max_order must be positive")
        self.alphabet = alphabet
        self.max_order = int(max_order)
        self._by_label = {a.label: a for a in alphabet}
        letters = set(alphabet)
        for w in table:
            if len(w) > self.max_order or any(a not in letters for a in w):
                raise ValueError(f"word {w!r} not over the alphabet up to order {max_order}")
        self._table = self._densify(table)

    def _densify(self, table):
        raise NotImplementedError

    def __call__(self, word: Sequence[Letter]) -> complex:
        word = tuple(word)
        if len(word) > self.max_order:
            raise TruncationError(f"word of length {len(word)} exceeds order {self.max_order}")
        return self._table[word]

    def __len__(self):
        return len(self._table)

    def __iter__(self):
        return iter(self._table)

    def items(self):
        return self._table.items()

    def letter(self, label: str) -> Letter:
        return self._by_label[label]

    def word(self, text: str) -> tuple:
        """Parse a space-separated label string into a word."""
        return tuple(self._by_label[t] for t in text.split())

    def max_abs_diff(self, other: "_Table") -> float:
        if set(self.alphabet) != set(other.alphabet):
            raise AlphabetMismatchError("different alphabets")
        n = min(self.max_order, other.max_order)
        return max((abs(v - other(w)) for w, v in self._table.items() if len(w) <= n),
                   default=0.0)

    def __repr__(self):
        return (f"{type(self).__name__}(alphabet={list(self.alphabet)}, "
                f"max_order={self.max_order}, entries={len(self._table)})")


class MomentFunctional(_Table):
    """Moments ``phi(a_1 ... a_n)`` of a unital state, truncated at ``max_order``.

    Every word up to ``max_order`` must be present; the empty word may be
    omitted and is then set to 1.
    """

    kind = "moments"

    def _densify(self, table):
        out = {}
        for w in words_up_to(self.alphabet, self.max_order):
            if w in table:
                out[w] = complex(table[w])
            elif len(w) == 0:
                out[w] = 1.0 + 0j
            else:
                raise MissingEntryError(f"no moment for word {w!r}")
        if out[()] != 1:
            raise ValueError(f"moment of the empty word must be 1, got {out[()]}")
        return out


class CumulantFunctional(_Table):
    """Cumulants ``kappa_chi(a_1, ..., a_n)``; absent entries are zero.

    The empty word carries 0 by convention and is not stored.
    """

    kind = "cumulants"

    def _densify(self, table):
        return {w: complex(table.get(w, 0.0))
                for w in words_up_to(self.alphabet, self.max_order, 1)}

    def __call__(self, word):
        if len(word) == 0:
            return 0j
        return super().__call__(word)


@lru_cache(maxsize=None)
def _nc_terms(n: int) -> tuple:
    return tuple((p.blocks, mobius_to_top(p)) for p in enumerate_noncrossing(n))


@lru_cache(maxsize=None)
def _bnc_terms(chi: str) -> tuple:
    """``(blocks, mobius)`` for every bi-non-crossing partition of ``chi``.

    Blocks are tuples of 0-based positions in increasing order.
    """
    s = chi_permutation(chi).images
    terms = []
    for blocks, mu in _nc_terms(len(chi)):
        moved = tuple(sorted(tuple(sorted(s[x - 1] - 1 for x in b)) for b in blocks))
        terms.append((moved, mu))
    return tuple(terms)


@lru_cache(maxsize=None)
def _bnc_plan(chi: str):
    """Vectorized form of :func:`_bnc_terms`.

    Returns the distinct blocks, an index matrix (one row per partition,
    padded with ``len(blocks)`` which points at a constant 1) and the
    Moebius weights.
    """
    terms = _bnc_terms(chi)
    distinct = sorted({b for blocks, _ in terms for b in blocks})
    pos = {b: i for i, b in enumerate(distinct)}
    width = max(len(blocks) for blocks, _ in terms)
    idx = numpy.full((len(terms), width), len(distinct), dtype=numpy.intp)
    for k, (blocks, _) in enumerate(terms):
        idx[k, :len(blocks)] = [pos[b] for b in blocks]
    mu = numpy.array([m for _, m in terms], dtype=float)
    return tuple(distinct), idx, mu


def _block_values(table, w, blocks):
    get = w.__getitem__
    vals = numpy.empty(len(blocks) + 1, dtype=complex)
    vals[:-1] = [table[tuple(map(get, b))] for b in blocks]
    vals[-1] = 1.0
    return vals


def _check_order(table: _Table, word):
    if len(word) > table.max_order:
        raise TruncationError(f"word of length {len(word)} exceeds order {table.max_order}")


def phi_partitioned(mf: MomentFunctional, w: Sequence[Letter], p: SetPartition) -> complex:
    """Product over blocks of ``p`` of the moment of the sub-word on that block."""
    w = tuple(w)
    if len(w) != p.n:
        raise DimensionError(f"word of length {len(w)}, partition on {p.n} points")
    _check_order(mf, w)
    out = 1 + 0j
    for b in p.blocks:
        out *= mf(tuple(w[i - 1] for i in b))
    return out


def cumulant(mf: MomentFunctional, w: Sequence[Letter]) -> complex:
    """Bi-free cumulant of the word ``w`` from the moment table."""
    w = tuple(w)
    if not w:
        raise ValueError("cumulants are defined for nonempty words")
    _check_order(mf, w)
    blocks, idx, mu = _bnc_plan(faces(w))
    vals = _block_values(mf._table, w, blocks)
    return complex(mu @ vals[idx].prod(axis=1))


def cumulant_partitioned(mf: MomentFunctional, w: Sequence[Letter], p: SetPartition) -> complex:
    w = tuple(w)
    if len(w) != p.n:
        raise DimensionError(f"word of length {len(w)}, partition on {p.n} points")
    if not is_bnc(faces(w), p):
        raise DomainError(f"{p} is not bi-non-crossing for {faces(w)}")
    _check_order(mf, w)
    out = 1 + 0j
    for b in p.blocks:
        out *= cumulant(mf, tuple(w[i - 1] for i in b))
    return out


def moment_from_cumulants(cf: CumulantFunctional, w: Sequence[Letter]) -> complex:
    """Moment of ``w`` as the sum of cumulant products over ``BNC(chi(w))``."""
    w = tuple(w)
    if not w:
        return 1 + 0j
    _check_order(cf, w)
    blocks, idx, _ = _bnc_plan(faces(w))
    vals = _block_values(cf._table, w, blocks)
    return complex(vals[idx].prod(axis=1).sum())


def moments_to_cumulants(mf: MomentFunctional) -> CumulantFunctional:
    table = {w: cumulant(mf, w) for w in mf if w}
    return CumulantFunctional(mf.alphabet, mf.max_order, table)


def cumulants_to_moments(cf: CumulantFunctional) -> MomentFunctional:
    table = {w: moment_from_cumulants(cf, w)
             for w in words_up_to(cf.alphabet, cf.max_order)}
    return MomentFunctional(cf.alphabet, cf.max_order, table)


@dataclass
class BifreenessReport:
    passed: bool
    max_abs: float
    worst_word: tuple | None
    checked: int
    tol: float
    max_order: int

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_abs_mixed_cumulant": self.max_abs,
            "worst_word": None if self.worst_word is None
            else " ".join(a.label for a in self.worst_word),
            "words_checked": self.checked,
            "tol": self.tol,
            "max_order": self.max_order,
        }


def bifreeness_test(mf: MomentFunctional, grouping: Mapping[str, object],
                    max_order: int | None = None, tol: float = 1e-9) -> BifreenessReport:
    """Check that every mixed cumulant vanishes.

    ``grouping`` maps each letter label to a group id.  A word is mixed
    when its letters come from at least two groups; all mixed words of
    length ``2..max_order`` are evaluated.
    """
    if max_order is None:
        max_order = mf.max_order
    missing = [a.label for a in mf.alphabet if a.label not in grouping]
    if missing:
        raise ValueError(f"grouping does not cover letters {missing}")
    _check_order(mf, (None,) * max_order)
    worst, worst_word, checked = 0.0, None, 0
    for w in words_up_to(mf.alphabet, max_order, 2):
        if len({grouping[a.label] for a in w}) < 2:
            continue
        checked += 1
        k = abs(cumulant(mf, w))
        if k > worst or worst_word is None:
            worst, worst_word = k, w
    return BifreenessReport(worst <= tol, worst, worst_word, checked, tol, max_order)


def _same_shape(cf1: CumulantFunctional, cf2: CumulantFunctional):
    if cf1.alphabet != cf2.alphabet or cf1.max_order != cf2.max_order:
        raise AlphabetMismatchError("cumulant tables differ in alphabet or order")


def convolve(cf1: CumulantFunctional, cf2: CumulantFunctional) -> CumulantFunctional:
    """Cumulants of the sum of two bi-free families: entrywise sum."""
    _same_shape(cf1, cf2)
    return CumulantFunctional(cf1.alphabet, cf1.max_order,
                              {w: v + cf2(w) for w, v in cf1.items()})


def scale(cf: CumulantFunctional, t: float) -> CumulantFunctional:
    """Multiply every cumulant by ``t``; negative ``t`` is allowed but warned about."""
    if t < 0:
        warnings.warn(f"scaling cumulants by negative t={t}; the result need not "
                      "be the cumulant table of a state", RuntimeWarning, stacklevel=2)
    return CumulantFunctional(cf.alphabet, cf.max_order,
                              {w: v * t for w, v in cf.items()})
