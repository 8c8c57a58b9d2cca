"""Set partitions, non-crossing partitions and bi-non-crossing partitions.

Ground sets are ``{1, ..., n}`` (1-based, as in the combinatorics
literature).  Face patterns are plain strings over ``'l'`` and ``'r'``,
e.g. ``'llr'``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Iterable, Sequence

import numpy

MAX_N = 12

__all__ = [
    "MAX_N",
    "SizeLimitError",
    "DimensionError",
    "DomainError",
    "SetPartition",
    "Permutation",
    "check_chi",
    "enumerate_set_partitions",
    "enumerate_noncrossing",
    "is_noncrossing",
    "chi_permutation",
    "transport_partition",
    "enumerate_bnc",
    "is_bnc",
    "refines",
    "mobius_to_top",
    "bell_number",
    "catalan_number",
]


class SizeLimitError(ValueError):
    """Requested ground set is larger than the enumeration guard allows."""


class DimensionError(ValueError):
    """Objects living on ground sets of different sizes were combined."""


class DomainError(ValueError):
    """Argument outside the domain of a partial operation."""


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{1..n}`` kept in canonical form.

    Blocks are sorted internally and ordered by their minimum, so two
    partitions are equal exactly when their ``blocks`` tuples are equal.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set size must be positive, got {self.n}")
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        seen = [x for b in blocks for x in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("empty block")
        if sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks {blocks} do not partition 1..{self.n}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "SetPartition":
        blocks = [tuple(b) for b in blocks]
        return cls(sum(len(b) for b in blocks), tuple(blocks))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "SetPartition":
        """Build from a block label per element (``labels[i]`` for ``i+1``)."""
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i + 1)
        return cls(len(labels), tuple(tuple(g) for g in groups.values()))

    @classmethod
    def top(cls, n: int) -> "SetPartition":
        """The one-block partition ``1_n``."""
        return cls(n, (tuple(range(1, n + 1)),))

    @classmethod
    def bottom(cls, n: int) -> "SetPartition":
        """The all-singletons partition ``0_n``."""
        return cls(n, tuple((i,) for i in range(1, n + 1)))

    @classmethod
    def parse(cls, text: str) -> "SetPartition":
        return cls.from_blocks(json.loads(text))

    def labels(self) -> tuple[int, ...]:
        """Block index of every element, in element order."""
        out = [0] * self.n
        for k, b in enumerate(self.blocks):
            for x in b:
                out[x - 1] = k
        return tuple(out)

    def __len__(self):
        return len(self.blocks)

    def __str__(self):
        return json.dumps([list(b) for b in self.blocks], separators=(",", ":"))


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{1..n}``; ``images[i-1]`` is the image of ``i``."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"{images} is not a permutation")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))


def check_chi(chi: str) -> str:
    """Validate a face pattern and return it as a string."""
    chi = "".join(chi)
    if any(c not in "lr" for c in chi):
        raise ValueError(f"face pattern must consist of 'l'/'r', got {chi!r}")
    return chi


def _guard(n: int):
    if not 1 <= n <= MAX_N:
        raise SizeLimitError(f"n must be in 1..{MAX_N}, got {n}")


def bell_number(n: int) -> int:
    """Bell number via the binomial recurrence."""
    b = [1]
    for m in range(n):
        b.append(sum(comb(m, k) * b[k] for k in range(m + 1)))
    return b[n]


def catalan_number(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def _restricted_growth(n: int):
    # a[0] = 0, a[i] <= 1 + max(a[:i])
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield tuple(a)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    yield from rec(1, 0)


def enumerate_set_partitions(n: int) -> list[SetPartition]:
    """All partitions of ``{1..n}``; there are ``B(n)`` of them."""
    _guard(n)
    return [SetPartition.from_labels(a) for a in _restricted_growth(n)]


def is_noncrossing(p: SetPartition) -> bool:
    """True iff no ``a<b<c<d`` have ``a, c`` and ``b, d`` in two different blocks."""
    lab = p.labels()
    # For every pair of blocks, crossing means their elements interleave
    # as x y x y somewhere; tracking the open blocks as a stack detects it.
    last = {}
    for i, k in enumerate(lab):
        last[k] = i
    stack: list[int] = []
    for i, k in enumerate(lab):
        if stack and stack[-1] == k:
            pass
        elif k in stack:
            return False
        else:
            stack.append(k)
        if last[k] == i:
            stack.pop()
    return True


def _nc_labels(n: int) -> list[tuple[int, ...]]:
    """Non-crossing partitions of ``range(n)`` as 0-based block label tuples."""

    @lru_cache(maxsize=None)
    def intervals(lo, hi):
        # NC partitions of lo..hi-1, as lists of blocks (tuples of positions)
        if lo >= hi:
            return [()]
        out = []
        rest = list(range(lo + 1, hi))
        # choose the other members of lo's block as an increasing subset;
        # gaps between consecutive members are filled independently
        for size in range(len(rest) + 1):
            for members in combinations(rest, size):
                block = (lo,) + members
                bounds = list(block) + [hi]
                parts = [intervals(bounds[j] + 1, bounds[j + 1]) for j in range(len(block))]
                for combo in product(*parts):
                    out.append((block,) + tuple(b for part in combo for b in part))
        return out

    result = []
    for blocks in intervals(0, n):
        lab = [0] * n
        for k, b in enumerate(sorted(blocks)):
            for x in b:
                lab[x] = k
        result.append(tuple(lab))
    return result


@lru_cache(maxsize=None)
def _noncrossing_cached(n: int) -> tuple[SetPartition, ...]:
    return tuple(sorted((SetPartition.from_labels(a) for a in _nc_labels(n)),
                        key=lambda p: (len(p), p.blocks)))


def enumerate_noncrossing(n: int) -> list[SetPartition]:
    """``NC(n)``, generated directly (not by filtering ``P(n)``).

    Ordered by number of blocks, so ``1_n`` comes first.
    """
    _guard(n)
    return list(_noncrossing_cached(n))


@lru_cache(maxsize=None)
def chi_permutation(chi: str) -> Permutation:
    """The permutation ``s_chi``: left positions ascending, then right positions descending."""
    chi = check_chi(chi)
    left = [i for i, c in enumerate(chi, start=1) if c == "l"]
    right = [i for i, c in enumerate(chi, start=1) if c == "r"]
    return Permutation(tuple(left + right[::-1]))


def transport_partition(s: Permutation, p: SetPartition) -> SetPartition:
    """Relabel every element of ``p`` through ``s``."""
    if s.n != p.n:
        raise DimensionError(f"permutation on {s.n} points, partition on {p.n}")
    return SetPartition(p.n, tuple(tuple(s(x) for x in b) for b in p.blocks))


@lru_cache(maxsize=None)
def _bnc_cached(chi: str) -> tuple[SetPartition, ...]:
    s = chi_permutation(chi)
    return tuple(transport_partition(s, p) for p in _noncrossing_cached(len(chi)))


def enumerate_bnc(chi: str) -> list[SetPartition]:
    """Bi-non-crossing partitions for the face pattern ``chi``.

    The i-th entry is the image under ``s_chi`` of the i-th entry of
    :func:`enumerate_noncrossing`.
    """
    chi = check_chi(chi)
    _guard(len(chi))
    return list(_bnc_cached(chi))


def is_bnc(chi: str, p: SetPartition) -> bool:
    chi = check_chi(chi)
    if len(chi) != p.n:
        raise DimensionError(f"pattern of length {len(chi)}, partition on {p.n}")
    return is_noncrossing(transport_partition(chi_permutation(chi).inverse(), p))


def refines(p: SetPartition, q: SetPartition) -> bool:
    """Refinement order: every block of ``p`` lies inside a block of ``q``."""
    if p.n != q.n:
        raise DimensionError(f"partitions on {p.n} and {q.n} points")
    lab = q.labels()
    return all(len({lab[x - 1] for x in b}) == 1 for b in p.blocks)


@lru_cache(maxsize=None)
def _mobius_table(n: int) -> dict[SetPartition, int]:
    # mu(s, 1_n) = [s == 1_n] - sum_{t > s} mu(t, 1_n), processed with
    # coarser partitions first.  Refinement is tested in bulk on the label
    # matrix: s <= t iff t's labels agree along every block of s.
    ncs = _noncrossing_cached(n)
    labels = numpy.array([p.labels() for p in ncs], dtype=numpy.int16)
    sizes = numpy.array([len(p) for p in ncs])
    mu = numpy.zeros(len(ncs), dtype=numpy.int64)
    for k, s in enumerate(ncs):
        if len(s) == 1:
            mu[k] = 1
            continue
        mask = sizes < len(s)
        for b in s.blocks:
            for x, y in zip(b, b[1:]):
                mask &= labels[:, x - 1] == labels[:, y - 1]
        mu[k] = -int(mu[mask].sum())
    return {p: int(m) for p, m in zip(ncs, mu)}


def mobius_to_top(sigma: SetPartition) -> int:
    """Moebius function ``mu_n(sigma, 1_n)`` of the non-crossing lattice.

    Computed from the defining recursion over non-crossing coarsenings and
    memoized per ``n`` (the whole table for ``n`` is built on first use,
    which is quadratic in ``C_n``: instant up to n=8, seconds at n=10).
    Raises :class:`DomainError` for crossing input.
    """
    if not is_noncrossing(sigma):
        raise DomainError(f"{sigma} is crossing")
    _guard(sigma.n)
    return _mobius_table(sigma.n)[sigma]
