"""Truncated full Fock space over a finite-dimensional Hilbert space.

``F(H) = C Omega + H + H (x) H + ...`` cut at tensor degree ``depth``.
Vectors are stored degree by degree: the degree-``k`` part is a complex
array of shape ``(dim_h,) * k``, and degrees that carry nothing are
simply absent.  Operators act on these parts directly and are never
materialized as matrices (except in :func:`compressed_matrix`, which
exists for norm estimates).

Inner products are linear in the first slot: ``<x, y> = sum x_i conj(y_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy

from .functionals import Letter, MomentFunctional

__all__ = [
    "FockDepthError",
    "FockSpace",
    "FockVector",
    "FockOp",
    "LeftCreate",
    "RightCreate",
    "LeftAnnihilate",
    "RightAnnihilate",
    "LeftGauge",
    "RightGauge",
    "Scalar",
    "Sum",
    "Product",
    "l",
    "r",
    "gauge_l",
    "gauge_r",
    "adjoint",
    "scalar",
    "apply",
    "vacuum_expectation",
    "two_faced_moments",
    "Amplification",
    "amplify",
    "InfDivPair",
    "infdiv_pair",
    "compressed_matrix",
    "estimate_norm",
    "inner",
]


class FockDepthError(RuntimeError):
    """An operator would create a tensor beyond the space's depth."""


@dataclass(frozen=True)
class FockSpace:
    """Full Fock space over ``C^dim_h`` truncated at tensor degree ``depth``.

    ``summands`` optionally names an orthogonal decomposition of ``H`` by
    listing the basis indices of each summand.
    """

    dim_h: int
    depth: int
    summands: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim_h < 0 or self.depth < 0:
            raise ValueError("dim_h and depth must be nonnegative")
        summands = {k: tuple(int(i) for i in v) for k, v in dict(self.summands).items()}
        used = [i for v in summands.values() for i in v]
        if len(used) != len(set(used)) or any(not 0 <= i < self.dim_h for i in used):
            raise ValueError(f"summands must be disjoint subsets of range({self.dim_h})")
        object.__setattr__(self, "summands", summands)

    def __hash__(self):
        return hash((self.dim_h, self.depth, tuple(sorted(self.summands.items()))))

    def vacuum(self) -> "FockVector":
        return FockVector(self, {0: numpy.array(1.0 + 0j)})

    def basis_vector(self, seq: Sequence[int]) -> "FockVector":
        seq = tuple(seq)
        if len(seq) > self.depth:
            raise FockDepthError(f"basis sequence of length {len(seq)} beyond depth {self.depth}")
        t = numpy.zeros((self.dim_h,) * len(seq), dtype=complex)
        t[seq] = 1.0
        return FockVector(self, {len(seq): t})

    def with_depth(self, depth: int) -> "FockSpace":
        return FockSpace(self.dim_h, depth, self.summands)

    def projector(self, summand: str) -> numpy.ndarray:
        """Orthogonal projection of ``H`` onto a named summand."""
        p = numpy.zeros((self.dim_h, self.dim_h))
        idx = list(self.summands[summand])
        p[idx, idx] = 1.0
        return p


class FockVector:
    """A vector in a truncated Fock space, stored as degree -> tensor."""

    def __init__(self, space: FockSpace, parts: Mapping[int, numpy.ndarray]):
        self.space = space
        self.parts = {}
        for k, t in parts.items():
            t = numpy.asarray(t, dtype=complex)
            if k > space.depth:
                raise FockDepthError(f"degree {k} beyond depth {space.depth}")
            if t.shape != (space.dim_h,) * k:
                raise ValueError(f"degree-{k} part has shape {t.shape}")
            self.parts[k] = t

    @classmethod
    def from_entries(cls, space: FockSpace, entries: Mapping[tuple, complex]) -> "FockVector":
        """Build from a sparse map ``basis sequence -> coefficient``."""
        parts: dict[int, numpy.ndarray] = {}
        for seq, c in entries.items():
            k = len(seq)
            if k not in parts:
                parts[k] = numpy.zeros((space.dim_h,) * k, dtype=complex)
            parts[k][tuple(seq)] += c
        return cls(space, parts)

    def entries(self, atol: float = 0.0) -> dict[tuple, complex]:
        """Sparse view: nonzero coefficients keyed by basis sequence."""
        out = {}
        for k, t in self.parts.items():
            for idx in zip(*numpy.nonzero(numpy.abs(t) > atol)):
                out[tuple(int(i) for i in idx)] = complex(t[idx])
        return out

    def coefficient(self, seq: Sequence[int] = ()) -> complex:
        seq = tuple(seq)
        t = self.parts.get(len(seq))
        return 0j if t is None else complex(t[seq])

    def inner(self, other: "FockVector") -> complex:
        return sum((numpy.vdot(other.parts[k], t) for k, t in self.parts.items()
                    if k in other.parts), 0j)

    def norm(self) -> float:
        return float(numpy.sqrt(sum(numpy.vdot(t, t).real for t in self.parts.values())))

    def __add__(self, other: "FockVector") -> "FockVector":
        parts = dict(self.parts)
        for k, t in other.parts.items():
            parts[k] = parts[k] + t if k in parts else t
        return FockVector(self.space, parts)

    def __rmul__(self, c: complex) -> "FockVector":
        return FockVector(self.space, {k: c * t for k, t in self.parts.items()})

    def __sub__(self, other):
        return self + (-1) * other

    def __repr__(self):
        return f"FockVector(degrees={sorted(self.parts)}, dim_h={self.space.dim_h})"


def inner(x: Sequence[complex], y: Sequence[complex]) -> complex:
    """``<x, y>`` on ``H``, linear in ``x``."""
    return complex(numpy.vdot(numpy.asarray(y), numpy.asarray(x)))


def _add_part(parts, k, t):
    if k in parts:
        parts[k] = parts[k] + t
    else:
        parts[k] = t


class FockOp:
    """Base class for operators on a truncated Fock space.

    Subclasses implement ``_act`` on degree-graded parts.  ``raising`` and
    ``lowering`` bound how far one application can move the tensor degree
    up or down; the vacuum-expectation pruning relies on them.
    """

    raising = 0
    lowering = 0
    dim: int | None = None

    def _act(self, parts: dict, space: FockSpace) -> dict:
        raise NotImplementedError

    def adjoint(self) -> "FockOp":
        raise NotImplementedError

    @property
    def H(self) -> "FockOp":
        return self.adjoint()

    def __add__(self, other):
        if isinstance(other, (int, float, complex, numpy.number)):
            other = Scalar(other)
        if not isinstance(other, FockOp):
            return NotImplemented
        return Sum((self, other))

    __radd__ = __add__

    def __neg__(self):
        return Product((Scalar(-1.0), self))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, numpy.number)):
            other = Scalar(other)
        if not isinstance(other, FockOp):
            return NotImplemented
        return Product((self, other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, numpy.number)):
            return Product((Scalar(other), self))
        return NotImplemented


def _vec(f, name="vector"):
    f = numpy.asarray(f, dtype=complex)
    if f.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return f


def _mat(t):
    t = numpy.asarray(t, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError("gauge matrix must be square")
    return t


class LeftCreate(FockOp):
    """``l(f)``: ``Omega -> f``, ``xi -> f (x) xi``."""

    raising = 1

    def __init__(self, f):
        self.f = _vec(f)
        self.dim = len(self.f)

    def _act(self, parts, space):
        out = {}
        for k, t in parts.items():
            if k + 1 > space.depth:
                raise FockDepthError(f"left creation on degree {k} exceeds depth {space.depth}")
            out[k + 1] = numpy.multiply.outer(self.f, t)
        return out

    def adjoint(self):
        return LeftAnnihilate(self.f)

    def __repr__(self):
        return f"l({self.f})"


class RightCreate(FockOp):
    """``r(f)``: ``Omega -> f``, ``xi -> xi (x) f``."""

    raising = 1

    def __init__(self, f):
        self.f = _vec(f)
        self.dim = len(self.f)

    def _act(self, parts, space):
        out = {}
        for k, t in parts.items():
            if k + 1 > space.depth:
                raise FockDepthError(f"right creation on degree {k} exceeds depth {space.depth}")
            out[k + 1] = numpy.multiply.outer(t, self.f)
        return out

    def adjoint(self):
        return RightAnnihilate(self.f)

    def __repr__(self):
        return f"r({self.f})"


class LeftAnnihilate(FockOp):
    """``l(g)*``: contracts the first tensor slot against ``g``."""

    lowering = 1

    def __init__(self, g):
        self.g = _vec(g)
        self.dim = len(self.g)

    def _act(self, parts, space):
        gc = self.g.conj()
        return {k - 1: numpy.tensordot(gc, t, axes=(0, 0)) for k, t in parts.items() if k > 0}

    def adjoint(self):
        return LeftCreate(self.g)

    def __repr__(self):
        return f"adj(l({self.g}))"


class RightAnnihilate(FockOp):
    """``r(g)*``: contracts the last tensor slot against ``g``."""

    lowering = 1

    def __init__(self, g):
        self.g = _vec(g)
        self.dim = len(self.g)

    def _act(self, parts, space):
        gc = self.g.conj()
        return {k - 1: numpy.tensordot(t, gc, axes=(k - 1, 0)) for k, t in parts.items() if k > 0}

    def adjoint(self):
        return RightCreate(self.g)

    def __repr__(self):
        return f"adj(r({self.g}))"


class LeftGauge(FockOp):
    """``Lambda_l(T)``: ``T`` on the first slot, kills the vacuum."""

    def __init__(self, T):
        self.T = _mat(T)
        self.dim = self.T.shape[0]

    def _act(self, parts, space):
        return {k: numpy.tensordot(self.T, t, axes=(1, 0)) for k, t in parts.items() if k > 0}

    def adjoint(self):
        return LeftGauge(self.T.conj().T)

    def __repr__(self):
        return f"gauge_l({self.T.tolist()})"


class RightGauge(FockOp):
    """``Lambda_r(T)``: ``T`` on the last slot, kills the vacuum."""

    def __init__(self, T):
        self.T = _mat(T)
        self.dim = self.T.shape[0]

    def _act(self, parts, space):
        return {k: t @ self.T.T for k, t in parts.items() if k > 0}

    def adjoint(self):
        return RightGauge(self.T.conj().T)

    def __repr__(self):
        return f"gauge_r({self.T.tolist()})"


class Scalar(FockOp):
    """Multiple of the identity."""

    def __init__(self, c):
        self.c = complex(c)

    def _act(self, parts, space):
        if self.c == 0:
            return {}
        return {k: self.c * t for k, t in parts.items()}

    def adjoint(self):
        return Scalar(self.c.conjugate())

    def __repr__(self):
        return f"{self.c}"


class Sum(FockOp):
    def __init__(self, terms: Iterable[FockOp]):
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, Sum) else [t])
        self.terms = tuple(flat)
        self.raising = max((t.raising for t in self.terms), default=0)
        self.lowering = max((t.lowering for t in self.terms), default=0)
        self.dim = _common_dim(self.terms)

    def _act(self, parts, space):
        out: dict = {}
        for t in self.terms:
            for k, v in t._act(parts, space).items():
                _add_part(out, k, v)
        return out

    def adjoint(self):
        return Sum(t.adjoint() for t in self.terms)

    def __repr__(self):
        return " + ".join(map(repr, self.terms))


class Product(FockOp):
    """Operator product; the rightmost factor acts first."""

    def __init__(self, factors: Iterable[FockOp]):
        flat = []
        for t in factors:
            flat.extend(t.factors if isinstance(t, Product) else [t])
        self.factors = tuple(flat)
        self.raising = sum(t.raising for t in self.factors)
        self.lowering = sum(t.lowering for t in self.factors)
        self.dim = _common_dim(self.factors)

    def _act(self, parts, space):
        for t in reversed(self.factors):
            parts = t._act(parts, space)
        return parts

    def adjoint(self):
        return Product(t.adjoint() for t in reversed(self.factors))

    def __repr__(self):
        return "*".join(f"({t!r})" for t in self.factors)


def _common_dim(ops):
    dims = {t.dim for t in ops if t.dim is not None}
    if len(dims) > 1:
        raise ValueError(f"operators on different spaces combined: dims {sorted(dims)}")
    return dims.pop() if dims else None


def l(f) -> LeftCreate:
    return LeftCreate(f)


def r(f) -> RightCreate:
    return RightCreate(f)


def gauge_l(T) -> LeftGauge:
    return LeftGauge(T)


def gauge_r(T) -> RightGauge:
    return RightGauge(T)


def scalar(c) -> Scalar:
    return Scalar(c)


def adjoint(op: FockOp) -> FockOp:
    return op.adjoint()


def _check_space(op: FockOp, space: FockSpace):
    if op.dim is not None and op.dim != space.dim_h:
        raise ValueError(f"operator on C^{op.dim} applied in a space over C^{space.dim_h}")


def apply(op: FockOp, v: FockVector) -> FockVector:
    """Exact action of ``op`` on ``v``; raises :class:`FockDepthError` on overflow."""
    _check_space(op, v.space)
    return FockVector(v.space, op._act(v.parts, v.space))


def _prune(parts, max_degree):
    return {k: t for k, t in parts.items() if k <= max_degree}


def vacuum_expectation(ops: Sequence[FockOp], space: FockSpace) -> complex:
    """``<a_1 a_2 ... a_n Omega, Omega>`` for ``ops = (a_1, ..., a_n)``.

    Components whose degree is too high to be brought back to the vacuum
    by the remaining operators are dropped along the way; this is exact.
    """
    ops = list(ops)
    for op in ops:
        _check_space(op, space)
    # capacity[i]: how far ops[:i], still to act, can lower the degree
    capacity = [sum(op.lowering for op in ops[:i]) for i in range(len(ops) + 1)]
    parts = space.vacuum().parts
    for i in range(len(ops) - 1, -1, -1):
        parts = ops[i]._act(parts, space)
        parts = _prune(parts, capacity[i])
        if not parts:
            return 0j
    return complex(parts[0]) if 0 in parts else 0j


def two_faced_moments(left_ops: Mapping[str, FockOp], right_ops: Mapping[str, FockOp],
                      n_max: int, space: FockSpace) -> MomentFunctional:
    """Dense moment table of a two-faced family in the vacuum state.

    Left operators become letters on the ``l`` face, right ones on the
    ``r`` face, keyed by their labels.  Every word up to ``n_max`` is
    evaluated by extending shared suffixes, so each operator is applied
    once per word.
    """
    letters = {Letter("l", k): op for k, op in left_ops.items()}
    letters.update({Letter("r", k): op for k, op in right_ops.items()})
    for op in letters.values():
        _check_space(op, space)
    max_low = max((op.lowering for op in letters.values()), default=0)
    table = {(): 1 + 0j}
    # suffix -> parts of (suffix applied to Omega), pruned to what could
    # still return to the vacuum within n_max letters
    frontier = {(): space.vacuum().parts}
    for n in range(1, n_max + 1):
        nxt = {}
        for suffix, parts in frontier.items():
            for a, op in letters.items():
                out = op._act(parts, space)
                w = (a,) + suffix
                table[w] = complex(out[0]) if 0 in out else 0j
                if n < n_max:
                    nxt[w] = _prune(out, (n_max - n) * max_low)
        frontier = nxt
    return MomentFunctional(tuple(letters), n_max, table)


@dataclass
class Amplification:
    """Hatted data on ``H_N = H + ... + H`` (``N`` copies).

    ``f_hat[j] = (f_j + ... + f_j) / sqrt(N)`` and ``T_hat[j]`` is block
    diagonal.  ``f_slices[i][j]`` is the ``i``-th copy component of
    ``f_hat[j]`` (zero outside copy ``i``); ``T_slices[i][j]`` is ``T_j`` on
    copy ``i`` only.
    """

    N: int
    space: FockSpace
    f_hat: list
    g_hat: list
    T_hat: list
    f_slices: list
    g_slices: list
    T_slices: list


def amplify(f_list, g_list, T_list, N: int, depth: int) -> Amplification:
    if N < 1:
        raise ValueError("N must be positive")
    f_list = [_vec(f) for f in f_list]
    g_list = [_vec(g) for g in g_list]
    T_list = [_mat(T) for T in T_list]
    dims = {len(v) for v in f_list + g_list} | {T.shape[0] for T in T_list}
    if len(dims) != 1:
        raise ValueError(f"inconsistent dimensions {sorted(dims)}")
    d = dims.pop()
    space = FockSpace(N * d, depth,
                      {f"copy{i}": tuple(range(i * d, (i + 1) * d)) for i in range(N)})
    root = numpy.sqrt(N)

    def vslice(v, i):
        out = numpy.zeros(N * d, dtype=complex)
        out[i * d:(i + 1) * d] = v / root
        return out

    def mslice(T, i):
        E = numpy.zeros((N, N))
        E[i, i] = 1.0
        return numpy.kron(E, T)

    return Amplification(
        N=N,
        space=space,
        f_hat=[numpy.tile(f, N) / root for f in f_list],
        g_hat=[numpy.tile(g, N) / root for g in g_list],
        T_hat=[numpy.kron(numpy.eye(N), T) for T in T_list],
        f_slices=[[vslice(f, i) for f in f_list] for i in range(N)],
        g_slices=[[vslice(g, i) for g in g_list] for i in range(N)],
        T_slices=[[mslice(T, i) for T in T_list] for i in range(N)],
    )


def _pair_ops(f, g, T1, T2, lam1, lam2):
    left = LeftCreate(f) + LeftAnnihilate(f) + LeftGauge(T1)
    right = RightCreate(g) + RightAnnihilate(g) + RightGauge(T2)
    if lam1 != 0:
        left = left + Scalar(lam1)
    if lam2 != 0:
        right = right + Scalar(lam2)
    return left, right


@dataclass
class InfDivPair:
    """``a = (l(f) + l(f)* + Lambda_l(T1) + lam1, r(g) + r(g)* + Lambda_r(T2) + lam2)``."""

    f: numpy.ndarray
    g: numpy.ndarray
    T1: numpy.ndarray
    T2: numpy.ndarray
    lam1: float
    lam2: float
    space: FockSpace
    left: FockOp
    right: FockOp

    def moments(self, n_max: int, labels=("a_l", "a_r")) -> MomentFunctional:
        space = self.space if self.space.depth >= n_max else self.space.with_depth(n_max)
        return two_faced_moments({labels[0]: self.left}, {labels[1]: self.right}, n_max, space)

    def decompose(self, N: int, depth: int | None = None):
        """Split into ``N`` bi-free identically distributed summands.

        Returns ``(amplification, summands, total)`` where ``summands`` is a
        list of ``(left_i, right_i)`` supported on copy ``i`` of ``H_N``
        (each carrying ``lam / N``) and ``total`` is the pair of their sums.
        """
        amp = amplify([self.f, self.g], [], [self.T1, self.T2], N,
                      self.space.depth if depth is None else depth)
        summands = []
        for i in range(N):
            fi, gi = amp.f_slices[i]
            T1i, T2i = amp.T_slices[i]
            summands.append(_pair_ops(fi, gi, T1i, T2i, self.lam1 / N, self.lam2 / N))
        total = (Sum(s[0] for s in summands), Sum(s[1] for s in summands))
        return amp, summands, total


def _hermitian(T, name):
    T = _mat(T)
    if not numpy.allclose(T, T.conj().T, atol=1e-12, rtol=0):
        raise ValueError(f"{name} must be self-adjoint")
    return T


def infdiv_pair(f, g, T1, T2, lam1: float = 0.0, lam2: float = 0.0,
                depth: int = 8) -> InfDivPair:
    """The Fock-space pair with a bi-free infinitely divisible distribution."""
    f, g = _vec(f, "f"), _vec(g, "g")
    T1, T2 = _hermitian(T1, "T1"), _hermitian(T2, "T2")
    for lam in (lam1, lam2):
        if numpy.iscomplexobj(lam) and numpy.imag(lam) != 0:
            raise ValueError("shifts must be real")
    lam1, lam2 = float(numpy.real(lam1)), float(numpy.real(lam2))
    space = FockSpace(len(f), depth)
    left, right = _pair_ops(f, g, T1, T2, lam1, lam2)
    return InfDivPair(f, g, T1, T2, lam1, lam2, space, left, right)


def compressed_matrix(op: FockOp, space: FockSpace) -> numpy.ndarray:
    """Matrix of ``P op P`` with ``P`` the projection onto degrees ``<= depth``.

    Unlike :func:`apply`, creation out of the top degree is discarded here;
    this is the compression, not the operator.
    """
    _check_space(op, space)
    big = space.with_depth(space.depth + max(op.raising, 1))
    offsets, total = [], 0
    for k in range(space.depth + 1):
        offsets.append(total)
        total += space.dim_h ** k
    M = numpy.zeros((total, total), dtype=complex)
    col = 0
    for k in range(space.depth + 1):
        for seq in product(range(space.dim_h), repeat=k):
            out = op._act(big.basis_vector(seq).parts, big)
            for j, t in out.items():
                if j <= space.depth:
                    M[offsets[j]:offsets[j] + t.size, col] = t.reshape(-1)
            col += 1
    return M


def estimate_norm(op: FockOp, space: FockSpace) -> float:
    """Operator norm of the compression of ``op`` to the truncated space.

    A lower bound for the norm on the full Fock space, increasing in depth.
    """
    return float(numpy.linalg.norm(compressed_matrix(op, space), 2))
