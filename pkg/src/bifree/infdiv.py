"""Infinite divisibility of a two-faced pair, read off its cumulants.

A *pair cumulant table* is a :class:`CumulantFunctional` over exactly two
letters, one per face.  Words over it are identified with face patterns
(``'lrl'`` etc.).

The positivity test uses the Gram form indexed by nonempty patterns,
whose ``(n, m)`` entry is the cumulant of ``chi_n`` followed by ``chi_m``
reversed.  When that form is positive semidefinite, the pair is realized
on the full Fock space over the completed word space (quotiented by the
kernel), with right multiplication by ``X_l``, ``X_r`` as gauge data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy

from .fock import (
    FockSpace,
    LeftAnnihilate,
    LeftCreate,
    LeftGauge,
    RightAnnihilate,
    RightCreate,
    RightGauge,
    Scalar,
    two_faced_moments,
)
from .functionals import (
    CumulantFunctional,
    Letter,
    MomentFunctional,
    TruncationError,
    bifreeness_test,
    moments_to_cumulants,
    scale,
)

__all__ = [
    "NotConditionallyPositiveError",
    "pair_letters",
    "pair_word",
    "pair_cumulants",
    "chi_words",
    "concat_chi",
    "GramForm",
    "gram_matrix",
    "InfDivReport",
    "check_cnd",
    "CBoundResult",
    "check_cbound",
    "Reconstruction",
    "reconstruct",
    "infdiv_report",
    "levy_marginal",
    "LevyGridProcess",
    "LevyReport",
    "levy_realize",
]

# right face gauge is Lambda_r(X_r), mirroring the left face
RIGHT_GAUGE_CONVENTION = "Lambda_r(X_r)"


class NotConditionallyPositiveError(ValueError):
    def __init__(self, report: "InfDivReport"):
        super().__init__(f"Gram form not positive: min eigenvalue {report.min_eigenvalue:.3e}")
        self.report = report


def pair_letters(pc: CumulantFunctional) -> tuple[Letter, Letter]:
    """The (left, right) letters of a pair table."""
    left = [a for a in pc.alphabet if a.face == "l"]
    right = [a for a in pc.alphabet if a.face == "r"]
    if len(left) != 1 or len(right) != 1 or len(pc.alphabet) != 2:
        raise ValueError("a pair table needs exactly one left and one right letter")
    return left[0], right[0]


def pair_word(pc: CumulantFunctional, chi: str) -> tuple:
    left, right = pair_letters(pc)
    return tuple(left if c == "l" else right for c in chi)


def pair_cumulants(table: dict[str, complex], max_order: int,
                   labels=("X_l", "X_r")) -> CumulantFunctional:
    """Pair table from a ``pattern -> value`` dict; missing patterns are zero."""
    alphabet = (Letter("l", labels[0]), Letter("r", labels[1]))
    conv = {"l": alphabet[0], "r": alphabet[1]}
    return CumulantFunctional(alphabet, max_order,
                              {tuple(conv[c] for c in chi): v for chi, v in table.items()})


def chi_words(cap: int) -> list[str]:
    """Nonempty patterns of length ``<= cap``, shortest first, ``l < r``."""
    return ["".join(p) for n in range(1, cap + 1) for p in product("lr", repeat=n)]


def concat_chi(chi_n: str, chi_m: str) -> str:
    """First pattern verbatim, then the second one reversed."""
    if not chi_n or not chi_m:
        raise ValueError("both patterns must be nonempty")
    return chi_n + chi_m[::-1]


@dataclass
class GramForm:
    words: list[str]
    matrix: numpy.ndarray

    def hermitian_defect(self) -> float:
        return float(numpy.abs(self.matrix - self.matrix.conj().T).max(initial=0.0))


def _form(pc, words, pattern):
    n = len(words)
    M = numpy.zeros((n, n), dtype=complex)
    for i, a in enumerate(words):
        for j, b in enumerate(words):
            M[i, j] = pc(pair_word(pc, pattern(a, b)))
    return M


def gram_matrix(pc: CumulantFunctional, length_cap: int) -> GramForm:
    """Gram form over all nonempty patterns of length ``<= length_cap``."""
    if 2 * length_cap > pc.max_order:
        raise TruncationError(f"cap {length_cap} needs cumulants up to order "
                              f"{2 * length_cap}, table has {pc.max_order}")
    words = chi_words(length_cap)
    return GramForm(words, _form(pc, words, concat_chi))


def _herm(M):
    return (M + M.conj().T) / 2


@dataclass
class InfDivReport:
    """Outcome of the infinite-divisibility checks on a pair table."""

    min_eigenvalue: float
    psd: bool
    tol: float
    length_cap: int
    bound_L: dict | None = None
    reconstruction_error: float | None = None
    witness: dict | None = None
    levy: "LevyReport | None" = None

    @property
    def passed(self) -> bool:
        ok = self.psd
        if self.bound_L is not None:
            ok = ok and all(v is not None for v in self.bound_L.values())
        return ok

    def as_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "psd": self.psd,
            "tol": self.tol,
            "length_cap": self.length_cap,
            "bound_L": self.bound_L,
            "reconstruction_error": self.reconstruction_error,
            "witness": self.witness,
            "levy": None if self.levy is None else self.levy.as_dict(),
            "right_gauge_convention": RIGHT_GAUGE_CONVENTION,
        }


def _cnd_witness(form: GramForm, evals, evecs) -> dict:
    diag = numpy.real(numpy.diag(form.matrix))
    k = int(numpy.argmin(diag))
    v = evecs[:, 0]
    top = numpy.argsort(-numpy.abs(v))[:4]
    out = {
        "eigenvalue": float(evals[0]),
        "eigenvector": {form.words[i]: [float(v[i].real), float(v[i].imag)]
                        for i in top if abs(v[i]) > 1e-12},
    }
    if diag[k] < 0:
        w = form.words[k]
        out["minor_1x1"] = {"word": w, "pattern": concat_chi(w, w), "value": float(diag[k])}
    return out


def check_cnd(pc: CumulantFunctional, length_cap: int, tol: float = 1e-9) -> InfDivReport:
    """Conditional nonnegative-definiteness of the cumulant Gram form."""
    form = gram_matrix(pc, length_cap)
    evals, evecs = numpy.linalg.eigh(_herm(form.matrix))
    min_eig = float(evals[0])
    psd = min_eig >= -tol
    witness = None if psd else _cnd_witness(form, evals, evecs)
    return InfDivReport(min_eig, psd, tol, length_cap, witness=witness)


@dataclass
class CBoundResult:
    """Smallest ``L`` with ``G_face <= L G`` on the truncated word space.

    ``L`` is ``None`` when ``G_face`` does not vanish on the kernel of ``G``
    (``leak`` measures by how much).
    """

    face: str
    bounded: bool
    L: float | None
    leak: float
    rank: int


def check_cbound(pc: CumulantFunctional, face: str, length_cap: int,
                 tol: float = 1e-9) -> CBoundResult:
    """Conditional boundedness for one face, as a generalized eigenproblem.

    ``G_face[n, m]`` is the cumulant of ``chi_n + face + face + reversed(chi_m)``.
    Both forms are compressed to the range of ``G``; the kernel is handled
    explicitly rather than through a pseudo-inverse.
    """
    if face not in ("l", "r"):
        raise ValueError("face must be 'l' or 'r'")
    if 2 * length_cap + 2 > pc.max_order:
        raise TruncationError(f"cap {length_cap} needs cumulants up to order "
                              f"{2 * length_cap + 2}, table has {pc.max_order}")
    words = chi_words(length_cap)
    G = _herm(_form(pc, words, concat_chi))
    G_face = _herm(_form(pc, words, lambda a, b: concat_chi(a + face, b + face)))
    evals, U = numpy.linalg.eigh(G)
    keep = evals > tol * max(1.0, float(numpy.abs(evals).max(initial=0.0)))
    R, K = U[:, keep], U[:, ~keep]
    leak = float(numpy.linalg.norm(G_face @ K, 2)) if K.shape[1] else 0.0
    if leak > tol * max(1.0, float(numpy.linalg.norm(G_face, 2))):
        return CBoundResult(face, False, None, leak, int(keep.sum()))
    if not keep.any():
        return CBoundResult(face, True, 0.0, leak, 0)
    w = 1.0 / numpy.sqrt(evals[keep])
    B = (R.conj().T @ G_face @ R) * numpy.outer(w, w)
    L = float(numpy.linalg.eigvalsh(_herm(B))[-1])
    return CBoundResult(face, True, max(L, 0.0), leak, int(keep.sum()))


@dataclass
class Reconstruction:
    """Fock realization of a pair table.

    ``vectors[face]`` is the class of ``X_face`` in the quotient word space
    ``C^dim`` and ``gauges[face]`` the matrix of right multiplication by
    ``X_face`` (exact on classes of words shorter than ``length_cap``).
    """

    dim: int
    length_cap: int
    words: list[str]
    coords: numpy.ndarray
    vectors: dict
    gauges: dict
    means: dict
    labels: tuple[str, str]
    space: FockSpace
    left: object
    right: object
    verify_order: int
    multiplication_residual: float
    cumulants: CumulantFunctional | None = None
    reconstruction_error: float | None = None
    convention: str = RIGHT_GAUGE_CONVENTION

    def moments(self, n_max: int | None = None) -> MomentFunctional:
        n_max = self.verify_order if n_max is None else n_max
        space = self.space if self.space.depth >= n_max else self.space.with_depth(n_max)
        return two_faced_moments({self.labels[0]: self.left}, {self.labels[1]: self.right},
                                 n_max, space)


def _word_space(pc, cap, kernel_tol):
    """Coordinates of word classes: rows ``v_w`` with ``<v_w, v_u> = <X_w, X_u>``."""
    form = gram_matrix(pc, cap)
    # <X_n, X_m> = kappa(chi_m, reversed chi_n) = G[m, n]
    M = _herm(form.matrix.T)
    evals, U = numpy.linalg.eigh(M)
    keep = evals > kernel_tol * max(1.0, float(numpy.abs(evals).max(initial=0.0)))
    V = U[:, keep] * numpy.sqrt(evals[keep])
    return form.words, V


def reconstruct(pc: CumulantFunctional, verify_order: int, kernel_tol: float = 1e-10,
                cnd_tol: float = 1e-9) -> Reconstruction:
    """Realize the pair table on a Fock space and recheck its cumulants.

    The word space is built from patterns of length ``verify_order - 1``,
    which needs cumulants up to order ``2 * (verify_order - 1)``.  The
    realized pair reproduces every cumulant up to ``verify_order`` exactly
    in exact arithmetic; ``reconstruction_error`` is the observed maximum
    deviation.
    """
    if verify_order < 2:
        raise ValueError("verify_order must be at least 2")
    cap = verify_order - 1
    report = check_cnd(pc, cap, cnd_tol)
    if not report.psd:
        raise NotConditionallyPositiveError(report)
    left, right = pair_letters(pc)
    words, V = _word_space(pc, cap, kernel_tol)
    index = {w: i for i, w in enumerate(words)}
    dim = V.shape[1]

    vectors, gauges, residual = {}, {}, 0.0
    for face in "lr":
        vectors[face] = V[index[face]].copy()
        domain = [w for w in words if len(w) < cap]
        if not domain or dim == 0:
            gauges[face] = numpy.zeros((dim, dim), dtype=complex)
            continue
        src = V[[index[w] for w in domain]].T
        dst = V[[index[w + face] for w in domain]].T
        A = dst @ numpy.linalg.pinv(src, rcond=kernel_tol)
        residual = max(residual, float(numpy.abs(A @ src - dst).max()))
        gauges[face] = A

    means = {"l": pc((left,)), "r": pc((right,))}
    b_l = LeftCreate(vectors["l"]) + LeftAnnihilate(vectors["l"]) + LeftGauge(gauges["l"])
    b_r = RightCreate(vectors["r"]) + RightAnnihilate(vectors["r"]) + RightGauge(gauges["r"])
    if means["l"] != 0:
        b_l = b_l + Scalar(means["l"])
    if means["r"] != 0:
        b_r = b_r + Scalar(means["r"])
    space = FockSpace(dim, verify_order)
    rec = Reconstruction(dim, cap, words, V, vectors, gauges, means,
                         (left.label, right.label), space, b_l, b_r, verify_order, residual)
    rec.cumulants = moments_to_cumulants(rec.moments())
    rec.reconstruction_error = max(
        (abs(v - pc(w)) for w, v in rec.cumulants.items()), default=0.0)
    return rec


def levy_marginal(pc: CumulantFunctional, t: float) -> CumulantFunctional:
    """Cumulants of the process at time ``t``: ``t`` times those of the pair."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    return scale(pc, t)


class LevyGridProcess:
    """The Levy process of a reconstructed pair, sampled on a time grid.

    The one-particle space is ``C^cells (x) C^dim``; cell ``i`` stands for the
    indicator of ``[grid[i], grid[i+1])``, normalized, so its squared length
    enters through ``sqrt(grid[i+1] - grid[i])``.
    """

    def __init__(self, rec: Reconstruction, grid, depth: int | None = None):
        grid = [float(t) for t in grid]
        if len(grid) < 2 or grid[0] != 0.0:
            raise ValueError("grid must start at 0 and have at least two points")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        self.rec = rec
        self.grid = grid
        self.cells = len(grid) - 1
        d = rec.dim
        self.space = FockSpace(self.cells * d, depth or rec.verify_order,
                               {f"cell{i}": tuple(range(i * d, (i + 1) * d))
                                for i in range(self.cells)})

    def _cells(self, s, t):
        try:
            i, j = self.grid.index(float(s)), self.grid.index(float(t))
        except ValueError:
            raise ValueError(f"({s}, {t}) are not grid points") from None
        if j <= i:
            raise ValueError("need s < t")
        return range(i, j)

    def increment(self, s: float, t: float):
        """``(left, right)`` operators of ``b_t - b_s`` for grid points ``s < t``."""
        cells = self._cells(s, t)
        ind = numpy.zeros(self.cells)
        amp = numpy.zeros(self.cells)
        for i in cells:
            ind[i] = 1.0
            amp[i] = numpy.sqrt(self.grid[i + 1] - self.grid[i])
        rec, length = self.rec, float(t) - float(s)
        xl = numpy.kron(amp, rec.vectors["l"])
        xr = numpy.kron(amp, rec.vectors["r"])
        Al = numpy.kron(numpy.diag(ind), rec.gauges["l"])
        Ar = numpy.kron(numpy.diag(ind), rec.gauges["r"])
        left = LeftCreate(xl) + LeftAnnihilate(xl) + LeftGauge(Al)
        right = RightCreate(xr) + RightAnnihilate(xr) + RightGauge(Ar)
        if rec.means["l"] != 0:
            left = left + Scalar(length * rec.means["l"])
        if rec.means["r"] != 0:
            right = right + Scalar(length * rec.means["r"])
        return left, right

    def marginal(self, t: float):
        return self.increment(0.0, t)

    def cumulants(self, s: float, t: float, n_max: int | None = None) -> CumulantFunctional:
        n_max = n_max or self.rec.verify_order
        left, right = self.increment(s, t)
        space = self.space if self.space.depth >= n_max else self.space.with_depth(n_max)
        mf = two_faced_moments({self.rec.labels[0]: left}, {self.rec.labels[1]: right},
                               n_max, space)
        return moments_to_cumulants(mf)

    def joint_increment_moments(self, n_max: int) -> tuple[MomentFunctional, dict]:
        """Moments of all cell increments together, plus a label -> cell grouping."""
        lefts, rights, grouping = {}, {}, {}
        for i in range(self.cells):
            left, right = self.increment(self.grid[i], self.grid[i + 1])
            ll, rl = f"{self.rec.labels[0]}@{i}", f"{self.rec.labels[1]}@{i}"
            lefts[ll], rights[rl] = left, right
            grouping[ll] = grouping[rl] = i
        space = self.space if self.space.depth >= n_max else self.space.with_depth(n_max)
        return two_faced_moments(lefts, rights, n_max, space), grouping


@dataclass
class LevyReport:
    grid: list
    increment_errors: list
    bifree: object
    sample_times: list
    marginal_sup: list
    marginal_errors: list
    monotone: bool
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (max(self.increment_errors, default=0.0) <= self.tol
                       and self.bifree.passed and self.monotone
                       and max(self.marginal_errors, default=0.0) <= self.tol)

    def as_dict(self) -> dict:
        return {
            "grid": self.grid,
            "increment_errors": self.increment_errors,
            "bifree": self.bifree.as_dict(),
            "sample_times": self.sample_times,
            "marginal_sup": self.marginal_sup,
            "marginal_errors": self.marginal_errors,
            "monotone": self.monotone,
            "tol": self.tol,
            "passed": self.passed,
        }


def _table_error(cf: CumulantFunctional, target: CumulantFunctional) -> float:
    return max((abs(v - target(w)) for w, v in cf.items()), default=0.0)


def levy_realize(pc: CumulantFunctional, grid, verify_order: int = 5, bifree_order: int = 4,
                 tol: float = 1e-9, sample_times=(1.0, 0.5, 0.25, 0.125),
                 rec: Reconstruction | None = None) -> LevyReport:
    """Build the process on ``grid`` and check its defining properties.

    Reports (i) the deviation of each cell increment's cumulants from
    ``length * pc``, (ii) a bi-freeness test on the cell increments, and
    (iii) the size of the marginal cumulants at ``sample_times``, which must
    shrink monotonically with ``t`` and match ``t * pc``.
    """
    if rec is None:
        rec = reconstruct(pc, verify_order)
    proc = LevyGridProcess(rec, grid)
    errors = []
    for a, b in zip(proc.grid, proc.grid[1:]):
        errors.append(_table_error(proc.cumulants(a, b), levy_marginal(_trunc(pc, rec.verify_order), b - a)))
    joint, grouping = proc.joint_increment_moments(bifree_order)
    bifree = bifreeness_test(joint, grouping, bifree_order, tol)

    sups, merrs = [], []
    for t in sample_times:
        single = LevyGridProcess(rec, [0.0, t])
        cf = single.cumulants(0.0, t)
        sups.append(max((abs(v) for v in cf._table.values()), default=0.0))
        merrs.append(_table_error(cf, levy_marginal(_trunc(pc, rec.verify_order), t)))
    order = numpy.argsort(sample_times)[::-1]
    ordered = [sups[i] for i in order]
    monotone = all(b < a for a, b in zip(ordered, ordered[1:])) or all(s == 0 for s in sups)
    return LevyReport(proc.grid, errors, bifree, list(sample_times), sups, merrs, monotone, tol)


def _trunc(pc: CumulantFunctional, n: int) -> CumulantFunctional:
    if n >= pc.max_order:
        return pc
    return CumulantFunctional(pc.alphabet, n, {w: v for w, v in pc.items() if len(w) <= n})


def infdiv_report(pc: CumulantFunctional, tol: float = 1e-9, match_tol: float = 1e-8,
                  length_cap: int | None = None) -> InfDivReport:
    """Run positivity, boundedness and reconstruction at the largest caps the table allows."""
    cap = pc.max_order // 2 if length_cap is None else length_cap
    report = check_cnd(pc, cap, tol)
    if not report.psd:
        return report
    bcap = (pc.max_order - 2) // 2
    if bcap >= 1:
        report.bound_L = {}
        for face in "lr":
            res = check_cbound(pc, face, bcap, tol)
            report.bound_L[face] = res.L
            if not res.bounded:
                report.witness = {"face": face, "kernel_leak": res.leak}
    verify = min(cap + 1, pc.max_order)
    if verify >= 2:
        rec = reconstruct(pc, verify, cnd_tol=tol)
        report.reconstruction_error = rec.reconstruction_error
    return report
