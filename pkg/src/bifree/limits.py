"""Limit theorems for sums of bi-free identically distributed pairs.

A row of a triangular array is ``N`` bi-free copies of one two-faced
family whose distribution may depend on ``N`` through a power of ``N`` per
order.  Cumulants of the row sum are ``N`` times those of one element, so
everything here is table arithmetic followed by the moment transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .functionals import (
    CumulantFunctional,
    Letter,
    MomentFunctional,
    cumulants_to_moments,
    faces,
    moments_to_cumulants,
    scale,
    words_up_to,
)
from .partitions import enumerate_bnc

__all__ = [
    "NonzeroMeanError",
    "ArraySpec",
    "row_cumulants",
    "row_sum_moments",
    "ConvergenceReport",
    "limit_theorem_check",
    "GaussianSpec",
    "gaussian_moments",
    "CLTReport",
    "clt_check",
]


class NonzeroMeanError(ValueError):
    pass


@dataclass
class ArraySpec:
    """A triangular array given by one element's distribution.

    ``base`` is a cumulant table, or a moment table (``base_kind ==
    'moments'``).  At row size ``N`` every order-``n`` entry of ``base`` is
    multiplied by ``N ** order_scaling.get(n, 0)``.
    """

    base: CumulantFunctional | MomentFunctional
    row_sizes: Sequence[int]
    order_scaling: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        sizes = [int(n) for n in self.row_sizes]
        if not sizes or any(n < 1 for n in sizes):
            raise ValueError("row sizes must be positive")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("row sizes must be strictly increasing")
        self.row_sizes = sizes
        self.order_scaling = {int(k): float(v) for k, v in self.order_scaling.items()}

    @property
    def base_kind(self) -> str:
        return self.base.kind

    def element_cumulants(self, N: int) -> CumulantFunctional:
        """Cumulants of one element ``a_{N,1}`` of row ``N``."""
        factor = {n: float(N) ** e for n, e in self.order_scaling.items()}
        table = {w: v * factor.get(len(w), 1.0) for w, v in self.base.items() if w}
        if isinstance(self.base, MomentFunctional):
            return moments_to_cumulants(MomentFunctional(self.base.alphabet,
                                                         self.base.max_order, table))
        return CumulantFunctional(self.base.alphabet, self.base.max_order, table)


def row_cumulants(spec: ArraySpec, N: int) -> CumulantFunctional:
    if N not in spec.row_sizes:
        raise ValueError(f"N={N} is not one of the row sizes {spec.row_sizes}")
    return scale(spec.element_cumulants(N), N)


def row_sum_moments(spec: ArraySpec, N: int) -> MomentFunctional:
    """Moments of ``S_N = a_{N,1} + ... + a_{N,N}``."""
    return cumulants_to_moments(row_cumulants(spec, N))


@dataclass
class ConvergenceReport:
    row_sizes: list
    errors: list
    worst_words: list
    tol: float
    monotone: bool
    passed: bool

    def as_dict(self) -> dict:
        return {
            "row_sizes": self.row_sizes,
            "errors": self.errors,
            "worst_words": self.worst_words,
            "tol": self.tol,
            "monotone": self.monotone,
            "passed": self.passed,
        }


def _label(w):
    return " ".join(a.label for a in w)


def limit_theorem_check(spec: ArraySpec, predicted: CumulantFunctional,
                        orders: Sequence[int] | None = None,
                        tol: float = 1e-9) -> ConvergenceReport:
    """Compare ``N * phi(a_{N,1} word)`` with the predicted limit cumulants.

    Passes when the worst error over the chosen orders does not increase
    along at least three row sizes and ends at or below ``tol``.
    """
    if orders is None:
        orders = range(1, predicted.max_order + 1)
    orders = sorted(set(orders))
    words = [w for w in words_up_to(predicted.alphabet, max(orders), 1) if len(w) in orders]
    errors, worst = [], []
    for N in spec.row_sizes:
        mf = cumulants_to_moments(spec.element_cumulants(N))
        err, ww = 0.0, None
        for w in words:
            e = abs(N * mf(w) - predicted(w))
            if ww is None or e > err:
                err, ww = e, w
        errors.append(err)
        worst.append(_label(ww))
    monotone = all(b <= a + tol for a, b in zip(errors, errors[1:]))
    passed = len(errors) >= 3 and monotone and errors[-1] <= tol
    return ConvergenceReport(list(spec.row_sizes), errors, worst, tol, monotone, passed)


@dataclass
class GaussianSpec:
    """Centered bi-free Gaussian: only order-2 cumulants, keyed by label pairs.

    A pair given in one order only gets the conjugate value in the other.
    """

    alphabet: tuple
    covariance: dict

    def __init__(self, alphabet: Sequence[Letter], covariance: Mapping[tuple, complex]):
        self.alphabet = tuple(alphabet)
        labels = {a.label for a in self.alphabet}
        cov = {}
        for (a, b), v in covariance.items():
            if a not in labels or b not in labels:
                raise ValueError(f"unknown label in covariance key {(a, b)}")
            cov[(a, b)] = complex(v)
        for (a, b), v in list(cov.items()):
            back = cov.setdefault((b, a), v.conjugate())
            if abs(back - v.conjugate()) > 1e-12:
                raise ValueError(f"covariance of {(a, b)} and {(b, a)} are not conjugate")
        self.covariance = cov

    def __call__(self, a: Letter, b: Letter) -> complex:
        return self.covariance.get((a.label, b.label), 0j)

    def to_cumulants(self, max_order: int) -> CumulantFunctional:
        table = {(a, b): self(a, b) for a in self.alphabet for b in self.alphabet}
        return CumulantFunctional(self.alphabet, max_order, table)


def gaussian_moments(g: GaussianSpec, w: Sequence[Letter]) -> complex:
    """Sum over bi-non-crossing pairings of the word of covariance products."""
    w = tuple(w)
    if not w:
        return 1 + 0j
    if len(w) % 2:
        return 0j
    total = 0j
    for p in enumerate_bnc(faces(w)):
        if any(len(b) != 2 for b in p.blocks):
            continue
        term = 1 + 0j
        for i, j in p.blocks:
            term *= g(w[i - 1], w[j - 1])
        total += term
    return total


@dataclass
class CLTReport:
    row_sizes: list
    order2_drift: float
    deviations: dict
    rates: dict
    rate_factor: float
    rate_ok: bool
    limit_error: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "row_sizes": self.row_sizes,
            "order2_drift": self.order2_drift,
            "deviations": {str(N): {str(n): v for n, v in d.items()}
                           for N, d in self.deviations.items()},
            "rates": {str(n): v for n, v in self.rates.items()},
            "rate_factor": self.rate_factor,
            "rate_ok": self.rate_ok,
            "limit_error": self.limit_error,
            "tol": self.tol,
            "passed": self.passed,
        }


def clt_check(base: CumulantFunctional, row_sizes: Sequence[int] = (4, 16, 64),
              orders: Sequence[int] | None = None, rate_orders: Sequence[int] = (3, 4),
              tol: float = 1e-9, rate_factor: float = 1.6) -> CLTReport:
    """Central limit check for ``S_N = (z_1 + ... + z_N) / sqrt(N)``.

    ``base`` holds the cumulants of one centered summand.  Reports the drift
    of the order-2 cumulants across ``N``, the worst moment deviation from
    the Gaussian limit per order and ``N``, and for each of ``rate_orders``
    the ratio ``observed / predicted`` of consecutive deviations, where the
    predicted decay is ``N ** (1 - n/2)``.
    """
    worst_mean = max(abs(base((a,))) for a in base.alphabet)
    if worst_mean > tol:
        raise NonzeroMeanError(f"summands must be centered, found mean {worst_mean:.3e}")
    if orders is None:
        orders = range(1, base.max_order + 1)
    orders = sorted(set(orders))
    spec = ArraySpec(base, row_sizes, {n: -n / 2 for n in range(1, base.max_order + 1)})

    cov = {(a.label, b.label): base((a, b)) for a in base.alphabet for b in base.alphabet}
    g = GaussianSpec(base.alphabet, cov)
    words = [w for w in words_up_to(base.alphabet, max(orders), 1) if len(w) in orders]
    limit = {w: gaussian_moments(g, w) for w in words}

    drift, deviations = 0.0, {}
    for N in spec.row_sizes:
        cf = row_cumulants(spec, N)
        drift = max([drift] + [abs(cf(w) - base(w)) for w in words if len(w) == 2])
        mf = cumulants_to_moments(cf)
        dev = {n: 0.0 for n in orders}
        for w in words:
            dev[len(w)] = max(dev[len(w)], abs(mf(w) - limit[w]))
        deviations[N] = dev

    rates, rate_ok = {}, True
    for n in rate_orders:
        if n not in orders or deviations[spec.row_sizes[0]][n] <= tol:
            continue
        ratios = []
        for N0, N1 in zip(spec.row_sizes, spec.row_sizes[1:]):
            observed = deviations[N0][n] / deviations[N1][n]
            predicted = (N1 / N0) ** (n / 2 - 1)
            ratios.append(observed / predicted)
        rates[n] = ratios
        rate_ok = rate_ok and all(1 / rate_factor <= q <= rate_factor for q in ratios)

    # the limit through the transform agrees with the pairing sum
    gm = cumulants_to_moments(g.to_cumulants(base.max_order))
    limit_error = max((abs(gm(w) - limit[w]) for w in words), default=0.0)
    passed = drift <= tol and rate_ok and limit_error <= tol
    return CLTReport(list(spec.row_sizes), drift, deviations, rates, rate_factor, rate_ok,
                     limit_error, tol, passed)
