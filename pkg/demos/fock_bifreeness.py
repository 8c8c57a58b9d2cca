"""Operators on orthogonal summands of one Fock space are bi-free.

Two pairs of faces are built from vectors and matrices supported on
different halves of C^4; every mixed cumulant then vanishes.
"""

import numpy

from bifree import FockSpace, bifreeness_test, two_faced_moments
from bifree.fock import adjoint, gauge_l, gauge_r, l, r


def supported(rng, idx, dim=4):
    v = numpy.zeros(dim)
    v[list(idx)] = rng.normal(size=len(idx))
    T = numpy.zeros((dim, dim))
    T[numpy.ix_(idx, idx)] = rng.normal(size=(len(idx), len(idx)))
    return v, T + T.T


def main():
    rng = numpy.random.default_rng(1)
    space = FockSpace(4, 4)
    f1, T1 = supported(rng, (0, 1))
    f2, T2 = supported(rng, (2, 3))
    left = {"a1": l(f1) + adjoint(l(f1)) + gauge_l(T1), "a2": l(f2) + adjoint(l(f2))}
    right = {"b1": r(f1) + adjoint(r(f1)) + gauge_r(T1), "b2": r(f2) + adjoint(r(f2)) + 0.5}
    mf = two_faced_moments(left, right, 4, space)
    rep = bifreeness_test(mf, {"a1": 1, "b1": 1, "a2": 2, "b2": 2}, 4)
    print(f"checked {rep.checked} mixed words, largest cumulant {rep.max_abs:.1e}, passed={rep.passed}")


if __name__ == "__main__":
    main()
