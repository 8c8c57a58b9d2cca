"""Walk through bi-non-crossing partitions and the moment/cumulant transforms.

Run with ``python3 demos/partitions_and_transforms.py``.
"""

import numpy

from bifree import (
    Letter,
    MomentFunctional,
    cumulants_to_moments,
    enumerate_bnc,
    enumerate_noncrossing,
    moments_to_cumulants,
)
from bifree.functionals import words_up_to


def main():
    # Every face pattern gives as many bi-non-crossing partitions as NC(n).
    for chi in ("llll", "lrlr", "rrll"):
        print(f"{chi}: {len(enumerate_bnc(chi))} partitions, |NC(4)| = {len(enumerate_noncrossing(4))}")

    # A random two-faced moment table survives the round trip through cumulants.
    rng = numpy.random.default_rng(0)
    alphabet = (Letter("l", "a"), Letter("r", "b"))
    table = {w: complex(*rng.uniform(-1, 1, 2)) for w in words_up_to(alphabet, 5, 1)}
    mf = MomentFunctional(alphabet, 5, table)
    cf = moments_to_cumulants(mf)
    back = cumulants_to_moments(cf)
    print(f"round-trip error at order 5: {back.max_abs_diff(mf):.2e}")


if __name__ == "__main__":
    main()
