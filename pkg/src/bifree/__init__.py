"""Bi-free probability with two-faced families: partitions, moment/cumulant
transforms, Fock-space models, infinite divisibility and limit theorems."""

from .partitions import (
    SetPartition,
    Permutation,
    chi_permutation,
    enumerate_bnc,
    enumerate_noncrossing,
    enumerate_set_partitions,
    is_bnc,
    is_noncrossing,
    mobius_to_top,
    refines,
    transport_partition,
)
from .functionals import (
    CumulantFunctional,
    Letter,
    MomentFunctional,
    bifreeness_test,
    convolve,
    cumulant,
    cumulants_to_moments,
    moment_from_cumulants,
    moments_to_cumulants,
    scale,
)
from .fock import FockSpace, FockVector, infdiv_pair, two_faced_moments, vacuum_expectation
from .infdiv import (
    check_cbound,
    check_cnd,
    concat_chi,
    gram_matrix,
    levy_marginal,
    levy_realize,
    pair_cumulants,
    reconstruct,
)
from .limits import ArraySpec, GaussianSpec, clt_check, gaussian_moments, limit_theorem_check, row_sum_moments

__version__ = "0.1.0"
