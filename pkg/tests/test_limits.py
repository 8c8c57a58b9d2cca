import numpy
import pytest
from hypothesis import given, strategies as st

from bifree.fock import FockSpace, amplify, gauge_l, gauge_r, l, r, adjoint, two_faced_moments
from bifree.functionals import (
    CumulantFunctional,
    Letter,
    MomentFunctional,
    cumulants_to_moments,
    moments_to_cumulants,
    words_up_to,
)
from bifree.limits import (
    ArraySpec,
    GaussianSpec,
    NonzeroMeanError,
    clt_check,
    gaussian_moments,
    limit_theorem_check,
    row_cumulants,
    row_sum_moments,
)
from oracles import hermitian, random_complex

ZL, ZR = Letter("l", "z_l"), Letter("r", "z_r")


def centered_base(c=0.3, k3=0.7, k4=0.9, order=6):
    return CumulantFunctional((ZL, ZR), order, {
        (ZL, ZL): 1, (ZR, ZR): 1, (ZL, ZR): c, (ZR, ZL): c,
        (ZL, ZL, ZL): k3, (ZL, ZR, ZR): -0.4, (ZL, ZL, ZR, ZR): k4, (ZR, ZR, ZR, ZR): 1.0,
    })


def clt_spec(base, sizes=(4, 16, 64)):
    return ArraySpec(base, sizes, {n: -n / 2 for n in range(1, base.max_order + 1)})


# ---- array specs and row sums ----

def test_array_spec_validation():
    base = centered_base()
    with pytest.raises(ValueError):
        ArraySpec(base, [4, 4])
    with pytest.raises(ValueError):
        ArraySpec(base, [0, 1])
    with pytest.raises(ValueError):
        row_sum_moments(ArraySpec(base, [1, 2]), 3)


def test_row_sum_examples():
    base = centered_base()
    spec = ArraySpec(base, [1, 2])
    assert row_sum_moments(spec, 1).max_abs_diff(cumulants_to_moments(base)) <= 1e-15
    s = Letter("l", "s")
    per_element = ArraySpec(CumulantFunctional((s,), 2, {(s, s): 1}), [1, 4], {2: -1})
    assert abs(row_sum_moments(per_element, 4)((s, s)) - 1) < 1e-15


@pytest.mark.parametrize("N", [2, 3])
def test_row_sum_matches_fock_copies(rng, N):
    d = 2
    f, g = random_complex(rng, d), random_complex(rng, d)
    T1, T2 = hermitian(rng, d), hermitian(rng, d)
    one = FockSpace(d, 5)
    elem_l = l(f) + adjoint(l(f)) + gauge_l(T1) + 0.3
    elem_r = r(g) + adjoint(r(g)) + gauge_r(T2) - 0.2
    base = moments_to_cumulants(two_faced_moments({"a": elem_l}, {"b": elem_r}, 5, one))
    # N copies on orthogonal summands, each with the element's own distribution
    amp = amplify([f, g], [], [T1, T2], N, 5)
    root = numpy.sqrt(N)
    sum_l = sum_r = 0
    for i in range(N):
        fi, gi = (v * root for v in amp.f_slices[i])
        T1i, T2i = amp.T_slices[i]
        sum_l = sum_l + l(fi) + adjoint(l(fi)) + gauge_l(T1i) + 0.3
        sum_r = sum_r + r(gi) + adjoint(r(gi)) + gauge_r(T2i) - 0.2
    fock = two_faced_moments({"a": sum_l}, {"b": sum_r}, 5, amp.space)
    assert row_sum_moments(ArraySpec(base, [N]), N).max_abs_diff(fock) <= 1e-9


# ---- convergence harness ----

def test_clt_embedding_order_three_rate():
    base = centered_base()
    spec = clt_spec(base, (4, 16, 64, 256))
    predicted = CumulantFunctional(base.alphabet, 3,
                                   {w: v for w, v in base.items() if len(w) == 2})
    rep = limit_theorem_check(spec, predicted, orders=[3], tol=0.05)
    # N * N^{-3/2} = N^{-1/2}: a factor 2 per step of 4 in N
    ratios = [a / b for a, b in zip(rep.errors, rep.errors[1:])]
    assert ratios == pytest.approx([2, 2, 2])
    assert rep.monotone and rep.passed
    assert not limit_theorem_check(spec, predicted, orders=[3], tol=1e-9).passed


def test_exact_prediction_gives_zero_error():
    base = MomentFunctional((ZL, ZR), 3, {w: 0.25 * len(w) for w in words_up_to((ZL, ZR), 3, 1)})
    spec = ArraySpec(base, [2, 5, 9], {n: -1 for n in range(1, 4)})
    predicted = CumulantFunctional(base.alphabet, 3, {w: v for w, v in base.items() if w})
    rep = limit_theorem_check(spec, predicted)
    assert rep.passed and max(rep.errors) <= 1e-12


def test_poisson_type_limit():
    lam = 1.7
    base = MomentFunctional((ZL, ZR), 4, {w: lam for w in words_up_to((ZL, ZR), 4, 1)})
    spec = ArraySpec(base, [10, 100, 1000], {n: -1 for n in range(1, 5)})
    predicted = CumulantFunctional(base.alphabet, 4, {w: lam for w in words_up_to((ZL, ZR), 4, 1)})
    rep = limit_theorem_check(spec, predicted, tol=1e-9)
    assert rep.passed
    # the array's element cumulants themselves converge to lam / N
    elem = spec.element_cumulants(1000)
    assert abs(1000 * elem((ZL, ZR, ZR)) - lam) < 0.05


def test_two_sizes_never_pass():
    base = centered_base()
    predicted = CumulantFunctional(base.alphabet, 2, {w: v for w, v in base.items() if len(w) == 2})
    assert not limit_theorem_check(clt_spec(base, (4, 16)), predicted, orders=[2]).passed


# ---- Gaussians ----

def test_gaussian_examples():
    c = 0.3
    g = GaussianSpec((ZL, ZR), {("z_l", "z_l"): 1, ("z_r", "z_r"): 1, ("z_l", "z_r"): c})
    assert gaussian_moments(g, (ZL, ZR, ZL)) == 0
    assert gaussian_moments(g, (ZL, ZR)) == c
    assert gaussian_moments(g, (ZR, ZL)) == c
    assert abs(gaussian_moments(g, (ZL, ZL, ZR, ZR)) - (1 + c ** 2)) < 1e-15
    assert gaussian_moments(g, ()) == 1


def test_gaussian_covariance_validation():
    with pytest.raises(ValueError):
        GaussianSpec((ZL, ZR), {("z_l", "z_r"): 1j, ("z_r", "z_l"): 1j})
    with pytest.raises(ValueError):
        GaussianSpec((ZL,), {("z_l", "q"): 1})


@given(st.integers(0, 2 ** 32 - 1))
def test_gaussian_pairings_match_transform(seed):
    rng = numpy.random.default_rng(seed)
    a, b = Letter("l", "a"), Letter("l", "b")
    alphabet = (a, b, ZR)
    labels = [x.label for x in alphabet]
    cov = {}
    for i, x in enumerate(labels):
        for y in labels[i:]:
            cov[(x, y)] = complex(rng.normal()) if x == y else complex(*rng.normal(size=2))
    g = GaussianSpec(alphabet, cov)
    mf = cumulants_to_moments(g.to_cumulants(5))
    for w in words_up_to(alphabet, 5):
        assert abs(mf(w) - gaussian_moments(g, w)) <= 1e-12


# ---- central limit ----

def test_clt_examples():
    base = centered_base()
    spec = clt_spec(base)
    for N in spec.row_sizes:
        cf = row_cumulants(spec, N)
        assert abs(cf((ZL, ZR)) - 0.3) < 1e-15
        assert abs(cf((ZL, ZL, ZR, ZR)) - 0.9 / N) < 1e-15
    mf = row_sum_moments(spec, 64)
    assert abs(mf((ZL, ZL, ZR, ZR)) - (1 + 0.3 ** 2)) <= 3 / 64


def test_clt_check_report():
    rep = clt_check(centered_base())
    assert rep.passed and rep.rate_ok
    assert rep.order2_drift <= 1e-12
    assert rep.rates[3] == pytest.approx([1, 1])
    assert rep.rates[4] == pytest.approx([1, 1])
    d = rep.as_dict()
    assert d["deviations"]["64"]["3"] < d["deviations"]["4"]["3"]


def test_clt_rejects_nonzero_mean():
    base = CumulantFunctional((ZL, ZR), 2, {(ZL,): 0.1, (ZL, ZL): 1})
    with pytest.raises(NonzeroMeanError):
        clt_check(base)


def test_rate_check_is_not_vacuous():
    # at order 5 the leading correction is kappa_3 * kappa_2 ~ N^{-1/2},
    # slower than the single-cumulant rate N^{-3/2}
    rep = clt_check(centered_base(), rate_orders=(5,))
    assert rep.rates[5] == pytest.approx([0.25, 0.25])
    assert not rep.rate_ok and not rep.passed
