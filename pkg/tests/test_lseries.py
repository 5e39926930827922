import math
from itertools import product

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from arithqsm import cyclo
from arithqsm.arith_core import Poly, primes_up_to
from arithqsm.errors import BetaOutOfRange, LimitMismatch, SqrtInField, UndeterminedPrime
from arithqsm.lseries import (
    CoeffSeries,
    artin_factorization_check,
    char_from_function,
    compare_series,
    compositum_poly,
    delta_series,
    dirichlet_convolve,
    equiv_check,
    fundamental_discriminants,
    is_fundamental_discriminant,
    kronecker_char,
    local_ideal_count,
    partial_sum,
    series_to_csv,
    trivial_char,
    twist_coeffs,
    zeta_coeffs,
)
from arithqsm.number_field import Undetermined, splitting_type

from conftest import CORPUS, field

X, Y = sympy.symbols("x y")


# ---------------------------------------------------------------------------
# local data and zeta


@pytest.mark.parametrize("st_,k,v", [([(1, 1), (1, 1)], 1, 2), ([(2, 1)], 3, 1), ([(1, 1), (1, 2)], 4, 3)])
def test_local_ideal_count_examples(st_, k, v):
    assert local_ideal_count(st_, k) == v


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(0, 12))
def test_local_ideal_count_brute_force(fs, k):
    brute = sum(1 for xs in product(range(k + 1), repeat=len(fs)) if sum(f * x for f, x in zip(fs, xs)) == k)
    assert local_ideal_count([(1, f) for f in fs], k) == brute


def test_zeta_examples():
    assert zeta_coeffs(field("q"), 100).to_list() == [1] * 100
    assert zeta_coeffs(field("gauss"), 10).to_list() == [1, 1, 0, 1, 2, 0, 0, 1, 1, 2]


def test_gauss_zeta_vs_lattice_count():
    # ideals of Z[i] of norm n are r_2(n)/4
    N = 3000
    z = zeta_coeffs(field("gauss"), N)
    r2 = np.zeros(N + 1, dtype=np.int64)
    b = math.isqrt(N)
    for x in range(-b, b + 1):
        for y in range(-b, b + 1):
            n = x * x + y * y
            if 1 <= n <= N:
                r2[n] += 1
    assert np.array_equal(z.values[1:], r2[1:] // 4)


def test_m2_zeta_vs_lattice_count():
    # Z[sqrt -2] has units +-1, ideals of norm n are r(n)/2 for x^2 + 2y^2
    N = 3000
    z = zeta_coeffs(field("m2"), N)
    r = np.zeros(N + 1, dtype=np.int64)
    for x in range(-math.isqrt(N), math.isqrt(N) + 1):
        for y in range(-math.isqrt(N // 2), math.isqrt(N // 2) + 1):
            n = x * x + 2 * y * y
            if 1 <= n <= N:
                r[n] += 1
    assert np.array_equal(z.values[1:], r[1:] // 2)


def test_zeta_mask_and_policy():
    K = field("k8_48")
    z = zeta_coeffs(K, 100)
    assert z.mask == frozenset({2})
    assert z[2] is None and z[3] is not None
    with pytest.raises(UndeterminedPrime) as exc:
        zeta_coeffs(K, 100, policy="strict")
    assert exc.value.primes == [2]
    assert zeta_coeffs(K, 100, exclude=[3]).mask == frozenset({2, 3})


@pytest.mark.parametrize("name", CORPUS)
def test_multiplicativity_and_local_consistency(name):
    N = 2000
    K = field(name)
    z = zeta_coeffs(K, N)
    ok = z.present
    for m in range(2, N + 1):
        if not ok[m]:
            continue
        for n in range(m + 1, N // m + 1):
            if ok[n] and math.gcd(m, n) == 1:
                assert z[m * n] == z[m] * z[n]
    for p in primes_up_to(N):
        st_ = splitting_type(K, p)
        if isinstance(st_, Undetermined):
            continue
        k, q = 1, p
        while q <= N:
            assert z[q] == local_ideal_count(st_, k)
            k, q = k + 1, q * p


def test_threads_do_not_change_output():
    K = field("k8_3")
    a = zeta_coeffs(K, 20000, threads=1)
    b = zeta_coeffs(K, 20000, threads=4)
    assert a.values.tobytes() == b.values.tobytes()


# ---------------------------------------------------------------------------
# characters and twists


def test_kronecker_char_values():
    chi = kronecker_char(-4)
    assert [chi.exponent(n) for n in range(4)] == [None, 0, None, 1]
    assert chi.is_multiplicative()
    assert kronecker_char(5).value(9) == (1,)
    with pytest.raises(Exception):
        kronecker_char(20)


def test_all_small_kronecker_chars_multiplicative():
    for D in fundamental_discriminants(200):
        assert kronecker_char(D).is_multiplicative()


def test_fundamental_discriminants_vs_sympy():
    for D in range(-500, 500):
        if D in (0, 1):
            continue
        expected = False
        if D % 4 == 1:
            expected = sympy.ntheory.factor_.core(abs(D)) == abs(D)
        elif D % 4 == 0:
            m = D // 4
            expected = m % 4 in (2, 3) and sympy.ntheory.factor_.core(abs(m)) == abs(m)
        assert is_fundamental_discriminant(D) == expected, D


def test_order_four_character_is_multiplicative():
    # a generator of (Z/5)* is 2; chi(2^k) = i^k
    log = {pow(2, k, 5): k for k in range(4)}
    chi = char_from_function(5, 4, lambda a: log[a])
    assert chi.is_multiplicative()
    assert abs(chi(2) - 1j) < 1e-15


def test_twist_examples():
    zq = zeta_coeffs(field("q"), 12)
    assert twist_coeffs(zq, trivial_char()).to_list() == zq.to_list()
    chi = kronecker_char(-4)
    assert twist_coeffs(zq, chi, mask_conductor=False).to_list() == [1, 0, -1, 0, 1, 0, -1, 0, 1, 0, -1, 0]
    masked = twist_coeffs(zq, chi)
    assert masked.mask == frozenset({2}) and masked[2] is None and masked[3] == -1
    zg = zeta_coeffs(field("gauss"), 12)
    assert twist_coeffs(zg, kronecker_char(5))[9] == 1


def test_twist_by_complex_character_is_exact():
    log = {pow(2, k, 5): k for k in range(4)}
    chi = char_from_function(5, 4, lambda a: log[a])
    z = twist_coeffs(zeta_coeffs(field("gauss"), 50), chi)
    assert z.order == 4
    assert z[13] == cyclo.mul((2, 0), cyclo.root(log[3], 4), 4)  # a_13 = 2, 13 = 3 mod 5
    assert abs(z.complex_value(2) - 1j) < 1e-15


def test_convolve_examples():
    zq = zeta_coeffs(field("q"), 500)
    d = dirichlet_convolve(zq, zq)
    assert d.to_list() == [int(sympy.divisor_count(n)) for n in range(1, 501)]
    zg = zeta_coeffs(field("gauss"), 500)
    assert dirichlet_convolve(zg, delta_series(500)).to_list() == zg.to_list()
    with pytest.raises(LimitMismatch):
        dirichlet_convolve(zq, delta_series(10))


def test_artin_factorization_over_q():
    zq = zeta_coeffs(field("q"), 1000)
    rhs = dirichlet_convolve(zq, twist_coeffs(zq, kronecker_char(-4), mask_conductor=False))
    assert compare_series(rhs, zeta_coeffs(field("gauss"), 1000)).equal


def test_convolution_cyclotomic_path_matches_integer_path():
    zq = zeta_coeffs(field("q"), 200)
    tw = twist_coeffs(zq, kronecker_char(-3), mask_conductor=False)
    as_cyclo = CoeffSeries(200, np.array([list(cyclo.embed((int(v),), 1, 3)) for v in tw.values]), 3)
    fast = dirichlet_convolve(zq, tw)
    slow = dirichlet_convolve(zq, as_cyclo)
    assert all(cyclo.embed((fast[n],), 1, 3) == slow[n] for n in range(1, 201))


def test_equiv_examples():
    assert equiv_check(field("q"), field("q"), 1000).equal
    r = equiv_check(field("gauss"), field("m2"), 100)
    assert (r.equal, r.first_mismatch, r.left, r.right) == (False, 3, 0, 2)
    r = equiv_check(field("k8_3"), field("k8_48"), 5000, exclude=[3])
    assert r.equal and r.masked == frozenset({2, 3})


def test_x8_minus_18_and_288_equivalent():
    r = equiv_check(field("k8_18"), field("k8_288"), 3000)
    assert r.equal and r.masked == frozenset({2, 3})


def test_degree8_fields_not_all_equivalent():
    r = equiv_check(field("k8_3"), field("k8_18"), 2000)
    assert not r.equal


@pytest.mark.parametrize("d", [5, -7, 13, -3, 8, -4])
def test_twists_of_equivalent_pair_agree(d):
    chi = kronecker_char(d)
    a = twist_coeffs(zeta_coeffs(field("k8_3"), 2000), chi)
    b = twist_coeffs(zeta_coeffs(field("k8_48"), 2000), chi)
    assert compare_series(a, b).equal


# ---------------------------------------------------------------------------
# composita


def test_compositum_poly_is_resultant():
    for coeffs, D in (([1, 0, 1], 5), ([2, 0, 1], -3), ([0, 1], 13), ([-3, 1, 0, 1], -7)):
        f = sympy.Poly(list(reversed(coeffs)), Y).as_expr()
        res = sympy.Poly(sympy.resultant(f, (X - Y) ** 2 - D, Y), X)
        # the resultant is only defined up to sign by some conventions
        ours = compositum_poly(Poly(coeffs), D).coeffs
        assert ours == tuple(int(c) for c in reversed(res.all_coeffs())) or ours == tuple(
            -int(c) for c in reversed(res.all_coeffs())
        )
        assert ours[-1] == 1


def test_compositum_rejects_sqrt_in_field():
    with pytest.raises(SqrtInField):
        artin_factorization_check(field("gauss"), -4, 100)


@pytest.mark.parametrize("name", ["q", "gauss", "m2"])
def test_artin_factorization_sweep(name):
    K = field(name)
    for D in fundamental_discriminants(40):
        try:
            r = artin_factorization_check(K, D, 2000)
        except SqrtInField:
            assert (name, D) in {("gauss", -4), ("m2", -8)}
            continue
        assert r.equal, D


# ---------------------------------------------------------------------------
# partial sums


def test_partial_sum_examples():
    assert partial_sum(zeta_coeffs(field("q"), 1), 2.0) == 1.0
    assert abs(partial_sum(zeta_coeffs(field("q"), 10**4), 2.0) - math.pi**2 / 6) < 1e-4
    zeta2 = float(mpmath.zeta(2))
    L2 = float(mpmath.catalan)
    assert abs(partial_sum(zeta_coeffs(field("gauss"), 10**4), 2.0) - zeta2 * L2) < 1e-3
    for beta in (1.0, 0.5, float("nan"), float("inf")):
        with pytest.raises(BetaOutOfRange):
            partial_sum(zeta_coeffs(field("q"), 10), beta)


def test_partial_sum_monotone_in_n():
    z = zeta_coeffs(field("gauss"), 3000)
    prev = 0.0
    for N in range(1, 3001, 97):
        s = partial_sum(CoeffSeries(N, z.values[: N + 1].copy()), 2.0)
        assert s >= prev
        prev = s


@settings(max_examples=30, deadline=None)
@given(st.floats(1.1, 6.0))
def test_partial_sum_vs_mpmath(beta):
    N = 500
    z = zeta_coeffs(field("gauss"), N)
    ref = mpmath.fsum(mpmath.mpf(int(z[n])) * mpmath.power(n, -beta) for n in range(1, N + 1))
    assert abs(partial_sum(z, beta) - float(ref)) <= 4e-16 * float(ref)


def test_series_csv():
    text = series_to_csv(zeta_coeffs(field("k8_48"), 4))
    assert text == "# field=k8_48 N=4 order=1 mask=2\nn,a_n\n1,1\n2,masked\n3,1\n4,masked\n"
