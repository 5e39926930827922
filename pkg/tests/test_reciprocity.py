import math

import pytest

from arithqsm.errors import MaskedIndex, NotCoprime, NotEquivalent
from arithqsm.lseries import zeta_coeffs
from arithqsm.number_field import frobenius_residue
from arithqsm.qsm import enumerate_ideals
from arithqsm.reciprocity import (
    Obstruction,
    PsiMatching,
    build_psi,
    count_identity_check,
    frob_count,
    matching_to_csv,
)

from conftest import CORPUS, field


def test_frob_count_examples():
    assert frob_count(field("q"), 4, 5).table == {1: 1, 3: 0}
    assert frob_count(field("gauss"), 3, 5).table == {1: 0, 2: 2}
    with pytest.raises(NotCoprime):
        frob_count(field("q"), 4, 2)
    with pytest.raises(MaskedIndex):
        frob_count(field("k8_48"), 5, 6)


@pytest.mark.parametrize("name", CORPUS)
def test_frob_count_concentrated_and_totals(name):
    K = field(name)
    z = zeta_coeffs(K, 300)
    for m in (3, 4, 5, 7, 8):
        for n in range(1, 301):
            if math.gcd(n, m) != 1 or not z.present[n]:
                continue
            fc = frob_count(K, m, n)
            assert fc.is_concentrated()
            assert fc.total == z[n]
            assert set(fc.support()) <= {n % m}


def test_frobenius_residue_is_norm():
    assert frobenius_residue(field("gauss"), 13, 5) == 3


def test_count_identity_examples():
    g = field("gauss")
    assert count_identity_check(g, g, 7, 500).passed
    r = count_identity_check(g, field("m2"), 4, 50)
    assert not r.passed and r.first_failure == 3 and r.gamma == 3
    assert (r.left, r.right) == (0, 2)


@pytest.mark.parametrize("m", [4, 5, 7])
def test_count_identity_degree8_pair(m):
    r = count_identity_check(field("k8_3"), field("k8_48"), m, 2000)
    assert r.passed and r.concentrated and r.checked > 0
    assert 2 in r.mask


def test_count_identity_detects_inequivalent_degree8_fields():
    assert not count_identity_check(field("k8_3"), field("k8_18"), 5, 2000, exclude=[3]).passed


def test_psi_identity_matching():
    K = field("gauss")
    psi = build_psi(K, K, 500)
    assert isinstance(psi, PsiMatching)
    assert all(a == b for a, b in psi.ideals.items())


def test_psi_degree8_pair():
    K, L = field("k8_3"), field("k8_48")
    psi = build_psi(K, L, 2000)
    assert isinstance(psi, PsiMatching)
    q = enumerate_ideals(K, 2000, exclude=psi.mask)
    assert set(psi.ideals) == set(q.basis)  # total on unmasked ideals
    assert psi.is_norm_preserving() and psi.is_multiplicative() and psi.is_injective()
    # prime-to-prime, inertia degree preserved
    for (p, _, f), (p2, _, f2) in psi.primes.items():
        assert (p, f) == (p2, f2)


def test_psi_not_equivalent():
    with pytest.raises(NotEquivalent):
        build_psi(field("gauss"), field("m2"), 100)


def test_psi_csv():
    psi = build_psi(field("gauss"), field("gauss"), 10)
    lines = matching_to_csv(psi).splitlines()
    assert lines[0] == "# N=10 mask=none"
    assert lines[1] == "p,k_index,f,l_index"
    assert lines[2:] == ["2,0,1,0", "3,0,2,0", "5,0,1,0", "5,1,1,1"]
    assert isinstance(Obstruction(7, "x").p, int)
