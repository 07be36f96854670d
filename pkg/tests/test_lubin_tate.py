import random
from fractions import Fraction
from math import comb

import pytest

from artifact.errors import NotLubinTate
from artifact.lubin_tate import (
    bracket,
    compose,
    group_law,
    iso_test,
    series_add,
    standard,
    torsion_equiv,
    validate,
)
from artifact.padic_core import PrecisionBudget, make_tower, pi_at

N = 12


def binomial_bracket(a, n):
    """(1 + X)^a - 1 through generalized binomial coefficients."""
    out = [Fraction(0)] * (n + 1)
    c = Fraction(1)
    for k in range(1, n + 1):
        c = c * (Fraction(a) - k + 1) / k
        out[k] = c
    return out


def test_validate_accepts_standard_families():
    for p in (2, 3, 5):
        assert standard(p).P[1] == p
        mult = standard(p, "multiplicative")
        assert list(mult.P) == [0] + [comb(p, i) for i in range(1, p + 1)]


@pytest.mark.parametrize("coeffs,w,p", [([0, 2, 0, 1], 2, 2), ([1, 3, 0, 1], 3, 3),
                                        ([0, 9, 0, 1], 9, 3), ([0, 3, 0, 2], 3, 3)])
def test_validate_rejects_bad_series(coeffs, w, p):
    with pytest.raises(NotLubinTate):
        validate(coeffs, w, p)


@pytest.mark.parametrize("p", [2, 3])
def test_multiplicative_group_law(p):
    G = group_law(standard(p, "multiplicative"), N)
    assert G.G.terms == {(1, 0): 1, (0, 1): 1, (1, 1): 1}


@pytest.mark.parametrize("p", [2, 3])
def test_monomial_group_law_residuals(p):
    G = group_law(standard(p), N)
    assert all(r.is_zero() for r in G.check().values())
    assert G.check_associative().is_zero()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_multiplicative_bracket_is_binomial(p):
    M = standard(p, "multiplicative")
    for a in (2, -1, 7, Fraction(1, 2) if p != 2 else Fraction(1, 3)):
        assert bracket(a, M, N=N) == binomial_bracket(a, N)


@pytest.mark.parametrize("p", [2, 3])
def test_bracket_identities(p):
    rng = random.Random(p)
    L = standard(p)
    G = group_law(L, N)
    assert bracket(L.w, L, N=N) == list(L.P) + [0] * (N - p)
    for _ in range(5):
        a, b = Fraction(rng.randint(-20, 20)), Fraction(rng.randint(-20, 20))
        A, B = bracket(a, L, N=N), bracket(b, L, N=N)
        assert compose(A, B, N) == bracket(a * b, L, N=N)
        assert series_add(A, B, G, N) == bracket(a + b, L, N=N)


@pytest.mark.parametrize("p", [2, 3])
def test_torsion_equivalence_lands_on_roots_of_unity(p):
    L = standard(p)
    M = standard(p, "multiplicative")
    R = make_tower([int(c) for c in L.P], 0, PrecisionBudget(p, 20, 4))
    y = torsion_equiv(pi_at(R, 0), L, M)
    assert ((1 + y) ** p - 1).is_zero()
    assert (y - pi_at(R, 0)).valuation() >= 2 * pi_at(R, 0).valuation()


def test_iso_test_compares_uniformizers():
    assert iso_test(standard(3), standard(3, "multiplicative"))
    assert not iso_test(standard(3), standard(3, w=6))
