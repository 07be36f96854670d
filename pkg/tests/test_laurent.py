import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import artifact.laurent as laurent
from artifact.errors import WindowExhausted
from artifact.laurent import LaurentSeries
from artifact.padic_core import PrecisionBudget, make_tower


def _naive_product(monkeypatch, a, b):
    monkeypatch.setattr(laurent, "_KRONECKER_MIN", 10 ** 12)
    try:
        return a * b
    finally:
        monkeypatch.setattr(laurent, "_KRONECKER_MIN", 256)


@given(st.dictionaries(st.integers(-6, 6), st.fractions(max_denominator=20), max_size=6),
       st.dictionaries(st.integers(-6, 6), st.fractions(max_denominator=20), max_size=6))
def test_polynomial_product_matches_convolution(a, b):
    f = LaurentSeries.polynomial(a, p=3)
    g = LaurentSeries.polynomial(b, p=3)
    want = {}
    for i, x in a.items():
        for j, y in b.items():
            want[i + j] = want.get(i + j, 0) + x * y
    assert (f * g).coeffs == {d: c for d, c in want.items() if c}


def test_power_series_window_and_exhaustion():
    f = LaurentSeries.power_series([1, 2, 3], 5, p=2)
    g = f * f
    assert g.hi == 5
    assert g[2] == 10
    with pytest.raises(WindowExhausted):
        g[6]
    assert f.gauss_valuation(Fraction(0)) == (0, False)
    # at r = -1 the largest stored degree wins and sits on the window edge
    h = LaurentSeries.power_series([1, 0, 0, 0, 0, 1], 5, p=2)
    assert h.gauss_valuation(Fraction(-1)) == (-5, True)


@pytest.mark.parametrize("P,s", [((0, 2, 1), 0), ((0, 2, 1), 1), ((0, 3, 0, 1), 1)])
def test_kronecker_product_agrees_with_double_loop(monkeypatch, P, s):
    rng = random.Random(3)
    R = make_tower(list(P), s, PrecisionBudget(P[1], 20, 30))

    def rs(lo, hi):
        out = {}
        for i in range(lo, hi + 1):
            c = R.from_coefficients([rng.randint(-10 ** 6, 10 ** 6) for _ in range(R.e)])
            out[i] = c.div_p(1) if rng.random() < 0.3 else c
        return out

    a = LaurentSeries(rs(0, 60), None, 60, R)
    b = LaurentSeries(rs(0, 60), None, 60, R)
    fast = a * b
    slow = _naive_product(monkeypatch, a, b)
    assert fast.equals(slow)
    assert all(fast[d].prec <= slow[d].prec for d in slow.coeffs)
    a = LaurentSeries(rs(-60, -1), -60, None, R)
    b = LaurentSeries(rs(-30, 0), -60, None, R)
    assert (a * b).equals(_naive_product(monkeypatch, a, b))


def test_substitute_and_shift():
    f = LaurentSeries.polynomial({-1: 2, 3: 1}, p=5)
    assert f.substitute_power(2).coeffs == {-2: 2, 6: 1}
    assert f.shift(1).coeffs == {0: 2, 4: 1}
    assert f.part(-1).coeffs == {-1: 2}
