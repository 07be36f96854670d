import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.errors import NotSolvable, ValidationError
from artifact.laurent import LaurentSeries
from artifact.padic_core import PrecisionBudget, base_ring, make_tower, pi_at
from artifact.solvability import (
    RankOneOperator,
    analyse,
    build_L,
    classify,
    irregularity,
    iterate_matrices,
    moderate,
    ray_estimate,
    solve_negative,
    strip_small_tail,
    tensor,
)
from artifact.witt import WittVector, comonomial


def _towers(p, budget=None):
    P = [0, p] + [0] * (p - 2) + [1]
    b = budget or PrecisionBudget(p, 20, 10)
    return P, b, make_tower(P, 0, b), make_tower(P, 1, b)


def dwork(R):
    """d + pi_0 T^-1."""
    return RankOneOperator(R, {-1: -pi_at(R, 0)})


def e1_operator(R1, p):
    """d + pi_1 T^-1 + pi_0 T^-p, the operator of E_1(T^-1)."""
    return RankOneOperator(R1, {-1: -pi_at(R1, 1), -p: -pi_at(R1, 0)})


@pytest.mark.parametrize("p", [2, 3])
def test_dwork_operator(p):
    P, b, R0, R1 = _towers(p)
    rep = analyse(dwork(R0))
    assert rep.solvable and rep.irregularity == 1
    (blk,) = rep.blocks
    assert (blk.n, blk.M) == (1, 0)
    assert [x.residue() for x in blk.lam.entries] == [1]
    assert (blk.lam[0] - 1).is_zero()


@pytest.mark.parametrize("p", [2, 3])
def test_e1_operator(p):
    P, b, R0, R1 = _towers(p)
    rep = analyse(e1_operator(R1, p))
    assert rep.solvable and rep.irregularity == p
    (blk,) = rep.blocks
    assert (blk.lam[0] - 1).is_zero() and blk.lam[1].is_zero()


@pytest.mark.parametrize("p", [2, 3])
def test_positive_part(p):
    P, b, R0, R1 = _towers(p)
    Z = base_ring(b)
    rep = analyse(RankOneOperator(Z, {1: 1}))
    assert not rep.solvable
    w = rep.positive[0].witness
    assert (w.index, w.valuation) == (1, -1)
    assert analyse(RankOneOperator(R0, {1: pi_at(R0, 0)})).solvable
    with pytest.raises(NotSolvable):
        irregularity(rep)


def test_positive_coefficient_of_negative_valuation():
    Z = base_ring(PrecisionBudget(3, 20, 4))
    rep = analyse(RankOneOperator(Z, {2: Fraction(1, 3)}))
    assert not rep.solvable
    assert rep.positive[0].witness.valuation == -1


def test_constant_operator_iterates():
    p = 5
    Z = base_ring(PrecisionBudget(p, 20, 4))
    a0 = Fraction(7, 3)
    mats = iterate_matrices(RankOneOperator(Z, {}, a0), 6)
    for s, g in enumerate(mats, start=1):
        want = Fraction(1)
        for i in range(s):
            want *= a0 - i
        assert list(g.coeffs) == [-s]
        assert (g[-s] - Z(want)).is_zero()


@given(st.dictionaries(st.integers(-3, 3).filter(bool), st.integers(-9, 9), max_size=4))
def test_second_iterate_matches_symbolic_formula(coeffs):
    Z = base_ring(PrecisionBudget(3, 20, 4))
    op = RankOneOperator(Z, coeffs)
    g1, g2 = iterate_matrices(op, 2)
    # g/T = sum a_i T^(i-1); d/dT(g/T) + (g/T)^2 by hand
    want = {}
    for i, a in coeffs.items():
        if a and i != 1:
            want[i - 2] = want.get(i - 2, 0) + a * (i - 1)
        for j, b in coeffs.items():
            want[i + j - 2] = want.get(i + j - 2, 0) + a * b
    got = {d: c for d, c in g2.coeffs.items()}
    assert set(got) == {d for d, c in want.items() if c}
    assert all((got[d] - Z(want[d])).is_zero() for d in got)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_moderate_radius(p):
    Z = base_ring(PrecisionBudget(p, 20, 4))
    est = ray_estimate(RankOneOperator(Z, {}, Fraction(1, p)), 0, 16)
    assert est.value == Fraction(p, p - 1)
    assert ray_estimate(RankOneOperator(Z, {}), Fraction(1, 3), 16).value == Fraction(1, 3)


@pytest.mark.parametrize("p", [2, 3])
def test_radius_slope_equals_irregularity_in_small_radius_regime(p):
    P, b, R0, R1 = _towers(p)
    for op, d in ((dwork(R0), 1), (e1_operator(R1, p), p)):
        irr = analyse(op).irregularity
        # |g|_rho > 1 once r > 1/(d(p-1)); there Ray = omega |a_-d|^-1 rho^(d+1)
        r1, r2 = Fraction(2, d * (p - 1)), Fraction(3, d * (p - 1))
        e1, e2 = ray_estimate(op, r1), ray_estimate(op, r2)
        assert e1.small_radius and e2.small_radius
        assert (e2.value - e1.value) / (r2 - r1) - 1 == irr
        assert e1.value == (d + 1) * r1
        # closer to the boundary the iterate estimate stays between rho and rho^(irr+1)
        for r in (Fraction(1, 100), Fraction(1, 20), Fraction(1, 8)):
            est = ray_estimate(op, r)
            assert r <= est.value <= (irr + 1) * r


def test_moderate_frobenius_orders():
    m = moderate(Fraction(1, 2), 3)
    assert m.solvable and not m.trivial and m.frobenius_order == 1
    m = moderate(Fraction(1, 9), 2)
    assert m.frobenius_order == 6 and m.frobenius_bound == 26 and m.bound_holds is False
    m = moderate(Fraction(1, 7), 2)
    assert m.frobenius_order == 3 and m.bound_holds
    assert not moderate(Fraction(1, 3), 3).solvable
    assert moderate(5, 3).trivial


def test_strip_small_tail():
    Z = base_ring(PrecisionBudget(3, 20, 4))
    # v(9/1) = 2 > 1/2 is removed; v(1) = 0 stays; v(9/(-3)) = 1 > 1/2 removed
    op = RankOneOperator(Z, {-1: 9, -2: 1, -3: 9})
    stripped, removed, log = strip_small_tail(op)
    assert removed == [-3, -1]
    assert sorted(stripped.coeffs) == [-2]
    assert (log[-1] - Z(9)).is_zero() and (log[-3] - Z(3)).is_zero()
    with pytest.raises(ValidationError):
        strip_small_tail(op, Fraction(-1))


def test_build_and_solve_round_trip():
    rng = random.Random(5)
    p = 2
    for s in (0, 1):
        R = make_tower([0, 2, 1], s, PrecisionBudget(p, 20, 12))
        ents = []
        for i in range(s + 1):
            terms = {-rng.choice([1, 3]) * p ** rng.randint(0, 2): R(rng.randint(1, 5)) for _ in range(2)}
            ents.append(LaurentSeries.polynomial(terms, ring=R))
        op = build_L(0, WittVector(ents, p, check=False), R)
        ok, blocks, fm, ring, _ = solve_negative(op, strip=False)
        assert ok
        assert build_L(0, fm, ring) == op


def test_build_l_of_unit_comonomial_is_dwork():
    R = make_tower([0, 3, 0, 1], 0, PrecisionBudget(3, 20, 8))
    f = comonomial(WittVector([R.one()]), 1, 0)
    assert build_L(0, f, R) == dwork(R)


def test_tensor_adds_and_classify_ignores_integer_shift():
    P, b, R0, R1 = _towers(3)
    op = tensor(dwork(R0), RankOneOperator(R0, {}, Fraction(1, 2)))
    key = classify(op)
    shifted = tensor(op, RankOneOperator(R0, {}, 4))
    assert classify(shifted) == key
    assert key.a0 == Fraction(1, 2)
    assert key.blocks == ((1, 0, (1,)),)
    with pytest.raises(NotSolvable):
        classify(RankOneOperator(R0, {}, Fraction(1, 3)))


def test_override_m_adds_trailing_zero_ghosts():
    P, b, R0, R1 = _towers(2)
    rep = analyse(dwork(R0), override_M=1)
    (blk,) = rep.blocks
    assert blk.M == 1 and len(blk.ghosts) == 2
    with pytest.raises(ValidationError):
        analyse(e1_operator(R1, 2), override_M=0)
