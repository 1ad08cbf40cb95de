"""Formal groups from Frobenius lifts, endomorphisms, logarithms, torsion and eta."""
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from ltcoleman.arith.context import PrecisionContext, vp
from ltcoleman.arith.rings import CyclotomicRing, make_unramified
from ltcoleman.arith.series import TruncatedSeries, compose, restrict_condition_holds, scalar_ring
from ltcoleman.errors import DegreeOverflow, NoSolution
from ltcoleman.lubin_tate import (FrobeniusLift, eta, eta_bar, eta_bar_at_zero, eta_bar_value, formal_log,
                                  group_law, is_eisenstein, iterate_lift, mult_by, torsion_poly)

from oracles import frac_mod, law_from_log, log_limit, log_one_plus


def ints(s):
    return [row[0] for row in s.to_list()]


def test_lift_validation():
    ctx = PrecisionContext(3, 4, 8, 0)
    with pytest.raises(ValueError):
        FrobeniusLift(ctx, (0, 3, 1, 1))  # X^2 coefficient not divisible by 3
    with pytest.raises(ValueError):
        FrobeniusLift(ctx, (0, 9, 0, 1))  # pi of valuation 2
    with pytest.raises(ValueError):
        FrobeniusLift(ctx, (1, 3, 0, 1))
    L = FrobeniusLift(ctx, (0, 12, 3, 1))
    assert L.alpha.to_int() == 4 and L.is_good()
    assert FrobeniusLift(ctx, (0, 3, 0, 1)).good_lift_issues()


def test_descriptor_roundtrip():
    ctx = PrecisionContext(5, 3, 10, 1)
    L = FrobeniusLift(ctx, (0, 30, 0, 0, 5, 1))
    assert FrobeniusLift.from_descriptor(L.to_descriptor(), ctx) == L


def test_multiplicative_law_is_x_plus_y_plus_xy():
    ctx = PrecisionContext(3, 4, 10, 1)
    F = group_law(FrobeniusLift.multiplicative(ctx)).law
    expected = np.zeros_like(F)
    expected[1, 0] = expected[0, 1] = expected[1, 1] = 1
    assert np.array_equal(F % 81, expected)


@pytest.mark.parametrize("p,g", [(3, (0, 3, 0, 1)), (3, (0, 12, 3, 1)), (5, (0, 5, 0, 0, 0, 1))])
def test_group_axioms(p, g):
    ctx = PrecisionContext(p, 4, 9, 1)
    G = group_law(FrobeniusLift(ctx, g))
    assert all(G.verify().values())


def test_law_matches_logarithm_construction():
    # oracle: F = lambda^{-1}(lambda(X) + lambda(Y)) with lambda the exact limit of g^(n)/3^n
    p, N, M = 3, 4, 8
    ctx = PrecisionContext(p, N, M, 0)
    G = group_law(FrobeniusLift(ctx, (0, 3, 0, 1)))
    lam = log_limit([0, 3, 0, 1], p, M, depth=N + 4)
    ref = law_from_log(lam, M)
    for (i, j), c in ref.items():
        assert G.coefficient(i, j) == frac_mod(c, p, N), (i, j)


def test_mult_by_multiplicative_is_binomial():
    ctx = PrecisionContext(5, 4, 12, 1)
    G = group_law(FrobeniusLift.multiplicative(ctx))
    for a in (1, 2, 7, -1):
        want = [comb(a, i) % 625 if a >= 0 else (-1) ** i % 625 for i in range(13)]
        want[0] = 0
        assert ints(mult_by(a, G)) == want


def test_mult_by_pi_is_g_and_homomorphism_rules(rng):
    ctx = PrecisionContext(3, 4, 10, 1)
    L = FrobeniusLift(ctx, (0, 12, 3, 1))
    G = group_law(L)
    assert mult_by(12, G).equals(L.series())
    assert ints(mult_by(1, G)) == [0, 1] + [0] * 9
    for _ in range(3):
        a, b = rng.randrange(81), rng.randrange(81)
        A, B = mult_by(a, G), mult_by(b, G)
        assert compose(A, B).equals(mult_by(a * b, G))
        assert G.apply(A, B).equals(mult_by(a + b, G))


def test_log_multiplicative():
    ctx = PrecisionContext(3, 5, 10, 1)
    lam = group_law(FrobeniusLift.multiplicative(ctx)).log
    want = log_one_plus(10)
    for j in range(1, 11):
        got = lam.coefficient(j)
        assert got.equals(got.ring.scalar(want[j]), lam.exp + 5)


def test_log_matches_limit_through_degree_8():
    # oracle: g^(n)/pi^n for two depths; both agree with the invariant-differential log
    p, N, M = 3, 5, 8
    ctx = PrecisionContext(p, N, M, 0)
    lam = formal_log(group_law(FrobeniusLift(ctx, (0, 3, 0, 1))))
    a = log_limit([0, 3, 0, 1], p, M, depth=2 * N)
    b = log_limit([0, 3, 0, 1], p, M, depth=2 * N + 2)
    for j in range(1, M + 1):
        assert vp(a[j] - b[j], p) >= N + lam.exp
        got = lam.coefficient(j)
        assert got.equals(got.ring.scalar(b[j]), N + lam.exp), j


def test_log_conjugates_law_and_pi():
    ctx = PrecisionContext(5, 5, 10, 1)
    L = FrobeniusLift(ctx, (0, 5, 0, 0, 0, 1))
    G = group_law(L)
    lam = G.log
    assert compose(lam, L.series()).equals(lam * 5, lam.exp + 5)
    R = scalar_ring(ctx)
    A, B = mult_by(2, G), mult_by(3, G)
    lhs = compose(lam, G.apply(A, B))
    assert lhs.equals(compose(lam, A) + compose(lam, B), lam.exp + 5)


def test_torsion_poly_examples():
    ctx = PrecisionContext(3, 4, 20, 1)
    L = FrobeniusLift.multiplicative(ctx)
    assert torsion_poly(L, 1) == [3, 3, 1]
    for Lg in (L, FrobeniusLift(ctx, (0, 3, 0, 1)), FrobeniusLift(ctx, (0, 12, 3, 1))):
        for n in (1, 2):
            E = torsion_poly(Lg, n)
            assert len(E) - 1 == 2 * 3 ** (n - 1)
            assert is_eisenstein(E, 3, 4)
        from ltcoleman.arith import poly
        assert poly.mul(torsion_poly(Lg, 1), [0, 1], 81) == [c % 81 for c in Lg.int_poly()]
        assert poly.mul(torsion_poly(Lg, 2), iterate_lift(Lg, 1), 81) == iterate_lift(Lg, 2)
    with pytest.raises(DegreeOverflow):
        torsion_poly(L, 4)


def test_eta_multiplicative_is_identity():
    ctx = PrecisionContext(3, 5, 12, 1)
    R = make_unramified(ctx, 2)
    e = eta(FrobeniusLift.multiplicative(ctx), R)
    assert e.series.equals(TruncatedSeries.X(R)) and e.omega.equals(R.one())
    assert eta_bar_at_zero(e).equals(R.one())
    C = CyclotomicRing(R, 2)
    assert eta_bar_value(e, C).equals(C.zeta(1))


@pytest.mark.parametrize("g,m,N", [((0, 3, 0, 1), 1, 5), ((0, 12, 3, 1), 9, 3), ((0, 12, 3, 1), 3, 2)])
def test_eta_general_lift(g, m, N):
    ctx = PrecisionContext(3, N, 12, 1)
    L = FrobeniusLift(ctx, g)
    R = make_unramified(ctx, m)
    e = eta(L, R)
    assert e.verify()
    assert e.omega.valuation == 0
    assert e.omega.frob().equals(e.omega * L.alpha.to_int())
    bar = eta_bar(e)
    assert restrict_condition_holds(bar)


def test_eta_cross_oracle_with_logarithms():
    # lambda_F(eta(X)) = Omega log(1 + X): both sides from independent constructions
    ctx = PrecisionContext(3, 7, 9, 1)
    L = FrobeniusLift(ctx, (0, 3, 0, 1))
    R = make_unramified(ctx, 1)
    e = eta(L, R)
    lhs = compose(group_law(L).log, e.series)
    ref = log_one_plus(9)
    for j in range(1, 10):
        c = lhs.coefficient(j)
        assert c.equals(c.ring.scalar(ref[j]) * e.omega, lhs.exp + e.achieved_precision), j


def test_eta_without_omega():
    ctx = PrecisionContext(3, 3, 8, 1)
    with pytest.raises(NoSolution):
        eta(FrobeniusLift(ctx, (0, 12, 3, 1)), make_unramified(ctx, 3))


def test_eta_bar_value_agrees_with_binomial_route():
    ctx = PrecisionContext(3, 5, 24, 1)
    R = make_unramified(ctx, 1)
    e = eta(FrobeniusLift(ctx, (0, 3, 0, 1)), R)
    C = CyclotomicRing(R, 1)
    via_def = eta_bar_value(e, C)
    via_bin = eta_bar(e).evaluate(C.zeta(1) - 1)
    assert (via_def - via_bin).valuation >= 4
