"""Torsion tower: Galois action, traces, pi_n' and conjugate spans."""
import itertools
import random
from fractions import Fraction

import pytest

from ltcoleman.arith.context import PrecisionContext
from ltcoleman.arith.rings import CyclotomicRing, make_unramified
from ltcoleman.lubin_tate import FrobeniusLift, eta
from ltcoleman.tower import (GoodLiftWarning, closed_form_pi_prime, conjugate_family, evaluate_poly, pi_prime,
                             span_rank, spanning_trial, tower_level, trace_kernel_dim)

CTX = PrecisionContext(3, 6, 40, 2)
MULT = FrobeniusLift.multiplicative(CTX)
GOOD = FrobeniusLift(CTX, (0, 12, 3, 1))  # pi = 12, alpha = 4
BAD = FrobeniusLift(CTX, (0, 3, 0, 1))    # trace of pi_1 is 0, not -3


def test_degrees_and_uniformizers():
    for lift in (MULT, GOOD, BAD):
        for n in (1, 2, 3):
            lv = tower_level(lift, n)
            assert lv.d == 2 * 3 ** (n - 1)
            assert lv.check_uniformizer()


def test_galois_identity_and_kernel():
    lv = tower_level(GOOD, 2)
    x = lv.element([1, 2, 3, 4, 5, 6])
    assert lv.galois_act(1, x).equals(x)
    assert lv.galois_act(10, x).equals(x)  # 10 = 1 mod 9


def test_galois_multiplicative_n1_example():
    # (1+X)^2 - 1 = X^2 + 2X reduces mod X^2 + 3X + 3 to -X - 3
    lv = tower_level(MULT, 1)
    assert lv.galois_act(2, lv.uniformizer()).to_fractions() == [-3, -1]


@pytest.mark.parametrize("lift", [MULT, GOOD, BAD])
def test_galois_group_action(lift, rng):
    lv = tower_level(lift, 2)
    for _ in range(3):
        x = lv.element([rng.randrange(729) for _ in range(6)])
        a, b = rng.choice(lv.units()), rng.choice(lv.units())
        assert lv.galois_act(a, lv.galois_act(b, x)).equals(lv.galois_act(a * b, x))
        assert evaluate_poly(lv.E, lv.galois_act(a, lv.uniformizer())).is_zero()


@pytest.mark.parametrize("lift", [MULT, GOOD, BAD])
def test_trace_matches_conjugate_sum(lift, rng):
    # oracle: sum over the conjugates fixing K_{n-1} versus the basis-change trace
    for n in (1, 2):
        lv = tower_level(lift, n)
        x = lv.element([rng.randrange(729) for _ in range(lv.d)])
        sub = [a for a in lv.units() if n == 1 or a % 3 ** (n - 1) == 1]
        total = sum((lv.galois_act(a, x) for a in sub), lv.zero())
        assert total.equals(lv.embed(lv.trace_down(x)))


def test_trace_transitivity(rng):
    lv = tower_level(GOOD, 3)
    x = lv.element([rng.randrange(729) for _ in range(lv.d)])
    assert lv.trace_to_base(x).equals(sum(lv.conjugates(x), lv.zero()))


def test_trace_of_pi1_is_minus_p():
    # minus the X^(p-2) coefficient of E_1 = X^2 + 3X + 3
    for lift in (MULT, GOOD):
        lv = tower_level(lift, 1)
        assert lv.trace_down(lv.uniformizer()).to_fractions() == [-3]


def test_trace_of_lower_element_is_p_times():
    lv = tower_level(GOOD, 2)
    y = tower_level(GOOD, 1).element([4, 7])
    assert lv.trace_down(lv.embed(y)).equals(y * 3)


@pytest.mark.parametrize("lift", [MULT, GOOD])
def test_pi_prime_closed_forms(lift):
    # pi_n' = pi_n + 1 for n > 1 and pi_1' = pi_1 + p/(p-1)
    for n in (1, 2, 3):
        lv = tower_level(lift, n)
        pp = pi_prime(lv)
        assert lv.trace_down(pp).is_zero()
        want = lv.uniformizer() + (Fraction(3, 2) if n == 1 else 1)
        assert pp.equals(want)
    assert tower_level(lift, 1).uniformizer().equals(closed_form_pi_prime(tower_level(lift, 1)) - Fraction(3, 2))


def test_bad_lift_is_flagged_not_fatal():
    lv = tower_level(BAD, 2)
    with pytest.warns(GoodLiftWarning):
        pp = pi_prime(lv)
    assert lv.trace_down(pp).is_zero()


def test_rank_of_pi_prime_conjugates():
    for n in (1, 2):
        lv = tower_level(GOOD, n)
        fam = conjugate_family(pi_prime(lv))
        assert span_rank(fam, lv) == trace_kernel_dim(GOOD, n)


def test_rank_examples():
    assert spanning_trial(MULT, (1, 2), 2, [1, 1]) == (5, 5)
    assert spanning_trial(MULT, (0,), 2, [1]) == (1, 1)


@pytest.mark.parametrize("lift", [MULT, GOOD])
def test_spanning_random_units(lift):
    rng = random.Random(7)
    for S in (s for r in (1, 2, 3) for s in itertools.combinations(range(3), r)):
        for _ in range(4):
            units = [rng.choice([u for u in range(1, 729) if u % 3]) for _ in S]
            rank, expected = spanning_trial(lift, S, 2, units)
            assert rank == expected


@pytest.mark.parametrize("g,m", [((0, 3, 3, 1), 2), ((0, 3, 0, 1), 1), ((0, 3, 6, 1), 2)])
def test_eta_torsion_point_satisfies_En(g, m):
    # pi_n = eta^(phi^-n)(zeta_{p^n} - 1) is a root of E_n, evaluated on the cyclotomic side
    ctx = PrecisionContext(3, 5, 24, 1)
    lift = FrobeniusLift(ctx, g)
    R = make_unramified(ctx, m)
    e = eta(lift, R)
    assert e.guarded
    for n in (1, 2):
        C = CyclotomicRing(R, n)
        s = e.series.frob(-n)
        pt = s.evaluate(C.zeta(1) - 1)
        acc = C.zero()
        for c in reversed(tower_level(lift, n).E):
            acc = acc * pt + int(c)
        prec = min(ctx.check_prec, s.evaluation_precision(C.zeta(1) - 1))
        assert prec >= 3
        assert acc.is_zero(prec)


def test_eta_precision_is_reported_when_omega_is_short():
    ctx = PrecisionContext(3, 3, 20, 1)
    e = eta(FrobeniusLift(ctx, (0, 12, 3, 1)), make_unramified(ctx, 9))
    assert not e.guarded and e.achieved_precision < ctx.N
