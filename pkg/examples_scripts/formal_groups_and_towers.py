"""Formal group laws, torsion polynomials and the trace-normalised uniformisers.

Run: python3 examples_scripts/formal_groups_and_towers.py
"""
from ltcoleman.arith.context import PrecisionContext
from ltcoleman.lubin_tate import FrobeniusLift, group_law, is_eisenstein, torsion_poly
from ltcoleman.tower import closed_form_pi_prime, pi_prime, tower_level

ctx = PrecisionContext(3, 6, 12, 2)

for lift in (FrobeniusLift.multiplicative(ctx), FrobeniusLift(ctx, (0, 3, 12, 4))):
    print(f"g = {lift.coeffs}  good lift: {lift.is_good()}")
    F = group_law(lift)
    low = {(i, j): F.coefficient(i, j) for i in range(4) for j in range(4 - i) if F.coefficient(i, j)}
    print("  F up to degree 3:", low)
    print("  axioms:", F.verify())
    for n in (1, 2):
        E = torsion_poly(lift, n)
        print(f"  E_{n} = {E}  Eisenstein: {is_eisenstein(E, 3, ctx.N)}")
        L = tower_level(lift, n)
        pp = pi_prime(L)
        print(f"  Tr(pi_{n}') = {L.trace_down(pp).to_fractions()}  closed form holds: "
              f"{pp.equals(closed_form_pi_prime(L))}")
