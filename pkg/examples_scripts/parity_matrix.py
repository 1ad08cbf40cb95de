"""Vanishing pattern of the character components of L_xi over (n, theta, r, sign).

Zeros sit exactly where log+ (odd n) or log- (even n) forces them; elsewhere a
non-zero value is certified at the working precision when possible.

Run: python3 examples_scripts/parity_matrix.py [n_max]
"""
import sys

from ltcoleman.arith.context import PrecisionContext
from ltcoleman.coleman import ColemanSetup, parity_table
from ltcoleman.lubin_tate import FrobeniusLift

n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 2
ctx = PrecisionContext(3, 6, 40, 2)
setup = ColemanSetup(FrobeniusLift.multiplicative(ctx), weight=4)
rows = parity_table(setup, range(1, n_max + 1))
print(f"{'n':>2} {'theta':>10} {'r':>2} {'sign':>4}  {'verdict':<9} expected")
for r in rows:
    expected = "zero" if r["expected_zero"] else "-"
    print(f"{r['n']:>2} {r['theta']:>10} {r['r']:>2} {r['sign']:>4}  {r['verdict']:<9} {expected}")
