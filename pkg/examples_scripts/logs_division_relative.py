"""Plus/minus logarithms, division by them, and the relative-case determinant.

Run: python3 examples_scripts/logs_division_relative.py
"""
import random

from ltcoleman.arith.context import PrecisionContext
from ltcoleman.arith.rings import CyclotomicRing, make_unramified
from ltcoleman.arith.series import TruncatedSeries, scalar_ring
from ltcoleman.coleman import LambdaSeries, character_point, coleman_divide, pollack_log, relative_independence

ctx = PrecisionContext(3, 6, 30, 2)
R = make_unramified(ctx, 1)
for sign in "+-":
    lg = pollack_log(ctx, 2, sign, 1)
    print(f"log{sign}: factors {lg.factors}, degree {lg.degree}, precision {lg.achieved_precision}")
    for level in (1, 2):
        v = lg.series.evaluate(0, character_point(CyclotomicRing(R, level), 0, 4))
        print(f"  at a point of order 3^{level}: {'zero' if v.is_zero(lg.achieved_precision) else 'non-zero'}")

rng = random.Random(1)
S = scalar_ring(ctx)
U = LambdaSeries(tuple(TruncatedSeries.from_ints(S, [1 + 3 * rng.randrange(81), rng.randrange(729)])
                       for _ in range(2)), 4)
log = pollack_log(ctx, 2, "+", 1).series
res = coleman_divide(log * U, 2, "+")
print("log+ * U divisible:", res.divisible, " quotient recovered:", res.quotient.equals(U, ctx.check_prec - 1))
print("1 divisible by log+:", coleman_divide(LambdaSeries.scalar_series(TruncatedSeries.from_ints(S, [1]), 4),
                                            2, "+").divisible)

for d, order in [(1, 1), (2, 8), (2, 4)]:
    rep = relative_independence(PrecisionContext(3, 6, 40, 2), d, order)
    print(f"d={d} zeta0 of order {order}: paths agree {rep.paths_agree}, det {rep.determinant}, unit {rep.unit}")
