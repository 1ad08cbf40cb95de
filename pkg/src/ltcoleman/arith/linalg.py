"""Linear algebra modulo p**N with valuation pivoting."""
from __future__ import annotations

from ..errors import NoSolution, PrecisionAmbiguous
from .context import vp


def _to_rows(A, mod):
    return [[int(x) % mod for x in row] for row in A]


def _min_pivot(rows, r0, c0, cols, p, N):
    best = None
    for i in range(r0, len(rows)):
        for j in range(c0, cols):
            v = vp(rows[i][j], p, N)
            if v < N and (best is None or v < best[0]):
                best = (v, i, j)
                if v == 0:
                    return best
    return best


def echelon(A, p: int, N: int, zero_prec: int | None = None):
    """Valuation-pivoted elimination.

    Returns ``(rank, pivot_valuations, sign_and_pivots)``.  Pivots are the
    entries of minimal valuation in the remaining block, so every multiplier is
    integral and no digits are lost.  Entries of valuation ``>= zero_prec``
    count as zero; a remaining minimum strictly between ``zero_prec`` and
    ``N`` raises :class:`PrecisionAmbiguous`.
    """
    mod = p**N
    zero_prec = N if zero_prec is None else zero_prec
    rows = _to_rows(A, mod)
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    col_perm = list(range(nc))
    pivots = []
    sign = 1
    r = 0
    while r < min(nr, nc):
        best = _min_pivot(rows, r, r, nc, p, N)
        if best is None:
            break
        v, i, j = best
        if v >= zero_prec:
            raise PrecisionAmbiguous(
                f"pivot of valuation {v} lies in the slack zone [{zero_prec}, {N})")
        if i != r:
            rows[r], rows[i] = rows[i], rows[r]
            sign = -sign
        if j != r:
            for row in rows:
                row[r], row[j] = row[j], row[r]
            col_perm[r], col_perm[j] = col_perm[j], col_perm[r]
            sign = -sign
        piv = rows[r][r]
        u_inv = pow(piv // p**v, -1, mod)
        for i2 in range(r + 1, nr):
            a = rows[i2][r]
            if a == 0:
                continue
            mult = (a // p**v) * u_inv % mod
            rows[i2] = [(x - mult * y) % mod for x, y in zip(rows[i2], rows[r])]
        pivots.append(piv)
        r += 1
    return r, pivots, sign, rows, col_perm


def rank_mod(A, p: int, N: int, zero_prec: int | None = None) -> int:
    if not A or not A[0]:
        return 0
    return echelon(A, p, N, zero_prec)[0]


def det_mod(A, p: int, N: int) -> int:
    """Determinant of a square matrix modulo ``p**N``."""
    n = len(A)
    rank, pivots, sign, _, _ = echelon(A, p, N)
    if rank < n:
        return 0
    d = sign
    for x in pivots:
        d = d * x % p**N
    return d % p**N


def solve_mod(A, b, p: int, N: int, tol: int | None = None):
    """Solve ``A x = b`` modulo ``p**N`` for ``A`` with full column rank.

    The columns of ``A`` must span a saturated lattice (some maximal minor is
    a unit); otherwise :class:`NoSolution` is raised.
    """
    mod = p**N
    nr, nc = len(A), len(A[0])
    aug = [[int(A[i][j]) % mod for j in range(nc)] + [int(b[i]) % mod] for i in range(nr)]
    where = []
    row = 0
    for col in range(nc):
        piv = next((i for i in range(row, nr) if aug[i][col] % p), None)
        if piv is None:
            raise NoSolution("system is not unimodular at this column")
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = pow(aug[row][col], -1, mod)
        aug[row] = [x * inv % mod for x in aug[row]]
        for i in range(nr):
            if i != row and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(x - f * y) % mod for x, y in zip(aug[i], aug[row])]
        where.append(row)
        row += 1
    tol = N if tol is None else tol
    for i in range(row, nr):
        if vp(aug[i][nc], p, N) < tol:
            raise NoSolution("inconsistent system")
    return [aug[where[c]][nc] for c in range(nc)]
