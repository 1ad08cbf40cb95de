"""Height-one Lubin-Tate formal groups generated by a Frobenius lift.

Group law, endomorphisms and logarithm are solved over ``Z_p`` at a guarded
precision (``N`` plus ``log_p M`` digits) and then reduced, so the stated
identities hold modulo ``p**N`` rather than merely ``p**(N - slack)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb

import numpy as np

from .arith import poly
from .arith.context import PadicScalar, PrecisionContext, vp
from .arith.rings import CyclotomicRing, Elt, UnramifiedRing, conv2, make_unramified, solve_omega
from .arith.series import MONOMIAL, TruncatedSeries, compose, constant, scalar_ring
from .errors import DegreeOverflow, IdentityFailure, NoSolution, PrecisionExhausted


@dataclass(frozen=True)
class FrobeniusLift:
    """Polynomial ``g`` with ``g(X) = pi X + ...`` and ``g = X**p mod p``.

    Coefficients are kept as exact integers so that the lift can be re-read at
    any working precision.
    """

    ctx: PrecisionContext
    coeffs: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        while len(c) > 2 and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)
        p = self.ctx.p
        if c[0] != 0:
            raise ValueError("a Frobenius lift has zero constant term")
        if len(c) < 2 or vp(c[1], p) != 1:
            raise ValueError("linear coefficient pi must have valuation exactly 1")
        for i, x in enumerate(c):
            want = 1 if i == p else 0
            if (x - want) % p:
                raise ValueError(f"g is not congruent to X^{p} mod {p} (coefficient {i})")

    @classmethod
    def multiplicative(cls, ctx: PrecisionContext) -> "FrobeniusLift":
        """``(1 + X)**p - 1``."""
        return cls(ctx, tuple([0] + [comb(ctx.p, i) for i in range(1, ctx.p + 1)]))

    @classmethod
    def from_pi(cls, ctx, pi: int, middle=None) -> "FrobeniusLift":
        """``pi X + (middle) + X**p``; ``middle`` maps degrees to coefficients."""
        c = [0] * (ctx.p + 1)
        c[1] = pi
        c[ctx.p] = 1
        for k, v in (middle or {}).items():
            c[k] = v
        return cls(ctx, tuple(c))

    @property
    def p(self):
        return self.ctx.p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def pi(self) -> PadicScalar:
        return PadicScalar.from_rational(self.ctx, self.coeffs[1])

    @property
    def alpha(self) -> PadicScalar:
        return PadicScalar.from_rational(self.ctx, Fraction(self.coeffs[1], self.p))

    def is_multiplicative(self) -> bool:
        return self.coeffs == FrobeniusLift.multiplicative(self.ctx).coeffs

    def at_precision(self, N: int) -> "FrobeniusLift":
        return FrobeniusLift(self.ctx.with_precision(N), self.coeffs)

    def at_context(self, ctx: PrecisionContext) -> "FrobeniusLift":
        return FrobeniusLift(ctx, self.coeffs)

    def int_poly(self):
        mod = self.ctx.modulus
        return [x % mod for x in self.coeffs]

    def series(self, ring: UnramifiedRing | None = None) -> TruncatedSeries:
        ring = ring or scalar_ring(self.ctx)
        if self.degree > self.ctx.M:
            raise DegreeOverflow("lift degree exceeds truncation")
        return TruncatedSeries.from_ints(ring, self.int_poly())

    def good_lift_issues(self):
        """Consequences of a good lift that are checked at runtime."""
        p = self.p
        issues = []
        if (self.coeffs[1] // p - 1) % p:
            issues.append("pi is not in p(1 + pZ_p)")
        if self.degree != p:
            issues.append("g is not a polynomial of degree p")
        elif (self.coeffs[p - 1] - p * self.coeffs[p]) % self.ctx.modulus:
            issues.append("coefficient of X^(p-1) is not p times the leading coefficient "
                          "(Tr(pi_1) != -p)")
        return issues

    def is_good(self) -> bool:
        return not self.good_lift_issues()

    # descriptors ---------------------------------------------------------
    def to_descriptor(self) -> dict:
        ctx = self.ctx
        mod = ctx.modulus
        return {
            "p": ctx.p, "N": ctx.N, "M": ctx.M,
            "pi": _digits(self.coeffs[1] % mod, ctx.p, ctx.N),
            "g": [_digits(c % mod, ctx.p, ctx.N) for c in self.coeffs],
        }

    @classmethod
    def from_descriptor(cls, desc: dict, ctx: PrecisionContext | None = None) -> "FrobeniusLift":
        ctx = ctx or PrecisionContext(desc["p"], desc["N"], desc["M"], desc.get("slack", 0))
        p = ctx.p
        mod = p ** desc["N"]
        coeffs = [_balanced(sum(d * p**i for i, d in enumerate(ds)), mod) for ds in desc["g"]]
        lift = cls(ctx, tuple(coeffs))
        if "pi" in desc:
            pi = sum(d * p**i for i, d in enumerate(desc["pi"]))
            if (pi - lift.coeffs[1]) % mod:
                raise ValueError("pi digits disagree with the linear coefficient of g")
        return lift


def _digits(x, p, N):
    out = []
    for _ in range(N):
        out.append(x % p)
        x //= p
    return out


def _balanced(x, mod):
    x %= mod
    return x - mod if x > mod // 2 else x


# bivariate series helpers -----------------------------------------------------

def _total_degree_mask(M):
    i, j = np.indices((M + 1, M + 1))
    return (i + j) <= M


def _bi_mul(A, B, mod, mask):
    M = A.shape[0] - 1
    C = conv2(A, B, mod)[: M + 1, : M + 1]
    return np.where(mask, C, 0)


def _bi_compose_univariate_outer(F, gx_pows, gy_pows, mod, mask):
    """``F(g(X), h(Y))`` from the powers of the univariate inner series."""
    M = F.shape[0] - 1
    out = np.zeros((M + 1, M + 1), dtype=object)
    for i in range(M + 1):
        for j in range(M + 1 - i):
            c = F[i, j]
            if c:
                out += c * np.outer(gx_pows[i], gy_pows[j])
    return np.where(mask, out % mod, 0)


def _series_pows(coeffs, M, mod, count=None):
    """Powers ``s**0 .. s**count`` (default ``count = M``) of an integer series, truncated."""
    pows = [np.array([1] + [0] * M, dtype=object)]
    s = np.array(list(coeffs[: M + 1]) + [0] * (M + 1 - len(coeffs[: M + 1])), dtype=object)
    for _ in range(M if count is None else count):
        pows.append(np.convolve(pows[-1], s)[: M + 1] % mod)
    return pows


def _poly_of_bivariate(gc, F, mod, mask):
    """``g(F(X, Y))`` for an integer polynomial ``g``."""
    M = F.shape[0] - 1
    out = np.zeros((M + 1, M + 1), dtype=object)
    power = np.zeros((M + 1, M + 1), dtype=object)
    power[0, 0] = 1
    for k, c in enumerate(gc):
        if k > 0:
            power = _bi_mul(power, F, mod, mask)
        if c:
            out = (out + c * power) % mod
    return out


class FormalGroup:
    """Formal group law attached to a Frobenius lift, truncated at total degree ``M``."""

    def __init__(self, lift: FrobeniusLift, law):
        self.lift = lift
        self.ctx = lift.ctx
        self.law = law  # (M+1, M+1) object array, F[i, j] = coefficient of X^i Y^j

    def coefficient(self, i, j) -> int:
        return int(self.law[i, j])

    @cached_property
    def log(self) -> TruncatedSeries:
        return formal_log(self)

    def apply(self, f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
        """``F(f(X), g(X))`` for univariate series with zero constant term."""
        R = f.ring if f.ring.m >= g.ring.m else g.ring
        f = f.change_ring(R).to_monomial().normalized()
        g = g.change_ring(R).to_monomial().normalized()
        M = self.ctx.M
        fp = [constant(R, 1)]
        gp = [constant(R, 1)]
        for _ in range(M):
            fp.append(fp[-1] * f)
            gp.append(gp[-1] * g)
        acc = TruncatedSeries.zero(R, polynomial=False)
        for i in range(M + 1):
            for j in range(M + 1 - i):
                c = int(self.law[i, j])
                if c:
                    acc = acc + (fp[i] * gp[j]) * c
        return TruncatedSeries(R, acc.coeffs, 0, MONOMIAL, False)

    def verify(self, degree: int | None = None) -> dict:
        """Check unit, commutativity, associativity and ``g o F = F(g, g)``."""
        ctx = self.ctx
        M = ctx.M if degree is None else degree
        mod = ctx.modulus
        F = self.law[: M + 1, : M + 1] % mod
        mask = _total_degree_mask(M)
        F = np.where(mask, F, 0)
        unit = all(int(F[i, 0]) == (1 if i == 1 else 0) for i in range(M + 1))
        comm = bool(np.array_equal(F, F.T))
        assoc = _associativity_defect(F, mod, M) == 0
        gc = self.lift.int_poly()
        g_pows = _series_pows(gc, M, mod)
        lhs = _poly_of_bivariate(gc, F, mod, mask)
        rhs = _bi_compose_univariate_outer(F, g_pows, g_pows, mod, mask)
        endo = bool(np.array_equal(lhs % mod, rhs % mod))
        return {"unit": unit, "commutative": comm, "associative": assoc, "frobenius_endomorphism": endo}


def _associativity_defect(F, mod, M):
    """Number of trivariate coefficients where F(F(X,Y),Z) and F(X,F(Y,Z)) differ."""
    mask = _total_degree_mask(M)
    # powers of F as bivariate arrays
    pows = [np.zeros((M + 1, M + 1), dtype=object)]
    pows[0][0, 0] = 1
    for _ in range(M):
        pows.append(_bi_mul(pows[-1], F, mod, mask))
    left = np.zeros((M + 1, M + 1, M + 1), dtype=object)   # indices (X, Y, Z)
    right = np.zeros((M + 1, M + 1, M + 1), dtype=object)
    for i in range(M + 1):
        for j in range(M + 1 - i):
            c = F[i, j]
            if not c:
                continue
            # F(F(X,Y), Z): c * F(X,Y)^i * Z^j
            left[:, :, j] += c * pows[i]
            # F(X, F(Y,Z)): c * X^i * F(Y,Z)^j
            right[i, :, :] += c * pows[j]
    idx = np.indices((M + 1,) * 3).sum(axis=0) <= M
    diff = np.where(idx, (left - right) % mod, 0)
    return int(np.count_nonzero(diff))


def group_law(lift: FrobeniusLift) -> FormalGroup:
    """Unique ``F = X + Y mod deg 2`` with ``g(F) = F(g(X), g(Y))``."""
    ctx = lift.ctx
    wctx = ctx.guarded()
    W, p, M = wctx.N, ctx.p, ctx.M
    mod = wctx.modulus
    gc = [c % mod for c in lift.coeffs]
    pi = lift.coeffs[1]
    mask = _total_degree_mask(M)
    F = np.zeros((M + 1, M + 1), dtype=object)
    F[1, 0] = F[0, 1] = 1
    g_pows = _series_pows(gc, M, mod)
    for t in range(2, M + 1):
        # only the degree-t part is new, so work with (t+1) x (t+1) truncations
        Ft = F[: t + 1, : t + 1]
        mt = _total_degree_mask(t)
        gp = [x[: t + 1] for x in g_pows[: t + 1]]
        lhs = _poly_of_bivariate(gc, Ft, mod, mt)
        rhs = _bi_compose_univariate_outer(Ft, gp, gp, mod, mt)
        E = (rhs - lhs) % mod
        denom = pi - pi**t  # pi (1 - pi^(t-1)), valuation 1
        u = denom // p
        uinv = pow(u % mod, -1, mod)
        for i in range(t + 1):
            e = int(E[i, t - i])
            if e % p:
                raise PrecisionExhausted(f"group law equation at degree {t} is not divisible by p")
            F[i, t - i] = (e // p) * uinv % mod
    law = np.where(mask, F % ctx.modulus, 0)
    group = FormalGroup(lift, law)
    group._working_law = F
    lhs = _poly_of_bivariate(lift.int_poly(), law, ctx.modulus, mask)
    rhs = _bi_compose_univariate_outer(law, _series_pows(lift.int_poly(), M, ctx.modulus),
                                       _series_pows(lift.int_poly(), M, ctx.modulus), ctx.modulus, mask)
    if not np.array_equal(lhs, rhs) or any(int(law[i, 0]) != (i == 1) for i in range(M + 1)):
        raise IdentityFailure("group law fails its defining identities")
    return group


def mult_by(a, group, degree: int | None = None) -> TruncatedSeries:
    """Endomorphism ``[a]`` characterised by ``[a] = aX mod deg 2`` and ``g o [a] = [a] o g``.

    ``group`` may be a :class:`FormalGroup` or just its :class:`FrobeniusLift`;
    ``degree`` overrides the truncation ``M``.
    """
    lift = group.lift if isinstance(group, FormalGroup) else group
    ctx = lift.ctx if degree is None else lift.ctx.with_degree(degree)
    wctx = ctx.guarded()
    p, M, mod = ctx.p, ctx.M, wctx.modulus
    if isinstance(a, PadicScalar):
        a = a.to_int()
    a = int(a) % mod
    gc = [c % mod for c in lift.coeffs]
    pi = lift.coeffs[1]
    g_pows = _series_pows(gc, M, mod)
    c = np.zeros(M + 1, dtype=object)
    c[1] = a
    left = c[1] * g_pows[1] % mod  # [a](g) built up incrementally
    for t in range(2, M + 1):
        cp = _series_pows(list(c[: t + 1]), t, mod, count=len(gc) - 1)
        right_t = sum(gc[k] * cp[k][t] for k in range(1, len(gc)) if gc[k]) % mod
        e = int((left[t] - right_t) % mod)
        # g([a]) has pi*c_t, [a](g) has c_t*pi^t: c_t (pi - pi^t) = e
        if e % p:
            raise PrecisionExhausted(f"[a] equation at degree {t} is not divisible by p")
        c[t] = (e // p) * pow(((pi - pi**t) // p) % mod, -1, mod) % mod
        left = (left + c[t] * g_pows[t]) % mod
    return TruncatedSeries.from_ints(scalar_ring(ctx), [int(x) % ctx.modulus for x in c], polynomial=False)


def formal_log(group: FormalGroup) -> TruncatedSeries:
    """``lambda_g`` with ``lambda(F(X,Y)) = lambda(X) + lambda(Y)``, normalised ``X + ...``.

    Computed from the invariant differential ``1 / F_Y(X, 0)``; the result
    carries exponent ``-floor(log_p M)`` so the stored coefficients are
    integral.
    """
    lift = group.lift
    ctx = lift.ctx
    wctx = ctx.guarded()
    p, M, mod = ctx.p, ctx.M, wctx.modulus
    law = getattr(group, "_working_law", group.law)
    dF = np.array([int(law[i, 1]) % mod for i in range(M + 1)], dtype=object)
    # inverse of the unit series dF
    h = [pow(int(dF[0]), -1, mod)]
    for j in range(1, M + 1):
        acc = sum(int(dF[i]) * h[j - i] for i in range(1, j + 1))
        h.append(-acc * h[0] % mod)
    e = 0
    while p ** (e + 1) <= M:
        e += 1
    coeffs = [0] * (M + 1)
    for j in range(1, M + 1):
        v = vp(j, p)
        u = j // p**v
        coeffs[j] = h[j - 1] * p ** (e - v) * pow(u, -1, mod) % mod
    return TruncatedSeries.from_ints(scalar_ring(ctx), [x % ctx.modulus for x in coeffs], polynomial=False,
                                     exp=-e)


def iterate_lift(lift: FrobeniusLift, n: int):
    """Exact integer polynomial ``g^(n) = g o ... o g`` (``g^(0) = X``)."""
    mod = lift.ctx.modulus
    out = [0, 1]
    gc = lift.int_poly()
    for _ in range(n):
        out = poly.compose(gc, out, mod)
    return out


def torsion_poly(lift: FrobeniusLift, n: int):
    """Monic ``E_n = g^(n) / g^(n-1)`` of degree ``p**(n-1) (p - 1)`` (ascending ints)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ctx = lift.ctx
    p, mod = ctx.p, ctx.modulus
    if (p - 1) * p ** (n - 1) > ctx.M:
        raise DegreeOverflow(f"E_{n} has degree {(p - 1) * p ** (n - 1)} > M = {ctx.M}")
    top = iterate_lift(lift, n)
    bottom = iterate_lift(lift, n - 1)
    q, r = poly.divmod_poly(top, bottom, mod)
    if any(r):
        raise IdentityFailure("g^(n-1) does not divide g^(n)")
    lead_inv = pow(q[-1], -1, mod)
    E = [c * lead_inv % mod for c in q]
    return E


def is_eisenstein(E, p: int, N: int) -> bool:
    mod = p**N
    return (E[-1] % p != 0 and vp(E[0] % mod, p, N) == 1
            and all(c % p == 0 for c in E[:-1]))


@dataclass
class EtaSeries:
    """Isomorphism ``eta`` from the multiplicative group to the lift's formal group."""

    series: TruncatedSeries
    omega: Elt
    lift: FrobeniusLift
    achieved_precision: int
    guarded: bool = False

    @property
    def ring(self) -> UnramifiedRing:
        return self.series.ring

    def twisted(self, k: int) -> TruncatedSeries:
        """``eta**(phi**k)`` (Frobenius applied ``k`` times to the coefficients)."""
        return self.series.frob(k)

    def verify(self, prec: int | None = None) -> bool:
        """``g o eta == eta^phi o ((1+X)**p - 1)`` coefficientwise."""
        R = self.ring
        g = self.lift.series(R)
        lhs = compose(g, self.series)
        mult = FrobeniusLift.multiplicative(self.lift.ctx).series(R)
        rhs = compose(self.series.frob(1), mult)
        return lhs.equals(rhs, prec)


def eta(lift: FrobeniusLift, R: UnramifiedRing, guard: bool = True) -> EtaSeries:
    """Solve for ``eta`` with linear coefficient ``Omega`` (``Omega^phi = alpha Omega``).

    Coefficients obey ``pi c_j - p**j phi(c_j) = K_j(c_1, .., c_{j-1})``; each
    is found by the contracting iteration ``c <- (K_j + p**j phi(c)) / pi``.
    When ``Omega`` also exists at the guarded precision the solve runs there
    and the result is exact modulo ``p**N``; otherwise the achieved precision
    drops by ``floor(log_p M)`` digits and is reported.
    """
    ctx = R.ctx
    wctx = lift.ctx.guarded().with_degree(ctx.M)
    wctx = PrecisionContext(ctx.p, wctx.N, ctx.M, ctx.slack)
    guarded = guard
    try:
        if not guard:
            raise NoSolution("guard digits disabled")
        Rw = make_unramified(wctx, R.m)
        if [c % ctx.modulus for c in Rw.modulus] != [int(c) for c in R.modulus]:
            raise NoSolution("working ring does not reduce to the target ring")
        omega_w = solve_omega(Rw, Fraction(lift.coeffs[1], ctx.p))
    except NoSolution:
        guarded = False
        Rw = R
        wctx = ctx
        omega_w = solve_omega(R, Fraction(lift.coeffs[1], ctx.p))
    coeffs = _eta_coefficients(lift.at_context(wctx), Rw, omega_w)
    c = np.array([[int(x) % ctx.modulus for x in row] for row in coeffs], dtype=object)
    series = TruncatedSeries(R, c, 0, MONOMIAL, False)
    omega = Elt(R, np.array([int(x) % ctx.modulus for x in omega_w.rep], dtype=object).astype(ctx.dtype))
    loss = 0 if guarded else _chain_loss(ctx.p, ctx.M)
    result = EtaSeries(series, omega, lift.at_context(ctx), ctx.N - loss, guarded)
    if lift.is_multiplicative():
        if not series.equals(TruncatedSeries.X(R), ctx.N):
            raise IdentityFailure("multiplicative lift must give eta = X")
        result.series = TruncatedSeries.X(R)
    return result


def _chain_loss(p, M):
    """Digits lost without guard: an error at degree j feeds degree p*j, each step dividing by pi."""
    e = 1
    while 2 * p**e <= M:
        e += 1
    return e


def _eta_coefficients(lift: FrobeniusLift, R: UnramifiedRing, omega: Elt):
    ctx = R.ctx
    p, M, mod = ctx.p, ctx.M, ctx.modulus
    pi = lift.coeffs[1]
    alpha_inv = pow((pi // p) % mod, -1, mod)
    gc = [c % mod for c in lift.coeffs]
    # H[:, i] = coefficients of ((1+X)^p - 1)^i
    h = [0] + [comb(p, i) for i in range(1, p + 1)]
    hp = _series_pows(h, M, mod)
    H = np.array(hp, dtype=object).T  # (M+1, M+1)
    C = np.zeros((M + 1, R.m), dtype=object)
    C[1] = omega.rep.astype(object)
    for j in range(2, M + 1):
        eta_lt = TruncatedSeries(R, C, 0, MONOMIAL, False)
        g_eta = _int_poly_of_series(gc, eta_lt)
        phiC = R.frob_rep(C.astype(ctx.dtype), 1).astype(object)
        rhs_j = H[j] @ phiC % mod
        K = (rhs_j - g_eta.coeffs[j].astype(object)) % mod
        if any(int(x) % p for x in K):
            raise PrecisionExhausted(f"eta equation at degree {j} is not divisible by pi")
        base = (K // p) * alpha_inv % mod  # K / pi
        c = base.copy()
        for _ in range(ctx.N + 1):
            phic = R.frob_rep(c.astype(ctx.dtype), 1).astype(object)
            nxt = (base + phic * (p ** (j - 1) % mod) * alpha_inv) % mod
            if np.array_equal(nxt, c):
                break
            c = nxt
        else:
            raise PrecisionExhausted(f"fixed-point iteration for eta did not settle at degree {j}")
        C[j] = c
    return C


def _int_poly_of_series(gc, s: TruncatedSeries) -> TruncatedSeries:
    R = s.ring
    out = TruncatedSeries.zero(R, polynomial=False)
    power = constant(R, 1)
    for k, c in enumerate(gc):
        if k > 0:
            power = power * s
        if c:
            out = out + power * int(c)
    return out


def eta_bar(e: EtaSeries | TruncatedSeries) -> TruncatedSeries:
    """Restriction to ``Z_p^x``: zero every binomial coefficient ``b_j`` with ``p | j``.

    On a truncated (non-polynomial) series the coefficient of ``X**i`` is
    reliable to about ``(M + 1 - i) / (p - 1) - 1`` digits; use
    :func:`eta_bar_value` for values at torsion points.
    """
    s = e.series if isinstance(e, EtaSeries) else e
    b = s.to_binomial()
    c = b.coeffs.astype(object).copy()
    c[:: s.ctx.p] = 0
    return b._new(c).in_basis(s.basis)


def eta_bar_value(e: EtaSeries, C: CyclotomicRing, frob_power: int = 0, level: int | None = None) -> Elt:
    """``bar-eta^(phi**k)(zeta_{p^j} - 1)`` realised in ``C`` (level ``j <= C.n``).

    Evaluated through the defining average over p-th roots of unity, which is
    exact up to the truncation tail of ``eta`` itself.
    """
    level = C.n if level is None else level
    p = C.ctx.p
    s = e.series.frob(frob_power)
    n = C.n
    zeta_j = C.zeta(p ** (n - level))
    val = s.evaluate(zeta_j - 1)
    avg = C.zero()
    zeta_p = C.zeta(p ** (n - 1))
    for t in range(p):
        pt = zeta_p**t * zeta_j - 1
        avg = avg + s.evaluate(pt)
    return val - avg * Fraction(1, p)


def eta_bar_at_zero(e: EtaSeries, frob_power: int = 0) -> Elt:
    """``bar-eta^(phi**k)(0) = -(1/p) sum_{zeta^p = 1} eta^(phi**k)(zeta - 1)``."""
    C = CyclotomicRing(e.ring, 1)
    s = e.series.frob(frob_power)
    total = C.zero()
    for t in range(1, C.ctx.p):
        total = total + s.evaluate(C.zeta(t) - 1)
    val = total * Fraction(-1, C.ctx.p)
    # Galois-invariant, so only the Y^0 row survives
    return Elt(e.ring, val.rep[0].copy(), val.exp)
