"""Explicit elements, character components, Pollack logarithms and Coleman maps.

Values of ``psi``-equivariant series at torsion points have Galois conjugates
``f(zeta**a - 1)``, so ``G_n`` is identified with ``(Z/p^n)^x`` through
``kappa`` and realised by ``zeta -> zeta**a`` on the level-``n`` cyclotomic
ring over the coefficient ring of ``eta``.

Character values live in a separate cyclotomic ring (the coefficient field
``F(theta)``); elements of ``K_n (x) F(theta)`` are kept as
:class:`ThetaTensor` objects so that the trace over ``K_n`` never touches the
character values.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith.context import PrecisionContext, vp
from .arith.linalg import det_mod, rank_mod
from .arith.rings import CyclotomicRing, Elt, UnramifiedRing, make_unramified
from .arith.series import TruncatedSeries, dee, divide_with_remainder, scalar_ring
from .errors import DegreeOverflow, IdentityFailure, NoSolution, PrecisionAmbiguous
from .lubin_tate import FrobeniusLift, eta, eta_bar
from .phi_module import DieudonneModule, DieudonneVector
from .tower import TowerElement, pi_prime_silent, tower_level


# characters ---------------------------------------------------------------------

def teichmuller(a: int, p: int, N: int) -> int:
    """``omega(a) = lim a**(p**j)`` modulo ``p**N``."""
    mod = p**N
    return pow(a % mod, p ** (N - 1), mod)


def primitive_root(p: int) -> int:
    """Smallest generator of ``(Z/p^2)^x`` (hence of every ``(Z/p^n)^x``)."""
    for g in range(2, p * p):
        if g % p and all(pow(g, (p - 1) * p // q, p * p) != 1 for q in _prime_factors((p - 1) * p)):
            return g
    raise ArithmeticError("no primitive root")


def _prime_factors(n):
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def units(p: int, n: int):
    return [a for a in range(1, p**n) if a % p]


@dataclass(frozen=True)
class Character:
    """``theta(a) = omega(a)**delta_power * zeta_{p^(n-1)}**(gamma_power * log_u <a>)``.

    ``omega`` is the Teichmuller character, ``<a> = a / omega(a)`` and ``u = 1 + p``
    generates ``1 + pZ_p``.
    """

    p: int
    n: int
    delta_power: int
    gamma_power: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("level must be >= 1")
        object.__setattr__(self, "delta_power", self.delta_power % (self.p - 1))
        object.__setattr__(self, "gamma_power", self.gamma_power % self.p ** (self.n - 1))

    @property
    def is_primitive(self) -> bool:
        """Does not factor through ``G_(n-1)``."""
        if self.n == 1:
            return self.delta_power != 0
        return self.gamma_power % self.p != 0

    def gamma_log(self, a: int) -> int:
        """``e`` with ``<a> = (1+p)**e`` modulo ``p**n``."""
        p, n = self.p, self.n
        mod = p**n
        w = teichmuller(a, p, n)
        target = a * pow(w, -1, mod) % mod
        cur = 1
        for e in range(p ** (n - 1)):
            if cur == target:
                return e
            cur = cur * (1 + p) % mod
        raise ArithmeticError("discrete logarithm failed")

    def value(self, a: int, T: CyclotomicRing) -> Elt:
        """``theta(a)`` in the character ring ``T`` (level ``max(n-1, 1)``)."""
        p = self.p
        N = T.ctx.N
        w = teichmuller(a, p, N)
        out = T.base.scalar(pow(w, self.delta_power, p**N))
        out = T.from_base(out)
        if self.n > 1 and self.gamma_power:
            e = self.gamma_power * self.gamma_log(a)
            out = out * T.zeta(e * p ** (T.n - (self.n - 1)))
        return out

    def inverse(self) -> "Character":
        return Character(self.p, self.n, -self.delta_power, -self.gamma_power)

    def descriptor(self) -> str:
        return f"w^{self.delta_power}*g^{self.gamma_power}"


def primitive_characters(p: int, n: int):
    if n == 1:
        return [Character(p, 1, c) for c in range(1, p - 1)]
    return [Character(p, n, c1, c2) for c1 in range(p - 1) for c2 in range(p ** (n - 1)) if c2 % p]


# setup ------------------------------------------------------------------------------

class ColemanSetup:
    """Lift, weight, coefficient ring and the isomorphism ``eta``, with cached evaluation rings."""

    def __init__(self, lift: FrobeniusLift, weight: int, gamma: int | None = None,
                 R: UnramifiedRing | None = None):
        self.lift = lift
        self.ctx = lift.ctx
        self.p = lift.p
        self.weight = weight
        self.module = DieudonneModule(self.p, weight)
        self.gamma = (1 + self.p) if gamma is None else int(gamma)
        if self.gamma % self.p != 1 or self.gamma == 1:
            raise ValueError("gamma must be = 1 mod p and different from 1")
        self.R = R or make_unramified(self.ctx, 1)
        self.eta = eta(lift, self.R)
        self._rings = {}
        self._theta_rings = {}
        self._series = {}
        self._values = {}

    def ring(self, n: int) -> CyclotomicRing:
        if n not in self._rings:
            self._rings[n] = CyclotomicRing(self.R, n)
        return self._rings[n]

    def theta_ring(self, n: int) -> CyclotomicRing:
        lvl = max(n - 1, 1)
        if lvl not in self._theta_rings:
            self._theta_rings[lvl] = CyclotomicRing(self.R, lvl)
        return self._theta_rings[lvl]

    @property
    def achieved_precision(self) -> int:
        return self.eta.achieved_precision

    def eta_bar_series(self, frob_power: int, r: int) -> TruncatedSeries:
        """``D**(-r) bar-eta^(phi**frob_power)``."""
        key = (frob_power, r)
        if key not in self._series:
            self._series[key] = dee(eta_bar(self.eta).frob(frob_power), -r)
        return self._series[key]

    def eta_bar_value(self, n: int, level: int, frob_power: int, r: int) -> Elt:
        """``D**(-r) bar-eta^(phi**frob_power)(zeta_{p^level} - 1)`` in the level-``n`` ring."""
        key = (n, level, frob_power, r)
        if key not in self._values:
            C = self.ring(n)
            point = C.zeta(self.p ** (n - level)) - 1
            self._values[key] = self.eta_bar_series(frob_power, r).evaluate(point)
        return self._values[key]

    def eta_bar_at_zero(self, r: int) -> Elt:
        return self.eta_bar_series(0, r).to_monomial().coefficient(0)

    def value_precision(self, n: int, r: int) -> int:
        """Absolute precision of ``D**(-r) bar-eta`` values at level ``n``."""
        s = self.eta_bar_series(-n, r)
        if s.polynomial:
            return self.ctx.N
        C = self.ring(n)
        prec = min(s.evaluation_precision(C.root()), self.eta.achieved_precision)
        if r > 0:
            prec = min(prec, (self.ctx.M + 1) // (self.p * (self.p - 1)))
        return int(prec)

    def torsion_point(self, m: int, n: int) -> Elt:
        """``pi_m = eta^(phi**(-m))(zeta_{p^m} - 1)`` in the level-``n`` ring."""
        C = self.ring(n)
        return self.eta.series.frob(-m).evaluate(C.zeta(self.p ** (n - m)) - 1)

    def from_tower(self, x: TowerElement, n: int) -> Elt:
        """Image of a tower element of level ``m <= n`` under ``pi_m -> torsion_point(m, n)``."""
        C = self.ring(n)
        m = x.level.n
        if m == 0:
            return C.from_base(self.R.scalar(x.to_fractions()[0]))
        P = self.torsion_point(m, n)
        acc = C.zero()
        for c in reversed(x.coords):
            acc = acc * P + int(c)
        return acc.shift(x.exp)


# explicit elements ---------------------------------------------------------------------

@dataclass
class GammaElement:
    """``gamma_{n,k}(xi)`` as a vector over the level-``n`` cyclotomic ring."""

    n: int
    k: int
    xi: DieudonneVector
    value: DieudonneVector
    closed_form: DieudonneVector | None = None
    agree: bool | None = None
    achieved_precision: int = 0

    def galois(self, a: int) -> DieudonneVector:
        return self.value.galois(a)


def _as_module(xi: DieudonneVector, module: DieudonneModule) -> DieudonneVector:
    return xi.in_module(module)


def gamma_transform(setup: ColemanSetup, n: int, k: int, xi: DieudonneVector) -> DieudonneVector:
    """``p**n gamma_{n,k}(xi)`` from the transform of ``mu_xi``.

    ``sum_{i<n} D**(-k) bar-eta^(phi**(i-n))(zeta_{p^(n-i)} - 1) (x) phi**(i-n)(xi_k)
    + (1 - phi)**(-1)(D**(-k) bar-eta(0) (x) xi_k)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    C = setup.ring(n)
    Dk = setup.module.twisted(k)
    xk = _as_module(xi, Dk)
    total = Dk.vector(C.zero(), C.zero())
    for i in range(n):
        c = setup.eta_bar_value(n, n - i, i - n, k)
        total = total + Dk.phi(xk, i - n).tensor(c)
    c0 = setup.eta_bar_at_zero(k)
    tail = Dk.one_minus_phi_inverse(xk.tensor(c0), semilinear=True)
    tail = Dk.vector(C.from_base(_as_elt(tail.a, setup.R)), C.from_base(_as_elt(tail.b, setup.R)))
    return total + tail


def _as_elt(x, R):
    return x if isinstance(x, Elt) else R.scalar(x)


def gamma_closed_form(setup: ColemanSetup, n: int, xi: DieudonneVector, literal: bool = False) -> DieudonneVector:
    """``p**n gamma_{n,0}(xi)`` through trace-free elements of the tower.

    ``sum_{i<n} pi'_{n-i} (x) phi**(i-n)(xi) - 1/(p-1) (x) phi**(-1)(xi) + (1 - phi)**(-1)(xi)``,
    valid for a good lift.  ``literal=True`` uses the printed variant
    ``sum_{i<=n} pi'_{n-i} (x) phi**(i-n)(xi) - 1/(p-1) (x) xi + (1 - phi)**(-1)(xi)``,
    which disagrees.
    """
    C = setup.ring(n)
    D = setup.module
    p = setup.p
    total = D.vector(C.zero(), C.zero())
    for i in range(n):
        pp = setup.from_tower(pi_prime_silent(tower_level(setup.lift, n - i)), n)
        total = total + D.phi(xi, i - n).tensor(pp)
    if literal:
        total = total + xi.tensor(C.one())
        corr = xi
    else:
        corr = D.phi(xi, -1)
    rest = corr.scaled(Fraction(-1, p - 1)) + D.one_minus_phi_inverse(xi)
    return total + rest.tensor(C.one())


def gamma_element(setup: ColemanSetup, n: int, k: int, xi: DieudonneVector) -> GammaElement:
    """``gamma_{n,k}(xi)``; for ``k = 0`` the closed form is computed and compared."""
    if k < 0:
        raise ValueError("k must be >= 0")
    scaled = gamma_transform(setup, n, k, xi)
    prec = setup.value_precision(n, k)
    closed = agree = None
    if k == 0:
        closed = gamma_closed_form(setup, n, xi)
        check = min(prec, setup.ctx.check_prec) - 1
        agree = scaled.equals(closed.in_module(scaled.module), check)
        closed = closed.scaled(Fraction(1, setup.p**n))
    value = scaled.scaled(Fraction(1, setup.p**n))
    return GammaElement(n, k, xi, value, closed, agree, prec - n)


# K_n (x) F(theta) --------------------------------------------------------------------------

@dataclass
class ThetaTensor:
    """``sum_i Y**i (x) comps[i]`` with ``Y**i`` the basis of the character ring ``T``."""

    T: CyclotomicRing
    C: CyclotomicRing
    comps: tuple

    @classmethod
    def zero(cls, T, C):
        return cls(T, C, tuple(C.zero() for _ in range(T.d)))

    @classmethod
    def from_pairs(cls, T, C, pairs):
        """``sum t (x) x`` over pairs ``(t in T, x in C)``."""
        comps = [C.zero() for _ in range(T.d)]
        for t, x in pairs:
            for i in range(T.d):
                row = t.rep[i]
                if np.any(row):
                    comps[i] = comps[i] + C.from_base(Elt(T.base, row, t.exp)) * x
        return cls(T, C, tuple(comps))

    def __add__(self, other):
        return ThetaTensor(self.T, self.C, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other):
        return ThetaTensor(self.T, self.C, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def scaled(self, c):
        return ThetaTensor(self.T, self.C, tuple(x * c for x in self.comps))

    def is_zero(self, prec=None) -> bool:
        return all(x.is_zero(prec) for x in self.comps)

    def traced_product(self, other) -> Elt:
        """``sum_{i,j} Y**(i+j) Tr_{K_n/K}(comps_i other_j)`` in ``T``."""
        powers = _powers(self.T)
        acc = self.T.zero()
        for i, a in enumerate(self.comps):
            if _vanishes(a):
                continue
            for j, b in enumerate(other.comps):
                if _vanishes(b):
                    continue
                acc = acc + powers[i + j] * self.T.from_base(self.C.trace(a * b))
        return acc

    def traced_against(self, other) -> Elt:
        """``traced_product`` for a plain ``K_n`` element (``self`` has one component)."""
        return other.traced_product(self)


def _vanishes(x: Elt) -> bool:
    return x.is_zero(x.ctx.N + x.exp)


def _powers(T: CyclotomicRing):
    cache = T.__dict__.setdefault("_basis_powers", [])
    if not cache:
        Y = T.root()
        cache.append(T.one())
        for _ in range(2 * T.d):
            cache.append(cache[-1] * Y)
    return cache


@dataclass
class ThetaVector:
    """``omega`` and ``phi omega`` coordinates, each a :class:`ThetaTensor`."""

    a: ThetaTensor
    b: ThetaTensor

    def __add__(self, other):
        return ThetaVector(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return ThetaVector(self.a - other.a, self.b - other.b)

    def is_zero(self, prec=None) -> bool:
        return self.a.is_zero(prec) and self.b.is_zero(prec)

    def in_filtration(self, prec=None) -> bool:
        return self.b.is_zero(prec)

    def pair(self, other) -> Elt:
        """``[x, y] = x_omega y_phi - x_phi y_omega``, traced over ``K_n``."""
        return self.a.traced_product(other.b) - self.b.traced_product(other.a)


def _check_theta(setup: ColemanSetup, n: int, theta: Character):
    if theta.p != setup.p or theta.n != n:
        raise ValueError("character level mismatch")
    if not theta.is_primitive:
        raise ValueError("character factors through G_(n-1)")


def theta_component(setup: ColemanSetup, n: int, theta: Character, k: int, xi: DieudonneVector) -> ThetaVector:
    """``(1/p**n) sum_a D**(-k) bar-eta^(phi**(-n))(zeta**a - 1) theta(a) (x) phi**(-n)(xi_k)``."""
    _check_theta(setup, n, theta)
    C, T = setup.ring(n), setup.theta_ring(n)
    x = setup.eta_bar_value(n, n, -n, k)
    pairs = [(theta.value(a, T), C.galois(x, a)) for a in units(setup.p, n)]
    s = ThetaTensor.from_pairs(T, C, pairs).scaled(Fraction(1, setup.p**n))
    Dk = setup.module.twisted(k)
    v = Dk.phi(_as_module(xi, Dk), -n)
    return ThetaVector(s.scaled(v.a), s.scaled(v.b))


def theta_full_sum(setup: ColemanSetup, n: int, theta: Character, k: int, xi: DieudonneVector) -> ThetaVector:
    """``theta(sum_sigma gamma_{n,k}(xi)**sigma sigma)`` by brute force over all of ``G_n``."""
    _check_theta(setup, n, theta)
    C, T = setup.ring(n), setup.theta_ring(n)
    g = gamma_transform(setup, n, k, xi).scaled(Fraction(1, setup.p**n))
    pa, pb = [], []
    for a in units(setup.p, n):
        t = theta.value(a, T)
        pa.append((t, C.galois(g.a, a)))
        pb.append((t, C.galois(g.b, a)))
    return ThetaVector(ThetaTensor.from_pairs(T, C, pa), ThetaTensor.from_pairs(T, C, pb))


@dataclass
class DualInput:
    """Values ``y_a`` in ``K_n (x) D**0`` indexed by ``a`` in ``(Z/p^n)^x``; unspecified entries are 0."""

    n: int
    family: dict = field(default_factory=dict)
    module: DieudonneModule | None = None

    def __post_init__(self):
        for a, y in self.family.items():
            if a % y.module.p == 0:
                raise ValueError("indices must be units")
            if not y.module.in_filtration(y):
                raise ValueError(f"y_{a} is not in K_n (x) D^0")

    @classmethod
    def spike(cls, n: int, a: int, y: DieudonneVector) -> "DualInput":
        return cls(n, {a % y.module.p**n: y})


def dual_sum(setup: ColemanSetup, theta: Character, dual: DualInput) -> ThetaVector:
    """``sum_a y_a theta(a**(-1))``."""
    n = dual.n
    C, T = setup.ring(n), setup.theta_ring(n)
    inv = theta.inverse()
    pa, pb = [], []
    for a, y in sorted(dual.family.items()):
        t = inv.value(a, T)
        pa.append((t, _in_ring(y.a, C)))
        pb.append((t, _in_ring(y.b, C)))
    return ThetaVector(ThetaTensor.from_pairs(T, C, pa), ThetaTensor.from_pairs(T, C, pb))


def _in_ring(x, C: CyclotomicRing) -> Elt:
    if isinstance(x, Elt):
        if x.ring is C:
            return x
        if x.ring is C.base:
            return C.from_base(x)
        if isinstance(x.ring, CyclotomicRing):
            return C.embed_lower(x)
        raise TypeError("coefficient from an unrelated ring")
    if isinstance(x, (int, Fraction)):
        return C.from_base(C.base.scalar(x))
    raise TypeError(f"cannot place {type(x).__name__} in the cyclotomic ring")


def L_value(setup: ColemanSetup, n: int, theta: Character, k: int, xi: DieudonneVector, dual: DualInput) -> Elt:
    """``k! [theta-component, sum_a y_a theta(a**(-1))]_n`` (``h = 1``)."""
    if dual.n != n:
        raise ValueError("level mismatch between character and dual input")
    comp = theta_component(setup, n, theta, k, xi)
    return comp.pair(dual_sum(setup, theta, dual)) * math.factorial(k)


def spikes(setup: ColemanSetup, n: int, basis=None):
    """Spanning family of dual inputs: ``Y**j (x) omega`` at each ``a``."""
    C = setup.ring(n)
    D = setup.module
    if basis is None:
        basis = [C.root() ** j for j in range(C.d)]
    for a in units(setup.p, n):
        for j, c in enumerate(basis):
            yield a, j, DualInput.spike(n, a, D.omega.tensor(c))


def parity_expected_zero(n: int, sign: str) -> bool:
    """``L_{xi+}`` vanishes at odd ``n``, ``L_{xi-}`` at even ``n``."""
    return (n % 2 == 1) if sign == "+" else (n % 2 == 0)


ZERO, NONZERO, AMBIGUOUS = "zero", "nonzero", "ambiguous"


def classify_value(setup: ColemanSetup, val: Elt, n: int, r: int) -> str:
    """``zero`` when the value vanishes to full precision, ``nonzero`` when its
    valuation is below the inputs' absolute precision minus the slack,
    ``ambiguous`` otherwise."""
    if val.is_zero(val.exp + setup.ctx.N):
        return ZERO
    prec = val.exp + min(setup.value_precision(n, r), setup.ctx.N) - setup.ctx.slack
    return NONZERO if val.valuation < prec else AMBIGUOUS


def parity_cell(setup: ColemanSetup, n: int, theta: Character, r: int, sign: str, duals=None):
    """Classify ``L`` over a family of dual inputs (default: all basis spikes).

    Returns ``(verdict, witness)``: ``nonzero`` with the first certified
    non-zero value, ``zero`` if every value vanishes, ``ambiguous`` otherwise.
    For the basis spike ``Y**j (x) omega`` at ``a`` the value is
    ``-r! theta(a)**(-1) S_j`` with ``S_j = sum_i Y**i Tr(x_i Y**j)`` built from
    the ``phi omega`` part ``x`` of the character component; ``S_j`` is
    computed once and reused for every ``a``.
    """
    xi = setup.module.xi(sign)
    comp = theta_component(setup, n, theta, r, xi)
    fact = math.factorial(r)
    if duals is None:
        C, T = setup.ring(n), setup.theta_ring(n)
        Y = C.root()
        S = []
        cj = C.one()
        for j in range(C.d):
            S.append(ThetaTensor(T, C, (cj,)).traced_against(comp.b))
            cj = cj * Y
        inv = theta.inverse()
        values = ((a, j, -(inv.value(a, T) * S[j]) * fact) for a in units(setup.p, n) for j in range(C.d))
    else:
        values = ((a, j, comp.pair(dual_sum(setup, theta, dual)) * fact) for a, j, dual in duals)
    verdict = ZERO
    for a, j, val in values:
        c = classify_value(setup, val, n, r)
        if c == NONZERO:
            return NONZERO, {"a": a, "basis_index": j, "valuation": str(val.valuation)}
        if c == AMBIGUOUS:
            verdict = AMBIGUOUS
    return verdict, None


# Lambda ------------------------------------------------------------------------------------------

@dataclass
class LambdaSeries:
    """Element of ``O[Delta][[T]]`` stored in the group basis ``delta_{g**i}``, ``u = 1 + T``."""

    comps: tuple
    gamma: int

    @property
    def ctx(self) -> PrecisionContext:
        return self.comps[0].ctx

    @property
    def p(self) -> int:
        return self.ctx.p

    @classmethod
    def scalar_series(cls, f: TruncatedSeries, gamma: int) -> "LambdaSeries":
        """``f`` placed on the identity of ``Delta`` (acts as ``f`` on every character)."""
        zero = f * 0
        return cls((f,) + tuple(zero for _ in range(f.ctx.p - 2)), gamma)

    @classmethod
    def from_characters(cls, chars, gamma: int) -> "LambdaSeries":
        """Inverse of :meth:`characters`: ``c_i = (1/(p-1)) sum_j omega(g)**(-ij) F_j``."""
        ctx = chars[0].ctx
        p, N = ctx.p, ctx.N
        t = teichmuller(primitive_root(p), p, N)
        tinv = pow(t, -1, p**N)
        comps = []
        for i in range(p - 1):
            acc = chars[0] * 0
            for j, F in enumerate(chars):
                acc = acc + F * pow(tinv, i * j, p**N)
            comps.append(acc * Fraction(1, p - 1))
        return cls(tuple(comps), gamma)

    def characters(self):
        """Components ``F_j = sum_i omega(g)**(ij) c_i`` for the characters ``omega**j`` of ``Delta``."""
        p, N = self.p, self.ctx.N
        t = teichmuller(primitive_root(p), p, N)
        out = []
        for j in range(p - 1):
            acc = self.comps[0] * 0
            for i, c in enumerate(self.comps):
                acc = acc + c * pow(t, i * j, p**N)
            out.append(acc)
        return out

    def __add__(self, other):
        return LambdaSeries(tuple(a + b for a, b in zip(self.comps, other.comps)), self.gamma)

    def __mul__(self, other):
        if not isinstance(other, LambdaSeries):
            return LambdaSeries(tuple(c * other for c in self.comps), self.gamma)
        prod = [a * b for a, b in zip(self.characters(), other.characters())]
        return LambdaSeries.from_characters(prod, self.gamma)

    def equals(self, other, prec=None) -> bool:
        return all(a.equals(b, prec) for a, b in zip(self.comps, other.comps))

    def evaluate(self, delta_power: int, x: Elt) -> Elt:
        """``omega**delta_power`` component at ``u = x`` (``T = x - 1``)."""
        return self.characters()[delta_power % (self.p - 1)].evaluate(x - 1)


def log_factor(ring: UnramifiedRing, m: int, j: int, gamma: int) -> TruncatedSeries:
    """``Phi_m(gamma**(-j) (1 + T)) / p`` as a polynomial in ``T``."""
    ctx = ring.ctx
    p, N, mod = ctx.p, ctx.N, ctx.modulus
    deg = (p - 1) * p ** (m - 1)
    if deg > ctx.M:
        raise DegreeOverflow(f"Phi_{m} has degree {deg} > M = {ctx.M}")
    ginv = pow(gamma, -j, mod)
    c = [0] * (deg + 1)
    for i in range(p):
        e = i * p ** (m - 1)
        s = pow(ginv, e, mod)
        for t in range(e + 1):
            c[t] = (c[t] + s * math.comb(e, t)) % mod
    return TruncatedSeries.from_ints(ring, c, exp=-1)


def factor_value(m: int, j: int, gamma: int, x: Elt) -> Elt:
    """``Phi_m(gamma**(-j) x) / p`` evaluated directly in the ring of ``x``."""
    p = x.ctx.p
    y = x * pow(gamma, -j, x.ctx.modulus)
    acc = x.ring.zero()
    for i in range(p):
        acc = acc + y ** (i * p ** (m - 1))
    return acc * Fraction(1, p)


def log_indices(sign: str, n_max: int):
    """Cyclotomic indices: ``2n`` for ``+``, ``2n - 1`` for ``-``."""
    if sign not in "+-" or len(sign) != 1:
        raise ValueError("sign must be '+' or '-'")
    return [2 * n if sign == "+" else 2 * n - 1 for n in range(1, n_max + 1)]


@dataclass
class PollackLog:
    series: LambdaSeries
    factors: list
    degree: int
    achieved_precision: int


def pollack_log(ctx: PrecisionContext, kweight: int, sign: str, n_max: int, gamma: int | None = None) -> PollackLog:
    """``prod_{j=0}^{k-2} prod_{n=1}^{n_max} Phi_{2n or 2n-1}(gamma**(-j) u) / p``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p = ctx.p
    gamma = (1 + p) if gamma is None else gamma
    R = scalar_ring(ctx)
    f = TruncatedSeries.from_ints(R, [1])
    factors = []
    degree = 0
    for j in range(kweight - 1):
        for m in log_indices(sign, n_max):
            fac = log_factor(R, m, j, gamma)
            degree += (p - 1) * p ** (m - 1)
            if degree > ctx.M:
                raise DegreeOverflow(f"log product has degree {degree} > M = {ctx.M}")
            f = f * fac
            factors.append((m, j))
    return PollackLog(LambdaSeries.scalar_series(f, gamma), factors, degree, ctx.N + f.exp)


def character_point(C: CyclotomicRing, j: int, gamma: int, zeta_power: int = 1) -> Elt:
    """``u -> gamma**j zeta`` with ``zeta = zeta_{p^level}**zeta_power``; the specialisation ``kappa**j theta``."""
    return C.zeta(zeta_power) * pow(gamma, j, C.ctx.modulus)


def log_zero_expected(sign: str, order_level: int, n_max: int) -> bool:
    """``log+`` vanishes when ``theta(u)`` has order ``p**m`` with ``m`` even and positive, ``log-`` with ``m`` odd."""
    if order_level < 1:
        return False
    return order_level in log_indices(sign, n_max)


@dataclass
class DivisionVerdict:
    quotient: LambdaSeries
    divisible: bool
    remainder_valuations: list
    achieved_precision: int


def coleman_divide(L: LambdaSeries, kweight: int, sign: str, n_max: int = 1) -> DivisionVerdict:
    """Divide every ``Delta``-character component of ``L`` by ``log±``."""
    ctx = L.ctx
    log = pollack_log(ctx, kweight, sign, n_max, L.gamma).series.characters()[0]
    quots, rems, achieved = [], [], ctx.N
    for F in L.characters():
        if F.is_zero(ctx.N):
            quots.append(F * 0)
            rems.append(ctx.N)
            continue
        res = divide_with_remainder(F, log)
        quots.append(res.quotient)
        rems.append(res.remainder_valuation)
        achieved = min(achieved, res.achieved_precision)
    divisible = all(r >= ctx.check_prec for r in rems)
    if divisible and achieved < ctx.check_prec:
        raise PrecisionAmbiguous(f"remainders vanish but division is only certified to p^{achieved}")
    return DivisionVerdict(LambdaSeries.from_characters(quots, L.gamma), divisible, rems, achieved)


# relative case ---------------------------------------------------------------------------------------

@dataclass
class RelativeReport:
    d: int
    zeta0: Elt
    path_a: list
    path_b: list
    paths_agree: bool
    power_basis_ok: bool
    determinant: int
    unit: bool
    lambda_congruence: bool


def relative_lift(R: UnramifiedRing, zeta0: Elt, middle=None, linear=None):
    """Coefficients of ``g = w X + ... + zeta0 p X**(p-1) + X**p`` over ``R``.

    ``middle`` gives the ``X**2 .. X**(p-2)`` coefficients (multiples of ``p``);
    ``linear`` defaults to ``p``.
    """
    p = R.ctx.p
    coeffs = [R.zero(), R.scalar(p) if linear is None else linear]
    middle = list(middle or [])
    for i in range(2, p - 1):
        c = middle[i - 2] if i - 2 < len(middle) else R.zero()
        if c.valuation < 1:
            raise ValueError("middle coefficients must be divisible by p")
        coeffs.append(c)
    coeffs.append(zeta0 * p)
    coeffs.append(R.one())
    if coeffs[1].valuation != 1:
        raise ValueError("linear coefficient must have valuation 1")
    return coeffs


def _coords(x: Elt):
    return [int(c) for c in x.integral_rep()]


def root_of_unity(R: UnramifiedRing, order: int) -> Elt:
    """First (in digit order) primitive ``order``-th root of unity of ``R``, a Teichmuller lift."""
    p, N, m = R.ctx.p, R.ctx.N, R.m
    q = p**m
    if (q - 1) % order:
        raise NoSolution(f"no primitive {order}-th root of unity in degree {m}")
    for idx in range(1, q):
        digits = [(idx // p**i) % p for i in range(m)]
        x = R.element(np.array(digits, dtype=object).astype(R.ctx.dtype))
        w = x ** (q ** (N - 1))
        z = w ** ((q - 1) // order)
        if all(not (z ** (order // ell) - 1).is_zero(N) for ell in _prime_factors(order)):
            return z
    raise NoSolution(f"no primitive {order}-th root of unity found")


def relative_independence(ctx: PrecisionContext, d: int, zeta0_order: int | None = None, g=None,
                          weight: int = 4) -> RelativeReport:
    """Independence of ``bar-eta_i^phi(0)``, ``i < d``, for the cycle of lifts ``g_i = phi**i(g)``.

    Path (a) reads ``-(1/p) (sum of roots of g_(i+1))`` off the ``X**(p-1)``
    coefficient; path (b) is ``phi**(i+1)(zeta0)``.  ``zeta0`` is a primitive
    root of unity of order ``zeta0_order`` (default ``p**d - 1``; order 1 gives
    ``zeta0 = 1``).
    """
    p, N = ctx.p, ctx.N
    R = make_unramified(ctx, d)
    zeta0_order = p**d - 1 if zeta0_order is None else zeta0_order
    zeta0 = root_of_unity(R, zeta0_order)
    # O_K = Z_p[zeta0]: the power basis has unit determinant
    powers = [R.one()]
    for _ in range(d - 1):
        powers.append(powers[-1] * zeta0)
    A = np.array([_coords(x) for x in powers], dtype=object).T.tolist()
    power_basis_ok = rank_mod(A, p, N) == d and vp(det_mod(A, p, N), p, N) == 0
    if not power_basis_ok:
        raise NoSolution("O_K is not Z_p[zeta0] for this zeta0")
    if g is None:
        g = relative_lift(R, zeta0)
    else:
        # coefficients may come from another copy of the degree-d ring
        g = [R.element(c.rep, c.exp) for c in g]
    if len(g) != p + 1 or not g[p].equals(R.one(), N):
        raise ValueError("g must be monic of degree p")
    if not g[p - 1].equals(zeta0 * p, N):
        raise ValueError("the X^(p-1) coefficient of g must be zeta0 * p")
    path_a, path_b = [], []
    for i in range(d):
        gi1 = [c.frob(i + 1) for c in g]
        root_sum = -gi1[p - 1]  # monic: sum of roots
        path_a.append(root_sum * Fraction(-1, p))
        path_b.append(zeta0.frob(i + 1))
    agree = all(a.equals(b, ctx.check_prec - 1) for a, b in zip(path_a, path_b))
    if not agree:
        raise IdentityFailure("bar-eta_i^phi(0) != phi^(i+1)(zeta0)")
    M = np.array([_coords(x) for x in path_b], dtype=object).T.tolist()
    det = det_mod(M, p, N)
    unit = vp(det, p, N) == 0
    # combo(bar-eta_i(0) (x) xi-) = lambda bar-eta_i^phi(0) (x) phi(omega) mod D^0
    D = DieudonneModule(p, weight)
    cong = True
    for i in range(d):
        c = zeta0.frob(i)
        out = D.combo(D.omega.tensor(c), semilinear=True)
        target = path_b[i] * D.lambda_value
        shift = min(0, vp(D.lambda_value, p))
        cong &= out.b.equals(target, ctx.check_prec + shift)
    return RelativeReport(d, zeta0, path_a, path_b, agree, power_basis_ok, int(det), unit, bool(cong))


# reports --------------------------------------------------------------------------------------------

def parity_table(setup: ColemanSetup, levels, twists=None, basis=None):
    """Rows ``(n, theta, r, sign, zero, expected, witness)`` over primitive characters."""
    twists = range(setup.weight - 1) if twists is None else twists
    rows = []
    for n in levels:
        for theta in primitive_characters(setup.p, n):
            for r in twists:
                for sign in "+-":
                    duals = None if basis is None else spikes(setup, n, basis(setup, n))
                    verdict, wit = parity_cell(setup, n, theta, r, sign, duals)
                    rows.append({
                        "n": n, "theta": theta.descriptor(), "r": r, "sign": sign,
                        "verdict": verdict, "expected_zero": parity_expected_zero(n, sign),
                        "witness": wit,
                    })
    return rows


def gamma_table(setup: ColemanSetup, levels, twists=(0,)):
    rows = []
    for n in levels:
        for k in twists:
            for sign in "+-":
                ge = gamma_element(setup, n, k, setup.module.xi(sign))
                rows.append({
                    "n": n, "k": k, "sign": sign,
                    "omega_coord": _digits(ge.value.a), "phi_omega_coord": _digits(ge.value.b),
                    "closed_form_agrees": ge.agree, "achieved_precision": ge.achieved_precision,
                })
    return rows


def _digits(x: Elt):
    return {"exp": x.exp, "rep": [[int(c) for c in row] for row in np.atleast_2d(x.rep)]}


def to_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=str)
