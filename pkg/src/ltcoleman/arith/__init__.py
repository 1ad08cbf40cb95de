"""Exact truncated p-adic arithmetic: scalars, rings, series."""
from .context import INF, PadicScalar, PrecisionContext, vp
from .rings import CyclotomicRing, Elt, UnramifiedRing, make_unramified, solve_omega

__all__ = [
    "INF",
    "PadicScalar",
    "PrecisionContext",
    "vp",
    "CyclotomicRing",
    "Elt",
    "UnramifiedRing",
    "make_unramified",
    "solve_omega",
]
