"""Even and odd Coleman maps over Lubin-Tate towers, computed at fixed p-adic precision."""
from .arith import (INF, CyclotomicRing, Elt, PadicScalar, PrecisionContext, UnramifiedRing,
                    make_unramified, solve_omega, vp)
from .arith.series import TruncatedSeries
from .errors import (DegreeOverflow, IdentityFailure, LTColemanError, NoSolution, PrecisionAmbiguous,
                     PrecisionExhausted, ResourceLimit)

__version__ = "0.1.0"
