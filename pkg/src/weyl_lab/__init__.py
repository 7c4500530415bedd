"""weyl_lab: computation and exploration of small values of Weyl sums.

Modules:

* ``sumcore``  — direct and incremental evaluation of S_d(x;N)
* ``exactzero`` — integer certificates for vanishing complete sums
* ``families`` — rational point families and Diophantine constructions
* ``perturb``  — incomplete-sum bound scans and continuity verification
* ``explore``  — liminf proxies, orbits, growth bands, distributions
* ``fractal``  — box counting and the random Cantor measure
* ``cli``      — command-line interface over all of the above
"""

from .errors import (
    CapacityError,
    ContractError,
    HypothesisViolationError,
    NumericError,
    PrimeSearchError,
    WeylLabError,
)
from .exactzero import RationalPoint, certify_zero
from .sumcore import TorusPoint, eval_direct, eval_incremental, trace

__version__ = "1.0.0"

__all__ = [
    "CapacityError",
    "ContractError",
    "HypothesisViolationError",
    "NumericError",
    "PrimeSearchError",
    "RationalPoint",
    "TorusPoint",
    "WeylLabError",
    "certify_zero",
    "eval_direct",
    "eval_incremental",
    "trace",
    "__version__",
]
