"""Two-variable (phi,G)-operator calculus over Galois rings.

Truncated Laurent series in T and pi over W(F_{p^f})/p^m, the Frobenius /
psi / Galois operator algebra on them, residues of 2-forms, the level-n
cochain complexes and Kummer map, and the closed-form higher Hilbert
pairing exponent with an independent cohomological cross-check.
"""

from .coeffring import CoeffElem, CoeffRing, RingParams, get_ring
from .errors import (
    ConfigError,
    DecompositionFailed,
    DenominatorBudgetExceeded,
    DivergentSubstitution,
    EngineError,
    NonIntegralResidue,
    NotInDomain,
    NotInSimplifiedDomain,
    NotInvertible,
    ParseError,
    PrecisionError,
    PrecisionExhausted,
    UniquenessCheckFailed,
    WindowUnderflow,
)
from .laurent import Series, SeriesRing, Window, default_window

__version__ = "0.1.0"

__all__ = [
    "CoeffElem",
    "CoeffRing",
    "RingParams",
    "get_ring",
    "Series",
    "SeriesRing",
    "Window",
    "default_window",
    "EngineError",
    "ConfigError",
    "ParseError",
    "PrecisionError",
    "WindowUnderflow",
    "PrecisionExhausted",
    "DenominatorBudgetExceeded",
    "NotInvertible",
    "DivergentSubstitution",
    "DecompositionFailed",
    "NotInDomain",
    "NonIntegralResidue",
    "NotInSimplifiedDomain",
    "UniquenessCheckFailed",
    "__version__",
]
