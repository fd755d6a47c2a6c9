"""Exception hierarchy for the series engine.

Every failure mode that a computation can hit maps to one of these classes,
so callers (and the CLI exit-code logic) can tell configuration problems,
precision exhaustion and genuine mathematical failures apart.
"""


class EngineError(Exception):
    """Base class for all engine errors."""


class ConfigError(EngineError):
    """Invalid ring / group / window parameters."""


class ParseError(EngineError):
    """Series text did not conform to the grammar."""

    def __init__(self, message: str, pos: int | None = None, expected: str | None = None):
        detail = message
        if pos is not None:
            detail += f" (at position {pos}"
            if expected:
                detail += f", expected {expected}"
            detail += ")"
        super().__init__(detail)
        self.pos = pos
        self.expected = expected


class PrecisionError(EngineError):
    """Base class for errors caused by running out of certified digits/window."""


class WindowUnderflow(PrecisionError):
    """The reliable exponent window of a series became empty, or a coefficient
    outside the reliable window was requested."""


class PrecisionExhausted(PrecisionError):
    """No certified p-adic digits remain."""


class DenominatorBudgetExceeded(PrecisionError):
    """A combined power of 1/p exceeded the configured denominator budget."""


class NotInvertible(EngineError):
    """No unit-monomial factorization exists within the window."""


class DivergentSubstitution(EngineError):
    """The pi-image of a substitution is not topologically nilpotent."""


class DecompositionFailed(PrecisionError):
    """The psi basis decomposition could not be solved within the window."""


class NotInDomain(EngineError):
    """Argument outside the operator's domain (e.g. (phi-1)-solver input
    with a nonzero constant-in-pi part)."""


class NonIntegralResidue(EngineError):
    """Denominators failed to cancel before a mod-p^j reduction.

    Raised (never silently rounded) by the trace-residue layer; it doubles
    as the diagnostic for precision or convention faults in the pairing.
    """


class NotInSimplifiedDomain(EngineError):
    """A cochain component lies outside the sector where the simplified
    cup/pairing formulas are valid."""


class UniquenessCheckFailed(EngineError):
    """The residual after solving a defining equation was nonzero within
    precision."""
