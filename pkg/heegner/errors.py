"""Exception hierarchy for the Heegner engine."""


class HeegnerError(RuntimeError):
    """Root of every error raised by the library."""


class InputError(HeegnerError, ValueError):
    """A request, field, or argument is outside the supported domain."""


class TwistCaseError(InputError):
    """Level data at 2 arises by twisting a lower level and is not modelled."""


class SigmaError(InputError):
    """A ramification set violates a structural rule."""


class AssumptionViolation(HeegnerError):
    """An elliptic-mode analysis hit a configuration the existence argument excludes."""


class OracleBudgetError(HeegnerError):
    """The brute-force search exceeded its node budget."""


class PrecisionError(HeegnerError):
    """The requested p-adic precision is too small for the model or query."""
