"""Exception types shared across the package."""


class ChevElemError(Exception):
    """Base class for all package errors."""


class BaseMismatch(ChevElemError):
    """Operands live over different base rings or variable counts."""


class ParseError(ChevElemError):
    """Malformed polynomial text or input file."""


class NotMonic(ChevElemError):
    """Divisor is not monic in the distinguished variable."""


class SearchBoundExceeded(ChevElemError):
    """Annihilator search undecided within the caller-supplied bound."""


class RankTooLow(ChevElemError):
    """Root system rank below 2; rank-1 groups are not supported."""


class UnsupportedType(ChevElemError):
    """Root system type outside {A, C}."""


class UnknownRoot(ChevElemError):
    """Vector is not a root of the given root system."""


class ProportionalRoots(ChevElemError):
    """Commutator expansion needs a non-proportional root pair."""


class NotAUnit(ChevElemError):
    """Element is not invertible in the base ring."""


class SizeMismatch(ChevElemError):
    """Matrix size does not match the root system's matrix model."""


class PreconditionViolated(ChevElemError):
    """Operation preconditions do not hold for the given inputs."""


class DescentBudgetExceeded(ChevElemError):
    """Descent search exhausted its budget; no word is emitted."""


class CoveringInconsistent(ChevElemError):
    """Covering data fails its unit-ideal or consistency checks."""


class NotInGroup(ChevElemError):
    """Matrix fails the group-membership invariant (det or form check)."""


class NotFactored(ChevElemError):
    """Budget exhausted before a certificate was produced.

    This is a resource signal, never a disproof of membership.
    """
