"""Exception hierarchy shared by every module of the package."""


class TorsionTracesError(Exception):
    """Base class for all package errors."""


class MalformedSpec(TorsionTracesError):
    """A group spec document could not be parsed."""


class InvalidSpec(TorsionTracesError):
    """A group spec document parsed but violates a semantic constraint."""


class MixedSpecs(TorsionTracesError):
    """Operands belong to different groups."""


class InfiniteOrder(TorsionTracesError):
    """A torsion element was required but the element has infinite order."""


class DuplicateOrders(TorsionTracesError):
    """Witnesses passed to the trace matrix share an order."""


class ModeMismatch(TorsionTracesError):
    """Algebra operands use different coefficient modes."""


class ResourceLimit(TorsionTracesError):
    """A projected enumeration exceeds the configured cap."""


class UnsupportedClass(TorsionTracesError):
    """The closed-form shell counter only handles torsion classes."""


class InsufficientData(TorsionTracesError):
    """Too few nonzero shells to fit a growth model."""


class ProfileMismatch(TorsionTracesError):
    """A conjugacy profile does not cover the data it is checked against."""


class ScheduleInvalid(TorsionTracesError):
    """A shell schedule fails its defining inequality against a profile."""


class MalformedWord(TorsionTracesError, ValueError):
    """A serialized element word could not be parsed."""
