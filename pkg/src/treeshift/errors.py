"""Exception hierarchy.

Each class carries the process exit code the CLI uses when it escapes.
"""


class TreeShiftError(Exception):
    exit_code = 2
    code = "error"


class InputError(TreeShiftError, ValueError):
    """Malformed matrix, window, pattern or file."""

    code = "input"


class ResourceBudgetError(TreeShiftError):
    """An enumeration would exceed the configured budget."""

    exit_code = 3
    code = "budget"


class UnresolvedDistance(TreeShiftError):
    """A comparison ``d < eps`` cannot be decided at the available depth."""

    code = "unresolved"


class PreconditionError(TreeShiftError):
    code = "precondition"


class EmptyShiftError(TreeShiftError):
    code = "empty-shift"


class FillError(TreeShiftError):
    """No live block is consistent with the labels fixed so far."""

    code = "fill"


class MalformedOrbit(TreeShiftError):
    code = "malformed-orbit"
