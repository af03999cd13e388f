"""Tree-shifts on Markov-Cayley trees at desk scale."""

from .errors import (
    EmptyShiftError,
    FillError,
    InputError,
    MalformedOrbit,
    PreconditionError,
    ResourceBudgetError,
    TreeShiftError,
    UnresolvedDistance,
)
from .shift_space import ForbiddenSet, TsftHandle
from .tree_core import FULL2, GOLDEN, UPPER, Distance, FollowerType, MarkovMatrix, MarkovTree, Window

__all__ = [
    "Distance",
    "EmptyShiftError",
    "FillError",
    "FollowerType",
    "ForbiddenSet",
    "FULL2",
    "GOLDEN",
    "InputError",
    "MalformedOrbit",
    "MarkovMatrix",
    "MarkovTree",
    "PreconditionError",
    "ResourceBudgetError",
    "TreeShiftError",
    "TsftHandle",
    "UnresolvedDistance",
    "UPPER",
    "Window",
]
