"""Shared exception bases.

Concrete errors live next to the code that raises them; the bases here
group them into the families the CLI maps to exit codes (input/IO,
schedule feasibility, phantom specs, statistics).
"""

from __future__ import annotations


class Msc3dError(Exception):
    """Base class for all errors raised by this package."""


class InputError(Msc3dError):
    """Malformed or unreadable input (volume files, manifests). CLI exit 2."""


class ScheduleError(Msc3dError):
    """Infeasible scale schedule or window geometry. CLI exit 3."""


class PhantomError(Msc3dError):
    """Invalid synthetic-volume specification. CLI exit 4."""


class StatsError(Msc3dError):
    """Statistics-layer failure. CLI exit 5."""


class ShapeMismatchError(Msc3dError):
    """Two volumes that must share a lattice do not."""
