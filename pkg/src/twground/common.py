"""Shared result type and errors for the encoders."""

from __future__ import annotations


class ResourceLimit(RuntimeError):
    """The requested construction would exceed the configured size cap."""


class WrongShape(ValueError):
    pass


class BoundViolation(AssertionError):
    """A certified width exceeded the bound the construction promises."""


class Reduction(tuple):
    """(formula, td) pair carrying a stage log and optional variable map.

    Unpacks like a 2-tuple so `f, td = encoder(...)` works; `log` is a list
    of dicts, `varmap` maps input variables to output variables when an
    encoder renumbers.
    """

    def __new__(cls, formula, td, log=None, varmap=None, extra=None):
        obj = super().__new__(cls, (formula, td))
        obj.log = list(log or [])
        obj.varmap = varmap
        obj.extra = dict(extra or {})
        return obj

    @property
    def formula(self):
        return self[0]

    @property
    def td(self):
        return self[1]


def check_bound(width: int, bound: int, what: str):
    if width > bound:
        raise BoundViolation(f"{what}: width {width} exceeds bound {bound}")
