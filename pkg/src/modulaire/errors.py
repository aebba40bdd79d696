"""Exception hierarchy.

Every error carries the name of the invariant it reports on so the CLI can
surface it verbatim.
"""


class ModulaireError(ValueError):
    invariant = "unspecified"

    def __init__(self, message, invariant=None):
        super().__init__(message)
        if invariant is not None:
            self.invariant = invariant


class DimensionError(ModulaireError):
    invariant = "dimension"


class PreconditionError(ModulaireError):
    invariant = "precondition"


class DomainError(ModulaireError):
    invariant = "domain"
