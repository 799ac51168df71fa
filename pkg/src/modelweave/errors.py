"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class ModelweaveError(Exception):
    """Base class for every domain failure raised by modelweave."""


class ForeignElementError(ModelweaveError):
    """An element handle was used with a model that does not own it."""


class WeavingKindError(ModelweaveError):
    """A weaving model was paired with the wrong kind of right-hand model."""


class WeaveError(ModelweaveError):
    """Weaving could not produce a conformant model."""


class CollisionError(WeaveError):
    def __init__(self, qualified_name, message: str) -> None:
        super().__init__(f"{qualified_name}: {message}")
        self.qualified_name = qualified_name


class StaleTargetError(WeaveError):
    """A plan references an element that no longer exists in the model."""

    def __init__(self, qualified_name, message: str = "target missing from model") -> None:
        super().__init__(f"{qualified_name}: {message}")
        self.qualified_name = qualified_name


class UnresolvedConflictError(WeaveError):
    def __init__(self, conflicts) -> None:
        self.conflicts = tuple(conflicts)
        names = sorted({e.source for c in self.conflicts for e in c.edits})
        super().__init__(
            f"{len(self.conflicts)} unresolved conflict(s) between equal-priority "
            f"contributors: {', '.join(names)}"
        )


class CapacityError(ModelweaveError):
    """Brute-force evaluation would exceed the configured leaf bound."""
