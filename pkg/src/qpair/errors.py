"""Exception types shared by the engine, the DSL and the CLI."""


class QPError(Exception):
    """Base class for all engine errors."""


class DeclarationError(QPError, ValueError):
    """Bad or inconsistent declarations: unknown names, foreign universes, coverage."""


class DegreeError(QPError, ValueError):
    """A degree constraint was violated."""


class TwistDivergence(QPError):
    """The twisting series still had a nonzero term at the order cap."""

    def __init__(self, order: int, message: str | None = None):
        self.order = order
        super().__init__(message or f"twist series did not terminate by order {order}")


class MasterEquationError(QPError):
    """A homological function failed the classical master equation."""


class DegenerateBracketError(QPError):
    """The restricted derived bracket is not a nondegenerate Darboux table."""
