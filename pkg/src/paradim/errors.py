"""Exception hierarchy. The CLI maps SolverError to exit 2 and DomainError to exit 3."""


class ParadimError(Exception):
    pass


class SolverError(ParadimError):
    """A numerical method did not produce an answer."""


class EscapeError(SolverError):
    def __init__(self, index: int, value: complex):
        super().__init__(f"orbit escaped at step {index} (|z|={abs(value):.3g})")
        self.index = index
        self.value = value


class ConvergenceError(SolverError):
    pass


class MinimalityError(SolverError):
    pass


class CollisionError(SolverError):
    def __init__(self, msg: str, at: complex | None = None):
        super().__init__(msg)
        self.at = at


class DegenerateError(SolverError):
    pass


class NonHyperbolicError(SolverError):
    pass


class BracketError(SolverError):
    pass


class DomainError(ParadimError, ValueError):
    """Input outside the region where the quantity is defined."""
