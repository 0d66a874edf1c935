"""Exception types shared across the package."""


class SpecError(ValueError):
    """A model specification or config violates a hard precondition.

    Carries a machine-readable ``code`` so the CLI can emit structured
    error documents.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class InfeasiblePolicyError(SpecError):
    def __init__(self, message: str):
        super().__init__("infeasible_policy", message)


class ConvergenceError(RuntimeError):
    """Fixed-point iteration exhausted max_iter."""

    def __init__(self, message: str, last_residual: float):
        super().__init__(message)
        self.last_residual = last_residual
