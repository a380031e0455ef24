"""Exception hierarchy; the CLI maps these onto exit codes."""


class SceneError(ValueError):
    """Malformed or inconsistent scene input (exit code 2)."""


class NumericalError(ArithmeticError):
    """Degenerate geometry at an evaluation point (exit code 3).

    Raised for non-positive-definite metrics, corner angles outside
    (eps, pi - eps) and failed internal consistency checks.
    """

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points
