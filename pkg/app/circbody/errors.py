"""
Exception hierarchy. Each class carries the CLI exit code it maps to:
1 usage, 2 validation failure, 3 numeric failure.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


class CircbodyError(Exception):
    exit_code = EXIT_NUMERIC


class GeometryError(CircbodyError):
    """Degenerate shape, too few panels, self-intersecting contour."""
    exit_code = EXIT_VALIDATION


class NeumannError(CircbodyError):
    pass


class InsideBodyError(CircbodyError):
    def __init__(self, indices) -> None:
        self.indices = [int(i) for i in indices]
        shown = ", ".join(str(i) for i in self.indices[:10])
        more = "" if len(self.indices) <= 10 else f" (+{len(self.indices) - 10} more)"
        super().__init__(f"query points inside the body: {shown}{more}")


class MassModelError(CircbodyError):
    pass


class DimensionError(CircbodyError):
    exit_code = EXIT_VALIDATION


class SingularCirculationError(CircbodyError):
    exit_code = EXIT_VALIDATION


class ConvergenceError(CircbodyError):
    def __init__(self, step: int, residual: float, iterations: int) -> None:
        self.step = int(step)
        self.residual = float(residual)
        self.iterations = int(iterations)
        super().__init__(
            f"implicit midpoint did not converge at step {self.step} "
            f"(residual={self.residual:.3e} after {self.iterations} iterations)"
        )


class ConfigError(CircbodyError):
    """Invalid simulation or scenario settings."""
    exit_code = EXIT_VALIDATION


class ScenarioError(ConfigError):
    def __init__(self, message: str, line: int = 0) -> None:
        self.line = int(line)
        prefix = f"line {self.line}: " if self.line else ""
        super().__init__(prefix + message)
