from typing import Any, Dict, Union


class SobolevExtError(Exception):
    """
    Base class of every error raised by the toolkit. `details` ends up in the
    machine-readable error record written by the command line front end.
    """

    exit_code: int = 2

    def __init__(self, message: str = "", details: Union[Dict[str, Any], None] = None):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details or {}

    def to_record(self) -> Dict[str, Any]:
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "details": self.details,
        }


class ConfigError(SobolevExtError, ValueError):
    exit_code = 3


class InvariantViolation(SobolevExtError):
    exit_code = 2


# geometry
class EmptyDomain(InvariantViolation):
    pass


class OracleInconsistent(InvariantViolation):
    pass


class NoReflection(InvariantViolation):
    def __init__(self, cube: Any, search_radius: float):
        super().__init__(
            f"No admissible reflected cube for {cube} within {search_radius:g}",
            {"level": cube.level, "index": list(cube.index),
             "search_radius": search_radius})
        self.cube = cube


class DegenerateCover(InvariantViolation):
    pass


class NotRegular(InvariantViolation):
    pass


class Disconnected(InvariantViolation):
    pass


# funcspace
class SingularQuadraturePoint(InvariantViolation):
    pass


class QuadratureUnderflow(InvariantViolation):
    pass


class OrderMismatch(InvariantViolation):
    pass


class Inconclusive(InvariantViolation):
    pass


# extension
class KernelUnderresolved(InvariantViolation):
    pass


class PlanGap(InvariantViolation):
    pass


class SupportLeak(InvariantViolation):
    pass


class CollarViolation(InvariantViolation):
    pass


class PatchGap(InvariantViolation):
    pass


# trace
class EmptyBall(InvariantViolation):
    pass


class UnderresolvedBall(InvariantViolation):
    pass


# bvp
class EllipticityFail(InvariantViolation):
    pass


class EmptySpace(InvariantViolation):
    pass


class Incompatible(InvariantViolation):
    pass


class NotConverged(InvariantViolation):
    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"Solver did not converge after {iterations} iterations (relative residual {residual:.3e})",
            {"iterations": iterations, "residual": residual})
        self.iterations = iterations
        self.residual = residual
