"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ConflictVolterraError(Exception):
    """Base class for every error raised by this package."""


class NumericError(ConflictVolterraError):
    """A computation left the domain where it is defined (exit code 3)."""


class DivergenceError(NumericError):
    def __init__(self, step: int, values, trajectory=None):
        self.step = step
        self.values = tuple(values)
        # partial trajectory up to (not including) the failing step, if known
        self.trajectory = trajectory
        super().__init__(f"populations diverged at step {step}: {self.values}")


class ExtinctRegionError(NumericError):
    def __init__(self, region: str, mass: float):
        self.region = region
        self.mass = mass
        super().__init__(f"region {region} has mass {mass!r}; cannot normalize")


class DegenerateNormalizerError(NumericError):
    def __init__(self, z: float, step: int | None = None):
        self.z = z
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"conflict normalizer z={z!r} is degenerate{where}")


class DegenerateProfileError(NumericError):
    """p == r, so the difference profile has no positive mass."""


class DegenerateTermsError(NumericError):
    """Region mass terms of the equilibrium system vanish."""


class NoInteriorEquilibriumError(NumericError):
    """The uncoupled map has no strictly positive fixed point."""


class SolverFailure(NumericError):
    def __init__(self, message: str, best=None, residual: float = float("nan"), iterations: int = 0):
        self.best = best
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class UndeterminedSupportError(NumericError):
    """Attractive iteration did not settle, so the limiting support is unknown."""


class InvalidBracketError(ConflictVolterraError):
    """Both ends of a bifurcation bracket fall in the same attractor class."""


class UndeterminedMidpointError(ConflictVolterraError):
    def __init__(self, alpha: float, bracket: tuple[float, float]):
        self.alpha = alpha
        self.bracket = bracket
        super().__init__(f"attractor undetermined at alpha={alpha!r} (bracket {bracket})")


class IntegrityError(ConflictVolterraError):
    """Atlas records are duplicated, missing or out of order."""


class ConfigError(ConflictVolterraError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
