"""Exception types shared across the package."""


class PlatoonRiskError(Exception):
    """Base class for all package errors."""


class GraphError(PlatoonRiskError):
    """Invalid graph construction input (bad topology parameters, disconnected graph, ...)."""


class EigenConvergenceError(PlatoonRiskError):
    """The Jacobi eigensolver did not reach the off-diagonal threshold within the sweep cap."""


class StabilityError(PlatoonRiskError):
    """An operation that requires a stable platoon was called on an unstable configuration."""


class NearInstabilityError(PlatoonRiskError):
    """The variance integrand is too close to singular; the configuration sits near the
    stability boundary and the steady-state variance is effectively divergent."""


class QuadratureError(PlatoonRiskError):
    """The adaptive quadrature could not reach the requested tolerance."""


class DomainError(PlatoonRiskError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class DivergenceError(PlatoonRiskError):
    """State blow-up detected during simulation (expected for unstable configurations)."""

    def __init__(self, time: float, trajectory: int):
        self.time = time
        self.trajectory = trajectory
        super().__init__(
            f"simulation diverged at t={time:.6g} (trajectory {trajectory}); "
            "state magnitude exceeded the blow-up threshold"
        )


class ConfigError(PlatoonRiskError):
    """Scenario configuration could not be parsed or failed schema validation."""
