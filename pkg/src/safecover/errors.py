"""Exception types shared across the package."""


class OnBoundary(ValueError):
    """Signed-distance gradient requested for a point on the domain boundary."""


class CoincidentVehicles(RuntimeError):
    """Two vehicles occupy the same position; the inter-vehicle direction is undefined."""

    def __init__(self, i, j, distance):
        super().__init__(f"vehicles {i} and {j} coincide (distance {distance:.3e} m)")
        self.pair = (i, j)
        self.distance = distance


class DegenerateGradient(ValueError):
    """Time-to-reach gradient is singular (grazing contact or already inside the collision disc)."""


class NonFiniteState(RuntimeError):
    """Integration produced NaN or infinite positions/velocities."""


class ParseError(ValueError):
    """Scenario file could not be parsed."""


class ValidationError(ValueError):
    """Scenario parsed but violates an invariant."""
