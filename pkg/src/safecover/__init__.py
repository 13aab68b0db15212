"""Safe multi-vehicle coverage: potential-field coverage with time-to-reach collision avoidance."""

from .geom import PolygonDomain, signed_distance, signed_distance_gradient
from .potential import CoverageParams
from .reachability import SafetyParams, time_to_reach
from .sim import SimParams, Trajectory, run
from .config import ScenarioConfig, builtin, load_scenario

__all__ = [
    "PolygonDomain", "signed_distance", "signed_distance_gradient", "CoverageParams",
    "SafetyParams", "time_to_reach", "SimParams", "Trajectory", "run",
    "ScenarioConfig", "builtin", "load_scenario",
]
__version__ = "0.1.0"
