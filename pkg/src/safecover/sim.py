"""Double-integrator swarm simulation with coverage/safety switching.

Each step every vehicle picks a control from the same time-``t`` snapshot:
the pairwise avoidance control for the first other vehicle (ascending
index) whose time-to-reach is within ``t_safety``, otherwise the coverage
control.  Velocities are updated first, clipped to ``v_max``, then used to
advance positions (semi-implicit Euler).
"""

from dataclasses import dataclass, field
import functools
import math

import numpy as np

from . import geom, potential, reachability
from .errors import DegenerateGradient, NonFiniteState
from .potential import CoverageParams
from .reachability import SafetyParams

COVERAGE, SAFETY, FALLBACK = 0, 1, 2
SOURCE_NAMES = ("coverage", "safety", "fallback")
MODES = ("saturated", "clipped", "raw")


@dataclass(frozen=True)
class VehicleState:
    p: tuple
    v: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class SimParams:
    v_max: float
    u_max: float
    coverage: CoverageParams
    safety: SafetyParams
    dt: float = 0.01
    t_end: float = 120.0
    mode: str = "saturated"
    safety_enabled: bool = True

    def __post_init__(self):
        for name in ("v_max", "u_max", "dt", "t_end"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")
        if self.dt > 0.05:
            raise ValueError(f"dt must be <= 0.05 s, got {self.dt}")
        if self.safety.t_safety <= self.dt:
            raise ValueError("t_safety must exceed dt")
        if self.safety.u_max != self.u_max:
            raise ValueError("safety.u_max must equal u_max")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class CollisionEvent:
    pair: tuple
    t_start: float
    t_end: float | None = None      # None: still in contact at the end of the run

    @property
    def is_open(self):
        return self.t_end is None


def saturate(u, u_max, mode):
    """Apply the control bound row-wise according to ``mode``.

    ``saturated`` rescales every non-zero control to exactly ``u_max``;
    ``clipped`` only shrinks controls that exceed it; ``raw`` passes through.
    """
    u = np.asarray(u, dtype=float)
    if mode == "raw":
        return u.copy()
    norm = np.linalg.norm(u, axis=-1, keepdims=True)
    if mode == "saturated":
        scale = np.divide(u_max, norm, out=np.zeros_like(norm), where=norm > 0)
    else:
        scale = np.minimum(1.0, np.divide(u_max, norm, out=np.ones_like(norm), where=norm > 0))
    return u * scale


def _avoidance(z, safety):
    """Avoidance control for one relative state plus its source tag."""
    try:
        return reachability.avoid_control(z, safety), SAFETY
    except DegenerateGradient:
        p = np.asarray(z[:2], dtype=float)
        return safety.u_max * p / np.linalg.norm(p), FALLBACK


@functools.lru_cache(maxsize=None)
def _upper(n):
    return np.triu_indices(n, k=1)


def ttr_matrix(p, v, c_r):
    """``psi[i, j]`` for relative state ``x_i - x_j``; ``inf`` on the diagonal.

    Swapping evader and pursuer negates ``z`` and leaves the quadratic
    unchanged, so only the upper triangle is evaluated.
    """
    n = len(p)
    iu, ju = _upper(n)
    z = np.concatenate([p[iu] - p[ju], v[iu] - v[ju]], axis=-1)
    psi = np.full((n, n), np.inf)
    psi[iu, ju] = psi[ju, iu] = reachability.time_to_reach(z, c_r)
    return psi


def _relative(p, v, i, j):
    return reachability.relative_state(p[i], v[i], p[j], v[j])


def control_all(p, v, domain, t, params):
    """Controls and source tags for every vehicle from one snapshot."""
    u, src, _ = _controls_and_energy(p, v, domain, t, params)
    return u, src


def _controls_and_energy(p, v, domain, t, params):
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    raw, phi = potential.coverage_and_energy(p, v, domain, t, params.coverage)
    u = saturate(raw, params.u_max, params.mode)
    src = np.full(len(p), COVERAGE, dtype=np.int8)
    if params.safety_enabled and len(p) > 1:
        psi = ttr_matrix(p, v, params.safety.c_r)
        conflict = psi <= params.safety.t_safety
        for i in np.flatnonzero(conflict.any(axis=1)):
            j = int(np.argmax(conflict[i]))
            u[i], src[i] = _avoidance(_relative(p, v, i, j), params.safety)
    return u, src, phi


def control_logic(i, p, v, domain, t, params):
    """Control for vehicle ``i`` alone, scanning other vehicles one by one."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if params.safety_enabled:
        for j in range(len(p)):
            if j == i:
                continue
            z = _relative(p, v, i, j)
            if reachability.time_to_reach(z, params.safety.c_r) <= params.safety.t_safety:
                return _avoidance(z, params.safety)
    u = potential.coverage_control(i, p, v, domain, t, params.coverage)
    return saturate(u, params.u_max, params.mode), COVERAGE


def clip_speed(v, v_max):
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    scale = np.minimum(1.0, np.divide(v_max, speed, out=np.ones_like(speed), where=speed > 0))
    return v * scale


def integrate(p, v, u, dt, v_max):
    v_new = clip_speed(v + u * dt, v_max)
    return p + v_new * dt, v_new


def step(p, v, domain, t, params):
    """Advance one ``dt``; returns ``(p', v', u, sources)``."""
    u, src = control_all(p, v, domain, t, params)
    p_new, v_new = _advance(p, v, u, t, params)
    return p_new, v_new, u, src


def _advance(p, v, u, t, params):
    p_new, v_new = integrate(p, v, u, params.dt, params.v_max)
    if not (np.all(np.isfinite(p_new)) and np.all(np.isfinite(v_new))):
        raise NonFiniteState(f"non-finite state after step at t={t:.4f} s")
    return p_new, v_new


def pair_distances(positions):
    """Distances for every unordered pair, shape ``(T, n_pairs)``, plus the pair list."""
    n = positions.shape[1]
    iu, ju = np.triu_indices(n, k=1)
    d = positions[:, iu, :] - positions[:, ju, :]
    return np.hypot(d[..., 0], d[..., 1]), list(zip(iu.tolist(), ju.tolist()))


def detect_collision_events(times, positions, c_r):
    """Scan each pair's distance trace for contact intervals (distance <= c_r)."""
    dist, pairs = pair_distances(np.asarray(positions, dtype=float))
    return events_from_distances(times, dist, pairs, c_r)


def events_from_distances(times, dist, pairs, c_r):
    times = np.asarray(times, dtype=float)
    dist = np.asarray(dist, dtype=float).reshape(len(times), -1)
    inside = dist <= c_r
    events = []
    for col in np.flatnonzero(inside.any(axis=0)):
        trace = inside[:, col]
        edges = np.diff(trace.astype(np.int8))
        starts = list(np.flatnonzero(edges == 1) + 1)
        ends = list(np.flatnonzero(edges == -1) + 1)
        if trace[0]:
            starts.insert(0, 0)
        for k, start in enumerate(starts):
            t_end = float(times[ends[k]]) if k < len(ends) else None
            events.append(CollisionEvent(tuple(pairs[col]), float(times[start]), t_end))
    events.sort(key=lambda e: (e.t_start, e.pair))
    return events


def is_r_subcover(p, domain, t, r, tol=1e-6):
    p = np.asarray(p, dtype=float)
    if len(p) > 1:
        _, dist = potential._pairwise(p)
        np.fill_diagonal(dist, np.inf)
        if dist.min() < r - tol:
            return False
    return bool(geom.signed_distances(domain, p, t).max() <= -r / 2 + tol)


def is_steady(v, eps_v=1e-3):
    return bool(np.all(np.linalg.norm(np.asarray(v, dtype=float), axis=-1) < eps_v))


@dataclass
class Trajectory:
    """Time-indexed record of a run.  Row ``k`` holds the state at ``times[k]``
    and the control applied from that state."""

    times: np.ndarray
    positions: np.ndarray        # (T, N, 2)
    velocities: np.ndarray       # (T, N, 2)
    controls: np.ndarray         # (T, N, 2)
    sources: np.ndarray          # (T, N) int codes, see SOURCE_NAMES
    energy: np.ndarray           # (T,)
    domain_offsets: np.ndarray   # (T, 2)
    domain: geom.PolygonDomain
    params: SimParams
    events: list = field(default_factory=list)

    @property
    def n_vehicles(self):
        return self.positions.shape[1]

    def steady_time(self, eps_v=1e-3):
        """Earliest recorded time after which every vehicle stays below ``eps_v``."""
        speed = np.linalg.norm(self.velocities, axis=-1).max(axis=1)
        moving = np.flatnonzero(speed >= eps_v)
        if len(moving) == 0:
            return float(self.times[0])
        if moving[-1] == len(self.times) - 1:
            return None
        return float(self.times[moving[-1] + 1])

    def final_subcover(self, r=None):
        r = self.params.coverage.r_d if r is None else r
        return is_r_subcover(self.positions[-1], self.domain, self.times[-1], r)

    def summary(self, eps_v=1e-3):
        return {
            "n_vehicles": self.n_vehicles,
            "t_end": float(self.times[-1]),
            "dt": self.params.dt,
            "mode": self.params.mode,
            "safety_enabled": self.params.safety_enabled,
            "collision_events": len(self.events),
            "events": [
                {"pair": list(e.pair), "t_start": e.t_start, "t_end": e.t_end}
                for e in self.events
            ],
            "final_energy": float(self.energy[-1]),
            "steady_time": self.steady_time(eps_v),
            "steady": is_steady(self.velocities[-1], eps_v),
            "r_subcover": self.final_subcover(),
            "r_d": self.params.coverage.r_d,
        }


def run(p0, v0, domain, params):
    """Integrate from ``t = 0`` to ``t_end``, recording every step."""
    p = np.array(p0, dtype=float)
    v = np.array(v0, dtype=float)
    n = len(p)
    k_max = params.n_steps
    times = np.arange(k_max + 1) * params.dt
    P = np.empty((k_max + 1, n, 2))
    V = np.empty_like(P)
    U = np.empty_like(P)
    S = np.empty((k_max + 1, n), dtype=np.int8)
    E = np.empty(k_max + 1)
    for k, t in enumerate(times):
        P[k], V[k] = p, v
        U[k], S[k], E[k] = _controls_and_energy(p, v, domain, t, params)
        if k < k_max:
            p, v = _advance(p, v, U[k], t, params)
    offsets = np.asarray(domain.velocity)[None, :] * (times[:, None] - domain.reference_time)
    traj = Trajectory(times, P, V, U, S, E, offsets, domain, params)
    traj.events = detect_collision_events(times, P, params.safety.c_r)
    return traj
