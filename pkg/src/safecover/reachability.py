"""Closed-form time-to-reach for the relative double-integrator game.

The relative state ``z = (p_rx, p_ry, v_rx, v_ry)`` is evader minus
pursuer.  Both players have acceleration bound ``u_max``; under optimal
play the accelerations cancel, so the relative position moves on a straight
line and the time to enter the collision disc of radius ``c_r`` is the
smaller root of

    |v_r|^2 psi^2 + 2 (p_r . v_r) psi + (|p_r|^2 - c_r^2) = 0.

Functions accept a single state or an array of shape ``(..., 4)``.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateGradient

DEGENERATE_TOL = 1e-12


class RelativeState(NamedTuple):
    p_rx: float
    p_ry: float
    v_rx: float
    v_ry: float


@dataclass(frozen=True)
class SafetyParams:
    c_r: float
    u_max: float
    t_safety: float

    def __post_init__(self):
        for name in ("c_r", "u_max", "t_safety"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")


def relative_state(p_i, v_i, p_j, v_j):
    return np.concatenate([np.subtract(p_i, p_j), np.subtract(v_i, v_j)], axis=-1)


def _split(z):
    z = np.asarray(z, dtype=float)
    return z[..., 0], z[..., 1], z[..., 2], z[..., 3]


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def quadratic_terms(z, c_r):
    """``(|v|^2, p.v, |p|^2 - c_r^2, discriminant)`` of the time-to-reach quadratic."""
    px, py, vx, vy = _split(z)
    vv = vx * vx + vy * vy
    pv = px * vx + py * vy
    c = px * px + py * py - c_r * c_r
    return vv, pv, c, pv * pv - vv * c


def time_to_reach(z, c_r):
    """Time for the relative position to enter the collision disc; ``inf`` if never."""
    vv, pv, c, disc = quadratic_terms(z, c_r)
    inside = c <= 0
    # both roots share the sign of -pv when c > 0; only pv < 0 can give a finite time
    approach = (~inside) & (vv > 0) & (disc >= 0) & (pv < 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = c / (-pv + np.sqrt(np.where(approach, disc, 0.0)))
    psi = np.where(inside, 0.0, np.where(approach, root, np.inf))
    return _scalar(psi)


def ttr_gradients(z, c_r, psi=None):
    """Closed-form partials ``(dpsi/dp_rx, dpsi/dp_ry, dpsi/dv_rx, dpsi/dv_ry)``.

    Raises :class:`DegenerateGradient` when ``psi`` is not finite and
    positive or the shared denominator vanishes (tangent contact).
    """
    px, py, vx, vy = _split(z)
    if psi is None:
        psi = time_to_reach(z, c_r)
    psi = np.asarray(psi, dtype=float)
    vv = vx * vx + vy * vy
    pv = px * vx + py * vy
    den = vv * psi + pv
    bad = ~np.isfinite(psi) | (psi <= 0) | (np.abs(den) <= DEGENERATE_TOL)
    if np.any(bad):
        raise DegenerateGradient("time-to-reach gradient undefined at this state")
    g = np.stack([
        -(vx * psi + px) / den,
        -(vy * psi + py) / den,
        -(vx * psi * psi + px * psi) / den,
        -(vy * psi * psi + py * psi) / den,
    ], axis=-1)
    return g


def optimal_inputs(z, c_r, u_max):
    """Evader control and worst-case pursuer input; identical by construction."""
    g = ttr_gradients(z, c_r)
    gv = g[..., 2:]
    u = u_max * gv / np.linalg.norm(gv, axis=-1, keepdims=True)
    return u, u.copy()


def avoid_control(z, params):
    u, _ = optimal_inputs(z, params.c_r, params.u_max)
    return u


def hamiltonian_residual(z, c_r, u_max=1.0):
    """``-grad(psi) . f(z, u*, d*) - 1``; zero where the closed form solves the HJ equation."""
    px, py, vx, vy = _split(z)
    g = ttr_gradients(z, c_r)
    u, d = optimal_inputs(z, c_r, u_max)
    rel_acc = u - d
    flow = g[..., 0] * vx + g[..., 1] * vy + g[..., 2] * rel_acc[..., 0] + g[..., 3] * rel_acc[..., 1]
    return _scalar(-flow - 1.0)


def ttr_oracle(z, c_r):
    """Ray-disc intersection time computed geometrically.

    Uses the perpendicular distance from the origin to the relative-position
    line and the half-chord length, independent of the quadratic formula.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim > 1:
        return np.array([ttr_oracle(row, c_r) for row in z.reshape(-1, 4)]).reshape(z.shape[:-1])
    p = z[:2]
    v = z[2:]
    if math.hypot(p[0], p[1]) <= c_r:
        return 0.0
    speed = math.hypot(v[0], v[1])
    if speed == 0.0:
        return math.inf
    d = v / speed
    along = -(p[0] * d[0] + p[1] * d[1])       # arc length to the closest approach
    if along <= 0.0:
        return math.inf
    miss = abs(p[0] * d[1] - p[1] * d[0])      # perpendicular distance to the line
    if miss > c_r:
        return math.inf
    half_chord = math.sqrt((c_r - miss) * (c_r + miss))
    return (along - half_chord) / speed
