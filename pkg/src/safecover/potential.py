"""Artificial-potential coverage controller.

Inter-vehicle force is a repulsive linear spring active below the desired
spacing ``r_d``; the vehicle-domain force is a linear spring active once a
vehicle is closer than ``r_d / 2`` to the boundary from the inside (or
anywhere outside).  A linear braking term ``-a v`` dissipates energy.
"""

from dataclasses import dataclass
import functools
import math

import numpy as np

from . import geom
from .errors import CoincidentVehicles

COINCIDENT_TOL = 1e-9


@dataclass(frozen=True)
class CoverageParams:
    r_d: float
    k_I: float = 1.0
    k_h: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        for name in ("r_d", "k_I", "k_h", "a"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")


def f_inter(s, params):
    """Signed magnitude of the inter-vehicle force at separation ``s`` (<= 0)."""
    s = np.asarray(s, dtype=float)
    out = np.where(s < params.r_d, -params.k_I * (params.r_d - s), 0.0)
    return out[()] if out.ndim == 0 else out


def f_domain(b, params):
    """Signed magnitude of the vehicle-domain force at signed distance ``b`` (>= 0)."""
    b = np.asarray(b, dtype=float)
    lo = -params.r_d / 2.0
    out = np.where(b > lo, params.k_h * (b - lo), 0.0)
    return out[()] if out.ndim == 0 else out


def braking_force(v, params):
    return -params.a * np.asarray(v, dtype=float)


def potential_inter(s, params):
    s = np.asarray(s, dtype=float)
    out = np.where(s < params.r_d, 0.5 * params.k_I * (params.r_d - s) ** 2, 0.0)
    return out[()] if out.ndim == 0 else out


def potential_domain(b, params):
    b = np.asarray(b, dtype=float)
    lo = -params.r_d / 2.0
    out = np.where(b > lo, 0.5 * params.k_h * (b - lo) ** 2, 0.0)
    return out[()] if out.ndim == 0 else out


def r_d_heuristic(area, n):
    if area <= 0 or n < 1:
        raise ValueError("need area > 0 and n >= 1")
    return math.sqrt(area / n)


@functools.lru_cache(maxsize=None)
def _upper(n):
    return np.triu_indices(n, k=1)


def _pairwise(p):
    diff = p[:, None, :] - p[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return diff, dist


def _check_coincident(dist):
    close = dist < COINCIDENT_TOL
    np.fill_diagonal(close, False)
    if np.any(close):
        i, j = np.argwhere(close)[0]
        raise CoincidentVehicles(int(i), int(j), float(dist[i, j]))


def _inter_forces(diff, dist, params):
    _check_coincident(dist)
    dist = dist.copy()
    np.fill_diagonal(dist, np.inf)
    mag = f_inter(dist, params)
    return -(mag / dist)[..., None] * diff


def inter_forces(p, params):
    """Matrix ``F[i, j]`` of the force vehicle ``j`` exerts on vehicle ``i``.

    ``F[j, i] == -F[i, j]`` holds bit for bit because ``p_ji = -p_ij`` and
    the separation is computed symmetrically.
    """
    diff, dist = _pairwise(np.asarray(p, dtype=float))
    return _inter_forces(diff, dist, params)


def coverage_and_energy(p, v, domain, t, params):
    """Unsaturated controls ``(N, 2)`` and the Lyapunov energy from one snapshot.

    Pair terms are evaluated once per unordered pair and scattered with
    opposite signs to both vehicles.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    n = len(p)
    iu, ju = _upper(n)
    d = p[iu] - p[ju]
    s = np.hypot(d[:, 0], d[:, 1])
    if n > 1 and s.min() < COINCIDENT_TOL:
        k = int(np.argmin(s))
        raise CoincidentVehicles(int(iu[k]), int(ju[k]), float(s[k]))
    gap = np.maximum(params.r_d - s, 0.0)
    w = params.k_I * gap / s                   # -f_I(s) / s
    fx = w * d[:, 0]
    fy = w * d[:, 1]
    u = np.empty((n, 2))
    u[:, 0] = np.bincount(iu, fx, n) - np.bincount(ju, fx, n)
    u[:, 1] = np.bincount(iu, fy, n) - np.bincount(ju, fy, n)
    b, grad = geom.distance_field(domain, p, t)
    depth = np.maximum(b + params.r_d / 2.0, 0.0)
    u -= (params.k_h * depth)[:, None] * grad
    u -= params.a * v
    phi = 0.5 * (float(np.einsum("ij,ij->", v, v))
                 + params.k_I * float(np.dot(gap, gap))
                 + params.k_h * float(np.dot(depth, depth)))
    return u, phi


def coverage_controls(p, v, domain, t, params):
    """Unsaturated coverage control for every vehicle, shape ``(N, 2)``."""
    return coverage_and_energy(p, v, domain, t, params)[0]


def coverage_control(i, p, v, domain, t, params):
    """Unsaturated coverage control for vehicle ``i`` alone."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    u = np.zeros(2)
    for j in range(len(p)):
        if j == i:
            continue
        pij = p[i] - p[j]
        s = math.hypot(pij[0], pij[1])
        if s < COINCIDENT_TOL:
            raise CoincidentVehicles(min(i, j), max(i, j), s)
        u -= f_inter(s, params) * pij / s
    b = geom.signed_distance(domain, p[i], t).distance
    try:
        grad = geom.signed_distance_gradient(domain, p[i], t)
    except geom.OnBoundary:
        grad = geom.boundary_normal(domain, p[i], t)
    u -= f_domain(b, params) * grad
    u += braking_force(v[i], params)
    return u


def potential_energy(p, domain, t, params):
    """Sum of all artificial potentials (each unordered pair counted once)."""
    p = np.asarray(p, dtype=float)
    _, dist = _pairwise(p)
    iu = np.triu_indices(len(p), k=1)
    v_int = potential_inter(dist[iu], params).sum()
    v_dom = potential_domain(geom.signed_distances(domain, p, t), params).sum()
    return float(v_int + v_dom)


def lyapunov_energy(p, v, domain, t, params):
    """Kinetic plus artificial potential energy of the swarm.

    Written as ``1/2 * sum_i (|v_i|^2 + sum_{j != i} V_I(p_ij) + 2 V_h(p_i))``;
    the double sum over ordered pairs is half-weighted, so each pair counts once.
    """
    v = np.asarray(v, dtype=float)
    kinetic = 0.5 * float(np.einsum("ij,ij->", v, v))
    return kinetic + potential_energy(p, domain, t, params)
