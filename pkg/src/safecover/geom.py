"""Signed distance, boundary projection and inside tests for planar polygons.

A :class:`PolygonDomain` is a simple counter-clockwise polygon that may
translate at constant velocity.  All queries take a time ``t`` and are
evaluated against the polygon pose at that time.

Sign convention: the signed distance ``b`` is negative inside the domain,
positive outside and zero on the boundary.  Its gradient is
``(x - P(x)) / b`` where ``P(x)`` is the nearest boundary point.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import OnBoundary

BOUNDARY_TOL = 1e-9


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, c):
    return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))


def _segments_intersect(p1, p2, q1, q2):
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 and d2 and d3 and d4:
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def shoelace(vertices):
    """Signed area of a closed vertex loop (positive when counter-clockwise)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class PolygonDomain:
    """Simple CCW polygon translating with constant ``velocity``.

    The pose at time ``t`` is the reference polygon shifted by
    ``velocity * (t - reference_time)``.
    """

    vertices: tuple
    velocity: tuple = (0.0, 0.0)
    reference_time: float = 0.0
    _v: np.ndarray = field(init=False, repr=False)
    _edges: object = field(init=False, repr=False)

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        vel = tuple(float(c) for c in self.velocity)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "velocity", vel)
        object.__setattr__(self, "reference_time", float(self.reference_time))

        arr = np.array(verts, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
            raise ValueError("polygon needs at least 3 (x, y) vertices")
        if not np.all(np.isfinite(arr)) or not all(np.isfinite(vel)):
            raise ValueError("polygon vertices and velocity must be finite")
        if len(vel) != 2:
            raise ValueError("velocity must be a 2-vector")
        nxt = np.roll(arr, -1, axis=0)
        if np.any(np.all(arr == nxt, axis=1)):
            raise ValueError("consecutive polygon vertices must be distinct")
        if shoelace(arr) <= 0:
            raise ValueError("polygon must be counter-clockwise (positive signed area)")
        n = len(arr)
        for a in range(n):
            for b in range(a + 1, n):
                if b == a + 1 or (a == 0 and b == n - 1):
                    continue
                if _segments_intersect(arr[a], arr[(a + 1) % n], arr[b], arr[(b + 1) % n]):
                    raise ValueError(f"polygon is not simple: edges {a} and {b} intersect")
        arr.setflags(write=False)
        object.__setattr__(self, "_v", arr)
        object.__setattr__(self, "_edges", _EdgeCache(arr))

    def __eq__(self, other):
        if not isinstance(other, PolygonDomain):
            return NotImplemented
        return (self.vertices == other.vertices and self.velocity == other.velocity
                and self.reference_time == other.reference_time)

    def __hash__(self):
        return hash((self.vertices, self.velocity, self.reference_time))

    @property
    def n_edges(self):
        return len(self.vertices)

    def offset(self, t):
        """Translation of the reference polygon at time ``t``."""
        return np.asarray(self.velocity) * (float(t) - self.reference_time)

    def vertices_at(self, t=0.0):
        return self._v + self.offset(t)

    def centroid(self, t=0.0):
        v = self._v
        nxt = np.roll(v, -1, axis=0)
        cross = v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]
        a = cross.sum() / 2.0
        c = ((v + nxt) * cross[:, None]).sum(axis=0) / (6.0 * a)
        return c + self.offset(t)

    def bounds(self, t=0.0):
        """``(xmin, ymin, xmax, ymax)`` at time ``t``."""
        v = self.vertices_at(t)
        return (*v.min(axis=0), *v.max(axis=0))


class _EdgeCache:
    """Per-edge arrays reused by every query."""

    def __init__(self, verts):
        self.a = verts
        self.b = np.roll(verts, -1, axis=0)
        self.ab = self.b - self.a
        self.ab2 = np.einsum("ij,ij->i", self.ab, self.ab)
        with np.errstate(divide="ignore"):
            self.slope = self.ab[:, 0] / self.ab[:, 1]


class BoundaryProjection(NamedTuple):
    point: np.ndarray
    feature: tuple          # ("edge", k) or ("vertex", k)
    distance: float


def area(domain):
    return shoelace(domain._v)


def _local(domain, points, t):
    pts = np.asarray(points, dtype=float)
    return pts - domain.offset(t)


def _inside_local(edges, pts):
    # crossing number with a half-open rule on y
    ay = edges.a[:, 1]
    by = edges.b[:, 1]
    px = pts[:, 0:1]
    py = pts[:, 1:2]
    straddle = (ay > py) != (by > py)
    with np.errstate(invalid="ignore"):
        x_cross = edges.a[:, 0] + (py - ay) * edges.slope
    hits = straddle & (px < x_cross)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def _nearest_local(edges, pts):
    apx = pts[:, 0:1] - edges.a[:, 0]
    apy = pts[:, 1:2] - edges.a[:, 1]
    s = np.clip((apx * edges.ab[:, 0] + apy * edges.ab[:, 1]) / edges.ab2, 0.0, 1.0)
    dx = apx - s * edges.ab[:, 0]
    dy = apy - s * edges.ab[:, 1]
    d2 = dx * dx + dy * dy
    k = np.argmin(d2, axis=1)          # first minimum: lowest-indexed edge
    rows = np.arange(len(pts))
    sk = s[rows, k]
    closest = edges.a[k] + sk[:, None] * edges.ab[k]
    return closest, np.sqrt(d2[rows, k]), k, sk


def nearest_boundary(domain, points, t=0.0):
    """Vectorised projection onto the boundary.

    Returns ``(b, proj, edge, param)`` where ``b`` is the signed distance,
    ``proj`` the nearest boundary point (world frame), ``edge`` the index of
    the lowest-indexed nearest edge and ``param`` the position along it in
    ``[0, 1]``.
    """
    off = domain.offset(t)
    pts = np.asarray(points, dtype=float).reshape(-1, 2) - off
    proj, dist, edge, param = _nearest_local(domain._edges, pts)
    inside = _inside_local(domain._edges, pts) | (dist < BOUNDARY_TOL)
    b = np.where(inside, -dist, dist)
    return b, proj + off, edge, param


def signed_distances(domain, points, t=0.0):
    return nearest_boundary(domain, points, t)[0]


def signed_distance(domain, x, t=0.0):
    b, proj, edge, param = nearest_boundary(domain, np.reshape(x, (1, 2)), t)
    k = int(edge[0])
    if param[0] == 0.0:
        feature = ("vertex", k)
    elif param[0] == 1.0:
        feature = ("vertex", (k + 1) % domain.n_edges)
    else:
        feature = ("edge", k)
    return BoundaryProjection(proj[0], feature, float(b[0]))


def contains(domain, x, t=0.0):
    """True for points inside the domain or within the boundary band."""
    return bool(contains_many(domain, np.reshape(x, (1, 2)), t)[0])


def contains_many(domain, points, t=0.0):
    pts = np.atleast_2d(_local(domain, points, t))
    inside = _inside_local(domain._edges, pts)
    _, dist, _, _ = _nearest_local(domain._edges, pts)
    return inside | (dist < BOUNDARY_TOL)


def winding_number(domain, x, t=0.0):
    """Winding number of the boundary around ``x`` (independent inside test)."""
    p = _local(domain, x, t)
    rel = domain._v - p
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    dang = np.diff(np.append(ang, ang[0]))
    dang = (dang + np.pi) % (2 * np.pi) - np.pi
    return int(round(dang.sum() / (2 * np.pi)))


def edge_normals(domain):
    """Outward unit normals of each edge (CCW polygon: rotate edge by -90 degrees)."""
    v = domain._v
    e = np.roll(v, -1, axis=0) - v
    n = np.stack([e[:, 1], -e[:, 0]], axis=1)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def boundary_normal(domain, x, t=0.0):
    """Outward direction used when ``x`` sits on the boundary.

    Edge interior: the edge normal.  Vertex: the normalised bisector of the
    two adjacent edge normals.
    """
    _, _, edge, param = nearest_boundary(domain, np.reshape(x, (1, 2)), t)
    return _fallback_normals(domain, edge, param)[0]


def _fallback_normals(domain, edge, param):
    normals = edge_normals(domain)
    n = domain.n_edges
    out = normals[edge].copy()
    at_start = param == 0.0
    at_end = param == 1.0
    if np.any(at_start):
        k = edge[at_start]
        out[at_start] = normals[k] + normals[(k - 1) % n]
    if np.any(at_end):
        k = edge[at_end]
        out[at_end] = normals[k] + normals[(k + 1) % n]
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def signed_distance_gradient(domain, x, t=0.0):
    proj = signed_distance(domain, x, t)
    if abs(proj.distance) < BOUNDARY_TOL:
        raise OnBoundary(f"point {tuple(np.ravel(x))} lies on the boundary")
    return (np.asarray(x, dtype=float) - proj.point) / proj.distance


def distance_field(domain, points, t=0.0):
    """Signed distances and gradients for many points at once.

    Points inside the boundary band get the fallback normal instead of
    raising.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    b, proj, edge, param = nearest_boundary(domain, pts, t)
    on_band = np.abs(b) < BOUNDARY_TOL
    if not on_band.any():
        return b, (pts - proj) / b[:, None]
    safe_b = np.where(on_band, 1.0, b)
    grad = (pts - proj) / safe_b[:, None]
    grad[on_band] = _fallback_normals(domain, edge[on_band], param[on_band])
    return b, grad
