"""Tests for safecover.geom."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import cKDTree

from safecover import config, geom
from safecover.errors import OnBoundary

SQUARE = geom.PolygonDomain(config.square_vertices())
TRIANGLE = geom.PolygonDomain(config.triangle_vertices())
ARROW = geom.PolygonDomain(config.arrow_vertices())
DOMAINS = {"square": SQUARE, "triangle": TRIANGLE, "arrow": ARROW}


def sample_boundary(domain, n):
    """``n`` points evenly spaced by arc length, plus the spacing."""
    v = domain.vertices_at(0.0)
    nxt = np.roll(v, -1, axis=0)
    lengths = np.linalg.norm(nxt - v, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    s = np.linspace(0.0, cum[-1], n, endpoint=False)
    k = np.searchsorted(cum, s, side="right") - 1
    frac = (s - cum[k]) / lengths[k]
    return v[k] + frac[:, None] * (nxt[k] - v[k]), cum[-1] / n


def random_queries(domain, n, rng, margin=5.0):
    xmin, ymin, xmax, ymax = domain.bounds()
    lo = np.array([xmin - margin, ymin - margin])
    hi = np.array([xmax + margin, ymax + margin])
    return lo + rng.random((n, 2)) * (hi - lo)


# ── construction ─────────────────────────────────────────────────


class TestPolygonDomain:
    def test_rejects_too_few_vertices(self):
        with pytest.raises(ValueError, match="at least 3"):
            geom.PolygonDomain([(0, 0), (1, 0)])

    def test_rejects_clockwise(self):
        with pytest.raises(ValueError, match="counter-clockwise"):
            geom.PolygonDomain(list(reversed(config.square_vertices())))

    def test_rejects_self_intersection(self):
        bowtie = [(0, 0), (2, 0), (0, 2), (2, 2)]
        with pytest.raises(ValueError):
            geom.PolygonDomain(bowtie)

    def test_rejects_repeated_vertex(self):
        with pytest.raises(ValueError, match="distinct"):
            geom.PolygonDomain([(0, 0), (1, 0), (1, 0), (0, 1)])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            geom.PolygonDomain([(0, 0), (1, 0), (0, math.inf)])

    def test_equality_and_hash(self):
        a = geom.PolygonDomain(config.square_vertices())
        assert a == SQUARE
        assert len({a, SQUARE, TRIANGLE}) == 2

    def test_frozen(self):
        with pytest.raises(AttributeError):
            SQUARE.velocity = (1.0, 0.0)

    def test_moving_pose(self):
        d = geom.PolygonDomain(config.square_vertices(), velocity=(0.3, 0.3), reference_time=2.0)
        assert np.allclose(d.vertices_at(12.0)[0], [3.0, 3.0])
        assert np.allclose(d.centroid(2.0), [10.0, 10.0])


class TestArea:
    def test_square(self):
        assert geom.area(SQUARE) == pytest.approx(400.0, rel=1e-12)

    def test_triangle(self):
        assert geom.area(TRIANGLE) == pytest.approx(1875 * math.sqrt(3) / 16, rel=1e-12)
        assert geom.area(TRIANGLE) == pytest.approx(202.9747, abs=1e-4)

    def test_arrow(self):
        assert geom.area(ARROW) == pytest.approx(225.0, rel=1e-12)

    def test_arrow_is_not_convex(self):
        v = ARROW.vertices_at()
        e = np.roll(v, -1, axis=0) - v
        turn = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        assert (turn < 0).sum() == 1


# ── signed distance ──────────────────────────────────────────────


class TestSignedDistance:
    def test_above_top_edge(self):
        proj = geom.signed_distance(SQUARE, (10, 25))
        assert proj.distance == pytest.approx(5.0)
        assert np.allclose(proj.point, [10, 20])
        assert proj.feature == ("edge", 2)

    def test_center_tie_goes_to_lowest_edge(self):
        proj = geom.signed_distance(SQUARE, (10, 10))
        assert proj.distance == pytest.approx(-10.0)
        assert np.allclose(proj.point, [10, 0])
        assert proj.feature == ("edge", 0)

    def test_outside_corner(self):
        proj = geom.signed_distance(SQUARE, (25, 25))
        assert proj.distance == pytest.approx(5 * math.sqrt(2), abs=1e-12)
        assert proj.distance == pytest.approx(7.0710678, abs=1e-7)
        assert np.allclose(proj.point, [20, 20])
        assert proj.feature == ("vertex", 2)

    def test_corner_matches_brute_force(self):
        pts, h = sample_boundary(SQUARE, 10**6)
        brute = np.min(np.linalg.norm(pts - [25, 25], axis=1))
        assert abs(geom.signed_distance(SQUARE, (25, 25)).distance - brute) <= h

    def test_on_boundary_is_zero(self):
        assert geom.signed_distance(SQUARE, (20, 7)).distance == 0.0

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(1)
        q = random_queries(ARROW, 50, rng)
        many = geom.signed_distances(ARROW, q)
        one = [geom.signed_distance(ARROW, x).distance for x in q]
        assert np.array_equal(many, one)

    @pytest.mark.parametrize("name", sorted(DOMAINS))
    def test_dense_sampling_oracle(self, name):
        domain = DOMAINS[name]
        rng = np.random.default_rng(7)
        pts, h = sample_boundary(domain, 10**5)
        q = random_queries(domain, 10**3, rng)
        nearest, _ = cKDTree(pts).query(q)
        b = geom.signed_distances(domain, q)
        assert np.all(np.abs(b) <= nearest + 1e-12)
        assert np.all(nearest - np.abs(b) <= h)

    @pytest.mark.parametrize("name", sorted(DOMAINS))
    def test_sign_agrees_with_containment(self, name):
        domain = DOMAINS[name]
        rng = np.random.default_rng(3)
        q = random_queries(domain, 1000, rng)
        b = geom.signed_distances(domain, q)
        keep = np.abs(b) > 1e-6
        assert np.array_equal(b[keep] < 0, geom.contains_many(domain, q)[keep])

    def test_translation_equivariance(self):
        moving = geom.PolygonDomain(ARROW.vertices, velocity=(0.3, 0.3), reference_time=1.0)
        rng = np.random.default_rng(11)
        q = random_queries(ARROW, 200, rng, margin=20.0)
        t = 37.5
        shift = np.array([0.3, 0.3]) * (t - 1.0)
        assert np.allclose(geom.signed_distances(moving, q, t),
                           geom.signed_distances(ARROW, q - shift), atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-30, 50), st.floats(-30, 50), st.floats(-10, 10), st.floats(-10, 10))
    def test_translation_equivariance_property(self, x, y, vx, vy):
        moving = geom.PolygonDomain(TRIANGLE.vertices, velocity=(vx, vy))
        t = 3.0
        a = geom.signed_distance(moving, (x, y), t).distance
        b = geom.signed_distance(TRIANGLE, (x - vx * t, y - vy * t)).distance
        assert a == pytest.approx(b, abs=1e-9)


# ── gradient ─────────────────────────────────────────────────────


def fd_gradient(domain, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        g[k] = (geom.signed_distance(domain, x + e).distance
                - geom.signed_distance(domain, x - e).distance) / (2 * h)
    return g


def near_medial_axis(domain, x, gap=1e-3):
    """True when the two nearest edges are almost equally close."""
    v = domain.vertices_at()
    nxt = np.roll(v, -1, axis=0)
    ab = nxt - v
    s = np.clip(np.einsum("ij,ij->i", x - v, ab) / np.einsum("ij,ij->i", ab, ab), 0, 1)
    d = np.sort(np.linalg.norm(x - (v + s[:, None] * ab), axis=1))
    return d[1] - d[0] < gap


class TestGradient:
    def test_top_edge_normal(self):
        assert np.allclose(geom.signed_distance_gradient(SQUARE, (10, 25)), [0, 1])

    def test_outside_corner(self):
        g = geom.signed_distance_gradient(SQUARE, (25, 25))
        assert np.allclose(g, [1 / math.sqrt(2)] * 2)
        assert np.allclose(g, fd_gradient(SQUARE, (25, 25)), rtol=1e-5)

    def test_inside_points_toward_nearest_wall(self):
        g = geom.signed_distance_gradient(SQUARE, (10, 5))
        assert np.allclose(g, [0, -1])
        assert np.allclose(g, fd_gradient(SQUARE, (10, 5)), rtol=1e-5, atol=1e-9)

    def test_on_boundary_raises(self):
        with pytest.raises(OnBoundary):
            geom.signed_distance_gradient(SQUARE, (20, 7))

    @pytest.mark.parametrize("name", sorted(DOMAINS))
    def test_unit_norm_and_finite_differences(self, name):
        domain = DOMAINS[name]
        rng = np.random.default_rng(5)
        checked = 0
        for x in random_queries(domain, 400, rng):
            if near_medial_axis(domain, x) or abs(geom.signed_distance(domain, x).distance) < 1e-3:
                continue
            g = geom.signed_distance_gradient(domain, x)
            assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)
            fd = fd_gradient(domain, x)
            assert np.linalg.norm(g - fd) / np.linalg.norm(g) < 1e-5
            checked += 1
        assert checked > 300

    def test_distance_field_matches_pointwise(self):
        rng = np.random.default_rng(2)
        q = random_queries(TRIANGLE, 100, rng)
        b, grad = geom.distance_field(TRIANGLE, q)
        for x, bx, gx in zip(q, b, grad):
            assert bx == geom.signed_distance(TRIANGLE, x).distance
            assert np.allclose(gx, geom.signed_distance_gradient(TRIANGLE, x))


class TestBoundaryFallback:
    def test_edge_interior_uses_edge_normal(self):
        assert np.allclose(geom.boundary_normal(SQUARE, (20, 7)), [1, 0])

    def test_vertex_uses_bisector(self):
        assert np.allclose(geom.boundary_normal(SQUARE, (20, 20)), [1 / math.sqrt(2)] * 2)
        assert np.allclose(geom.boundary_normal(SQUARE, (0, 0)), [-1 / math.sqrt(2)] * 2)

    def test_distance_field_on_boundary(self):
        b, grad = geom.distance_field(SQUARE, [(20, 7), (10, 0), (5, 5)])
        assert np.allclose(b, [0, 0, -5])
        assert np.allclose(grad, [[1, 0], [0, -1], [0, -1]])

    def test_outward_normals_ccw(self):
        assert np.allclose(geom.edge_normals(SQUARE), [[0, -1], [1, 0], [0, 1], [-1, 0]])


# ── containment ──────────────────────────────────────────────────


class TestContains:
    def test_square_center(self):
        assert geom.contains(SQUARE, (10, 10))

    def test_square_outside(self):
        assert not geom.contains(SQUARE, (10, 25))

    def test_boundary_counts_as_inside(self):
        assert geom.contains(SQUARE, (0, 10))
        assert geom.contains(SQUARE, (20, 20))

    def test_arrow_notch_is_outside(self):
        # the rear notch sits between the two barbs on the arrow axis
        axis = np.array([1.0, 1.0]) / math.sqrt(2)
        notch_point = np.array([10.0, 10.0]) + 3.0 * axis
        assert not geom.contains(ARROW, notch_point)
        assert geom.winding_number(ARROW, notch_point) == 0
        assert geom.contains(ARROW, np.array([10.0, 10.0]) + 15.0 * axis)

    @pytest.mark.parametrize("name", sorted(DOMAINS))
    def test_ray_casting_matches_winding_number(self, name):
        domain = DOMAINS[name]
        rng = np.random.default_rng(13)
        q = random_queries(domain, 1000, rng)
        inside = geom.contains_many(domain, q)
        winding = np.array([geom.winding_number(domain, x) for x in q])
        assert np.array_equal(inside, winding == 1)

    def test_moving_domain(self):
        d = geom.PolygonDomain(config.square_vertices(), velocity=(1.0, 0.0))
        assert not geom.contains(d, (1, 10), t=5.0)
        assert geom.contains(d, (24, 10), t=5.0)
