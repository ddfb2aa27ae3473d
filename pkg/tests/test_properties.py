"""Property tests for the invariants that hold on every input."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from inradius_elastica import analysis as an
from inradius_elastica import geom_kernel as gk
from inradius_elastica import quadrature as quad
from inradius_elastica._kernels import pav_nondecreasing
from inradius_elastica.optimal_arc import build_arc, energy_closed_form

from oracles import brute_diameter

HP = math.pi / 2
angles = st.floats(min_value=1e-3, max_value=HP, allow_nan=False)
FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def hull_bodies(draw, max_points=60):
    n = draw(st.integers(min_value=3, max_value=max_points))
    seed = draw(st.integers(min_value=0, max_value=2**31))
    pts = np.random.default_rng(seed).normal(size=(n, 2)) * draw(st.floats(0.1, 10.0))
    try:
        hull = ConvexHull(pts)
    except Exception:
        return gk.ConvexBody([[0, 0], [1, 0], [0, 1]])
    # ConvexHull returns 2-d vertices counterclockwise
    return gk.ConvexBody(pts[hull.vertices])


@FAST
@given(x=angles, y=angles)
def test_sqrt_cos_integral_monotone(x, y):
    if x < y:
        assert quad.int_sqrt_cos(x) < quad.int_sqrt_cos(y)
        assert quad.int_inv_sqrt_cos(x) < quad.int_inv_sqrt_cos(y)


@FAST
@given(x=angles)
def test_cauchy_schwarz(x):
    assert quad.int_sqrt_cos(x) ** 2 <= x * math.sin(x) * (1 + 1e-14)


@FAST
@given(frac=st.floats(0.0, 1.0))
def test_inversion_roundtrip(frac):
    target = frac * quad.int_sqrt_cos(HP)
    t = quad.invert_monotone(quad.int_sqrt_cos, target, (0.0, HP))
    assert abs(quad.int_sqrt_cos(t) - target) <= 1e-12 * target + 1e-14


@FAST
@given(y=st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_pav_is_a_projection(y):
    y = np.array(y)
    p = pav_nondecreasing(y)
    assert np.all(np.diff(p) >= -1e-12 * (1 + np.abs(p[1:])))
    assert np.allclose(pav_nondecreasing(p), p, atol=1e-9)
    assert math.isclose(p.sum(), y.sum(), rel_tol=1e-9, abs_tol=1e-7)
    # projection onto a cone: residual is orthogonal to the projection
    assert abs(np.dot(y - p, p)) <= 1e-7 * (1 + np.dot(y, y))


@FAST
@given(b=hull_bodies())
def test_calipers_equal_brute_force(b):
    assert gk.diameter(b) == brute_diameter(b.vertices)


@FAST
@given(b=hull_bodies())
def test_geometric_orderings(b):
    r, c = gk.inradius(b)
    R = gk.circumradius(b)
    D = gk.diameter(b)
    s = b.scale
    assert r <= R
    assert D <= 2 * R * (1 + 1e-12)
    assert gk.perimeter(b) <= math.pi * D * (1 + 1e-12)
    assert np.all(gk.edge_distances(b, c) >= r - 1e-10 * s)
    cx, cy = gk.enclosing_circle(b)[0]
    assert np.all(np.hypot(b.vertices[:, 0] - cx, b.vertices[:, 1] - cy) <= R + 1e-12 * s)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.05, 20.0))
def test_scaling_law(seed, t):
    b = an.random_smooth_body(seed, 400)
    base, sc = gk.functionals(b, warn=False), gk.functionals(b.scaled(t), warn=False)
    assert math.isclose(sc.E, base.E / t, rel_tol=1e-10)
    assert math.isclose(sc.A, base.A * t * t, rel_tol=1e-10)
    for k in gk.PRODUCT_KEYS:
        assert math.isclose(sc.products[k], base.products[k], rel_tol=1e-8)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_random_bodies_satisfy_inequalities(seed):
    rep = an.inequality_suite(an.random_smooth_body(seed, 1000))
    assert all(c.deficit > 0 for c in rep.checks)


@FAST
@given(a=st.floats(1e-3, HP - 1e-3), frac=st.floats(0.01, 0.99))
def test_subadditivity_pairs(a, frac):
    b = frac * (HP - a)
    assert an.subadditivity_gap(a, b) > 0


@FAST
@given(a=st.floats(1e-3, HP), b=st.floats(1e-3, HP), lam=st.floats(0.0, 1.0))
def test_E_concave(a, b, lam):
    m = lam * a + (1 - lam) * b
    assert energy_closed_form(m) >= lam * energy_closed_form(a) + (1 - lam) * energy_closed_form(b) - 1e-12


@FAST
@given(a=st.floats(1e-3, HP))
def test_E_below_alpha_and_h_bounded(a):
    assert an.energy_deficit(a) > 0
    assert 0 <= an.h_alpha(a) <= 1


@settings(max_examples=10, deadline=None)
@given(alpha=st.floats(0.05, HP), n=st.integers(16, 400))
def test_built_arcs_are_symmetric_and_monotone(alpha, n):
    arc = build_arc(alpha, n)
    assert np.all(np.diff(arc.theta) > 0)
    assert np.max(np.abs(arc.theta[::-1] - (2 * alpha - arc.theta))) < 1e-10


@settings(max_examples=10, deadline=None)
@given(b=hull_bodies(max_points=30))
def test_csv_roundtrip(b):
    assert np.array_equal(gk.parse_body(gk.body_to_csv(b), "csv").vertices, b.vertices)
    assert np.array_equal(gk.parse_body(gk.body_to_json(b), "json").vertices, b.vertices)
