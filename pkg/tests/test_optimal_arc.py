import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from inradius_elastica import geom_kernel as gk
from inradius_elastica import optimal_arc as oa
from inradius_elastica.quadrature import DomainError

from oracles import gamma_a, midpoint

HP = math.pi / 2
A = gamma_a()
ALPHAS = [0.05, 0.3, math.pi / 4, 1.2, 1.5, HP]


def test_constant_a():
    assert oa.constant_a() == pytest.approx(A, abs=1e-12)


def test_multipliers_half_pi():
    l1, l2 = oa.multipliers(HP)
    assert l1 == 0.0
    assert l2 == pytest.approx(-A * A / 2, abs=1e-12)
    assert -l2 == pytest.approx(0.71777, abs=1e-5)


def test_multipliers_quarter_pi():
    I = midpoint(lambda t: np.sqrt(np.cos(t)), 0.0, math.pi / 4)
    l1, l2 = oa.multipliers(math.pi / 4)
    assert l1 == pytest.approx(-math.cos(math.pi / 4) * I * I / (2 * math.sin(math.pi / 4) ** 2), abs=1e-11)
    assert l1 == pytest.approx(-0.3917, abs=1e-4)
    assert l2 == pytest.approx(l1, abs=1e-14)


def test_multipliers_small_alpha():
    l1, _ = oa.multipliers(1e-3)
    assert abs(-l1 - 0.5) < 1e-5


@pytest.mark.parametrize("alpha", ALPHAS[:-1])
def test_multiplier_ratio(alpha):
    l1, l2 = oa.multipliers(alpha)
    assert l2 == pytest.approx(l1 * math.tan(alpha), rel=1e-13)


def test_energy_values():
    assert oa.energy_closed_form(HP) == pytest.approx(1.4355400, abs=1e-7)
    assert 2 * oa.energy_closed_form(HP) == pytest.approx(2.8711, abs=1e-4)
    e = oa.energy_closed_form(math.pi / 4)
    assert e == pytest.approx(0.7833, abs=3e-4)
    assert e < math.pi / 4


def test_small_angle_limits():
    for al in (1e-2, 1e-3, 1e-4):
        assert oa.energy_closed_form(al) / al == pytest.approx(1.0, abs=al)
        assert oa.arc_length(al) / (2 * al) == pytest.approx(1.0, abs=al)


def test_arc_length_values():
    assert oa.arc_length(HP) == pytest.approx(4.37687923, abs=1e-8)
    L = oa.arc_length(math.pi / 4)
    assert L == pytest.approx(1.57874491, abs=1e-8)
    assert L > 2 * math.sin(math.pi / 4)


@pytest.mark.parametrize("bad", [0.0, -0.1, HP + 1e-6])
def test_domain_errors(bad):
    for fn in (oa.multipliers, oa.energy_closed_form, oa.arc_length, oa.OptimalArcSpec.from_alpha):
        with pytest.raises(DomainError):
            fn(bad)
    with pytest.raises(DomainError):
        oa.build_arc(bad, 100)


def test_build_arc_minimum_samples():
    with pytest.raises(DomainError):
        oa.build_arc(1.0, 15)
    with pytest.raises(DomainError):
        oa.build_omega_star(63)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_spec_invariants(alpha):
    sp = oa.OptimalArcSpec.from_alpha(alpha)
    assert sp.K_alpha > 0
    assert sp.L_alpha > 2 * math.sin(alpha)
    assert 0 <= sp.end_curvature <= 1
    assert sp.energy == oa.energy_closed_form(alpha)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_arc_endpoints_and_energy(alpha):
    arc = oa.build_arc(alpha, 4000)
    assert arc.theta[0] == 0.0 and arc.theta[-1] == 2 * alpha
    pts = gk.reconstruct_curve(arc)
    end = (math.sin(2 * alpha), -1 + 1 - math.cos(2 * alpha))
    assert np.hypot(*(pts[-1] - end)) < 1e-6
    assert gk.elastic_energy(arc) == pytest.approx(oa.energy_closed_form(alpha), rel=1e-5)
    assert np.all(np.diff(arc.theta) > 0)


def test_quarter_pi_endpoint():
    pts = gk.reconstruct_curve(oa.build_arc(math.pi / 4, 4000))
    assert np.hypot(*(pts[-1] - (1.0, 0.0))) < 1e-6


def test_half_pi_closed_form_profile():
    arc = oa.build_arc(HP, 4000)
    pts = gk.reconstruct_curve(arc)
    x_closed = (2 / A) * np.sqrt(np.sin(arc.theta))
    assert np.max(np.abs(pts[:, 0] - x_closed)) < 1e-6
    # both constraints that single out theta' = a sqrt(sin theta)
    ds = arc.ds
    assert abs(np.sum(0.5 * (np.sin(arc.theta[1:]) + np.sin(arc.theta[:-1]))) * ds - 2) < 1e-6
    assert abs(np.sum(0.5 * (np.cos(arc.theta[1:]) + np.cos(arc.theta[:-1]))) * ds) < 1e-6
    assert 2 * gk.elastic_energy(arc) == pytest.approx(2 * A * A, rel=1e-5)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n", [101, 1001])
def test_midpoint_symmetry(alpha, n):
    arc = oa.build_arc(alpha, n)
    assert abs(arc.theta[n // 2] - alpha) < 1e-10
    # theta(L - s) = 2 alpha - theta(s)
    assert np.max(np.abs(arc.theta[::-1] - (2 * alpha - arc.theta))) < 1e-10


@pytest.mark.parametrize("alpha", ALPHAS)
def test_optimality_ode(alpha):
    arc = oa.build_arc(alpha, 4000)
    res = oa.optimality_residual(arc, oa.OptimalArcSpec.from_alpha(alpha))
    assert np.max(np.abs(res)) < 1e-8


@pytest.mark.parametrize("alpha", ALPHAS)
def test_end_curvatures(alpha):
    arc = oa.build_arc(alpha, 4000)
    k = gk.curvature(arc, order=4)
    sp = oa.OptimalArcSpec.from_alpha(alpha)
    assert k[0] == pytest.approx(sp.end_curvature, abs=1e-5)
    assert k[-1] == pytest.approx(k[0], abs=1e-5)


def test_shape_derivative_second_order():
    res = [np.max(np.abs(oa.shape_derivative_residual(oa.build_arc(HP, n, dtype=np.longdouble)))) for n in (1000, 2000, 4000)]
    assert res[0] > res[1] > res[2]
    assert math.log2(res[0] / res[1]) > 1.9 and math.log2(res[1] / res[2]) > 1.9


def test_longdouble_arc_matches_float():
    a64 = oa.build_arc(1.0, 500)
    a80 = oa.build_arc(1.0, 500, dtype=np.longdouble)
    assert a80.theta.dtype == np.longdouble
    assert np.max(np.abs(a64.theta - a80.theta.astype(float))) < 1e-13


# -- the domain ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def canonical():
    return oa.build_omega_star(4000)


def test_omega_star_functionals(canonical):
    rep = gk.functionals(canonical.body)
    assert rep.E == pytest.approx(2.8711, abs=1e-3)
    assert rep.r == pytest.approx(1.0, abs=1e-4)
    assert rep.D == pytest.approx(4 / A, abs=1e-6)
    ys = canonical.body.vertices[:, 1]
    assert ys.max() - ys.min() == 2.0


def test_omega_star_symmetry(canonical):
    v = canonical.body.vertices
    mirrored = v * [-1.0, 1.0]
    # every vertex has its mirror image among the vertices
    key = lambda p: np.lexsort((p[:, 1], p[:, 0]))
    assert np.max(np.abs(v[key(v)] - mirrored[key(mirrored)])) < 1e-12


def test_omega_star_contains_unit_disk(canonical):
    d = gk.edge_distances(canonical.body, (0.0, 0.0))
    assert d.min() > 1 - 1e-6
    assert canonical.contact_points == [(0.0, -1.0), (0.0, 1.0)]
    v = canonical.body.vertices
    assert any(np.array_equal(p, [0.0, 1.0]) for p in v) and any(np.array_equal(p, [0.0, -1.0]) for p in v)


def test_omega_star_strictly_convex(canonical):
    assert np.all(gk.turning_angles(canonical.body) > 0)


@pytest.mark.parametrize("h", [0.25, 0.5, 1.0])
def test_stadium_variants(canonical, h):
    base = gk.functionals(canonical.body)
    dom = oa.build_omega_star(4000, h)
    rep = gk.functionals(dom.body)
    assert abs(rep.E - base.E) <= 1e-6
    assert abs(rep.r - 1.0) <= 1e-4
    assert abs(rep.products["Er"] - base.products["Er"]) <= 1e-6 + 1e-4 * base.E
    assert rep.P == pytest.approx(base.P + 4 * h, abs=1e-9)
    assert len(dom.contact_points) == 4


def test_negative_segment_rejected():
    with pytest.raises(DomainError):
        oa.build_omega_star(100, -0.1)


def test_svg(tmp_path, canonical):
    p = tmp_path / "o.svg"
    oa.write_svg(canonical, p)
    root = ET.parse(p).getroot()
    assert root.tag.endswith("svg")
    circles = [e for e in root.iter() if e.tag.endswith("circle")]
    assert len(circles) == 1 + len(canonical.contact_points)
