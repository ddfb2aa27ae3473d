import csv
import io
import logging
import math

import mpmath as mp
import numpy as np
import pytest

from inradius_elastica import analysis as an
from inradius_elastica import geom_kernel as gk
from inradius_elastica.optimal_arc import build_omega_star, energy_closed_form
from inradius_elastica.quadrature import DomainError

from oracles import gamma_a, midpoint, regular_polygon

HP = math.pi / 2
A2 = gamma_a() ** 2


@pytest.fixture(scope="module")
def table():
    return an.ealpha_table(1000)


# -- h, E', E'', R ---------------------------------------------------------------------


def test_h_values():
    assert an.h_alpha(HP) == 0.0
    assert abs(an.h_alpha(1e-3) - 1.0) < 1e-6
    I = midpoint(lambda t: np.sqrt(np.cos(t)), 0.0, math.pi / 4)
    assert an.h_alpha(math.pi / 4) == pytest.approx(math.sqrt(math.cos(math.pi / 4)) / math.sin(math.pi / 4) * I, abs=1e-11)
    assert an.h_alpha(math.pi / 4) == pytest.approx(0.8851, abs=1e-4)


def test_h_bounded_by_cauchy_schwarz():
    for a in np.linspace(1e-3, HP - 1e-3, 200):
        assert an.h_alpha(a) <= math.sqrt(a * math.cos(a) / math.sin(a)) + 1e-15 <= 1 + 1e-15


def test_E_prime_values():
    assert an.E_prime(HP) == 0.0
    assert an.E_prime(1e-3) == pytest.approx(1.0, abs=1e-6)
    assert an.E_prime(math.pi / 4) == pytest.approx(0.9868, abs=1e-4)
    fd = (energy_closed_form(math.pi / 4 + 1e-5) - energy_closed_form(math.pi / 4 - 1e-5)) / 2e-5
    assert abs(an.E_prime(math.pi / 4) - fd) < 1e-6


def test_E_second_half_pi():
    assert an.E_second(HP) == -math.inf


def test_E_second_matches_displayed_form():
    for a in (0.2, 0.9, 1.5):
        h = an.h_alpha(a)
        displayed = (2 * math.cos(a) / math.sin(a)) * (1 - h) * (1 - h * (1 + math.tan(a) ** 2 / 2))
        assert an.E_second(a) == pytest.approx(displayed, rel=1e-12)


def _E_second_fd(alpha):
    """Second central difference of E in 50-digit arithmetic, step shrinking towards pi/2."""
    with mp.workdps(50):
        a = mp.mpf(alpha)
        delta = min(mp.mpf("1e-5"), min(a, mp.pi / 2 - a) * mp.mpf("1e-4"))
        f = lambda t: mp.sqrt(mp.cos(t))
        I0 = mp.quad(f, [0, a])

        def E(x):
            I = I0 + mp.quad(f, [a, x])
            return I * I / mp.sin(x)

        return float((E(a + delta) - 2 * E(a) + E(a - delta)) / delta**2)


@pytest.mark.parametrize("alpha", [1e-3, 0.1, 0.5, 1.0, 1.4, 1.56, HP - 1e-4, HP - 1e-6])
def test_E_second_vs_high_precision_differences(alpha):
    assert abs(an.E_second(alpha) - _E_second_fd(alpha)) < 1e-4


def test_E_second_negative():
    for a in np.linspace(1e-3, HP - 1e-6, 500):
        assert an.E_second(a) < 0


def test_R_at_zero():
    assert an.R_alpha(0.0) == 0.0 and an.R_prime(0.0) == 0.0


def test_R_matches_displayed_form():
    for a in (0.3, 1.0, 1.5):
        displayed = an.quad.int_sqrt_cos(a) - 2 * math.sin(a) / (math.sqrt(math.cos(a)) * (2 + math.tan(a) ** 2))
        assert an.R_alpha(a) == pytest.approx(displayed, abs=1e-13)
    assert an.R_alpha(HP) == pytest.approx(gamma_a(), abs=1e-12)


def test_R_prime_vs_central_difference():
    for a in np.linspace(1e-3, HP - 1e-3, 300):
        fd = (an.R_alpha(a + 1e-6) - an.R_alpha(a - 1e-6)) / 2e-6
        assert abs(an.R_prime(a) - fd) < 1e-6


def test_domain_errors():
    for fn in (an.h_alpha, an.E_prime, an.E_second):
        with pytest.raises(DomainError):
            fn(0.0)
        with pytest.raises(DomainError):
            fn(2.0)
    with pytest.raises(DomainError):
        an.R_alpha(-0.1)


# -- the table --------------------------------------------------------------------------


def test_table_invariants(table):
    assert table.alpha[0] == 1e-6 and table.alpha[-1] == HP
    assert table.invariant_failures() == []
    assert table.concavity_defect() <= 1e-12
    assert not table.notes


def test_table_E_prime_fd(table):
    inner = (table.alpha >= 0.01) & (table.alpha <= HP - 0.01)
    assert np.max(np.abs(table.Eprime_analytic - table.Eprime_fd)[inner]) < 1e-6


def test_table_E_below_circular_arc(table):
    # alpha - E ~ alpha^5/180 is below float resolution of E at the small end,
    # so the strict inequality is checked on the cancellation-free deficit
    assert np.all(table.E <= table.alpha * (1 + 4 * np.finfo(float).eps))
    assert all(an.energy_deficit(a) > 0 for a in table.alpha)


def test_table_csv(table):
    rows = list(csv.reader(io.StringIO(table.to_csv())))
    assert tuple(rows[0]) == an.TABLE_COLUMNS
    assert len(rows) == 1001
    assert float(rows[1][0]) == table.alpha[0]
    assert float(rows[-1][1]) == table.E[-1]


def test_table_too_small():
    with pytest.raises(DomainError):
        an.ealpha_table(2)


def test_h_monotone_soft_check(caplog):
    with caplog.at_level(logging.WARNING):
        assert an.check_h_monotone(np.array([1.0, 0.9, 0.95])) is False
    assert "not strictly decreasing" in caplog.text
    assert an.check_h_monotone(np.array([1.0, 0.5]))


# -- deficit and sub-additivity ------------------------------------------------------------


def test_deficit_matches_direct_difference():
    for a in (0.3, 0.5, 0.8, HP):
        assert an.energy_deficit(a) == pytest.approx(a - energy_closed_form(a), abs=1e-14)


def test_deficit_series():
    # alpha - E(alpha) = alpha^5 / 180 + O(alpha^7) from the Taylor series of I(alpha)
    for a in (1e-3, 1e-2, 0.05):
        assert an.energy_deficit(a) == pytest.approx(a**5 / 180, rel=a * a)


def test_subadditivity_quarter():
    assert energy_closed_form(HP) == pytest.approx(1.4355, abs=1e-4)
    assert 2 * energy_closed_form(math.pi / 4) == pytest.approx(1.5667, abs=5e-4)
    assert an.subadditivity_gap(math.pi / 4, math.pi / 4) == pytest.approx(2 * energy_closed_form(math.pi / 4) - A2, abs=1e-13)


def test_subadditivity_tiny_angles():
    a = 1e-4
    g = an.subadditivity_gap(a, a)
    assert g > 0
    # D(2a) - 2 D(a) with D ~ a^5/180 gives 30 a^5 / 180
    assert g == pytest.approx(a**5 / 6, rel=1e-3)


def test_subadditivity_scan():
    rep = an.subadditivity_scan(200)
    assert rep.passed and rep.violations == 0
    assert rep.n_pairs == 200 * 199 // 2
    assert rep.min_gap > 0
    assert rep.min_gap == pytest.approx(4.981096e-12, rel=1e-4)


# -- contact splitting -------------------------------------------------------------------------


def test_contact_split_pi():
    r = an.contact_split(math.pi)
    assert r.t_min == pytest.approx(HP, abs=1e-12)
    assert r.e_min == pytest.approx(2 * A2, abs=1e-12)


@pytest.mark.parametrize("gamma", [HP + 0.1, 0.75 * math.pi, math.pi - 0.1])
def test_contact_split_endpoint(gamma):
    r = an.contact_split(gamma)
    assert r.at_endpoint and r.unimodal
    lo, hi = r.interval
    assert min(abs(r.t_min - lo), abs(r.t_min - hi)) <= 1e-6
    # the middle of the range is the worst split
    mid = an._E_ext(gamma / 2) * 2
    ts = np.linspace(lo, hi, 101)
    assert mid >= max(an._E_ext(t) + an._E_ext(gamma - t) for t in ts) - 1e-15


def test_contact_split_half_pi():
    r = an.contact_split(HP)
    assert r.e_min == pytest.approx(A2, abs=1e-12)
    assert r.at_endpoint


def test_contact_split_domain():
    with pytest.raises(DomainError):
        an.contact_split(1.0)
    with pytest.raises(DomainError):
        an.contact_split(3.5)


# -- inequalities ---------------------------------------------------------------------------------


def test_disk_suite():
    rep = an.inequality_suite(gk.ConvexBody(regular_polygon(10_000)))
    assert rep.passed
    for k in ("EP", "E2A", "ED", "ER"):
        assert rep[k].equality
    assert rep["Er"].deficit == pytest.approx(math.pi - 2 * A2, abs=1e-4)
    assert rep["Er"].deficit == pytest.approx(0.2705, abs=1e-4)


def test_omega_star_suite():
    rep = an.inequality_suite(build_omega_star(4000).body)
    assert rep.passed
    assert rep["Er"].equality
    for k in ("EP", "E2A", "ED", "ER"):
        assert rep[k].deficit > 0 and not rep[k].equality
    d = rep.to_dict()
    assert set(d["inequalities"]) == set(gk.PRODUCT_KEYS)


def test_ellipse_suite():
    rep = an.inequality_suite(an.random_smooth_body(0, 4000, family="ellipse"))
    assert all(c.deficit > 0 for c in rep.checks)


def test_coarse_body_refused_and_warned():
    with pytest.raises(an.CoarseSamplingError):
        an.inequality_suite(gk.ConvexBody(regular_polygon(8)))
    with pytest.warns(gk.CoarseSamplingWarning):
        an.inequality_suite(gk.ConvexBody(regular_polygon(16)))


def test_bounds():
    b = an.inequality_bounds()
    assert b["Er"] == pytest.approx(2.8711, abs=1e-4)
    assert b["E2A"] == pytest.approx(math.pi**3)


# -- random bodies ----------------------------------------------------------------------------------


def test_random_ellipse_area():
    b = an.random_smooth_body(0, 20_000, family="ellipse", a=2, b=1)
    assert gk.area(b) == pytest.approx(2 * math.pi, abs=1e-4)


def test_random_fourier_valid():
    b = an.random_smooth_body(1, 2000)
    assert isinstance(b, gk.ConvexBody) and b.n == 2000


def test_random_deterministic():
    assert np.array_equal(an.random_smooth_body(5).vertices, an.random_smooth_body(5).vertices)
    assert not np.array_equal(an.random_smooth_body(5).vertices, an.random_smooth_body(6).vertices)


def test_random_unknown_family():
    with pytest.raises(ValueError):
        an.random_smooth_body(0, family="blob")


def test_fuzz_small():
    rep = an.fuzz_inequalities(10, 1000)
    assert rep.passed and rep.n_bodies == 10
    assert all(v > 0 for v in rep.min_rel_deficit.values())
