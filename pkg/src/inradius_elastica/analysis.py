"""Calculus of the optimal-arc energy E(alpha), contact splitting, and the five inequalities.

    E(alpha) = I(alpha)^2 / sin(alpha),      I(alpha) = integral of sqrt(cos) over [0, alpha]
    h(alpha) = sqrt(cos alpha) I(alpha) / sin(alpha)     (end curvature of the arc)
    E'       = h (2 - h)
    E''      = (2 / sin a) (1 - h) (cos a (1 - h) - I sin a / (2 sqrt(cos a)))
    R(alpha) = I(alpha) - 2 sin a cos^{3/2} a / (1 + cos^2 a),   R' = 16 sin^2 a sqrt(cos a) / (cos 2a + 3)^2

R >= 0 is what makes E'' negative; E'' tends to -infinity at pi/2.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .geom_kernel import (
    REFUSE_TURN,
    WARN_TURN,
    CoarseSamplingWarning,
    ConvexBody,
    FunctionalsReport,
    functionals,
    sig9,
    turning_angles,
)
from .optimal_arc import HALF_PI, constant_a, energy_closed_form

log = logging.getLogger(__name__)

ALPHA_FLOOR = 1e-6


def _check(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha <= HALF_PI):
        raise quad.DomainError(f"alpha={alpha!r} outside (0, pi/2]")
    return alpha


def h_alpha(alpha) -> float:
    """End curvature sqrt(cos a) I(a) / sin(a); never above 1."""
    alpha = _check(alpha)
    if alpha == HALF_PI:
        return 0.0
    h = math.sqrt(math.cos(alpha)) * quad.int_sqrt_cos(alpha) / math.sin(alpha)
    if h > 1.0 + 1e-12:
        raise ArithmeticError(f"h({alpha}) = {h} exceeds 1")
    return h


def E_prime(alpha) -> float:
    h = h_alpha(alpha)
    return h * (2.0 - h)


def E_second(alpha) -> float:
    """Second derivative of E; the 1/sqrt(cos) factor is kept separate so pi/2 gives -inf."""
    alpha = _check(alpha)
    if alpha == HALF_PI:
        return -math.inf
    I = quad.int_sqrt_cos(alpha)
    s, c = math.sin(alpha), math.cos(alpha)
    h = math.sqrt(c) * I / s
    return (2.0 / s) * (1.0 - h) * (c * (1.0 - h) - I * s / (2.0 * math.sqrt(c)))


def R_alpha(alpha) -> float:
    """I(a) - 2 sin(a) / (sqrt(cos a) (2 + tan^2 a)), rewritten without tan and 1/sqrt(cos)."""
    alpha = float(alpha)
    if not (0.0 <= alpha <= HALF_PI):
        raise quad.DomainError(f"alpha={alpha!r} outside [0, pi/2]")
    c = max(math.cos(alpha), 0.0)
    return quad.int_sqrt_cos(alpha) - 2.0 * math.sin(alpha) * c**1.5 / (1.0 + c * c)


def R_prime(alpha) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha <= HALF_PI):
        raise quad.DomainError(f"alpha={alpha!r} outside [0, pi/2]")
    return 16.0 * math.sin(alpha) ** 2 * math.sqrt(max(math.cos(alpha), 0.0)) / (math.cos(2 * alpha) + 3.0) ** 2


# -- the deficit alpha - E(alpha), accurate for small alpha ----------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)
_DEFICIT_SWITCH = 0.5


def energy_deficit(alpha) -> float:
    """alpha - E(alpha) >= 0 (E of the circular arc minus E of the optimal arc).

    For small alpha the difference cancels catastrophically, so it is
    evaluated from the identity

        alpha sin(a) - I(a)^2 = 1/2 double integral over [0,a]^2 of (sqrt(cos s) - sqrt(cos t))^2,

    with the difference of square roots written without cancellation.
    """
    alpha = _check(alpha)
    if alpha > _DEFICIT_SWITCH:
        return alpha - energy_closed_form(alpha)
    x = 0.5 * alpha * (_GL_X + 1.0)
    w = 0.5 * alpha * _GL_W
    s, t = np.meshgrid(x, x, indexing="ij")
    # cos s - cos t = -2 sin((s+t)/2) sin((s-t)/2)
    diff = -2.0 * np.sin(0.5 * (s + t)) * np.sin(0.5 * (s - t)) / (np.sqrt(np.cos(s)) + np.sqrt(np.cos(t)))
    return 0.5 * float(w @ (diff * diff) @ w) / math.sin(alpha)


# -- table ------------------------------------------------------------------------------

TABLE_COLUMNS = ("alpha", "E", "Eprime_analytic", "Eprime_fd", "Esecond", "h", "R")


def _fd_prime(f, alpha, step=1e-5):
    """Central difference, shrunk near the ends; second-order one-sided at pi/2."""
    room = min(alpha, HALF_PI - alpha)
    if room <= 0.0:
        d = step
        return (3 * f(alpha) - 4 * f(alpha - d) + f(alpha - 2 * d)) / (2 * d)
    d = min(step, 0.5 * room)
    return (f(alpha + d) - f(alpha - d)) / (2 * d)


@dataclass
class EAlphaTable:
    alpha: np.ndarray
    E: np.ndarray
    Eprime_analytic: np.ndarray
    Eprime_fd: np.ndarray
    Esecond: np.ndarray
    h: np.ndarray
    R: np.ndarray
    notes: list = field(default_factory=list)

    def rows(self):
        return zip(*(getattr(self, c) for c in TABLE_COLUMNS))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(TABLE_COLUMNS)
        for row in self.rows():
            wr.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def invariant_failures(self):
        """Hard invariants that do not hold (empty list when all pass)."""
        out = []
        if not np.all(self.E > 0):
            out.append("E > 0")
        if not np.all((self.h > 0) | (self.alpha == HALF_PI)) or not np.all(self.h <= 1.0):
            out.append("h in (0, 1]")
        if not np.all(self.Esecond < 0):
            out.append("E'' < 0")
        if not np.all(self.R >= 0):
            out.append("R >= 0")
        return out

    def concavity_defect(self):
        """Largest violation of E(a2) >= chord through E(a1), E(a3) over consecutive triples."""
        a, E = self.alpha, self.E
        lam = (a[1:-1] - a[:-2]) / (a[2:] - a[:-2])
        chord = (1 - lam) * E[:-2] + lam * E[2:]
        return float(np.max(chord - E[1:-1], initial=-math.inf))


def ealpha_table(grid_n: int = 1000) -> EAlphaTable:
    """E and its derivatives on grid_n points from 1e-6 to pi/2."""
    if grid_n < 3:
        raise quad.DomainError("grid_n must be at least 3")
    alpha = np.linspace(ALPHA_FLOOR, HALF_PI, grid_n)
    alpha[-1] = HALF_PI
    cols = {c: np.empty(grid_n) for c in TABLE_COLUMNS[1:]}
    for i, a in enumerate(alpha):
        cols["E"][i] = energy_closed_form(a)
        cols["Eprime_analytic"][i] = E_prime(a)
        cols["Eprime_fd"][i] = _fd_prime(energy_closed_form, a)
        cols["Esecond"][i] = E_second(a)
        cols["h"][i] = h_alpha(a)
        cols["R"][i] = R_alpha(a)
    table = EAlphaTable(alpha, **cols)
    if not check_h_monotone(table.h):
        table.notes.append("h is not strictly decreasing on this grid")
    return table


def check_h_monotone(h) -> bool:
    """Soft check: h is observed to decrease, but nothing depends on it. Logs instead of failing."""
    ok = bool(np.all(np.diff(h) < 0))
    if not ok:
        i = int(np.argmax(np.diff(h) >= 0))
        log.warning("h is not strictly decreasing near grid index %d", i)
    return ok


# -- sub-additivity ---------------------------------------------------------------------


@dataclass(frozen=True)
class SubadditivityReport:
    grid_n: int
    n_pairs: int
    min_gap: float
    argmin: tuple
    violations: int

    @property
    def passed(self):
        return self.violations == 0 and self.min_gap > 0


def subadditivity_gap(alpha, beta) -> float:
    """E(alpha) + E(beta) - E(alpha + beta), via deficits so that no cancellation occurs."""
    return energy_deficit(alpha + beta) - energy_deficit(alpha) - energy_deficit(beta)


def subadditivity_scan(grid_n: int = 200) -> SubadditivityReport:
    """Check E(a+b) < E(a) + E(b) for all a = i d, b = j d with i, j >= 1, i + j <= grid_n, d = (pi/2)/grid_n."""
    if grid_n < 2:
        raise quad.DomainError("grid_n must be at least 2")
    d = HALF_PI / grid_n
    idx = np.arange(1, grid_n + 1)
    D = np.array([energy_deficit(HALF_PI if i == grid_n else i * d) for i in idx])
    i, j = np.meshgrid(idx, idx, indexing="ij")
    ok = i + j <= grid_n
    gap = D[(i + j - 1)[ok]] - D[i[ok] - 1] - D[j[ok] - 1]
    k = int(np.argmin(gap))
    return SubadditivityReport(
        grid_n=grid_n,
        n_pairs=int(ok.sum()),
        min_gap=float(gap[k]),
        argmin=(float(i[ok][k] * d), float(j[ok][k] * d)),
        violations=int(np.sum(gap <= 0)),
    )


# -- contact splitting ------------------------------------------------------------------


def _E_ext(t):
    """E extended by its limit E(0+) = 0."""
    return 0.0 if t <= 0.0 else energy_closed_form(min(t, HALF_PI))


@dataclass(frozen=True)
class ContactSplit:
    gamma: float
    t_min: float
    e_min: float
    interval: tuple
    at_endpoint: bool
    unimodal: bool


def contact_split(gamma, grid_n: int = 2001, check: bool = True) -> ContactSplit:
    """Minimize e(t) = E(t) + E(gamma - t) over t in [gamma - pi/2, pi/2].

    Grid search, then golden-section refinement around the best grid point.
    Also records whether e rises up to gamma/2 and falls after it.
    """
    gamma = float(gamma)
    if not (HALF_PI <= gamma <= math.pi):
        raise quad.DomainError(f"gamma={gamma!r} outside [pi/2, pi]")
    lo, hi = gamma - HALF_PI, HALF_PI

    def e(t):
        return _E_ext(t) + _E_ext(gamma - t)

    ts = np.linspace(lo, hi, grid_n)
    es = np.array([e(t) for t in ts])
    k = int(np.argmin(es))
    a, b = ts[max(k - 1, 0)], ts[min(k + 1, grid_n - 1)]
    if 0 < k < grid_n - 1:
        g = 0.5 * (math.sqrt(5) - 1)
        x1, x2 = b - g * (b - a), a + g * (b - a)
        f1, f2 = e(x1), e(x2)
        while b - a > 1e-10:
            if f1 <= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - g * (b - a)
                f1 = e(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + g * (b - a)
                f2 = e(x2)
        t_min = 0.5 * (a + b)
        e_min = e(t_min)
    else:
        t_min, e_min = float(ts[k]), float(es[k])
    at_end = min(abs(t_min - lo), abs(t_min - hi)) <= 1e-6
    mid = 0.5 * gamma
    slack = 1e-13
    rising = np.all(np.diff(es[ts <= mid]) >= -slack)
    falling = np.all(np.diff(es[ts >= mid]) <= slack)
    result = ContactSplit(gamma, float(t_min), float(e_min), (lo, hi), bool(at_end), bool(rising and falling))
    if check and not at_end:
        raise ArithmeticError(f"e(t) minimized at interior point t={t_min} for gamma={gamma}")
    return result


# -- the five inequalities --------------------------------------------------------------


def inequality_bounds():
    a = constant_a()
    return {
        "EP": 2 * math.pi**2,
        "E2A": math.pi**3,
        "ED": 2 * math.pi,
        "ER": math.pi,
        "Er": 2 * a * a,
    }


class CoarseSamplingError(ValueError):
    pass


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    product: float
    bound: float
    tol: float

    @property
    def deficit(self):
        return self.product - self.bound

    @property
    def rel_deficit(self):
        return self.deficit / self.bound

    @property
    def passed(self):
        return self.rel_deficit >= -self.tol

    @property
    def equality(self):
        """Product equal to the bound within the discretization tolerance."""
        return abs(self.rel_deficit) <= self.tol

    def to_dict(self):
        return {
            "product": sig9(self.product),
            "bound": sig9(self.bound),
            "deficit": sig9(self.deficit),
            "passed": self.passed,
            "equality": self.equality,
        }


@dataclass(frozen=True)
class InequalityReport:
    functionals: FunctionalsReport
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"functionals": self.functionals.to_dict(), "inequalities": {c.name: c.to_dict() for c in self.checks}}


def inequality_suite(body: ConvexBody, tol: float = 1e-3) -> InequalityReport:
    """All five scale-free products against their lower bounds, relative tolerance ``tol``.

    Refuses bodies whose largest turning angle exceeds 0.6 rad (the polygon
    energy is meaningless there) and warns above 0.3 rad.
    """
    worst = float(np.max(np.abs(turning_angles(body))))
    if worst > REFUSE_TURN:
        raise CoarseSamplingError(f"largest turning angle {worst:.3f} rad > {REFUSE_TURN}; resample the body more finely")
    if worst > WARN_TURN:
        warnings.warn(f"largest turning angle {worst:.3f} rad > {WARN_TURN}", CoarseSamplingWarning, stacklevel=2)
    rep = functionals(body, warn=False)
    bounds = inequality_bounds()
    prods = rep.products
    return InequalityReport(rep, tuple(InequalityCheck(k, prods[k], bounds[k], tol) for k in bounds))


# -- random convex bodies ---------------------------------------------------------------


def _rigid(v, rng):
    phi = rng.uniform(0, 2 * math.pi)
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])
    return v @ rot.T + rng.normal(0.0, 1.0, 2)


def random_smooth_body(seed: int, n: int = 2000, family: str = "fourier", a: float = 2.0, b: float = 1.0, max_retries: int = 20):
    """Seeded smooth convex body sampled at n points, counterclockwise.

    family="ellipse": semi-axes a, b, randomly rotated and translated.
    family="fourier": support function p(phi) = 1 + sum_{k=2..4} (a_k cos k phi + b_k sin k phi)
    with coefficients decaying like 1/k^2 and rescaled so that the radius of
    curvature p + p'' stays between 0.1 and 1.9 times the mean, then randomly
    scaled, rotated and translated. Bodies failing the positivity or
    validation checks are redrawn, at most ``max_retries`` times.
    """
    rng = np.random.default_rng(seed)
    if family == "ellipse":
        t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return ConvexBody(_rigid(np.column_stack([a * np.cos(t), b * np.sin(t)]), rng))
    if family != "fourier":
        raise ValueError(f"unknown family {family!r}")
    ks = np.arange(2, 5)
    phi = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    for _ in range(max_retries):
        ca = rng.normal(size=ks.size) / ks**2
        cb = rng.normal(size=ks.size) / ks**2
        amp = np.hypot(ca, cb)
        budget = float(np.sum((ks**2 - 1) * amp))
        if budget == 0.0:
            continue
        u = rng.uniform(0.3, 0.9)
        scale = 0.8 * u / budget
        ca, cb = ca * scale, cb * scale
        kp = np.outer(phi, ks)
        p = 1.0 + np.cos(kp) @ ca + np.sin(kp) @ cb
        dp = -np.sin(kp) @ (ca * ks) + np.cos(kp) @ (cb * ks)
        rho = 1.0 + np.cos(kp) @ (ca * (1 - ks**2)) + np.sin(kp) @ (cb * (1 - ks**2))
        if np.min(rho) <= 0.05:
            continue
        v = np.column_stack([p * np.cos(phi) - dp * np.sin(phi), p * np.sin(phi) + dp * np.cos(phi)])
        v = _rigid(v * rng.uniform(0.5, 2.0), rng)
        try:
            return ConvexBody(v)
        except ValueError:
            continue
    raise ArithmeticError(f"no valid body after {max_retries} draws (seed {seed})")


@dataclass(frozen=True)
class FuzzReport:
    n_bodies: int
    violations: list
    min_rel_deficit: dict

    @property
    def passed(self):
        return not self.violations


def fuzz_inequalities(n_bodies: int = 100, n: int = 2000, seed0: int = 0, tol: float = 1e-3) -> FuzzReport:
    """Run the inequality suite on seeded random bodies; a violation is a non-positive deficit."""
    violations = []
    worst = {}
    for seed in range(seed0, seed0 + n_bodies):
        rep = inequality_suite(random_smooth_body(seed, n), tol)
        for c in rep.checks:
            worst[c.name] = min(worst.get(c.name, math.inf), c.rel_deficit)
            if not (c.deficit > 0 and c.passed):
                violations.append((seed, c.name, c.rel_deficit))
    return FuzzReport(n_bodies, violations, worst)
