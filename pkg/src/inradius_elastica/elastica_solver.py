"""Direct numerical solution of the arc problem, independent of the closed form.

Problem for a half contact angle alpha and a length L: minimize

    E = 0.5 * integral of theta'(s)^2 over [0, L]
    subject to theta(0) = 0, theta(L) = 2 alpha,
               integral cos(theta) = sin(2 alpha),
               integral sin(theta) = 1 - cos(2 alpha),
               theta nondecreasing (optional: convexity).

Two routes:

* a discrete minimization on a uniform grid (augmented Lagrangian on the two
  integral constraints, gradient projection with Newton steps on the active
  face for the inner problems), with a golden-section search over L;
* for alpha = pi/2, shooting in the pendulum family
  theta' = sqrt(c^2 - a0 sin theta), fitting (c, a0) to the length and the
  height constraint.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.linalg import solveh_banded

from . import _kernels
from . import quadrature as quad
from .geom_kernel import TangentAngleArc, curvature, reconstruct_curve, sig9

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


class SolverError(ArithmeticError):
    pass


class InfeasibleLengthError(SolverError, ValueError):
    pass


class ConvergenceError(SolverError):
    """Iteration budget exhausted; ``best`` holds the last iterate as an ElasticaSolution."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ShootingError(SolverError):
    pass


class TurningPointError(ShootingError):
    """theta' reached zero before theta reached its end value."""

    def __init__(self, message, s_stop=None):
        super().__init__(message)
        self.s_stop = s_stop


class LengthExhaustedError(ShootingError):
    """theta did not reach its end value within the allowed arclength."""

    def __init__(self, message, theta_reached=None):
        super().__init__(message)
        self.theta_reached = theta_reached


@dataclass(frozen=True)
class ElasticaProblem:
    alpha: float
    L: float
    n: int = 800
    enforce_convexity: bool = True

    def __post_init__(self):
        if not (0.0 < self.alpha <= HALF_PI):
            raise quad.DomainError(f"alpha={self.alpha!r} outside (0, pi/2]")
        if self.n < 32:
            raise quad.DomainError("grid size n must be at least 32")
        chord = 2.0 * math.sin(self.alpha)
        if not (self.L >= chord * (1 + 1e-9)) or not math.isfinite(self.L):
            raise InfeasibleLengthError(f"L={self.L!r} does not exceed the chord 2 sin(alpha)={chord!r}")

    @property
    def targets(self):
        a2 = 2.0 * self.alpha
        return np.array([math.sin(a2), 1.0 - math.cos(a2)])


@dataclass
class ElasticaSolution:
    alpha: float
    L: float
    theta: np.ndarray
    energy: float
    constraint_residuals: tuple
    multiplier_fit: tuple = (math.nan, math.nan, math.nan)
    kkt_residual: float = math.nan
    al_multipliers: tuple = (0.0, 0.0)
    iterations: int = 0
    converged: bool = True
    evaluations: list = field(default_factory=list, repr=False)

    @property
    def arc(self):
        return TangentAngleArc(self.theta, self.L, monotone=False)

    def to_dict(self):
        return {
            "alpha": sig9(self.alpha),
            "L": sig9(self.L),
            "energy": sig9(self.energy),
            "residuals": [sig9(r) for r in self.constraint_residuals],
            "multipliers": [sig9(c) for c in self.multiplier_fit],
            "kkt_residual": sig9(self.kkt_residual),
            "theta": [sig9(t) for t in self.theta.tolist()],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


# -- discrete fixed-length problem -------------------------------------------------


class _Discrete:
    """Energy, constraints and projections for the interior unknowns theta_1..theta_{n-2}."""

    def __init__(self, problem: ElasticaProblem):
        n = problem.n
        self.lo, self.hi = 0.0, 2.0 * problem.alpha
        self.ds = problem.L / (n - 1)
        self.w = np.full(n, self.ds)
        self.w[0] = self.w[-1] = 0.5 * self.ds
        self.target = problem.targets
        self.convex = problem.enforce_convexity

    def full(self, x):
        return np.concatenate(([self.lo], x, [self.hi]))

    def energy(self, t):
        d = np.diff(t)
        return 0.5 * float(np.dot(d, d)) / self.ds

    def cons(self, t):
        return np.array([self.w @ np.cos(t), self.w @ np.sin(t)]) - self.target

    def project(self, v):
        if not self.convex:
            return v
        if np.any(np.diff(v) < 0):
            v = _kernels.pav_nondecreasing(v)
        return np.clip(v, self.lo, self.hi)

    def merit(self, x, mu, rho):
        t = self.full(x)
        c = self.cons(t)
        return self.energy(t) - mu @ c + 0.5 * rho * (c @ c)

    def grad(self, x, mu, rho):
        t = self.full(x)
        c = self.cons(t)
        d = np.diff(t)
        m = -mu + rho * c
        J = np.vstack([-self.ds * np.sin(x), self.ds * np.cos(x)])
        return (d[:-1] - d[1:]) / self.ds + m @ J, J, m


def _face_newton_direction(y, g, m, J, rho, free_label, n_blocks, ds):
    """Newton direction on the face where tied entries move together and pinned ones stay.

    Reduced Hessian = graph Laplacian / ds + diag(curvature of the constraint
    terms) + rho J^T J; the rank-2 term is handled by Woodbury around a banded
    Cholesky solve.
    """
    free = free_label >= 0
    idx = free_label[free]
    q = ds * (-m[0] * np.cos(y) - m[1] * np.sin(y))
    diag = np.zeros(n_blocks)
    np.add.at(diag, idx, q[free])
    # links of the full chain 0..n-1 (both ends pinned, label -1)
    lab = np.concatenate(([-1], free_label, [-1]))
    e0, e1 = lab[:-1], lab[1:]
    cut = e0 != e1
    for side in (e0[cut], e1[cut]):
        side = side[side >= 0]
        np.add.at(diag, side, 1.0 / ds)
    off = np.zeros(n_blocks)
    both = cut & (e0 >= 0) & (e1 >= 0)
    off[e0[both]] = -1.0 / ds
    gb = np.zeros(n_blocks)
    np.add.at(gb, idx, g[free])
    Jb = np.zeros((n_blocks, 2))
    np.add.at(Jb, idx, J.T[free])
    shift = 0.0
    while True:
        ab = np.zeros((2, n_blocks))
        ab[0, 1:] = off[:-1]
        ab[1] = diag + shift
        try:
            Hg = solveh_banded(ab, gb)
            HJ = solveh_banded(ab, Jb)
            break
        except np.linalg.LinAlgError:
            shift = max(2.0 * shift, 1e-8 / ds)
    S = np.eye(2) / rho + Jb.T @ HJ
    db = -(Hg - HJ @ np.linalg.solve(S, Jb.T @ Hg))
    d = np.zeros_like(y)
    d[free] = db[idx]
    return d


def _face_labels(y, lo, hi, convex):
    if not convex:
        return np.arange(y.size), y.size
    new = np.ones(y.size, dtype=bool)
    new[1:] = y[1:] != y[:-1]
    lab = np.cumsum(new) - 1
    pinned = (y <= lo) | (y >= hi)
    free_ids = np.unique(lab[~pinned])
    out = np.full(y.size, -1)
    out[~pinned] = np.searchsorted(free_ids, lab[~pinned])
    return out, free_ids.size


def solve_fixed_length(
    problem: ElasticaProblem,
    tol_grad: float = 1e-7,
    tol_cons: float = 1e-8,
    max_inner: int = 100_000,
    initial=None,
    fit_kkt: bool = True,
) -> ElasticaSolution:
    """Minimize the discrete energy at fixed length L.

    Augmented Lagrangian outer loop (penalty 10, doubled each round, capped at
    1e6). Each inner problem is solved by a projected-gradient (Cauchy) step
    followed by a Newton step restricted to the active face of the
    nondecreasing cone. Stops when the projected gradient is below
    ``tol_grad`` and both constraint residuals below ``tol_cons``.

    ``initial`` optionally replaces the linear starting guess (full grid,
    including the pinned ends).
    """
    disc = _Discrete(problem)
    n, ds = problem.n, disc.ds
    if initial is None:
        x = np.linspace(disc.lo, disc.hi, n)[1:-1].copy()
    else:
        x = disc.project(np.asarray(initial, dtype=float)[1:-1].copy())
    mu = np.zeros(2)
    rho = 10.0
    total = 0
    inner_tol = 1e-9
    converged = False
    c = disc.cons(disc.full(x))
    pg_norm = math.inf
    for outer in range(200):
        stalled = 0
        for _ in range(500):
            g, J, m = disc.grad(x, mu, rho)
            pg_norm = float(np.max(np.abs(x - disc.project(x - g / ds))))
            # the second stop catches the rounding floor of the merit function
            if pg_norm < inner_tol or total >= max_inner or stalled >= 3:
                break
            total += 1
            # projected-gradient step with Armijo backtracking
            f0 = disc.merit(x, mu, rho)
            t = 0.25 * ds
            while True:
                y = disc.project(x - t * g)
                if disc.merit(y, mu, rho) <= f0 + 1e-4 * (g @ (y - x)) or t < 1e-14:
                    break
                t *= 0.5
            g, J, m = disc.grad(y, mu, rho)
            labels, nb = _face_labels(y, disc.lo, disc.hi, disc.convex)
            if nb == 0:
                stalled = stalled + 1 if disc.merit(y, mu, rho) >= f0 else 0
                x = y
                continue
            d = _face_newton_direction(y, g, m, J, rho, labels, nb, ds)
            fy = disc.merit(y, mu, rho)
            t = 1.0
            while True:
                z = disc.project(y + t * d)
                fz = disc.merit(z, mu, rho)
                if fz <= fy + 1e-4 * (g @ (z - y)) or t < 1e-12:
                    break
                t *= 0.5
            x = z if fz <= fy else y
            stalled = stalled + 1 if min(fz, fy) >= f0 else 0
        c = disc.cons(disc.full(x))
        if np.max(np.abs(c)) < 0.01 * tol_cons and pg_norm < tol_grad:
            converged = True
            break
        if total >= max_inner:
            break
        mu = mu - rho * c
        rho = min(2.0 * rho, 1e6)
    theta = disc.full(x)
    sol = ElasticaSolution(
        alpha=problem.alpha,
        L=problem.L,
        theta=theta,
        energy=disc.energy(theta),
        constraint_residuals=(float(c[0]), float(c[1])),
        al_multipliers=(float(mu[0]), float(mu[1])),
        iterations=total,
        converged=converged,
    )
    if not converged:
        if np.max(np.abs(c)) < tol_cons and pg_norm < tol_grad:
            sol.converged = True
        else:
            raise ConvergenceError(
                f"no convergence after {total} inner iterations (constraint residual {np.max(np.abs(c)):.2e}, "
                f"projected gradient {pg_norm:.2e})",
                sol,
            )
    if fit_kkt:
        _attach_kkt(sol)
    return sol


def _attach_kkt(sol):
    res, coef = kkt_residual(sol.arc, return_fit=True)
    sol.kkt_residual = res
    sol.multiplier_fit = tuple(float(c) for c in coef)


def free_length_bracket(alpha):
    """Default search interval for the optimal length.

    For alpha < pi/2 the arc lies between the chord and the two tangent
    segments at its ends, so its length is in (2 sin alpha, 2 tan alpha).
    For alpha = pi/2 the upper end is the limit length of the pendulum
    family (without convexity the energy keeps decreasing with L beyond it).
    """
    alpha = float(alpha)
    if alpha >= HALF_PI:
        return math.pi, family_limit_length()
    return 2.0 * math.sin(alpha) * (1 + 1e-6), 2.0 * math.tan(alpha)


def solve_free_length(
    alpha, L_bracket=None, n: int = 800, enforce_convexity: bool = True, tol: float = 1e-6
) -> ElasticaSolution:
    """Golden-section search over L of the fixed-length minimum energy.

    Each fixed-length solve is warm-started from the nearest previous
    solution (resampled), which keeps the search deterministic.
    """
    lo, hi = free_length_bracket(alpha) if L_bracket is None else map(float, L_bracket)
    if not lo < hi:
        raise quad.DomainError(f"empty bracket [{lo}, {hi}]")
    cache = {}

    def solve(L):
        if L in cache:
            return cache[L]
        guess = None
        if cache:
            near = min(cache, key=lambda K: abs(K - L))
            prev = cache[near].theta
            guess = prev  # same grid size; s_i/L is the shared parameter
        sol = solve_fixed_length(ElasticaProblem(alpha, L, n, enforce_convexity), initial=guess, fit_kkt=False)
        cache[L] = sol
        return sol

    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = solve(x1).energy, solve(x2).energy
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = solve(x1).energy
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = solve(x2).energy
    best = min(cache.values(), key=lambda s: s.energy)
    edge = 10 * tol
    if L_bracket is not None and (best.L - lo < edge or hi - best.L < edge):
        log.info("free-length minimum at the bracket end L=%.9g", best.L)
    best.evaluations = sorted((s.L, s.energy) for s in cache.values())
    _attach_kkt(best)
    return best


# -- KKT structure -----------------------------------------------------------------


def kkt_residual(arc: TangentAngleArc, points=None, return_fit: bool = False):
    """Distance of an arc from the optimality structure, fitted with free signs.

    Fits constants (c0, c1, c2) so that simultaneously

        theta'      = max(0, c0 + c1 (y + 1) + c2 x)          (affine curvature law)
        theta'^2/2  = c2 sin(theta) - c1 cos(theta)             (its first integral)

    hold in the least-squares sense. The second line follows from the first
    by differentiating along the arc; its integration constant is zero when
    the length is free. Without it any circle would pass (constant curvature
    is affine with c1 = c2 = 0). Returns the root-mean-square residual of the
    curvature law normalized by mean theta', plus that of the first
    integral normalized by mean theta'^2/2, combined in quadrature.
    """
    th = np.asarray(arc.theta, dtype=float)
    pts = reconstruct_curve(arc) if points is None else np.asarray(points, dtype=float)
    k = curvature(arc, order=4 if th.size >= 5 else 2)
    x, y1 = pts[:, 0], pts[:, 1] + 1.0
    sin, cos = np.sin(th), np.cos(th)
    scale1 = max(float(np.mean(np.abs(k))), 1e-300)
    scale2 = max(float(np.mean(0.5 * k * k)), 1e-300)
    root_n = math.sqrt(th.size)

    def resid(p):
        c0, c1, c2 = p
        r1 = (k - np.maximum(0.0, c0 + c1 * y1 + c2 * x)) / scale1
        r2 = (0.5 * k * k - (c2 * sin - c1 * cos)) / scale2
        return np.concatenate([r1, r2]) / root_n

    A = np.column_stack([np.ones_like(x), y1, x])
    p0 = np.linalg.lstsq(A, k, rcond=None)[0]
    fit = optimize.least_squares(resid, p0, method="lm", xtol=1e-14, ftol=1e-14)
    value = float(np.sqrt(np.sum(fit.fun**2)))
    if return_fit:
        return value, fit.x
    return value


# -- pendulum shooting (alpha = pi/2) -----------------------------------------------


@dataclass(frozen=True)
class ShootResult:
    s: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    energy_path: np.ndarray
    L_hit: float

    @property
    def energy(self):
        return float(self.energy_path[-1])

    @property
    def height(self):
        """Integral of sin(theta) along the path."""
        return float(self.y[-1] - self.y[0])


def shoot_pendulum(c, a0, L_max, theta_end=math.pi, tol=1e-12, max_steps=200_000) -> ShootResult:
    """Integrate theta' = sqrt(c^2 - a0 sin theta) from theta(0) = 0 with adaptive RK4.

    Stops at theta = theta_end (returned as L_hit) or raises
    TurningPointError if theta' vanishes first, LengthExhaustedError if s
    reaches L_max first.
    """
    c, a0 = float(c), float(a0)
    if c * c < a0:
        raise quad.DomainError(f"need c^2 >= a0, got c^2={c * c!r}, a0={a0!r}")
    s, st, _, status = _kernels.rk4_pendulum(c, a0, float(theta_end), float(L_max), float(tol), int(max_steps))
    # with c^2 = a0 the rate has a double zero at theta = pi/2: theta creeps
    # towards it without ever arriving, so running out of length is a stall
    top = 1.0 if theta_end >= HALF_PI else math.sin(theta_end)
    blocked = a0 > 0 and c * c - a0 * top <= 1e-12 * max(c * c, a0)
    if status == 2 or (status == 1 and blocked):
        raise TurningPointError(f"theta' vanished at s={s[-1]:.6g}, theta={st[-1, 0]:.6g}", float(s[-1]))
    if status == 1:
        raise LengthExhaustedError(f"theta={st[-1, 0]:.6g} < {theta_end} at s=L_max={L_max}", float(st[-1, 0]))
    if status == 3:
        raise ShootingError("step budget exhausted")
    return ShootResult(s.copy(), st[:, 0].copy(), st[:, 1].copy(), st[:, 2].copy(), st[:, 3].copy(), float(s[-1]))


def _pendulum_integrals(c, a0, jac=False):
    """Length, half height and energy of the pendulum arc over theta in [0, pi].

    Uses symmetry about pi/2 and the substitution u = w^2 (regular at u = 0
    even when c -> 0). Returns (L, Q, E) and optionally d(L, Q)/d(c, a0).
    """
    c2 = c * c
    top = math.sqrt(HALF_PI)
    opts = dict(epsabs=1e-13, epsrel=1e-13, limit=400)

    def q(w):
        return c2 - a0 * math.sin(w * w)

    def integral(f):
        # the sharp part near w = 0 has width ~ c / sqrt|a0|
        pts = [min(c / math.sqrt(abs(a0) + 1e-300), 0.5 * top)] if c < 0.1 else None
        with warnings.catch_warnings():
            # QUADPACK flags roundoff once the result is at machine precision
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(f, 0.0, top, points=pts, **opts)[0]

    L = 2.0 * integral(lambda w: 2.0 * w / math.sqrt(q(w)))
    Q = integral(lambda w: 2.0 * w * math.sin(w * w) / math.sqrt(q(w)))
    E = integral(lambda w: 2.0 * w * math.sqrt(q(w)))
    if not jac:
        return L, Q, E
    dL_dc = 2.0 * integral(lambda w: -2.0 * w * c / q(w) ** 1.5)
    dL_da = 2.0 * integral(lambda w: w * math.sin(w * w) / q(w) ** 1.5)
    dQ_dc = integral(lambda w: -2.0 * w * math.sin(w * w) * c / q(w) ** 1.5)
    dQ_da = integral(lambda w: w * math.sin(w * w) ** 2 / q(w) ** 1.5)
    return L, Q, E, np.array([[dL_dc, dL_da], [dQ_dc, dQ_da]])


def family_limit_length() -> float:
    """Length of the pendulum family in the limit c -> 0, where a0 -> -a^2.

    Then theta' = a sqrt(sin theta) and L = 2 * integral(1/sqrt(sin)) / a.
    """
    return 2.0 * quad.int_inv_sqrt_cos(HALF_PI) / quad.int_sqrt_cos(HALF_PI)


def _a0_for_c(c):
    """a0 < c^2 with half height Q(c, a0) = 1 (Q is increasing in a0)."""
    c2 = c * c
    lo, hi = -4.0, c2 * (1 - 1e-12)
    while _pendulum_integrals(c, lo)[1] > 1.0:
        lo *= 2.0
    return optimize.brentq(lambda a: _pendulum_integrals(c, a)[1] - 1.0, lo, hi, xtol=1e-14, rtol=1e-14)


@dataclass(frozen=True)
class ShootingSolution:
    L: float
    c: float
    a0: float
    energy: float
    energy_direct: float
    residual: tuple
    path: ShootResult

    @property
    def energy_formula(self):
        """c^2 L / 2 - a0."""
        return self.c * self.c * self.L / 2.0 - self.a0


def solve_bvp_via_shooting(L, alpha=HALF_PI, tol=1e-12, max_iter=60) -> ShootingSolution:
    """Find (c, a0) whose pendulum arc has length L and height 2; alpha = pi/2 only.

    Damped Newton on (L(c, a0) - L, Q(c, a0) - 1), both maps evaluated by
    quadrature, started from the best point of a coarse scan of the family.
    The energy is returned from c^2 L / 2 - a0 and recomputed along the
    shot path as half the integral of theta'^2.
    """
    if float(alpha) != HALF_PI:
        raise quad.DomainError("shooting is implemented for alpha = pi/2 only")
    L = float(L)
    if not L > math.pi:
        raise quad.DomainError(f"L={L!r} must exceed pi")
    L_top = family_limit_length()
    if L > L_top + 1e-7:
        raise ShootingError(f"no pendulum arc of length {L:.9g}: the family tops out near {L_top:.9g}")
    # coarse scan of the family parametrized by c
    best = None
    for c in np.geomspace(1e-6, 0.999, 40):
        a0 = _a0_for_c(c)
        Lc = _pendulum_integrals(c, a0)[0]
        if best is None or abs(Lc - L) < abs(best[2] - L):
            best = (c, a0, Lc)
    p = np.array(best[:2])

    def F(p):
        Lc, Q, _, J = _pendulum_integrals(p[0], p[1], jac=True)
        return np.array([Lc - L, Q - 1.0]), J

    r, J = F(p)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            break
        step = np.linalg.solve(J, -r)
        t = 1.0
        while True:
            trial = p + t * step
            if trial[0] > 0 and trial[0] ** 2 > trial[1]:
                rt, Jt = F(trial)
                if np.linalg.norm(rt) < (1 - 1e-4 * t) * np.linalg.norm(r) or t < 1e-10:
                    break
            t *= 0.5
            if t < 1e-10:
                raise ShootingError(f"Newton step failed at (c, a0)={tuple(p)}, residual={tuple(r)}")
        p, r, J = trial, rt, Jt
    else:
        raise ShootingError(f"Newton did not converge: (c, a0)={tuple(p)}, residual={tuple(r)}")
    c, a0 = float(p[0]), float(p[1])
    path = shoot_pendulum(c, a0, 2.0 * L, tol=1e-13)
    E = c * c * L / 2.0 - a0
    return ShootingSolution(L, c, a0, E, path.energy, (float(r[0]), float(r[1])), path)
