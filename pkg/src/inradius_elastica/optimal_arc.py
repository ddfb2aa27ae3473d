"""Closed-form optimal arcs between two contact points, and the optimal domain.

For a half contact angle alpha in (0, pi/2] the optimal arc solves

    theta'(s) = K sqrt(cos(theta - alpha)),  theta(0) = 0,  theta(L) = 2 alpha,
    K = I(alpha) / sin(alpha),  I(alpha) = integral of sqrt(cos) over [0, alpha].

Separating variables gives s(theta) = (G(theta - alpha) + G(alpha)) / K with
G the primitive of 1/sqrt(cos), so the arc is sampled by inverting G rather
than by stepping the ODE (whose right side vanishes at theta = 0 when
alpha = pi/2). At alpha = pi/2 the ODE is theta' = a sqrt(sin theta) with
a = I(pi/2), and the arc satisfies x = (2/a) sqrt(sin theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import quadrature as quad
from .geom_kernel import ConvexBody, TangentAngleArc, curvature, reconstruct_curve

HALF_PI = 0.5 * math.pi


def _check_alpha(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha <= HALF_PI):
        raise quad.DomainError(f"alpha={alpha!r} outside (0, pi/2]")
    return alpha


def constant_a() -> float:
    """a = integral of sqrt(cos t) over [0, pi/2]."""
    return quad.int_sqrt_cos(HALF_PI)


def multipliers(alpha):
    """(lambda1, lambda2) of the optimality condition 0.5 theta'^2 + lambda2 sin theta + lambda1 cos theta = 0."""
    alpha = _check_alpha(alpha)
    I = quad.int_sqrt_cos(alpha)
    sa = math.sin(alpha)
    lam2 = -I * I / (2.0 * sa)
    lam1 = 0.0 if alpha == HALF_PI else -math.cos(alpha) * I * I / (2.0 * sa * sa)
    return lam1, lam2


def energy_closed_form(alpha) -> float:
    """E(alpha) = I(alpha)^2 / sin(alpha)."""
    alpha = _check_alpha(alpha)
    I = quad.int_sqrt_cos(alpha)
    return I * I / math.sin(alpha)


def arc_length(alpha) -> float:
    """L_alpha = (2 / K) * integral of 1/sqrt(cos) over [0, alpha]."""
    alpha = _check_alpha(alpha)
    K = quad.int_sqrt_cos(alpha) / math.sin(alpha)
    return 2.0 * quad.int_inv_sqrt_cos(alpha) / K


def arc_parameter(alpha, theta) -> float:
    """Arclength s at which the optimal arc reaches tangent angle ``theta``."""
    alpha = _check_alpha(alpha)
    K = quad.int_sqrt_cos(alpha) / math.sin(alpha)
    x = float(theta) - alpha
    g = quad.int_inv_sqrt_cos(abs(x))
    return (math.copysign(g, x) + quad.int_inv_sqrt_cos(alpha)) / K


@dataclass(frozen=True)
class OptimalArcSpec:
    alpha: float
    K_alpha: float
    lambda1: float
    lambda2: float
    L_alpha: float

    @classmethod
    def from_alpha(cls, alpha):
        alpha = _check_alpha(alpha)
        K = quad.int_sqrt_cos(alpha) / math.sin(alpha)
        lam1, lam2 = multipliers(alpha)
        return cls(alpha, K, lam1, lam2, arc_length(alpha))

    @property
    def end_curvature(self):
        """theta'(0) = theta'(L) = K sqrt(cos alpha)."""
        if self.alpha == HALF_PI:
            return 0.0
        return self.K_alpha * math.sqrt(math.cos(self.alpha))

    @property
    def energy(self):
        return energy_closed_form(self.alpha)


def build_arc(alpha, n_samples: int, dtype=np.float64) -> TangentAngleArc:
    """Sample the optimal arc on a uniform arclength grid.

    ``dtype=np.longdouble`` carries the inversion in extended precision, which
    matters when theta is differenced more than once.
    """
    alpha = _check_alpha(alpha)
    if n_samples < 16:
        raise quad.DomainError("n_samples must be at least 16")
    K = quad.int_sqrt_cos(alpha) / math.sin(alpha)
    al = dtype(alpha)
    if alpha == HALF_PI:
        al = quad._half_pi(dtype)
    # G(alpha) from the same rule used in the inversion keeps the ends consistent
    Ga = quad.inv_sqrt_cos_primitive(np.array([al]), dtype)[0]
    L = 2 * Ga / dtype(K)
    s = np.arange(n_samples, dtype=dtype) * (L / (n_samples - 1))
    target = dtype(K) * s - Ga
    target[0], target[-1] = -Ga, Ga
    x = quad.invert_inv_sqrt_cos_primitive(target, al, dtype)
    theta = x + al
    theta[0] = 0
    theta[-1] = 2 * al
    mid = n_samples // 2
    if n_samples % 2:
        theta[mid] = al
    return TangentAngleArc(theta, float(L))


def optimality_residual(arc: TangentAngleArc, spec: OptimalArcSpec) -> np.ndarray:
    """0.5 theta'^2 + lambda2 sin theta + lambda1 cos theta at every sample (theta' to fourth order)."""
    k = curvature(arc, order=4)
    th = np.asarray(arc.theta, dtype=float)
    return 0.5 * k * k + spec.lambda2 * np.sin(th) + spec.lambda1 * np.cos(th)


def shape_derivative_residual(arc: TangentAngleArc) -> np.ndarray:
    """k'' + k^3 / 2 on interior samples, k and k'' by nested central differences.

    Computed in the arc's own precision; with a float64 theta the second
    difference of a first difference amplifies rounding by ds^-3, so pass a
    longdouble arc when the residual is to be resolved below about 1e-6.
    """
    th = np.asarray(arc.theta)
    ds = th.dtype.type(arc.L) / (th.size - 1)
    k = (th[2:] - th[:-2]) / (2 * ds)
    kpp = (k[2:] - 2 * k[1:-1] + k[:-2]) / (ds * ds)
    return (kpp + k[1:-1] ** 3 / 2).astype(float)


@dataclass(frozen=True)
class OptimalDomain:
    body: ConvexBody
    arc_spec: OptimalArcSpec
    h: float = 0.0
    arc: TangentAngleArc | None = None

    @property
    def contact_points(self):
        h = self.h
        return [(-h, -1.0), (h, -1.0), (h, 1.0), (-h, 1.0)] if h > 0 else [(0.0, -1.0), (0.0, 1.0)]


def right_half(n_samples: int):
    """The x >= 0 boundary arc from (0, -1) to (0, 1), with its tangent-angle record."""
    arc = build_arc(HALF_PI, n_samples)
    pts = reconstruct_curve(arc)
    # trapezoid closure error is tiny here (theta' vanishes at both ends);
    # spread it linearly so the arc ends exactly at the pole
    err = pts[-1] - np.array([0.0, 1.0])
    if np.max(np.abs(err)) > 1e-8:
        raise ArithmeticError(f"optimal arc misses the pole by {err}")
    w = np.linspace(0.0, 1.0, n_samples)[:, None]
    pts = pts - w * err
    pts[0] = (0.0, -1.0)
    pts[-1] = (0.0, 1.0)
    return arc, pts


def build_omega_star(n_samples: int = 4000, h: float = 0.0) -> OptimalDomain:
    """The optimal domain: the alpha = pi/2 arc and its mirror image in x = 0.

    With h > 0 the two halves are pulled apart by 2h and joined by horizontal
    segments along y = +-1 (a stadium-like variant with the same energy and
    inradius). ``n_samples`` is the number of samples per half.
    """
    if n_samples < 64:
        raise quad.DomainError("n_samples must be at least 64")
    h = float(h)
    if not (h >= 0.0 and math.isfinite(h)):
        raise quad.DomainError(f"segment half length must be >= 0, got {h!r}")
    arc, pts = right_half(n_samples)
    right = pts.copy()
    right[:, 0] += h
    left = pts[::-1].copy()
    left[:, 0] = -left[:, 0] - h
    if h == 0.0:
        left = left[1:-1]
    verts = np.vstack([right, left])
    return OptimalDomain(ConvexBody(verts), OptimalArcSpec.from_alpha(HALF_PI), h, arc)


def domain_svg(domain: OptimalDomain, size: int = 480) -> str:
    """SVG drawing of the body with the unit disk and the contact points."""
    v = domain.body.vertices
    lo = np.minimum(v.min(axis=0), -1.0)
    hi = np.maximum(v.max(axis=0), 1.0)
    pad = 0.08 * float(np.max(hi - lo))
    span = float(np.max(hi - lo)) + 2 * pad
    unit = size / span

    def tx(x, y):
        return (x - lo[0] + pad) * unit, (hi[1] + pad - y) * unit

    path = " ".join(f"{'M' if i == 0 else 'L'}{px:.4f},{py:.4f}" for i, (px, py) in enumerate(tx(x, y) for x, y in v))
    cx, cy = tx(0.0, 0.0)
    dots = "".join(
        f'<circle cx="{px:.4f}" cy="{py:.4f}" r="4" fill="#c0392b"/>' for px, py in (tx(x, y) for x, y in domain.contact_points)
    )
    w = (hi[0] - lo[0] + 2 * pad) * unit
    hgt = (hi[1] - lo[1] + 2 * pad) * unit
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{hgt:.0f}" viewBox="0 0 {w:.4f} {hgt:.4f}">'
        f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="{unit:.4f}" fill="#dfe8f3" stroke="#4a6fa5" stroke-width="1"/>'
        f'<path d="{path} Z" fill="none" stroke="#222" stroke-width="1.5"/>'
        f"{dots}</svg>\n"
    )


def write_svg(domain: OptimalDomain, path):
    Path(path).write_text(domain_svg(domain))
