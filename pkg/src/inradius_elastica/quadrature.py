"""Quadrature for the integrals of sqrt(cos t) and 1/sqrt(cos t), and monotone inversion.

Both integrands lose smoothness at t = pi/2. Every routine here moves that
endpoint out of the way with the substitution t = pi/2 - v**2, which turns

    sqrt(cos t) dt   into  2 v sqrt(sin v^2) dv
    dt / sqrt(cos t) into  2 v / sqrt(sin v^2) dv = 2 / sqrt(sinc(v^2)) dv,

both analytic on the ranges used. The scalar entry points use adaptive
Simpson; the array entry points use a fixed Gauss-Legendre rule, which is
smooth in the integration limits (important when the results are
differenced).
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

HALF_PI = 0.5 * math.pi
QUARTER_PI = 0.25 * math.pi

SMOOTH_TOL = 1e-12
SINGULAR_TOL = 1e-10

# additive fault injected into int_sqrt_cos; only for negative-control runs
_FAULT = 0.0


class DomainError(ValueError):
    """Argument outside the domain where the quantity is real and finite."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BracketError(DomainError):
    """The target value is not bracketed by the supplied interval."""


@dataclass(frozen=True)
class QuadResult:
    value: float
    est_error: float
    evaluations: int


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = SMOOTH_TOL,
    max_depth: int = 60,
    max_evals: int = 2_000_000,
) -> QuadResult:
    """Adaptive Simpson rule with Richardson correction on each accepted panel."""
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    evals = 3
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    err = 0.0
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - s
        if abs(delta) <= 15.0 * eps or depth >= max_depth or mid in (lo, hi):
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
            continue
        if evals > max_evals:
            raise QuadratureError("evaluation budget exhausted", QuadResult(total, err, evals))
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    if err > tol:
        raise QuadratureError(f"estimated error {err:.3g} above tolerance {tol:.3g}", QuadResult(total, err, evals))
    return QuadResult(total, err, evals)


def _sqrt_cos(t):
    return math.sqrt(max(math.cos(t), 0.0))


def _sqrt_cos_tail(v):
    return 2.0 * v * math.sqrt(math.sin(v * v))


def _inv_sqrt_cos(t):
    return 1.0 / math.sqrt(math.cos(t))


def _inv_sqrt_cos_tail(v):
    w = v * v
    return 2.0 / math.sqrt(math.sin(w) / w) if w > 0.0 else 2.0


def _check_angle(alpha, name):
    if not (0.0 <= alpha <= HALF_PI):
        raise DomainError(f"{name}: alpha={alpha!r} outside [0, pi/2]")


def int_sqrt_cos(alpha: float, tol: float = SMOOTH_TOL) -> float:
    """Integral of sqrt(cos t) over [0, alpha], 0 <= alpha <= pi/2."""
    alpha = float(alpha)
    _check_angle(alpha, "int_sqrt_cos")
    head = adaptive_simpson(_sqrt_cos, 0.0, min(alpha, QUARTER_PI), 0.5 * tol).value
    if alpha > QUARTER_PI:
        v_lo = math.sqrt(max(HALF_PI - alpha, 0.0))
        head += adaptive_simpson(_sqrt_cos_tail, v_lo, math.sqrt(QUARTER_PI), 0.5 * tol).value
    return head + _FAULT


def int_inv_sqrt_cos(alpha: float, tol: float = SINGULAR_TOL) -> float:
    """Integral of 1/sqrt(cos t) over [0, alpha], 0 <= alpha <= pi/2.

    The integrand blows up at pi/2; the part beyond pi/4 is evaluated in the
    variable v = sqrt(pi/2 - t), where it is bounded and smooth.
    """
    alpha = float(alpha)
    _check_angle(alpha, "int_inv_sqrt_cos")
    head = adaptive_simpson(_inv_sqrt_cos, 0.0, min(alpha, QUARTER_PI), 0.5 * tol).value
    if alpha > QUARTER_PI:
        v_lo = math.sqrt(max(HALF_PI - alpha, 0.0))
        head += adaptive_simpson(_inv_sqrt_cos_tail, v_lo, math.sqrt(QUARTER_PI), 0.5 * tol).value
    return head


@contextlib.contextmanager
def injected_fault(offset: float = 1e-6):
    """Temporarily add ``offset`` to every int_sqrt_cos result (negative controls)."""
    global _FAULT
    old = _FAULT
    _FAULT = offset
    try:
        yield
    finally:
        _FAULT = old


# -- fixed Gauss-Legendre rule for array arguments -------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


def _gauss_legendre(f, lo, hi, dtype):
    x = _GL_NODES.astype(dtype)
    w = _GL_WEIGHTS.astype(dtype)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    t = mid[..., None] + half[..., None] * x
    return half * np.sum(f(t) * w, axis=-1)


def _half_pi(dtype):
    return np.arctan(dtype(1)) * 2


def _tail_inv(v):
    w = v * v
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(w > 0, np.sin(w) / w, 1)
    return 2 / np.sqrt(ratio)


def inv_sqrt_cos_primitive(x, dtype=np.float64):
    """G(x) = integral of 1/sqrt(cos t) over [0, x] for |x| <= pi/2, elementwise.

    Evaluated for every x through the same substituted rule
    G(|x|) = G(pi/2) - T(sqrt(pi/2 - |x|)), so G is smooth in x to rounding
    level, with no switch between formulas. ``dtype`` may be np.longdouble.
    """
    x = np.asarray(x, dtype=dtype)
    hp = _half_pi(dtype)
    ax = np.abs(x)
    if np.any(ax > hp):
        raise DomainError("inv_sqrt_cos_primitive: |x| > pi/2")
    zero = np.zeros_like(ax)
    v_full = np.sqrt(np.array([hp], dtype=dtype))
    full = _gauss_legendre(_tail_inv, np.zeros(1, dtype=dtype), v_full, dtype)[0]
    tail = _gauss_legendre(_tail_inv, zero, np.sqrt(hp - ax), dtype)
    return np.sign(x) * (full - tail)


# -- monotone inversion ---------------------------------------------------------


def invert_monotone(
    f: Callable[[float], float],
    target: float,
    bracket: tuple[float, float],
    fprime: Callable[[float], float] | None = None,
    rtol: float = 1e-12,
    atol: float = 1e-14,
    max_iter: int = 200,
) -> float:
    """Solve f(x) = target for strictly increasing f on ``bracket``.

    Bisection keeps the root bracketed; when ``fprime`` is given, Newton steps
    that stay inside the current bracket are taken instead.
    """
    lo, hi = map(float, bracket)
    flo, fhi = f(lo) - target, f(hi) - target
    tol = rtol * abs(target) + atol
    if flo > tol or fhi < -tol:
        raise BracketError(f"target {target!r} not in [f({lo}), f({hi})] = [{flo + target}, {fhi + target}]")
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = f(x) - target
        if abs(fx) <= tol:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        step = None
        if fprime is not None:
            d = fprime(x)
            if d > 0 and math.isfinite(d):
                step = x - fx / d
        x = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            return x
    raise QuadratureError(f"invert_monotone did not converge (residual {fx:.3g})")


def invert_inv_sqrt_cos_primitive(target, limit, dtype=np.float64, max_iter=200):
    """Vectorized solve of G(x) = target on [-limit, limit] (G as above).

    Safeguarded Newton: a coarse monotone table gives the starting point, and
    each Newton step is replaced by bisection when it leaves the bracket.
    Iterates until the update stalls at rounding level.
    """
    target = np.asarray(target, dtype=dtype)
    limit = dtype(limit)
    # starting guesses from a table clustered toward the ends
    u = np.linspace(-1, 1, 1025, dtype=np.float64)
    table_x = np.float64(limit) * np.sin(0.5 * np.pi * u)
    table_g = inv_sqrt_cos_primitive(table_x).astype(np.float64)
    x = np.interp(np.float64(1) * target.astype(np.float64), table_g, table_x).astype(dtype)
    lo = np.full_like(target, -limit)
    hi = np.full_like(target, limit)
    eps = np.finfo(dtype).eps
    for _ in range(max_iter):
        g = inv_sqrt_cos_primitive(x, dtype) - target
        lo = np.where(g < 0, x, lo)
        hi = np.where(g >= 0, x, hi)
        newton = x - g * np.sqrt(np.maximum(np.cos(x), 0))
        bad = (newton <= lo) | (newton >= hi)
        new = np.where(bad, 0.5 * (lo + hi), newton)
        done = np.abs(new - x) <= 2 * eps * np.maximum(1, np.abs(x))
        x = new
        if np.all(done):
            break
    else:
        raise QuadratureError("inversion of the 1/sqrt(cos) primitive did not converge")
    return x


# -- incomplete elliptic integral of the first kind, parameter convention ---------


def _elliptic_critical(m):
    return math.asin(1.0 / math.sqrt(m)) if m > 1.0 else math.inf


def elliptic_F(phi: float, m: float, tol: float = SINGULAR_TOL) -> float:
    """F(phi | m) = integral over [0, phi] of dt / sqrt(1 - m sin^2 t).

    Parameter convention m (not the modulus k = sqrt(m)). m > 1 is allowed on
    the real branch |phi| <= asin(1/sqrt(m)); for m = 2 that is |phi| <= pi/4.
    Near the branch point t_c the substitution t = t_c - v^2 removes the
    inverse square-root singularity.
    """
    phi, m = float(phi), float(m)
    sign = 1.0 if phi >= 0 else -1.0
    p = abs(phi)
    crit = _elliptic_critical(m)
    if p > crit * (1 + 1e-15) or (m == 1.0 and p >= HALF_PI):
        raise DomainError(f"elliptic_F: 1 - m sin^2 t < 0 inside [0, {phi}] for m={m}")
    p = min(p, crit)

    def direct(t):
        return 1.0 / math.sqrt(1.0 - m * math.sin(t) ** 2)

    if not math.isfinite(crit) or p <= 0.5 * crit:
        return sign * adaptive_simpson(direct, 0.0, p, tol).value

    def tail(v):
        # 1 - m sin^2(tc - v^2) = m (sin^2 tc - sin^2(tc - v^2))
        #                      = m sin(2 tc - v^2) sin(v^2)
        w = v * v
        if w == 0.0:
            return 2.0 / math.sqrt(m * math.sin(2 * crit))
        return 2.0 * v / math.sqrt(m * math.sin(2 * crit - w) * math.sin(w))

    head = adaptive_simpson(direct, 0.0, 0.5 * crit, 0.5 * tol).value
    v_lo = math.sqrt(max(crit - p, 0.0))
    rest = adaptive_simpson(tail, v_lo, math.sqrt(0.5 * crit), 0.5 * tol).value
    return sign * (head + rest)


def jacobi_am(u: float, m: float) -> float:
    """Jacobi amplitude: the phi with F(phi | m) = u (real branch only)."""
    u, m = float(u), float(m)
    if u == 0.0:
        return 0.0
    crit = _elliptic_critical(m)
    sign = 1.0 if u > 0 else -1.0
    target = abs(u)

    def F(p):
        return elliptic_F(p, m, tol=1e-13)

    def dF(p):
        q = 1.0 - m * math.sin(p) ** 2
        return 1.0 / math.sqrt(q) if q > 0 else math.inf

    if math.isfinite(crit):
        hi = crit
        if target > F(hi) * (1 + 1e-12):
            raise DomainError(f"jacobi_am: |u|={target} exceeds F(asin(1/sqrt(m)) | m) for m={m}")
    else:
        hi = 1.0
        while F(hi) < target:
            hi *= 2.0
            if m == 1.0:
                hi = min(hi, HALF_PI * (1 - 1e-16))
    return sign * invert_monotone(F, target, (0.0, hi), fprime=dF)
