"""Loop-heavy numeric kernels.

Every kernel is written once as plain Python over numpy arrays and compiled
with ``numba.njit`` unless ``INRADIUS_ELASTICA_JIT=0`` is set in the
environment (or numba is missing). The uncompiled function is always
reachable as ``kernel.py_func`` so both paths can be compared.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

JIT_ENABLED = numba is not None and os.environ.get("INRADIUS_ELASTICA_JIT", "1") != "0"


def _jit(fn):
    if JIT_ENABLED:
        return numba.njit(cache=True)(fn)
    fn.py_func = fn
    return fn


@_jit
def pav_nondecreasing(y):
    """Euclidean projection of ``y`` onto nondecreasing sequences (unit weights)."""
    n = y.shape[0]
    level = np.empty(n)
    weight = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    top = -1
    for i in range(n):
        top += 1
        level[top] = y[i]
        weight[top] = 1.0
        start[top] = i
        while top > 0 and level[top - 1] >= level[top]:
            w = weight[top - 1] + weight[top]
            level[top - 1] = (weight[top - 1] * level[top - 1] + weight[top] * level[top]) / w
            weight[top - 1] = w
            top -= 1
    out = np.empty(n)
    for b in range(top + 1):
        stop = start[b + 1] if b < top else n
        for i in range(start[b], stop):
            out[i] = level[b]
    return out


@_jit
def caliper_diameter(xy):
    """Rotating calipers over a counterclockwise convex polygon.

    Returns (diameter, i, j). Neighbours of every antipodal candidate are also
    measured so that rounding in the area comparisons cannot skip the pair
    with the largest computed distance.
    """
    n = xy.shape[0]
    if n == 1:
        return 0.0, 0, 0
    if n == 2:
        return math.hypot(xy[1, 0] - xy[0, 0], xy[1, 1] - xy[0, 1]), 0, 1
    best = -1.0
    bi = 0
    bj = 0
    j = 1
    for i in range(n):
        i1 = (i + 1) % n
        ex = xy[i1, 0] - xy[i, 0]
        ey = xy[i1, 1] - xy[i, 1]
        # advance j while the triangle (i, i+1, j+1) grows
        for _ in range(n):
            j1 = (j + 1) % n
            cur = ex * (xy[j, 1] - xy[i, 1]) - ey * (xy[j, 0] - xy[i, 0])
            nxt = ex * (xy[j1, 1] - xy[i, 1]) - ey * (xy[j1, 0] - xy[i, 0])
            if nxt > cur:
                j = j1
            else:
                break
        for k in range(-1, 2):
            jj = (j + k) % n
            for ii in (i, i1):
                d = math.hypot(xy[jj, 0] - xy[ii, 0], xy[jj, 1] - xy[ii, 1])
                if d > best:
                    best = d
                    bi = ii
                    bj = jj
    return best, bi, bj


@_jit
def _circle_two(ax, ay, bx, by):
    cx = 0.5 * (ax + bx)
    cy = 0.5 * (ay + by)
    r = max(math.hypot(ax - cx, ay - cy), math.hypot(bx - cx, by - cy))
    return cx, cy, r


@_jit
def _circle_three(ax, ay, bx, by, px, py):
    ox = (min(ax, bx, px) + max(ax, bx, px)) / 2.0
    oy = (min(ay, by, py) + max(ay, by, py)) / 2.0
    ax -= ox
    ay -= oy
    bx -= ox
    by -= oy
    px -= ox
    py -= oy
    d = 2.0 * (ax * (by - py) + bx * (py - ay) + px * (ay - by))
    if d == 0.0:
        return 0.0, 0.0, -1.0
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    p2 = px * px + py * py
    cx = (a2 * (by - py) + b2 * (py - ay) + p2 * (ay - by)) / d
    cy = (a2 * (px - bx) + b2 * (ax - px) + p2 * (bx - ax)) / d
    r = max(math.hypot(ax - cx, ay - cy), math.hypot(bx - cx, by - cy), math.hypot(px - cx, py - cy))
    return cx + ox, cy + oy, r


@_jit
def _inside(cx, cy, r, x, y):
    return math.hypot(x - cx, y - cy) <= r * (1.0 + 1e-14)


@_jit
def _cross(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


@_jit
def _circle_with_two(xy, m, p, q):
    """Smallest circle over xy[:m] having points p and q on its boundary."""
    ax, ay = xy[p, 0], xy[p, 1]
    bx, by = xy[q, 0], xy[q, 1]
    cx, cy, r = _circle_two(ax, ay, bx, by)
    lx = ly = lr = 0.0
    rx = ry = rr = 0.0
    has_l = False
    has_r = False
    for k in range(m):
        x, y = xy[k, 0], xy[k, 1]
        if _inside(cx, cy, r, x, y):
            continue
        cr = _cross(ax, ay, bx, by, x, y)
        ox, oy, orad = _circle_three(ax, ay, bx, by, x, y)
        if orad < 0.0:
            continue
        side = _cross(ax, ay, bx, by, ox, oy)
        if cr > 0.0 and (not has_l or side > _cross(ax, ay, bx, by, lx, ly)):
            lx, ly, lr = ox, oy, orad
            has_l = True
        elif cr < 0.0 and (not has_r or side < _cross(ax, ay, bx, by, rx, ry)):
            rx, ry, rr = ox, oy, orad
            has_r = True
    if not has_l and not has_r:
        return cx, cy, r
    if not has_l:
        return rx, ry, rr
    if not has_r:
        return lx, ly, lr
    if lr <= rr:
        return lx, ly, lr
    return rx, ry, rr


@_jit
def welzl_circle(xy):
    """Minimum enclosing circle of the rows of ``xy`` (already shuffled).

    Iterative form of the randomized incremental algorithm; expected O(n)
    for a random input order.
    """
    n = xy.shape[0]
    cx, cy, r = xy[0, 0], xy[0, 1], 0.0
    for i in range(1, n):
        if _inside(cx, cy, r, xy[i, 0], xy[i, 1]):
            continue
        # circle with point i on the boundary
        cx, cy, r = xy[i, 0], xy[i, 1], 0.0
        for j in range(i):
            if _inside(cx, cy, r, xy[j, 0], xy[j, 1]):
                continue
            if r == 0.0:
                cx, cy, r = _circle_two(xy[i, 0], xy[i, 1], xy[j, 0], xy[j, 1])
            else:
                cx, cy, r = _circle_with_two(xy, j + 1, i, j)
    return cx, cy, r


@_jit
def _pendulum_rate(theta, c2, a0):
    q = c2 - a0 * math.sin(theta)
    return math.sqrt(q) if q > 0.0 else 0.0


@_jit
def _rk4_step(state, h, c2, a0, out):
    # state = (theta, x, y, energy); d/ds = (f, cos, sin, f^2/2)
    t0 = state[0]
    f1 = _pendulum_rate(t0, c2, a0)
    t1 = t0 + 0.5 * h * f1
    f2 = _pendulum_rate(t1, c2, a0)
    t2 = t0 + 0.5 * h * f2
    f3 = _pendulum_rate(t2, c2, a0)
    t3 = t0 + h * f3
    f4 = _pendulum_rate(t3, c2, a0)
    out[0] = t0 + h * (f1 + 2.0 * f2 + 2.0 * f3 + f4) / 6.0
    out[1] = state[1] + h * (math.cos(t0) + 2.0 * math.cos(t1) + 2.0 * math.cos(t2) + math.cos(t3)) / 6.0
    out[2] = state[2] + h * (math.sin(t0) + 2.0 * math.sin(t1) + 2.0 * math.sin(t2) + math.sin(t3)) / 6.0
    out[3] = state[3] + h * (f1 * f1 + 2.0 * f2 * f2 + 2.0 * f3 * f3 + f4 * f4) / 12.0


@_jit
def rk4_pendulum(c, a0, theta_end, s_max, tol, max_steps):
    """Integrate theta' = sqrt(c^2 - a0 sin theta) from theta=0 by step-doubling RK4.

    Carries x, y (start (0, -1)) and the accumulated energy alongside theta.
    Stops when theta reaches ``theta_end`` (the last step is shortened by a
    secant iteration so that theta lands on it) or when s reaches ``s_max``.

    Returns (s, states, count, status) with status 0 = hit theta_end,
    1 = s_max exhausted, 2 = stalled at a turning point, 3 = step budget exhausted.
    """
    c2 = c * c
    s = np.empty(max_steps + 1)
    states = np.empty((max_steps + 1, 4))
    s[0] = 0.0
    states[0, 0] = 0.0
    states[0, 1] = 0.0
    states[0, 2] = -1.0
    states[0, 3] = 0.0
    full = np.empty(4)
    half = np.empty(4)
    two = np.empty(4)
    trial = np.empty(4)
    h = min(1e-3, s_max)
    k = 0
    stall = 0
    while k < max_steps:
        cur = states[k]
        if s[k] + h > s_max:
            h = s_max - s[k]
        _rk4_step(cur, h, c2, a0, full)
        _rk4_step(cur, 0.5 * h, c2, a0, half)
        _rk4_step(half, 0.5 * h, c2, a0, two)
        err = 0.0
        for m in range(4):
            e = abs(two[m] - full[m]) / 15.0
            if e > err:
                err = e
        if err > tol and h > 1e-14:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
            continue
        for m in range(4):
            two[m] += (two[m] - full[m]) / 15.0
        if two[0] >= theta_end:
            # secant on the step length so that theta lands on theta_end
            lo, hi = 0.0, h
            flo, fhi = cur[0] - theta_end, two[0] - theta_end
            hh = h
            for _ in range(100):
                hh = hi - fhi * (hi - lo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)
                if not (lo < hh < hi):
                    hh = 0.5 * (lo + hi)
                _rk4_step(cur, 0.5 * hh, c2, a0, half)
                _rk4_step(half, 0.5 * hh, c2, a0, trial)
                _rk4_step(cur, hh, c2, a0, full)
                for m in range(4):
                    trial[m] += (trial[m] - full[m]) / 15.0
                g = trial[0] - theta_end
                if g > 0.0:
                    hi, fhi = hh, g
                else:
                    lo, flo = hh, g
                if abs(g) <= 1e-15 or hi - lo <= 1e-16 * (1.0 + s[k]):
                    break
            s[k + 1] = s[k] + hh
            for m in range(4):
                states[k + 1, m] = trial[m]
            states[k + 1, 0] = theta_end
            return s[: k + 2], states[: k + 2], k + 2, 0
        progress = two[0] - cur[0]
        s[k + 1] = s[k] + h
        for m in range(4):
            states[k + 1, m] = two[m]
        k += 1
        # a vanishing rate (to rounding) means theta is creeping into a turning point
        q = c2 - a0 * math.sin(two[0])
        if progress <= 1e-15 * h or q <= 1e-14 * max(c2, abs(a0)):
            stall += 1
            if stall >= 20:
                return s[: k + 1], states[: k + 1], k + 1, 2
        else:
            stall = 0
        if s[k] >= s_max:
            return s[: k + 1], states[: k + 1], k + 1, 1
        if err == 0.0:
            h *= 2.0
        else:
            h *= min(2.0, 0.9 * (tol / err) ** 0.2)
    return s[: k + 1], states[: k + 1], k + 1, 3
