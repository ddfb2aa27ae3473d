"""Discrete convex arcs and bodies, and the six geometric functionals on them.

Arcs are stored by their tangent angle theta on a uniform arclength grid;
bodies are counterclockwise vertex loops. Functionals:

    E  elastic energy, half the integral of squared curvature
    P  perimeter        A  area        D  diameter
    R  circumradius     r  inradius
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import linprog

from . import _kernels

CONVEX_EPS = 1e-12
EDGE_EPS = 1e-14
WARN_TURN = 0.3
REFUSE_TURN = 0.6


class InvalidArcError(ValueError):
    pass


class NonConvexError(ValueError):
    """Vertex loop is not a counterclockwise convex polygon; ``vertex`` is the offending index."""

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class MalformedInputError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CoarseSamplingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TangentAngleArc:
    """Tangent angle theta sampled at s_i = i L / (n - 1).

    ``monotone=False`` admits non-monotone angles (arcs that are not convex),
    which the unconstrained solver produces.
    """

    theta: np.ndarray
    L: float
    start_point: tuple = (0.0, -1.0)
    monotone: bool = True

    def __post_init__(self):
        theta = np.asarray(self.theta)
        if theta.dtype.kind != "f":
            theta = theta.astype(float)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 1 or theta.size < 2:
            raise InvalidArcError("theta must be a 1-d array with at least 2 samples")
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidArcError(f"arc length must be finite and positive, got {self.L!r}")
        if not np.all(np.isfinite(theta)):
            raise InvalidArcError("theta contains non-finite values")
        if self.monotone:
            drops = np.flatnonzero(np.diff(theta) < 0)
            if drops.size:
                raise InvalidArcError(f"theta decreases after sample {drops[0]}")

    @property
    def n_samples(self):
        return self.theta.size

    @property
    def ds(self):
        return self.L / (self.theta.size - 1)

    @property
    def s(self):
        return np.linspace(0.0, self.L, self.theta.size)


def _scale(v):
    return float(np.max(np.ptp(v, axis=0))) or 1.0


@dataclass(frozen=True)
class ConvexBody:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise NonConvexError("vertices must be an (n, 2) array")
        if v.shape[0] < 3:
            raise NonConvexError("a body needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise NonConvexError("non-finite vertex coordinate", int(np.flatnonzero(~np.isfinite(v).all(axis=1))[0]))
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        check_convex(v)

    @property
    def n(self):
        return self.vertices.shape[0]

    @property
    def scale(self):
        return _scale(self.vertices)

    def scaled(self, t):
        return ConvexBody(self.vertices * t)


def check_convex(v):
    """Raise NonConvexError unless ``v`` is a counterclockwise convex loop."""
    scale = _scale(v)
    e = np.roll(v, -1, axis=0) - v
    length = np.hypot(e[:, 0], e[:, 1])
    short = np.flatnonzero(length <= EDGE_EPS * scale)
    if short.size:
        raise NonConvexError(f"vertices {short[0]} and {(short[0] + 1) % len(v)} coincide", int(short[0]))
    e_prev = np.roll(e, 1, axis=0)
    cross = e_prev[:, 0] * e[:, 1] - e_prev[:, 1] * e[:, 0]
    bad = np.flatnonzero(cross < -CONVEX_EPS * scale**2)
    if bad.size:
        raise NonConvexError(f"reflex turn at vertex {bad[0]}", int(bad[0]))
    turn = np.arctan2(cross, np.einsum("ij,ij->i", e_prev, e))
    total = turn.sum()
    if not abs(total - 2 * math.pi) < 1e-6:
        # all turns are left turns, so anything but one full turn means a
        # clockwise loop (total -2pi is impossible here) or a self-overlap
        raise NonConvexError(f"boundary winds {total / (2 * math.pi):.3f} times; expected one counterclockwise turn", 0)


# -- arcs -------------------------------------------------------------------------


def reconstruct_curve(arc: TangentAngleArc) -> np.ndarray:
    """Points (x(s_i), y(s_i)) from the tangent angle, trapezoid rule on the grid."""
    th = np.asarray(arc.theta, dtype=float)
    ds = arc.L / (th.size - 1)
    x = cumulative_trapezoid(np.cos(th), dx=ds, initial=0.0)
    y = cumulative_trapezoid(np.sin(th), dx=ds, initial=0.0)
    return np.column_stack([x + arc.start_point[0], y + arc.start_point[1]])


def elastic_energy(arc: TangentAngleArc) -> float:
    """Half the sum of (delta theta)^2 / ds over grid cells; exact for affine theta."""
    d = np.diff(np.asarray(arc.theta, dtype=float))
    return 0.5 * float(np.dot(d, d)) / arc.ds


def curvature(arc: TangentAngleArc, order: int = 2) -> np.ndarray:
    """theta'(s_i) by finite differences of order 2 or 4 (one-sided near the ends)."""
    th = np.asarray(arc.theta, dtype=float)
    h = arc.ds
    if order == 2:
        return np.gradient(th, h, edge_order=2)
    if order != 4:
        raise ValueError("order must be 2 or 4")
    if th.size < 5:
        raise InvalidArcError("fourth-order curvature needs at least 5 samples")
    k = np.empty_like(th)
    k[2:-2] = (th[:-4] - 8 * th[1:-3] + 8 * th[3:-1] - th[4:]) / (12 * h)
    k[0] = (-25 * th[0] + 48 * th[1] - 36 * th[2] + 16 * th[3] - 3 * th[4]) / (12 * h)
    k[1] = (-3 * th[0] - 10 * th[1] + 18 * th[2] - 6 * th[3] + th[4]) / (12 * h)
    k[-1] = (25 * th[-1] - 48 * th[-2] + 36 * th[-3] - 16 * th[-4] + 3 * th[-5]) / (12 * h)
    k[-2] = (3 * th[-1] + 10 * th[-2] - 18 * th[-3] + 6 * th[-4] - th[-5]) / (12 * h)
    return k


# -- bodies ---------------------------------------------------------------------


def _edges(v):
    return np.roll(v, -1, axis=0) - v


def turning_angles(body: ConvexBody) -> np.ndarray:
    """Exterior angle at every vertex (radians, >= 0 up to rounding)."""
    e = _edges(body.vertices)
    ep = np.roll(e, 1, axis=0)
    cross = ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0]
    return np.arctan2(cross, np.einsum("ij,ij->i", ep, e))


def polygon_energy(body: ConvexBody, warn: bool = True) -> float:
    """Discrete bending energy 0.5 * sum(turn_i^2 / l_i), l_i the mean of the two edges at vertex i.

    Approximates half the integral of k^2 for fine samplings of a smooth
    curve. On a polygon with genuine corners it grows without bound as the
    corners are resampled finer, so it is only meaningful for smooth bodies.
    """
    phi = turning_angles(body)
    le = np.hypot(*_edges(body.vertices).T)
    ell = 0.5 * (np.roll(le, 1) + le)
    worst = float(np.max(np.abs(phi)))
    if warn and worst > WARN_TURN:
        warnings.warn(f"turning angle {worst:.3f} rad exceeds {WARN_TURN}: sampling too coarse", CoarseSamplingWarning, stacklevel=2)
    return 0.5 * float(np.sum(phi * phi / ell))


def perimeter(body: ConvexBody) -> float:
    return float(np.sum(np.hypot(*_edges(body.vertices).T)))


def area(body: ConvexBody) -> float:
    """Shoelace area, positive for counterclockwise order."""
    v = body.vertices - body.vertices.mean(axis=0)
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def diameter(body: ConvexBody) -> float:
    d, _, _ = _kernels.caliper_diameter(np.ascontiguousarray(body.vertices))
    return float(d)


def diameter_pair(body: ConvexBody):
    d, i, j = _kernels.caliper_diameter(np.ascontiguousarray(body.vertices))
    return float(d), int(i), int(j)


def enclosing_circle(body: ConvexBody, seed: int = 0):
    """Minimum enclosing circle (center, radius). The shuffle is seeded so the result is reproducible."""
    v = body.vertices
    order = np.random.default_rng(seed).permutation(len(v))
    cx, cy, r = _kernels.welzl_circle(np.ascontiguousarray(v[order]))
    return (float(cx), float(cy)), float(r)


def circumradius(body: ConvexBody) -> float:
    return enclosing_circle(body)[1]


def edge_distances(body: ConvexBody, point) -> np.ndarray:
    """Signed distance from ``point`` to every edge line, positive inside."""
    v = body.vertices
    e = _edges(v)
    le = np.hypot(e[:, 0], e[:, 1])
    p = np.asarray(point, dtype=float)
    return (e[:, 0] * (p[1] - v[:, 1]) - e[:, 1] * (p[0] - v[:, 0])) / le


def inradius(body: ConvexBody):
    """Largest inscribed disk (Chebyshev center) as a 3-variable LP.

    maximize t  subject to  n_i . (p - v_i) >= t  for every edge i,
    n_i the inward unit normal. Returns (r, center); r is recomputed as the
    smallest edge distance from the returned center so it is a certified
    lower bound, not the solver's objective.
    """
    v = body.vertices
    shift = v.mean(axis=0)
    vv = v - shift
    e = _edges(vv)
    le = np.hypot(e[:, 0], e[:, 1])
    nx, ny = -e[:, 1] / le, e[:, 0] / le
    A = np.column_stack([-nx, -ny, np.ones_like(nx)])
    b = -(nx * vv[:, 0] + ny * vv[:, 1])
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=A,
        b_ub=b,
        bounds=[(None, None), (None, None), (0, None)],
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise ArithmeticError(f"inradius LP failed: {res.message}")
    center = res.x[:2] + shift
    r = float(np.min(edge_distances(body, center)))
    return r, (float(center[0]), float(center[1]))


# -- functionals report -----------------------------------------------------------

PRODUCT_KEYS = ("EP", "E2A", "ED", "ER", "Er")


def sig9(x):
    """Round to 9 significant digits (the printing precision of all reports)."""
    return float(f"{x:.9g}")


@dataclass(frozen=True)
class FunctionalsReport:
    E: float
    P: float
    A: float
    D: float
    R: float
    r: float
    center: tuple = field(default=(0.0, 0.0), compare=False)

    @property
    def products(self):
        E = self.E
        return {
            "EP": E * self.P,
            "E2A": E * E * self.A,
            "ED": E * self.D,
            "ER": E * self.R,
            "Er": E * self.r,
        }

    def to_dict(self):
        out = {k: sig9(getattr(self, k)) for k in ("E", "P", "A", "D", "R", "r")}
        out["products"] = {k: sig9(v) for k, v in self.products.items()}
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def functionals(body: ConvexBody, warn: bool = True) -> FunctionalsReport:
    r, center = inradius(body)
    return FunctionalsReport(
        E=polygon_energy(body, warn=warn),
        P=perimeter(body),
        A=area(body),
        D=diameter(body),
        R=circumradius(body),
        r=r,
        center=center,
    )


# -- serialization ----------------------------------------------------------------


def body_to_csv(body: ConvexBody) -> str:
    # repr keeps every bit, so a written body reloads to identical floats
    return "".join(f"{x!r},{y!r}\n" for x, y in body.vertices.tolist())


def body_to_json(body: ConvexBody) -> str:
    return json.dumps(body.vertices.tolist())


def _parse_points_csv(text):
    pts = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise MalformedInputError(f"expected 2 fields 'x,y', got {len(row)}", lineno)
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise MalformedInputError(f"not a number pair: {','.join(row)!r}", lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise MalformedInputError("non-finite coordinate", lineno)
        pts.append((x, y))
    return pts


def _parse_points_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(exc.msg, exc.lineno) from None
    if isinstance(data, dict) and "vertices" in data:
        data = data["vertices"]
    if not isinstance(data, list):
        raise MalformedInputError("expected a JSON array of [x, y] pairs", 1)
    pts = []
    for i, p in enumerate(data):
        ok = isinstance(p, list) and len(p) == 2 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)
        if not ok or not all(math.isfinite(c) for c in p):
            # locate the offending entry for the message
            raise MalformedInputError(f"entry {i} is not a finite [x, y] pair", _json_entry_line(text, i))
        pts.append((float(p[0]), float(p[1])))
    return pts


def _json_entry_line(text, index):
    depth = 0
    count = -1
    line = 1
    for ch in text:
        if ch == "\n":
            line += 1
        elif ch == "[":
            depth += 1
            if depth == 2:
                count += 1
                if count == index:
                    return line
        elif ch == "]":
            depth -= 1
        elif depth == 1 and ch not in " \t\r,":
            count += 1
            if count == index:
                return line
    return line


def parse_body(text: str, fmt: str) -> ConvexBody:
    if fmt == "csv":
        pts = _parse_points_csv(text)
    elif fmt == "json":
        pts = _parse_points_json(text)
    else:
        raise ValueError(f"unknown body format {fmt!r}")
    if len(pts) < 3:
        raise MalformedInputError(f"need at least 3 vertices, got {len(pts)}")
    return ConvexBody(np.array(pts))


def format_for_path(path) -> str:
    suffix = Path(path).suffix.lower()
    return "json" if suffix == ".json" else "csv"


def read_body(path, fmt: str | None = None) -> ConvexBody:
    return parse_body(Path(path).read_text(), fmt or format_for_path(path))


def write_body(body: ConvexBody, path, fmt: str | None = None):
    fmt = fmt or format_for_path(path)
    text = body_to_json(body) if fmt == "json" else body_to_csv(body)
    Path(path).write_text(text)
