"""Curvilinear (arc length / heading) representation of planar curves.

A curve is described by its heading ``theta(s)`` as a function of arc
length ``s`` measured from an anchor point.  The heading polynomial is a
cubic ``w3 s^3 + w2 s^2 + w1 s + w0`` whose coefficients are stored highest
degree first, the same ordering :func:`numpy.polyval` uses.

Cartesian point sets are plain ``(n, 2)`` float arrays in the vehicle frame
(x forward, y to the left).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DuplicatePointError, EmptySamplesError, TooFewPointsError

__all__ = [
    "CartesianPoint",
    "CurviPoint",
    "CurveOrigin",
    "PolyModel",
    "ArcCurve",
    "as_points",
    "to_curvilinear",
    "eval_poly",
    "poly_slope",
    "shift_matrix",
    "shift_coefficients",
    "reconstruct_cartesian",
    "fit_spline",
    "wrap_angle",
]

QUADRATURE_STEP = 0.05
SPLINE_SPACING = 0.25


class CartesianPoint(NamedTuple):
    x: float
    y: float


class CurviPoint(NamedTuple):
    s: float
    theta: float


@dataclass(frozen=True)
class CurveOrigin:
    """Anchor of a curvilinear parameterization (``s = 0``)."""

    anchor: tuple[float, float]
    theta0: float = 0.0

    @property
    def point(self) -> np.ndarray:
        return np.array(self.anchor, dtype=float)


@dataclass(frozen=True)
class PolyModel:
    """Cubic heading model ``theta(s) = w . (s^3, s^2, s, 1)`` on a domain."""

    w: np.ndarray
    domain: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (4,):
            raise ValueError(f"expected 4 coefficients, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise ValueError("coefficients must be finite")
        lo, hi = (float(v) for v in self.domain)
        if not hi >= lo:
            raise ValueError(f"empty domain {self.domain}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "domain", (lo, hi))

    @classmethod
    def zero(cls, domain=(0.0, 0.0)) -> "PolyModel":
        return cls(np.zeros(4), domain)

    def contains(self, s) -> np.ndarray | bool:
        lo, hi = self.domain
        s = np.asarray(s, dtype=float)
        inside = (s >= lo) & (s <= hi)
        return bool(inside) if inside.ndim == 0 else inside

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]


def wrap_angle(a):
    """Wrap angles to the half-open interval (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    out = np.pi - np.mod(np.pi - a, 2 * np.pi)
    return float(out) if out.ndim == 0 else out


def as_points(points) -> np.ndarray:
    """Coerce a sequence of (x, y) pairs to a finite ``(n, 2)`` array."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return np.empty((0, 2))
    pts = pts.reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


def to_curvilinear(points, at: str = "end") -> tuple[CurveOrigin, np.ndarray]:
    """Convert an ordered polyline to ``(s, theta)`` pairs.

    The origin is fixed on the first point.  Each segment contributes one
    pair: its direction ``theta_i`` and the cumulative arc length ``s_i`` at
    its end (``at="end"``) or at its midpoint (``at="mid"``).  The chord
    direction equals the tangent at the segment midpoint up to third order,
    so ``"mid"`` removes the half-segment lag of the end convention.

    Headings are unwrapped along the curve so that a polynomial can be fit
    across the +-pi cut; the first heading lies in (-pi, pi].

    Returns
    -------
    origin : CurveOrigin
    curvi : ndarray, shape (n - 1, 2)
        Columns ``s`` and ``theta``.
    """
    pts = as_points(points)
    if len(pts) < 2:
        raise TooFewPointsError(f"need at least 2 points, got {len(pts)}")
    d = np.diff(pts, axis=0)
    ds = np.hypot(d[:, 0], d[:, 1])
    if np.any(ds <= 0.0):
        raise DuplicatePointError("zero-length segment in polyline")
    theta = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    theta += wrap_angle(theta[0]) - theta[0]
    s = np.cumsum(ds)
    if at == "mid":
        s = s - 0.5 * ds
    elif at != "end":
        raise ValueError(f"unknown arc convention {at!r}")
    origin = CurveOrigin((float(pts[0, 0]), float(pts[0, 1])), float(theta[0]))
    return origin, np.column_stack([s, theta])


def eval_poly(model: PolyModel, s, with_flag: bool = False):
    """Evaluate the heading polynomial.

    Evaluation outside the model domain is allowed; pass ``with_flag=True``
    to also get a boolean telling which samples were extrapolated.
    """
    s_arr = np.asarray(s, dtype=float)
    val = np.polyval(model.w, s_arr)
    if s_arr.ndim == 0:
        val = float(val)
    if with_flag:
        return val, ~np.asarray(model.contains(s_arr))
    return val


def poly_slope(model: PolyModel, s):
    """Curvature ``d theta / ds`` of the model at ``s``."""
    w3, w2, w1, _ = model.w
    s = np.asarray(s, dtype=float)
    out = 3 * w3 * s**2 + 2 * w2 * s + w1
    return float(out) if out.ndim == 0 else out


def shift_matrix(a: float) -> np.ndarray:
    """Matrix ``T`` with ``T @ w`` = coefficients of ``p(s + a)``."""
    # ascending-power form: c'_j = sum_{k>=j} C(k, j) a^(k-j) c_k
    up = np.zeros((4, 4))
    for j in range(4):
        for k in range(j, 4):
            up[j, k] = comb(k, j) * a ** (k - j)
    flip = np.eye(4)[::-1]
    return flip @ up @ flip


def shift_coefficients(w, a: float) -> np.ndarray:
    return shift_matrix(a) @ np.asarray(w, dtype=float)


class ArcCurve:
    """Cartesian curve obtained by integrating a heading model.

    ``x(s) = x0 + int_0^s cos(theta)``, ``y(s) = y0 + int_0^s sin(theta)``,
    evaluated with the trapezoidal rule on nodes no more than ``step`` apart.
    Points between nodes use one partial trapezoid from the node below, so
    every evaluation follows the same quadrature.
    """

    def __init__(self, model: PolyModel, origin: CurveOrigin, lo: float, hi: float,
                 step: float = QUADRATURE_STEP):
        lo = min(float(lo), 0.0)
        hi = max(float(hi), 0.0)
        self.model = model
        self.step = step
        n_back = int(np.ceil(-lo / step))
        n_fwd = int(np.ceil(hi / step))
        self.nodes = np.arange(-n_back, n_fwd + 1) * step
        th = np.polyval(model.w, self.nodes)
        c, s = np.cos(th), np.sin(th)
        inc_x = 0.5 * step * (c[1:] + c[:-1])
        inc_y = 0.5 * step * (s[1:] + s[:-1])
        x = np.concatenate([[0.0], np.cumsum(inc_x)])
        y = np.concatenate([[0.0], np.cumsum(inc_y)])
        x += origin.anchor[0] - x[n_back]
        y += origin.anchor[1] - y[n_back]
        self.xy = np.column_stack([x, y])
        self._cos, self._sin = c, s

    def at(self, s) -> np.ndarray:
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.clip(np.floor((s_arr - self.nodes[0]) / self.step).astype(int),
                    0, len(self.nodes) - 1)
        base = self.nodes[k]
        h = s_arr - base
        th = np.polyval(self.model.w, s_arr)
        x = self.xy[k, 0] + 0.5 * h * (self._cos[k] + np.cos(th))
        y = self.xy[k, 1] + 0.5 * h * (self._sin[k] + np.sin(th))
        out = np.column_stack([x, y])
        return out[0] if np.ndim(s) == 0 else out

    def heading(self, s):
        return eval_poly(self.model, s)


def reconstruct_cartesian(model: PolyModel, origin: CurveOrigin, s_samples,
                          step: float = QUADRATURE_STEP) -> np.ndarray:
    """Integrate the heading model from the origin anchor to each sample."""
    s = np.asarray(s_samples, dtype=float).reshape(-1)
    if s.size == 0:
        raise EmptySamplesError("no arc-length samples given")
    curve = ArcCurve(model, origin, s.min(), s.max(), step)
    return curve.at(s)


def _drop_repeats(pts: np.ndarray) -> np.ndarray:
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
    return pts[keep]


def fit_spline(points, spacing: float = SPLINE_SPACING) -> np.ndarray:
    """Interpolate an ordered polyline with a natural cubic spline and resample.

    Knots are placed at cumulative chord length.  The returned points are
    evenly spaced in spline arc length, starting at the first input point.
    """
    pts = as_points(points)
    if len(pts) < 4:
        raise TooFewPointsError(f"spline pre-fit needs at least 4 points, got {len(pts)}")
    pts = _drop_repeats(pts)
    if len(pts) < 4:
        raise TooFewPointsError("fewer than 4 distinct points")
    chord = np.hypot(*np.diff(pts, axis=0).T)
    t = np.concatenate([[0.0], np.cumsum(chord)])
    spline = CubicSpline(t, pts, bc_type="natural")

    # arc length of the spline on a fine parameter grid
    n_fine = max(8 * len(t), int(np.ceil(t[-1] / 0.01)) + 1)
    tf = np.linspace(0.0, t[-1], n_fine)
    d1 = spline(tf, 1)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(tf))])
    targets = np.arange(0.0, arc[-1] + 1e-9, spacing)
    return spline(np.interp(targets, arc, tf))
