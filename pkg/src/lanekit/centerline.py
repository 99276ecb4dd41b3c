"""Centerline reconstruction from the two lateral lines.

Both lines are assumed to share a center of curvature ``C`` with the
centerline, and ``C`` is taken from the previous centerline estimate.  Under
that assumption a lateral-line point at arc ``s_l`` maps onto the centerline
at::

    s_c     = s_c0 + r * s_l       r = R_c / R_l
    theta_c = theta_l

where ``R_c`` and ``R_l`` are the centerline and line radii about ``C`` and
``s_c0`` locates the line's first point along the centerline.  Points from
both lines are then fit together by one RLS tracker.

``r`` is the arc-length contraction ``ds_c / ds_l``.  Passing
``paper_literal_ratio=True`` uses its reciprocal ``R_l / R_c`` instead, for
comparison; that choice stretches outer-line arc length rather than
shrinking it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .curvilin import (CurveOrigin, PolyModel, eval_poly, poly_slope,
                       reconstruct_cartesian, shift_coefficients)
from .errors import TooFewPointsError
from .lanetrack import TrackConfig, arc_position, move_origin
from .rlsfit import RlsState, rls_init, rls_model, rls_shift, rls_update
from .synthtrack import OdometryDelta

KAPPA_MIN = 1.0 / 2000.0
SAMPLE_STEP = 0.5


@dataclass(frozen=True)
class CurvatureFrame:
    center: tuple[float, float]
    R_c: float
    R_l: float
    r_s: float
    s_c0: float


def estimate_center(prev_centerline: PolyModel, origin: CurveOrigin,
                    kappa_min: float = KAPPA_MIN, s: float = 0.0):
    """Center of curvature of the previous centerline at arc coordinate ``s``.

    Returns ``None`` when the curvature magnitude is below ``kappa_min``
    (the center is effectively at infinity).
    """
    kappa = poly_slope(prev_centerline, s)
    if abs(kappa) < kappa_min:
        return None
    th = eval_poly(prev_centerline, s)
    p = origin.point if s == 0.0 else reconstruct_cartesian(prev_centerline, origin, [s])[0]
    normal = np.array([-np.sin(th), np.cos(th)])
    return p + normal / kappa


def _signed_angle(a, b) -> float:
    return float(np.arctan2(a[0] * b[1] - a[1] * b[0], a @ b))


def curvature_frame(center, prev_centerline: PolyModel, center_origin: CurveOrigin,
                    line_first, paper_literal_ratio: bool = False,
                    s_ref: float = 0.0) -> CurvatureFrame:
    """Quantities mapping one lateral line onto the centerline.

    ``line_first`` is the line's first point ``P_l0``; ``s_ref`` is where on
    the previous centerline ``center`` was taken.  For arcs about a common
    center the ratio of arc lengths swept by the same angle is ``R_c / R_l``.
    """
    C = np.asarray(center, dtype=float)
    kappa = poly_slope(prev_centerline, s_ref)
    R_c = 1.0 / abs(kappa)
    p0 = np.asarray(line_first, dtype=float)
    R_l = float(np.hypot(*(p0 - C)))
    ratio = R_c / R_l
    if paper_literal_ratio:
        ratio = 1.0 / ratio
    ref = (center_origin.point if s_ref == 0.0
           else reconstruct_cartesian(prev_centerline, center_origin, [s_ref])[0])
    # angle swept from the reference radius to the ray through P_l0
    d_theta0 = _signed_angle(ref - C, p0 - C)
    s_c0 = s_ref + d_theta0 / kappa
    return CurvatureFrame((float(C[0]), float(C[1])), R_c, R_l, ratio, s_c0)


def project_to_centerline(line_pts, line_origin: CurveOrigin, frame: CurvatureFrame
                          ) -> np.ndarray:
    """Map a line's ``(s, theta)`` pairs onto the centerline arc coordinate."""
    pts = np.asarray(line_pts, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        raise TooFewPointsError("need at least 2 line points to project")
    out = np.column_stack([frame.s_c0 + frame.r_s * pts[:, 0], pts[:, 1]])
    return out[np.argsort(out[:, 0], kind="stable")]


def degenerate_project(line_pts, line_origin: CurveOrigin, prev_centerline: PolyModel,
                       center_origin: CurveOrigin) -> np.ndarray:
    """Straight-road limit: arc length is preserved, only the offset moves.

    ``s_c0`` is the arc coordinate of the perpendicular foot of the line's
    first point on the previous centerline.
    """
    pts = np.asarray(line_pts, dtype=float).reshape(-1, 2)
    s_c0 = arc_position(prev_centerline, center_origin, line_origin.point)
    out = np.column_stack([s_c0 + pts[:, 0], pts[:, 1]])
    return out[np.argsort(out[:, 0], kind="stable")]


def _balance(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(a) == 0 or len(b) == 0:
        return a, b
    if len(a) > 1.1 * len(b):
        a = a[np.round(np.linspace(0, len(a) - 1, len(b))).astype(int)]
    elif len(b) > 1.1 * len(a):
        b = b[np.round(np.linspace(0, len(b) - 1, len(a))).astype(int)]
    return a, b


def fit_centerline(left_proj, right_proj, rls: RlsState) -> tuple[RlsState, PolyModel]:
    """Fit both projected point sets with one RLS update of equal influence."""
    left = np.asarray(left_proj, dtype=float).reshape(-1, 2)
    right = np.asarray(right_proj, dtype=float).reshape(-1, 2)
    left, right = _balance(left, right)
    pts = np.vstack([left, right])
    if len(pts) < 4:
        raise TooFewPointsError(f"centerline fit needs 4 points, got {len(pts)}")
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    rls = rls_update(rls, pts)
    return rls, rls_model(rls, (float(pts[0, 0]), float(pts[-1, 0])))


@dataclass(frozen=True)
class LineView:
    """A fitted lateral line: heading model plus its anchor."""

    model: PolyModel
    origin: CurveOrigin

    def samples(self, step: float = SAMPLE_STEP) -> np.ndarray:
        lo, hi = self.model.domain
        s = np.arange(lo, hi + 1e-9, step)
        return np.column_stack([s, eval_poly(self.model, s)])


@dataclass(frozen=True)
class CenterlineState:
    rls: RlsState
    origin: CurveOrigin = CurveOrigin((0.0, 0.0), 0.0)
    model: PolyModel | None = None
    kappa_min: float = KAPPA_MIN
    paper_literal_ratio: bool = False


def new_centerline(config: TrackConfig | None = None, **kw) -> CenterlineState:
    config = config or TrackConfig()
    return CenterlineState(rls_init(config.mu, config.prior_scale), **kw)


def propagate_centerline(state: CenterlineState, odo: OdometryDelta) -> CenterlineState:
    if state.model is None:
        return state
    rls = rls_shift(state.rls, 0.0, -odo.dpsi)
    return replace(state, rls=rls, origin=move_origin(state.origin, odo),
                   model=PolyModel(rls.w, state.model.domain))


def _foot_point(line: LineView, p) -> np.ndarray:
    s = arc_position(line.model, line.origin, p)
    return reconstruct_cartesian(line.model, line.origin, [s])[0]


def bootstrap_centerline(left: LineView | None, right: LineView | None,
                         lane_width: float) -> tuple[PolyModel, CurveOrigin]:
    """Initial centerline: the lateral models averaged and moved to mid-lane."""
    if left is not None and right is not None:
        s_r = arc_position(right.model, right.origin, left.origin.point)
        p_r = reconstruct_cartesian(right.model, right.origin, [s_r])[0]
        w = 0.5 * (left.model.w + shift_coefficients(right.model.w, s_r))
        anchor = 0.5 * (left.origin.point + p_r)
        hi = min(left.model.domain[1], right.model.domain[1] - s_r)
    else:
        line = left if left is not None else right
        sign = -1.0 if left is not None else 1.0
        th = eval_poly(line.model, 0.0)
        anchor = line.origin.point + sign * 0.5 * lane_width * np.array([-np.sin(th), np.cos(th)])
        w = np.array(line.model.w)
        hi = line.model.domain[1]
    th0 = float(np.polyval(w, 0.0))
    return (PolyModel(w, (0.0, max(hi, 1.0))),
            CurveOrigin((float(anchor[0]), float(anchor[1])), th0))


def update_centerline(state: CenterlineState, left: LineView | None,
                      right: LineView | None, lane_width: float
                      ) -> tuple[CenterlineState, PolyModel]:
    """One frame of centerline estimation from the current lateral lines."""
    if left is None and right is None:
        raise TooFewPointsError("no lateral line available")
    if state.model is None:
        prev, origin = bootstrap_centerline(left, right, lane_width)
        rls = state.rls
    else:
        prev, origin, rls = state.model, state.origin, state.rls

    center = estimate_center(prev, origin, state.kappa_min)
    projected = {}
    for side, line in (("left", left), ("right", right)):
        if line is None:
            projected[side] = np.empty((0, 2))
            continue
        pts = line.samples()
        if len(pts) < 2:
            projected[side] = np.empty((0, 2))
            continue
        if center is None:
            projected[side] = degenerate_project(pts, line.origin, prev, origin)
        else:
            frame = curvature_frame(center, prev, origin, line.origin.point,
                                    state.paper_literal_ratio)
            projected[side] = project_to_centerline(pts, line.origin, frame)

    # start the arc coordinate at the first projected point
    s_first = min(p[0, 0] for p in projected.values() if len(p))
    anchor = reconstruct_cartesian(prev, origin, [s_first])[0]
    if state.model is not None:
        rls = rls_shift(rls, s_first)
    origin = CurveOrigin((float(anchor[0]), float(anchor[1])),
                         float(eval_poly(prev, s_first)))
    for side in projected:
        if len(projected[side]):
            projected[side] = projected[side] - np.array([s_first, 0.0])

    rls, model = fit_centerline(projected["left"], projected["right"], rls)
    model = PolyModel(model.w, (0.0, model.domain[1]))

    # lateral placement: midway between the lines along the normal at the anchor
    th = eval_poly(model, 0.0)
    normal = np.array([-np.sin(th), np.cos(th)])
    if left is not None and right is not None:
        anchor = 0.5 * (_foot_point(left, origin.point) + _foot_point(right, origin.point))
    elif left is not None:
        anchor = _foot_point(left, origin.point) - 0.5 * lane_width * normal
    else:
        anchor = _foot_point(right, origin.point) + 0.5 * lane_width * normal
    origin = CurveOrigin((float(anchor[0]), float(anchor[1])), float(th))
    return replace(state, rls=rls, origin=origin, model=model), model
