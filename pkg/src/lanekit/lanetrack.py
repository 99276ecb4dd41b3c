"""Per-line temporal tracking: odometry back-projection, pruning and RLS fitting.

Each lateral line keeps a buffer of past points in the current vehicle frame.
Every frame the buffer is moved by the inverse vehicle motion, pruned behind
the vehicle, merged with the new detections, smoothed with a spline and
converted to ``(s, theta)`` pairs that drive the line's RLS tracker.

The RLS heading polynomial lives in a frame that moves with the vehicle, so
its coefficients are carried along exactly: a rotation by ``dpsi`` shifts
``w0`` and re-anchoring the arc origin is a polynomial shift (see
:func:`lanekit.rlsfit.rls_shift`).  Only the points merged from the new
detections enter the RLS update; older points reach the fit through the
recursion's memory.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .curvilin import (ArcCurve, CurveOrigin, PolyModel, as_points, eval_poly,
                       fit_spline, reconstruct_cartesian, to_curvilinear)
from .errors import LanekitError
from .perceive import LOST, TRACKED
from .rlsfit import RlsState, rls_init, rls_model, rls_shift, rls_update
from .synthtrack import OdometryDelta


@dataclass(frozen=True)
class TrackConfig:
    mu: float = 0.95
    prior_scale: float = 1e6
    prune_behind: float = 8.0
    max_lost: int = 5
    min_point_spacing: float = 0.5
    spline_spacing: float = 0.25
    buffer_decay: float = 0.7
    accumulate: bool = True


@dataclass(frozen=True)
class LineTrack:
    rls: RlsState
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    ages: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    origin: CurveOrigin = CurveOrigin((0.0, 0.0), 0.0)
    status: str = LOST
    lost_frames: int = 0
    model: PolyModel | None = None
    config: TrackConfig = TrackConfig()

    @property
    def point_buffer(self) -> list[tuple[tuple[float, float], int]]:
        return [((float(x), float(y)), int(a)) for (x, y), a in zip(self.points, self.ages)]

    @property
    def initialized(self) -> bool:
        return self.model is not None


def new_track(config: TrackConfig | None = None) -> LineTrack:
    config = config or TrackConfig()
    return LineTrack(rls_init(config.mu, config.prior_scale), config=config)


def transform_points(points, odo: OdometryDelta) -> np.ndarray:
    """Express previous-frame points in the frame reached after ``odo``."""
    p = as_points(points)
    if len(p) == 0:
        return p
    c, s = np.cos(odo.dpsi), np.sin(odo.dpsi)
    q = p - np.array([odo.dx, odo.dy])
    return np.column_stack([c * q[:, 0] + s * q[:, 1], -s * q[:, 0] + c * q[:, 1]])


def move_origin(origin: CurveOrigin, odo: OdometryDelta) -> CurveOrigin:
    anchor = transform_points([origin.anchor], odo)[0]
    return CurveOrigin((float(anchor[0]), float(anchor[1])), origin.theta0 - odo.dpsi)


def arc_position(model: PolyModel, origin: CurveOrigin, point, reach: float = 15.0) -> float:
    """Arc coordinate of the perpendicular foot of ``point`` on a heading model.

    The search covers the model domain extended by ``reach`` on both sides;
    further out a cubic heading can curl back and produce spurious feet.
    """
    p = np.asarray(point, dtype=float)
    curve = ArcCurve(model, origin, model.domain[0] - reach, model.domain[1] + reach)
    k = int(np.argmin(np.sum((curve.xy - p) ** 2, axis=1)))
    s = curve.nodes[k]
    th = eval_poly(model, s)
    return float(s + (p - curve.xy[k]) @ np.array([np.cos(th), np.sin(th)]))


def reanchor(rls: RlsState, model: PolyModel | None, origin: CurveOrigin,
             point) -> tuple[RlsState, CurveOrigin, float]:
    """Move the arc origin of a tracked curve to the foot of ``point``.

    Returns the shifted RLS state, the new origin (anchored at ``point``) and
    the arc offset that was applied.
    """
    point = np.asarray(point, dtype=float)
    if model is None:
        return rls, CurveOrigin((float(point[0]), float(point[1])), origin.theta0), 0.0
    a = arc_position(model, origin, point)
    rls = rls_shift(rls, a)
    theta0 = float(eval_poly(PolyModel(rls.w), 0.0))
    return rls, CurveOrigin((float(point[0]), float(point[1])), theta0), a


def propagate(track: LineTrack, odo: OdometryDelta) -> LineTrack:
    """Move buffered points and the tracked curve by the inverse vehicle motion."""
    if odo.dx == 0.0 and odo.dy == 0.0 and odo.dpsi == 0.0:
        return track
    points = transform_points(track.points, odo)
    origin = move_origin(track.origin, odo)
    rls = track.rls
    model = track.model
    if model is not None:
        rls = rls_shift(rls, 0.0, -odo.dpsi)
        model = PolyModel(rls.w, model.domain)
        if len(points):
            rls, origin, a = reanchor(rls, model, origin, points[0])
            lo, hi = model.domain
            model = PolyModel(rls.w, (0.0, max(hi - a, 0.0)))
    return replace(track, points=points, ages=track.ages + 1,
                   weights=track.weights * track.config.buffer_decay,
                   origin=origin, rls=rls, model=model)


def prune(track: LineTrack, prune_behind: float | None = None) -> LineTrack:
    """Drop buffered points more than ``prune_behind`` metres behind the vehicle."""
    behind = track.config.prune_behind if prune_behind is None else prune_behind
    if not 5.0 <= behind <= 10.0:
        raise ValueError(f"prune distance must lie in [5, 10] m, got {behind}")
    keep = track.points[:, 0] >= -behind if len(track.points) else np.zeros(0, bool)
    return replace(track, points=track.points[keep], ages=track.ages[keep],
                   weights=track.weights[keep])


def merge_points(points, weights, ages, spacing: float):
    """Average points falling in the same ``spacing``-wide forward bin."""
    p = as_points(points)
    if len(p) == 0:
        return p, np.empty(0), np.empty(0, dtype=int)
    bins = np.floor(p[:, 0] / spacing).astype(np.int64)
    uniq, inv = np.unique(bins, return_inverse=True)
    wsum = np.bincount(inv, weights=weights)
    x = np.bincount(inv, weights=weights * p[:, 0]) / wsum
    y = np.bincount(inv, weights=weights * p[:, 1]) / wsum
    age = np.full(len(uniq), np.iinfo(np.int64).max)
    np.minimum.at(age, inv, ages)
    return np.column_stack([x, y]), wsum, age


def _reset(track: LineTrack) -> LineTrack:
    cfg = track.config
    return LineTrack(rls_init(cfg.mu, cfg.prior_scale), status=LOST,
                     lost_frames=track.lost_frames, config=cfg)


def ingest_and_fit(track: LineTrack, new_points, status: str = TRACKED
                   ) -> tuple[LineTrack, PolyModel | None]:
    """Merge new detections into the buffer, refit and update the RLS tracker.

    With no new points the track coasts on its transported model; after more
    than ``max_lost`` empty frames it is reset and reported ``lost``.
    """
    cfg = track.config
    new = as_points(new_points)
    if len(new) == 0:
        lost = track.lost_frames + 1
        if lost > cfg.max_lost or track.model is None:
            t = _reset(replace(track, lost_frames=lost))
            return t, None
        return replace(track, lost_frames=lost), track.model
    new = new[np.argsort(new[:, 0], kind="stable")]

    if cfg.accumulate:
        pts = np.vstack([track.points, new])
        w = np.concatenate([track.weights, np.ones(len(new))])
        ages = np.concatenate([track.ages, np.zeros(len(new), dtype=int)])
    else:
        pts, w, ages = new, np.ones(len(new)), np.zeros(len(new), dtype=int)
    merged, wsum, age = merge_points(pts, w, ages, cfg.min_point_spacing)
    if len(merged) < 2:
        return _coast(track)

    if len(merged) >= 4:
        poly = fit_spline(merged, cfg.spline_spacing)
    else:
        poly = merged
    if len(poly) < 2:
        return _coast(track)

    rls, origin, _ = reanchor(track.rls, track.model, track.origin, poly[0])
    _, curvi = to_curvilinear(poly, at="mid")
    if track.model is not None:
        ref = eval_poly(PolyModel(rls.w), curvi[:, 0])
        curvi[:, 1] += 2 * np.pi * np.round(np.median(ref - curvi[:, 1]) / (2 * np.pi))

    if cfg.accumulate:
        mid = 0.5 * (poly[1:, 0] + poly[:-1, 0])
        fresh = (mid >= new[0, 0] - cfg.min_point_spacing) & (mid <= new[-1, 0] + cfg.min_point_spacing)
        obs = curvi[fresh] if fresh.any() else curvi
    else:
        obs = curvi
    rls = rls_update(rls, obs)

    s_nodes = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(poly, axis=0).T))])
    model = rls_model(rls, (0.0, float(s_nodes[-1])))
    # position the curve by least squares over the whole buffer
    recon = reconstruct_cartesian(model, origin, s_nodes)
    shift = np.mean(poly - recon, axis=0)
    anchor = origin.point + shift
    origin = CurveOrigin((float(anchor[0]), float(anchor[1])), float(eval_poly(model, 0.0)))

    out = replace(track, rls=rls, points=merged, weights=wsum, ages=age, origin=origin,
                  status=status, lost_frames=0, model=model)
    return out, model


def _coast(track: LineTrack):
    return ingest_and_fit(track, np.empty((0, 2)))


def model_polyline(track: LineTrack, step: float = 0.5, extend: float = 0.0) -> np.ndarray | None:
    """Cartesian samples of the track's current model, for priors and plots."""
    if track.model is None:
        return None
    lo, hi = track.model.domain
    s = np.arange(lo, hi + extend + 1e-9, step)
    if len(s) < 2:
        s = np.array([lo, lo + step])
    return reconstruct_cartesian(track.model, track.origin, s)


def fit_rms(track: LineTrack, truth_points) -> float:
    """RMS distance from ground-truth points to the track's fitted curve."""
    if track.model is None:
        raise LanekitError("track has no model")
    lo, hi = track.model.domain
    curve = ArcCurve(track.model, track.origin, lo - 20.0, hi + 20.0, step=0.02)
    d, _ = cKDTree(curve.xy).query(as_points(truth_points))
    return float(np.sqrt(np.mean(d**2)))
