"""Relative pose of the vehicle with respect to the lane centerline.

The vehicle sits at ``cm`` in its own frame (x forward, y left).  The pose is
read at the perpendicular foot ``O_c`` of ``cm`` on the centerline:

* ``theta`` is the centerline heading at the foot;
* ``delta`` is the signed distance ``|O_c - cm|``, positive when the
  centerline lies to the vehicle's left.

A three-state EKF over ``(theta, rho, w)`` smooths the pose, with
``delta = -rho * w / 2``.  Its measurement is the pair of lateral-line points
on the perpendicular through ``cm``::

    h(x) = (x_cm - (w/2)(1 - rho) sin(theta),  y_cm + (w/2)(1 - rho) cos(theta),
            x_cm + (w/2)(1 + rho) sin(theta),  y_cm - (w/2)(1 + rho) cos(theta))
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curvilin import ArcCurve, CartesianPoint, CurveOrigin, PolyModel, wrap_angle
from .errors import BothInvalidError, NoRootError

FOOT_STEP = 0.25
FOOT_TOL = 1e-9
W_LANE_BOUNDS = (2.0, 15.0)
RHO_LIMIT = 0.999
IMPUTED_NOISE_FACTOR = 10.0
DEFAULT_Q = (1e-4, 1e-4, 1e-3)
DEFAULT_R = 0.05**2
DEFAULT_P0 = (0.1, 0.1, 1.0)


@dataclass(frozen=True)
class FootSolution:
    s_tilde: float
    foot: CartesianPoint
    tangent: float
    residual: float = 0.0


@dataclass(frozen=True)
class RelPose:
    theta: float
    delta: float


@dataclass(frozen=True)
class LanePointPair:
    """Lateral-line points on the perpendicular through the vehicle.

    A side whose flag is false carries an imputed point (the other line
    mirrored across the lane), or ``None`` when nothing could be imputed.
    """

    P_L: CartesianPoint | None
    P_R: CartesianPoint | None
    left_valid: bool
    right_valid: bool

    def vector(self) -> np.ndarray:
        return np.array([*self.P_L, *self.P_R], dtype=float)


@dataclass(frozen=True)
class EkfState:
    theta: float
    rho: float
    w_lane: float
    P: np.ndarray
    Q: np.ndarray = field(default_factory=lambda: np.diag(DEFAULT_Q))
    R_meas: np.ndarray = field(default_factory=lambda: DEFAULT_R * np.eye(4))

    def __post_init__(self):
        for name, shape in (("P", (3, 3)), ("Q", (3, 3)), ("R_meas", (4, 4))):
            a = np.array(getattr(self, name), dtype=float).reshape(shape)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def x(self) -> np.ndarray:
        return np.array([self.theta, self.rho, self.w_lane])


def _point(p) -> CartesianPoint:
    return CartesianPoint(float(p[0]), float(p[1]))


def _curve_roots(model: PolyModel, origin: CurveOrigin, cm, step: float, margin: float,
                 direction=None):
    """Roots of ``g(s) = (P(s) - cm) . d(s)`` bracketed on a ``step`` grid.

    ``d(s)`` is the curve tangent, or the fixed unit vector at angle
    ``direction`` when given.  For the tangent only sign changes from
    negative to positive (distance minima) are kept.
    """
    cm = np.asarray(cm, dtype=float)
    lo, hi = model.domain[0] - margin, model.domain[1] + margin
    curve = ArcCurve(model, origin, lo, hi)
    fixed = None if direction is None else np.array([np.cos(direction), np.sin(direction)])

    def g(s):
        d = fixed if fixed is not None else np.array([np.cos(curve.heading(s)),
                                                      np.sin(curve.heading(s))])
        return float((curve.at(s) - cm) @ d)

    n = max(int(np.ceil((hi - lo) / step)), 1)
    grid = np.linspace(lo, hi, n + 1)
    xy = curve.at(grid)
    if fixed is None:
        th = curve.heading(grid)
        gv = np.einsum("ij,ij->i", xy - cm, np.column_stack([np.cos(th), np.sin(th)]))
        brackets = (gv[:-1] < 0) & (gv[1:] > 0)
    else:
        gv = (xy - cm) @ fixed
        brackets = gv[:-1] * gv[1:] < 0
    roots = [float(s) for s, v in zip(grid, gv) if v == 0.0]
    for k in np.nonzero(brackets)[0]:
        roots.append(brentq(g, grid[k], grid[k + 1], xtol=FOOT_TOL,
                            rtol=4 * np.finfo(float).eps))
    if not roots:
        raise NoRootError("no perpendicular foot within the model domain")
    pts = curve.at(np.array(roots))
    best = int(np.argmin(np.sum((pts - cm) ** 2, axis=1)))
    s = roots[best]
    return s, pts[best], float(curve.heading(s)), abs(g(s))


def solve_foot(model: PolyModel, origin: CurveOrigin, cm, step: float = FOOT_STEP,
               margin: float = 0.0) -> FootSolution:
    """Perpendicular foot of ``cm`` on the curve ``(model, origin)``.

    ``g(s) = (P(s) - cm) . t(s)`` is sampled every ``step`` metres over the
    model domain (widened by ``margin`` on both sides) and every sign change
    from negative to positive, a local distance minimum, is refined with
    Brent's method.  The minimum closest to ``cm`` wins.
    """
    s, p, th, res = _curve_roots(model, origin, cm, step, margin)
    return FootSolution(s, _point(p), th, res)


def normal_intersection(model: PolyModel, origin: CurveOrigin, cm, tangent: float,
                        step: float = FOOT_STEP, margin: float = 0.0) -> CartesianPoint:
    """Where the curve crosses the line through ``cm`` normal to ``tangent``."""
    _, p, _, _ = _curve_roots(model, origin, cm, step, margin, direction=tangent)
    return _point(p)


def rel_pose(sol: FootSolution, cm=(0.0, 0.0)) -> RelPose:
    """Heading and signed lateral offset read at a perpendicular foot."""
    d = np.asarray(sol.foot) - np.asarray(cm, dtype=float)
    dist = float(np.hypot(*d))
    return RelPose(float(wrap_angle(sol.tangent)), dist if d[1] >= 0 else -dist)


def _cross(line, cm, tangent, margin):
    if line is None:
        return None
    try:
        return normal_intersection(line[0], line[1], cm, tangent, margin=margin)
    except NoRootError:
        return None


def measure_lane_points(left, right, foot_line: FootSolution, cm=(0.0, 0.0),
                        lane_width: float = 4.0, margin: float = 2.0) -> LanePointPair:
    """Lateral-line points on the normal to the centerline through ``cm``.

    ``left`` and ``right`` are ``(model, origin)`` pairs or ``None``.  The
    normal is taken at the centerline foot ``foot_line``.  A missing side is
    imputed by mirroring the other one ``lane_width`` along that normal.
    """
    th = foot_line.tangent
    pl = _cross(left, cm, th, margin)
    pr = _cross(right, cm, th, margin)
    if pl is None and pr is None:
        raise BothInvalidError("neither lateral line yields a measurement")
    normal = np.array([-np.sin(th), np.cos(th)])
    if pl is None:
        return LanePointPair(_point(np.asarray(pr) + lane_width * normal), pr, False, True)
    if pr is None:
        return LanePointPair(pl, _point(np.asarray(pl) - lane_width * normal), True, False)
    return LanePointPair(pl, pr, True, True)


def ekf_init(w_lane: float | None = None, theta: float = 0.0, rho: float = 0.0,
             P0=DEFAULT_P0, Q=DEFAULT_Q, R=DEFAULT_R) -> EkfState:
    w = 4.0 if w_lane is None or not np.isfinite(w_lane) else float(np.clip(w_lane, *W_LANE_BOUNDS))
    Rm = np.asarray(R, dtype=float)
    Rm = Rm * np.eye(4) if Rm.ndim == 0 else (np.diag(Rm) if Rm.ndim == 1 else Rm)
    return EkfState(theta, rho, w, np.diag(P0), np.diag(Q), Rm)


def measurement(x, cm=(0.0, 0.0)) -> np.ndarray:
    theta, rho, w = x
    xc, yc = cm
    s, c = np.sin(theta), np.cos(theta)
    a, b = 0.5 * w * (1 - rho), 0.5 * w * (1 + rho)
    return np.array([xc - a * s, yc + a * c, xc + b * s, yc - b * c])


def measurement_jacobian(x) -> np.ndarray:
    """Analytic ``dh/dx``; independent of the vehicle position."""
    theta, rho, w = x
    s, c = np.sin(theta), np.cos(theta)
    hw = 0.5 * w
    return np.array([
        [-hw * (1 - rho) * c, hw * s, -0.5 * (1 - rho) * s],
        [-hw * (1 - rho) * s, -hw * c, 0.5 * (1 - rho) * c],
        [hw * (1 + rho) * c, hw * s, 0.5 * (1 + rho) * s],
        [hw * (1 + rho) * s, -hw * c, -0.5 * (1 + rho) * c],
    ])


def _with(state: EkfState, x, P) -> EkfState:
    P = 0.5 * (P + P.T)
    return EkfState(float(wrap_angle(x[0])), float(np.clip(x[1], -RHO_LIMIT, RHO_LIMIT)),
                    float(np.clip(x[2], *W_LANE_BOUNDS)), P, state.Q, state.R_meas)


def ekf_predict(state: EkfState) -> EkfState:
    """Random-walk process: the mean is kept, ``P`` grows by ``Q``."""
    return EkfState(state.theta, state.rho, state.w_lane, state.P + state.Q,
                    state.Q, state.R_meas)


def ekf_update(state: EkfState, z: LanePointPair, cm=(0.0, 0.0)) -> EkfState:
    if not (z.left_valid or z.right_valid):
        raise BothInvalidError("update needs at least one measured line")
    x = state.x
    H = measurement_jacobian(x)
    R = state.R_meas.copy()
    for valid, rows in ((z.left_valid, (0, 1)), (z.right_valid, (2, 3))):
        if not valid:
            R[np.ix_(rows, rows)] *= IMPUTED_NOISE_FACTOR
    innov = z.vector() - measurement(x, cm)
    Sm = H @ state.P @ H.T + R
    K = np.linalg.solve(Sm, H @ state.P).T
    A = np.eye(3) - K @ H
    P = A @ state.P @ A.T + K @ R @ K.T
    return _with(state, x + K @ innov, P)


def ekf_to_relpose(state: EkfState) -> RelPose:
    return RelPose(float(state.theta), -state.rho * state.w_lane / 2.0)


def lane_points_from_state(x, cm=(0.0, 0.0)) -> LanePointPair:
    """Noise-free measurement of state ``x`` as a valid point pair."""
    z = measurement(x, cm)
    return LanePointPair(_point(z[:2]), _point(z[2:]), True, True)
