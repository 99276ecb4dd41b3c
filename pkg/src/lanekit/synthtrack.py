"""Synthetic track world with exact ground truth.

Tracks are chains of straight and constant-curvature segments starting at
the world origin with heading 0.  Every geometric quantity (centerline,
lateral lines, vehicle poses, relative heading and offset) is closed form,
so no integration error enters the ground truth.

Vehicle trajectories follow the centerline arc coordinate at constant speed
with a prescribed lateral offset profile ``d(s)`` (positive to the left).
The vehicle heading is the direction of the offset path, and the ground
truth relative pose is

    theta_true = -atan2(d', 1 - kappa d)      delta_true = -d

i.e. ``delta_true > 0`` when the centerline lies to the left of the vehicle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .curvilin import wrap_angle
from .errors import InvalidSpecError, InvalidStyleError
from .perceive import MaskGrid, rasterize_points

MAX_CURVATURE = 0.2
TRUTH_HORIZON = 30.0
TRUTH_SPACING = 0.5
STYLES = ("centered", "oscillating", "racing")


@dataclass(frozen=True)
class Segment:
    kind: str
    length: float
    curvature: float = 0.0


@dataclass(frozen=True)
class TrackSpec:
    segments: tuple[Segment, ...]
    lane_width: float = 4.0

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(**s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "lane_width", float(self.lane_width))

    def validate(self) -> "TrackSpec":
        if not self.segments:
            raise InvalidSpecError("track has no segments")
        for i, seg in enumerate(self.segments):
            if seg.kind not in ("straight", "arc"):
                raise InvalidSpecError(f"segment {i}: unknown kind {seg.kind!r}")
            if not seg.length > 0:
                raise InvalidSpecError(f"segment {i}: length must be positive")
            if abs(seg.curvature) > MAX_CURVATURE:
                raise InvalidSpecError(f"segment {i}: |curvature| exceeds {MAX_CURVATURE}")
            if seg.kind == "straight" and seg.curvature != 0.0:
                raise InvalidSpecError(f"segment {i}: straight segment with curvature")
            if seg.kind == "arc" and seg.curvature == 0.0:
                raise InvalidSpecError(f"segment {i}: arc with zero curvature")
        if not 3.0 <= self.lane_width <= 12.0:
            raise InvalidSpecError("lane width must lie in [3, 12] m")
        half = self.lane_width / 2
        if any(abs(seg.curvature) * half >= 1.0 for seg in self.segments):
            raise InvalidSpecError("lane half-width exceeds a turn radius")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "TrackSpec":
        segs = []
        for raw in d["segments"]:
            raw = dict(raw)
            kind = raw.get("kind", "arc" if raw.get("curvature", 0.0) else "straight")
            segs.append(Segment(kind, float(raw["length"]), float(raw.get("curvature", 0.0))))
        return cls(tuple(segs), float(d.get("lane_width", 4.0))).validate()

    def to_dict(self) -> dict:
        return {
            "lane_width": self.lane_width,
            "segments": [
                {"kind": s.kind, "length": s.length, "curvature": s.curvature}
                for s in self.segments
            ],
        }


class Track:
    """Closed-form centerline of a :class:`TrackSpec`.

    Arc coordinates outside ``[0, length]`` continue along straight lines
    tangent to the end points.
    """

    def __init__(self, spec: TrackSpec):
        self.spec = spec.validate()
        self.lane_width = spec.lane_width
        starts, poses = [0.0], [(0.0, 0.0, 0.0)]
        for seg in spec.segments:
            x, y, psi = self._advance(*poses[-1], seg.curvature, seg.length)
            poses.append((x, y, psi))
            starts.append(starts[-1] + seg.length)
        self._starts = np.array(starts)
        self._poses = np.array(poses)
        self._kappa = np.array([seg.curvature for seg in spec.segments])
        self.length = float(self._starts[-1])

    @staticmethod
    def _advance(x, y, psi, kappa, u):
        if kappa == 0.0:
            return x + u * np.cos(psi), y + u * np.sin(psi), psi + 0.0 * u
        return (x + (np.sin(psi + kappa * u) - np.sin(psi)) / kappa,
                y - (np.cos(psi + kappa * u) - np.cos(psi)) / kappa,
                psi + kappa * u)

    def _locate(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self._starts, s, side="right") - 1,
                      0, len(self._kappa) - 1)
        return s, idx

    def curvature(self, s):
        s, idx = self._locate(s)
        k = np.where((s < 0) | (s > self.length), 0.0, self._kappa[idx])
        return float(k) if k.ndim == 0 else k

    def pose(self, s):
        """Centerline position and heading ``(x, y, psi)`` at arc length ``s``."""
        s, idx = self._locate(s)
        before = s < 0
        after = s > self.length
        # points off the ends run along the end tangents
        base_idx = np.where(after, len(self._kappa), idx)
        x0, y0, psi0 = (self._poses[base_idx, k] for k in range(3))
        u = np.where(before, s, s - self._starts[base_idx])
        kappa = np.where(before | after, 0.0, self._kappa[idx])
        safe = np.where(kappa == 0.0, 1.0, kappa)
        x = np.where(kappa == 0.0, x0 + u * np.cos(psi0),
                     x0 + (np.sin(psi0 + kappa * u) - np.sin(psi0)) / safe)
        y = np.where(kappa == 0.0, y0 + u * np.sin(psi0),
                     y0 - (np.cos(psi0 + kappa * u) - np.cos(psi0)) / safe)
        psi = psi0 + kappa * u
        return x, y, psi

    def point(self, s, offset=0.0) -> np.ndarray:
        """World point at arc ``s`` displaced ``offset`` along the left normal."""
        x, y, psi = self.pose(s)
        offset = np.asarray(offset, dtype=float)
        return np.stack([x - offset * np.sin(psi), y + offset * np.cos(psi)], axis=-1)

    def project(self, p, s_hint: float | None = None, step: float = 0.05) -> float:
        """Arc coordinate of the perpendicular foot of world point ``p``.

        A dense search picks the nearest sample, then Newton iterations on
        ``(c(s) - p) . t(s) = 0`` polish it.
        """
        p = np.asarray(p, dtype=float)
        if s_hint is None:
            grid = np.arange(-50.0, self.length + 50.0 + step, step)
        else:
            grid = np.arange(s_hint - 50.0, s_hint + 50.0 + step, step)
        c = self.point(grid)
        s = grid[np.argmin(np.sum((c - p) ** 2, axis=1))]
        for _ in range(20):
            x, y, psi = self.pose(s)
            k = self.curvature(s)
            dx, dy = x - p[0], y - p[1]
            g = dx * np.cos(psi) + dy * np.sin(psi)
            dg = 1.0 + k * (-dx * np.sin(psi) + dy * np.cos(psi))
            s_new = s - g / dg
            if abs(s_new - s) < 1e-13:
                s = s_new
                break
            s = s_new
        return float(s)


@dataclass(frozen=True)
class TrackLines:
    centerline: np.ndarray
    left_line: np.ndarray
    right_line: np.ndarray
    s: np.ndarray


def build_track(spec: TrackSpec, ds: float = TRUTH_SPACING) -> TrackLines:
    """Sample centerline and lateral lines every ``ds`` metres of arc length."""
    if not 0.0 < ds <= 1.0:
        raise InvalidSpecError(f"sampling step must lie in (0, 1], got {ds}")
    track = Track(spec)
    n = int(np.floor(track.length / ds + 1e-9))
    s = np.arange(n + 1) * ds
    half = spec.lane_width / 2
    return TrackLines(track.point(s), track.point(s, half), track.point(s, -half), s)


@dataclass(frozen=True)
class VehiclePose:
    position: tuple[float, float]
    heading: float


@dataclass(frozen=True)
class FrameTruth:
    frame: int
    pose: VehiclePose
    theta_true: float
    delta_true: float
    s: float
    offset: float
    centerline_window: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class OdometryDelta:
    """Rigid motion between consecutive frames, expressed in the earlier frame."""

    dx: float = 0.0
    dy: float = 0.0
    dpsi: float = 0.0


class OffsetProfile:
    """Lateral offset ``d(s)`` and its derivative for one driving style."""

    def __init__(self, style: str, track: Track, amplitude: float | None = None,
                 wavelength: float = 50.0, peak_heading_deg: float | None = None,
                 side_fraction: float = 0.8, transition: float = 30.0):
        if style not in STYLES:
            raise InvalidStyleError(f"unknown driving style {style!r}")
        self.style = style
        half = track.lane_width / 2
        if style == "oscillating":
            if wavelength <= 0:
                raise InvalidStyleError("wavelength must be positive")
            if peak_heading_deg is not None:
                if not 0.0 < peak_heading_deg <= 40.0:
                    raise InvalidStyleError("peak heading must lie in (0, 40] degrees")
                amplitude = np.tan(np.radians(peak_heading_deg)) * wavelength / (2 * np.pi)
            if amplitude is None:
                amplitude = 0.25 * half
            if not 0.0 <= amplitude < half:
                raise InvalidStyleError("oscillation amplitude must stay inside the lane")
            if np.degrees(np.arctan(2 * np.pi * amplitude / wavelength)) > 40.0 + 1e-9:
                raise InvalidStyleError("oscillation exceeds 40 degrees of heading")
        if style == "racing":
            if not 0.0 < side_fraction < 1.0:
                raise InvalidStyleError("side fraction must lie in (0, 1)")
            if transition <= 0:
                raise InvalidStyleError("transition length must be positive")
        self.amplitude = amplitude
        self.wavelength = wavelength
        self.transition = transition
        self.level = side_fraction * half
        self._steps = self._racing_steps(track) if style == "racing" else None

    def _racing_steps(self, track: Track):
        # inside of each turn, outside on the straight before the next turn
        kappa = [seg.curvature for seg in track.spec.segments]
        signs = []
        for i, k in enumerate(kappa):
            if k != 0.0:
                signs.append(np.sign(k))
                continue
            nxt = next((np.sign(v) for v in kappa[i + 1:] if v != 0.0), None)
            prv = next((np.sign(v) for v in kappa[:i][::-1] if v != 0.0), None)
            if nxt is not None:
                signs.append(-nxt)
            elif prv is not None:
                signs.append(-prv)
            else:
                signs.append(-1.0)
        levels = np.array(signs) * self.level
        bounds = track._starts[1:-1]
        jumps = np.diff(levels)
        return levels[0], bounds, jumps

    def __call__(self, s):
        """Return ``(d, d_prime)`` at arc coordinates ``s``."""
        s = np.asarray(s, dtype=float)
        if self.style == "centered":
            return np.zeros_like(s), np.zeros_like(s)
        if self.style == "oscillating":
            k = 2 * np.pi / self.wavelength
            return self.amplitude * np.sin(k * s), self.amplitude * k * np.cos(k * s)
        base, bounds, jumps = self._steps
        d = np.full_like(s, base)
        dp = np.zeros_like(s)
        L = self.transition
        for b, j in zip(bounds, jumps):
            u = np.clip(s - b, -L / 2, L / 2)
            inside = np.abs(s - b) < L / 2
            # step convolved with a Hann window of width L
            d += j * (u / L + 0.5 + np.sin(2 * np.pi * u / L) / (2 * np.pi))
            dp += np.where(inside, j * (1.0 + np.cos(2 * np.pi * u / L)) / L, 0.0)
        return d, dp


def vehicle_state(track: Track, profile: OffsetProfile, s):
    """World pose and ground-truth relative pose for arc coordinates ``s``."""
    s = np.asarray(s, dtype=float)
    d, dp = profile(s)
    x, y, psi = track.pose(s)
    kappa = track.curvature(s)
    rel = np.arctan2(dp, 1.0 - kappa * d)
    pos = np.stack([x - d * np.sin(psi), y + d * np.cos(psi)], axis=-1)
    return pos, psi + rel, -rel, -d, d


def world_to_vehicle(points, position, heading) -> np.ndarray:
    p = np.asarray(points, dtype=float) - np.asarray(position, dtype=float)
    c, s = np.cos(heading), np.sin(heading)
    return np.column_stack([c * p[..., 0] + s * p[..., 1], -s * p[..., 0] + c * p[..., 1]])


def vehicle_to_world(points, position, heading) -> np.ndarray:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    c, s = np.cos(heading), np.sin(heading)
    return np.column_stack([c * p[:, 0] - s * p[:, 1] + position[0],
                            s * p[:, 0] + c * p[:, 1] + position[1]])


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def simulate_trajectory(track: Track, style: str = "centered", speed: float = 10.0,
                        frame_rate: float = 10.0, noise: float = 0.0,
                        n_frames: int | None = None, s_start: float = 0.0,
                        seed=0, **style_params) -> list[tuple[FrameTruth, OdometryDelta]]:
    """Generate per-frame ground truth and odometry along a track.

    ``noise`` is relative: translation components get Gaussian noise with
    standard deviation ``noise * step`` and the yaw increment
    ``noise * (|dpsi| + 0.01 rad/m * step)``, where ``step`` is the distance
    travelled in the frame.  The first frame carries a zero odometry delta.
    """
    if not 1.0 <= speed <= 20.0:
        raise InvalidStyleError(f"speed must lie in [1, 20] m/s, got {speed}")
    if not 1.0 <= frame_rate <= 100.0:
        raise InvalidStyleError(f"frame rate must lie in [1, 100] Hz, got {frame_rate}")
    if noise < 0:
        raise InvalidStyleError("odometry noise must be non-negative")
    profile = OffsetProfile(style, track, **style_params)
    ds = speed / frame_rate
    if n_frames is None:
        n_frames = int(np.floor((track.length - s_start) / ds)) + 1
    s = s_start + ds * np.arange(n_frames)
    pos, heading, theta_true, delta_true, offset = vehicle_state(track, profile, s)
    rng = _rng(seed)
    window_s = np.arange(0.0, TRUTH_HORIZON + 1e-9, TRUTH_SPACING)

    out = []
    for k in range(n_frames):
        if k == 0:
            odo = OdometryDelta()
        else:
            rel = world_to_vehicle(pos[k][None, :], pos[k - 1], heading[k - 1])[0]
            dpsi = float(wrap_angle(heading[k] - heading[k - 1]))
            if noise > 0:
                step = float(np.hypot(*rel))
                rel = rel + rng.normal(0.0, noise * step, 2)
                dpsi += rng.normal(0.0, noise * (abs(dpsi) + 0.01 * step))
            odo = OdometryDelta(float(rel[0]), float(rel[1]), float(dpsi))
        window = world_to_vehicle(track.point(s[k] + window_s), pos[k], heading[k])
        truth = FrameTruth(
            frame=k,
            pose=VehiclePose((float(pos[k, 0]), float(pos[k, 1])), float(heading[k])),
            theta_true=float(wrap_angle(theta_true[k])),
            delta_true=float(delta_true[k]),
            s=float(s[k]),
            offset=float(offset[k]),
            centerline_window=window,
        )
        out.append((truth, odo))
    return out


@dataclass(frozen=True)
class Detections:
    left_points: np.ndarray
    right_points: np.ndarray
    mask: MaskGrid | None = None


@dataclass(frozen=True)
class RasterSpec:
    """Geometry of the bird's-eye raster the detections are drawn into."""

    resolution: float = 0.05
    lateral_half_width: float = 15.0
    disc_radius: float = 0.1

    def blank(self, range_: float) -> MaskGrid:
        height = int(np.ceil(range_ / self.resolution)) + 1
        width = int(np.ceil(2 * self.lateral_half_width / self.resolution)) + 1
        return MaskGrid.blank(height, width, self.resolution,
                              (0.0, -self.lateral_half_width))


def render_detections(truth: FrameTruth, track: Track, detection_noise: float = 0.0,
                      dropout: float = 0.0, range_: float = 30.0, seed=0,
                      point_spacing: float = 0.1,
                      raster: RasterSpec | None = None) -> Detections:
    """Lateral-line points seen from the vehicle, with noise and dropout.

    Points are sampled every ``point_spacing`` metres of arc along each line,
    kept if their forward coordinate lies in ``[0, range_]``, perturbed by
    isotropic Gaussian noise and dropped independently with probability
    ``dropout``.  With ``raster`` set, the surviving points are also drawn
    as filled discs into a bird's-eye grayscale grid.
    """
    if not 5.0 < range_ <= 50.0:
        raise InvalidSpecError(f"range must lie in (5, 50] m, got {range_}")
    if not 0.0 <= dropout < 1.0:
        raise InvalidSpecError(f"dropout must lie in [0, 1), got {dropout}")
    rng = _rng(seed)
    half = track.lane_width / 2
    reach = range_ + 2.0 * half + 5.0
    s = np.arange(truth.s - 5.0, min(truth.s + reach, track.length) + 1e-9, point_spacing)
    s = s[(s >= 0.0)]
    sides = []
    for offset in (half, -half):
        pts = world_to_vehicle(track.point(s, offset), truth.pose.position, truth.pose.heading)
        pts = pts[(pts[:, 0] >= 0.0) & (pts[:, 0] <= range_)]
        if detection_noise > 0:
            pts = pts + rng.normal(0.0, detection_noise, pts.shape)
        if dropout > 0:
            pts = pts[rng.random(len(pts)) >= dropout]
        sides.append(pts)
    mask = None
    if raster is not None:
        mask = rasterize_points(raster.blank(range_), np.vstack(sides), raster.disc_radius)
    return Detections(sides[0], sides[1], mask)


def compose_odometry(deltas: Iterable[OdometryDelta], start: VehiclePose) -> VehiclePose:
    """Dead-reckon a pose by chaining frame-to-frame deltas."""
    x, y = start.position
    psi = start.heading
    for d in deltas:
        x += d.dx * np.cos(psi) - d.dy * np.sin(psi)
        y += d.dx * np.sin(psi) + d.dy * np.cos(psi)
        psi += d.dpsi
    return VehiclePose((float(x), float(y)), float(wrap_angle(psi)))
