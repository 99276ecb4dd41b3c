"""Scenario runner and error metrics.

A scenario file (YAML) describes a synthetic track, how the vehicle drives
it, the noise applied to detections and odometry, and optional module
parameters.  :func:`run_scenario` drives the whole estimation chain frame by
frame and :func:`compute_report` scores the result against ground truth:

* ``mae_theta``: mean absolute heading error over available frames, degrees;
* ``mae_delta``: mean absolute lateral error over available frames, metres;
* ``avail_pct``: share of frames with an estimate, percent.

A minimal scenario::

    seed: 3
    track:
      lane_width: 4
      segments:
        - {kind: arc, length: 400, curvature: 0.02}
    vehicle: {style: centered, speed: 10, frame_rate: 10, n_frames: 200}
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from .centerline import (KAPPA_MIN, LineView, new_centerline, propagate_centerline,
                         update_centerline)
from .errors import (BothInvalidError, ConfigError, EmptyGridError, LanekitError,
                     LengthMismatchError, NoRootError, TooFewPointsError)
from .lanetrack import (TrackConfig, ingest_and_fit, model_polyline, new_track, propagate,
                        prune)
from .perceive import (LOST, TRACKED, CameraModel, MaskGrid, WlfConfig, clean_mask,
                       frame_path, ipm_project, list_frames, read_pgm, wlf_select,
                       write_pgm)
from .pose import (DEFAULT_P0, DEFAULT_Q, DEFAULT_R, ekf_init, ekf_predict,
                   ekf_to_relpose, ekf_update, measure_lane_points, rel_pose, solve_foot)
from .synthtrack import (STYLES, FrameTruth, OdometryDelta, RasterSpec, Track, TrackSpec,
                         render_detections, simulate_trajectory)

ESTIMATE_COLUMNS = ("frame", "available", "theta_est", "delta_est", "theta_direct",
                    "delta_direct", "rho", "w_lane", "left_status", "right_status")
TRUTH_COLUMNS = ("frame", "x", "y", "heading", "s", "theta_true", "delta_true",
                 "odo_dx", "odo_dy", "odo_dpsi")


@dataclass(frozen=True)
class PoseParams:
    q: tuple = DEFAULT_Q
    r: float = DEFAULT_R
    p0: tuple = DEFAULT_P0
    initial_width: float | None = None
    foot_margin: float = 2.0


@dataclass(frozen=True)
class MaskSource:
    """Pre-rendered masks to ingest instead of synthesizing detections."""

    directory: Path
    odometry: Path
    homography: np.ndarray | None = None


@dataclass(frozen=True)
class Scenario:
    track: TrackSpec
    style: str = "centered"
    style_params: dict = field(default_factory=dict)
    speed: float = 10.0
    frame_rate: float = 10.0
    n_frames: int | None = None
    s_start: float = 0.0
    seed: int = 0
    detection_noise: float = 0.0
    odometry_noise: float = 0.0
    dropout: float = 0.0
    range_: float = 30.0
    raster: RasterSpec | None = field(default_factory=RasterSpec)
    threshold: int = 128
    open_radius: int = 1
    wlf: WlfConfig = field(default_factory=WlfConfig)
    tracking: TrackConfig = field(default_factory=TrackConfig)
    kappa_min: float = KAPPA_MIN
    paper_literal_ratio: bool = False
    pose: PoseParams = field(default_factory=PoseParams)
    masks: MaskSource | None = None
    name: str = "scenario"


# -- scenario files ---------------------------------------------------------

def _take(d: dict, section: str, allowed: Iterable[str]) -> dict:
    if d is None:
        return {}
    if not isinstance(d, dict):
        raise ConfigError(f"{section}: expected a mapping")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")
    return d


def _names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def scenario_from_dict(d: dict, base_dir: Path | str = ".") -> Scenario:
    """Build a :class:`Scenario` from parsed YAML; raises :class:`ConfigError`."""
    base_dir = Path(base_dir)
    d = _take(d, "scenario", ("name", "seed", "track", "vehicle", "noise", "perception",
                              "tracking", "centerline", "pose"))
    if "track" not in d:
        raise ConfigError("scenario: missing 'track'")
    try:
        tr = _take(d["track"], "track", ("lane_width", "segments"))
        segs = tr.get("segments") or []
        spec = TrackSpec(tuple(_take(s, "segment", ("kind", "length", "curvature"))
                               for s in segs), tr.get("lane_width", 4.0)).validate()
        veh = _take(d.get("vehicle"), "vehicle",
                    ("style", "speed", "frame_rate", "n_frames", "s_start", "style_params"))
        noise = _take(d.get("noise"), "noise", ("detection", "odometry", "dropout"))
        per = _take(d.get("perception"), "perception",
                    ("mode", "range", "resolution", "lateral_half_width", "disc_radius",
                     "threshold", "open_radius", "wlf", "masks"))
        trk = _take(d.get("tracking"), "tracking", _names(TrackConfig))
        cen = _take(d.get("centerline"), "centerline", ("kappa_min", "paper_literal_ratio"))
        pse = _take(d.get("pose"), "pose", _names(PoseParams))
        wlf = _take(per.get("wlf"), "perception.wlf", _names(WlfConfig))

        style = veh.get("style", "centered")
        if style not in STYLES:
            raise ConfigError(f"vehicle: unknown style {style!r}")
        mode = per.get("mode", "raster")
        if mode not in ("raster", "points"):
            raise ConfigError(f"perception: mode must be 'raster' or 'points', got {mode!r}")
        raster = None
        if mode == "raster":
            raster = RasterSpec(float(per.get("resolution", 0.05)),
                                float(per.get("lateral_half_width", 15.0)),
                                float(per.get("disc_radius", 0.1)))
        masks = None
        if per.get("masks") is not None:
            m = _take(per["masks"], "perception.masks", ("dir", "odometry", "homography"))
            if "dir" not in m:
                raise ConfigError("perception.masks: missing 'dir'")
            mdir = base_dir / m["dir"]
            H = None if m.get("homography") is None else np.asarray(m["homography"], float)
            if H is not None:
                CameraModel(H)
            masks = MaskSource(mdir, base_dir / m.get("odometry", Path(m["dir"]) / "truth.csv"), H)
            if raster is None:
                raise ConfigError("perception.masks requires raster mode")
        n_frames = veh.get("n_frames")
        sc = Scenario(
            track=spec, style=style, style_params=dict(veh.get("style_params") or {}),
            speed=float(veh.get("speed", 10.0)), frame_rate=float(veh.get("frame_rate", 10.0)),
            n_frames=None if n_frames is None else int(n_frames),
            s_start=float(veh.get("s_start", 0.0)), seed=int(d.get("seed", 0)),
            detection_noise=float(noise.get("detection", 0.0)),
            odometry_noise=float(noise.get("odometry", 0.0)),
            dropout=float(noise.get("dropout", 0.0)), range_=float(per.get("range", 30.0)),
            raster=raster, threshold=int(per.get("threshold", 128)),
            open_radius=int(per.get("open_radius", 1)), wlf=WlfConfig(**wlf),
            tracking=TrackConfig(**trk), kappa_min=float(cen.get("kappa_min", KAPPA_MIN)),
            paper_literal_ratio=bool(cen.get("paper_literal_ratio", False)),
            pose=PoseParams(**{k: tuple(v) if isinstance(v, list) else v for k, v in pse.items()}),
            masks=masks, name=str(d.get("name", "scenario")))
    except ConfigError:
        raise
    except (LanekitError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return validate_scenario(sc)


def validate_scenario(sc: Scenario) -> Scenario:
    if not 1.0 <= sc.speed <= 20.0:
        raise ConfigError(f"speed must lie in [1, 20] m/s, got {sc.speed}")
    if not 1.0 <= sc.frame_rate <= 100.0:
        raise ConfigError(f"frame rate must lie in [1, 100] Hz, got {sc.frame_rate}")
    if sc.n_frames is not None and sc.n_frames < 1:
        raise ConfigError("n_frames must be positive")
    if min(sc.detection_noise, sc.odometry_noise) < 0:
        raise ConfigError("noise scales must be non-negative")
    if not 0.0 <= sc.dropout < 1.0:
        raise ConfigError("dropout must lie in [0, 1)")
    if not 5.0 < sc.range_ <= 50.0:
        raise ConfigError("perception range must lie in (5, 50] m")
    if not 1 <= sc.threshold <= 254:
        raise ConfigError("threshold must lie in [1, 254]")
    if not 5.0 <= sc.tracking.prune_behind <= 10.0:
        raise ConfigError("tracking.prune_behind must lie in [5, 10] m")
    tr = sc.tracking
    if not 0.0 < tr.mu <= 1.0:
        raise ConfigError(f"tracking.mu must lie in (0, 1], got {tr.mu}")
    if not tr.prior_scale > 0.0:
        raise ConfigError("tracking.prior_scale must be positive")
    if tr.max_lost < 0:
        raise ConfigError("tracking.max_lost must be non-negative")
    if min(tr.min_point_spacing, tr.spline_spacing) <= 0.0:
        raise ConfigError("tracking point spacings must be positive")
    if not 0.0 < tr.buffer_decay <= 1.0:
        raise ConfigError("tracking.buffer_decay must lie in (0, 1]")
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    text = path.read_text()
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    return scenario_from_dict(d, path.parent)


# -- pipeline ---------------------------------------------------------------

@dataclass(frozen=True)
class FrameEstimate:
    frame: int
    available: bool
    theta_est: float | None = None
    delta_est: float | None = None
    left_status: str = LOST
    right_status: str = LOST
    theta_direct: float | None = None
    delta_direct: float | None = None
    rho: float | None = None
    w_lane: float | None = None


class LanePipeline:
    """Stateful per-frame driver: perception, line tracking, centerline, pose."""

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        cfg = scenario.tracking
        self.left = new_track(cfg)
        self.right = new_track(cfg)
        self.center = new_centerline(cfg, kappa_min=scenario.kappa_min,
                                     paper_literal_ratio=scenario.paper_literal_ratio)
        self.ekf = None
        self.last_measured = None

    def priors(self) -> dict:
        out = {}
        for side, track in (("left", self.left), ("right", self.right)):
            if track.initialized:
                out[side] = model_polyline(track, 0.5, extend=self.sc.range_ / 2)
        return out

    def perceive(self, grid: MaskGrid):
        grid = clean_mask(grid, self.sc.threshold, self.sc.open_radius)
        try:
            res = wlf_select(grid, self.sc.wlf, self.priors())
        except EmptyGridError as exc:
            res = exc.selection
        return (res.left_points, res.left.status), (res.right_points, res.right.status)

    def step(self, frame: int, odo: OdometryDelta, grid: MaskGrid | None = None,
             points=None) -> FrameEstimate:
        """Process one frame given either a BEV mask or per-side point arrays."""
        self.left = prune(propagate(self.left, odo))
        self.right = prune(propagate(self.right, odo))
        self.center = propagate_centerline(self.center, odo)

        if grid is not None:
            (pl, sl), (pr, sr) = self.perceive(grid)
        else:
            pl, pr = points
            sl = TRACKED if len(pl) else LOST
            sr = TRACKED if len(pr) else LOST

        self.left, ml = ingest_and_fit(self.left, pl if sl != LOST else [], sl)
        self.right, mr = ingest_and_fit(self.right, pr if sr != LOST else [], sr)
        lv = LineView(ml, self.left.origin) if ml is not None else None
        rv = LineView(mr, self.right.origin) if mr is not None else None

        width = self.ekf.w_lane if self.ekf is not None else (self.sc.pose.initial_width or 4.0)
        if lv is None and rv is None:
            if not (self.left.initialized or self.right.initialized):
                self.center = new_centerline(self.sc.tracking, kappa_min=self.sc.kappa_min,
                                             paper_literal_ratio=self.sc.paper_literal_ratio)
        else:
            try:
                self.center, _ = update_centerline(self.center, lv, rv, width)
            except TooFewPointsError:
                pass

        foot = None
        if self.center.model is not None:
            try:
                foot = solve_foot(self.center.model, self.center.origin, (0.0, 0.0),
                                  margin=self.sc.pose.foot_margin)
            except NoRootError:
                foot = None

        fresh_l = lv if sl != LOST and len(pl) else None
        fresh_r = rv if sr != LOST and len(pr) else None
        z = None
        if foot is not None and (fresh_l or fresh_r):
            try:
                z = measure_lane_points(
                    None if fresh_l is None else (fresh_l.model, fresh_l.origin),
                    None if fresh_r is None else (fresh_r.model, fresh_r.origin),
                    foot, (0.0, 0.0), width, self.sc.pose.foot_margin)
            except BothInvalidError:
                z = None
        if self.ekf is None and z is not None:
            sep = None
            if z.left_valid and z.right_valid:
                sep = float(np.hypot(z.P_L[0] - z.P_R[0], z.P_L[1] - z.P_R[1]))
            p = self.sc.pose
            self.ekf = ekf_init(p.initial_width or sep, P0=p.p0, Q=p.q, R=p.r)
        if self.ekf is not None:
            self.ekf = ekf_predict(self.ekf)
            if z is not None:
                self.ekf = ekf_update(self.ekf, z)
                self.last_measured = frame

        available = (foot is not None and self.last_measured is not None
                     and frame - self.last_measured <= self.sc.tracking.max_lost)
        status = (self.left.status if ml is not None else LOST,
                  self.right.status if mr is not None else LOST)
        if not available:
            return FrameEstimate(frame, False, left_status=status[0], right_status=status[1])
        est = ekf_to_relpose(self.ekf)
        direct = rel_pose(foot)
        return FrameEstimate(frame, True, float(est.theta), float(est.delta), status[0],
                             status[1], direct.theta, direct.delta, self.ekf.rho,
                             self.ekf.w_lane)


def _frame_rng(seed: int, frame: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), 1, int(frame)])


def synthesize(sc: Scenario) -> tuple[Track, list[tuple[FrameTruth, OdometryDelta]]]:
    track = Track(sc.track)
    traj = simulate_trajectory(track, sc.style, sc.speed, sc.frame_rate, sc.odometry_noise,
                               sc.n_frames, sc.s_start, np.random.default_rng([sc.seed, 0]),
                               **sc.style_params)
    return track, traj


def synthetic_frames(sc: Scenario):
    """Yield ``(truth, odometry, detections)`` for every frame of a scenario."""
    track, traj = synthesize(sc)
    for truth, odo in traj:
        det = render_detections(truth, track, sc.detection_noise, sc.dropout, sc.range_,
                                _frame_rng(sc.seed, truth.frame), raster=sc.raster)
        yield truth, odo, det


def run_scenario(sc: Scenario) -> tuple[list[FrameEstimate], list]:
    """Run the full pipeline; returns per-frame estimates and truth records.

    Truth records are :class:`FrameTruth` for synthetic runs; for ingested
    masks they are rows of the accompanying CSV (or ``None`` when absent).
    """
    pipe = LanePipeline(sc)
    estimates, truths = [], []
    if sc.masks is not None:
        for frame, odo, grid, truth in _ingested_frames(sc):
            estimates.append(pipe.step(frame, odo, grid=grid))
            truths.append(truth)
        return estimates, truths
    for truth, odo, det in synthetic_frames(sc):
        if det.mask is not None:
            est = pipe.step(truth.frame, odo, grid=det.mask)
        else:
            est = pipe.step(truth.frame, odo, points=(det.left_points, det.right_points))
        estimates.append(est)
        truths.append(truth)
    return estimates, truths


def _ingested_frames(sc: Scenario):
    rows = read_truth_csv(sc.masks.odometry)
    paths = list_frames(sc.masks.directory)
    if sc.n_frames is not None:
        paths = paths[:sc.n_frames]
    if len(rows) < len(paths):
        raise ConfigError(f"{sc.masks.odometry}: {len(rows)} odometry rows for {len(paths)} masks")
    target = sc.raster.blank(sc.range_)
    camera = None if sc.masks.homography is None else CameraModel(sc.masks.homography)
    for k, path in enumerate(paths):
        img = read_pgm(path)
        if camera is not None:
            grid = ipm_project(img, camera, target)
        else:
            if img.shape != target.values.shape:
                raise ConfigError(f"{path}: mask shape {img.shape} does not match the "
                                  f"configured grid {target.values.shape}")
            grid = target.with_values(img)
        row = rows[k]
        odo = OdometryDelta(row["odo_dx"], row["odo_dy"], row["odo_dpsi"])
        yield k, odo, grid, row


# -- metrics ----------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    mae_theta: float
    mae_delta: float
    avail_pct: float
    n_frames: int
    frames: tuple = ()
    theta_errors: tuple = ()
    delta_errors: tuple = ()

    def table_row(self) -> str:
        return f"{self.mae_theta:.3f}, {self.mae_delta:.3f}, {self.avail_pct:.2f}"

    def to_dict(self) -> dict:
        return {"mae_theta_deg": self.mae_theta, "mae_delta_m": self.mae_delta,
                "avail_pct": self.avail_pct, "n_frames": self.n_frames,
                "table_row": self.table_row()}


def _truth_pair(t):
    if isinstance(t, FrameTruth):
        return t.theta_true, t.delta_true
    if isinstance(t, dict):
        return t["theta_true"], t["delta_true"]
    return t[0], t[1]


def compute_report(estimates: Sequence[FrameEstimate], truths: Sequence) -> EvalReport:
    """Mean absolute errors over available frames and the availability share."""
    if len(estimates) != len(truths):
        raise LengthMismatchError(f"{len(estimates)} estimates vs {len(truths)} truth records")
    frames, eth, ed = [], [], []
    for est, tr in zip(estimates, truths):
        if not est.available:
            continue
        th_t, d_t = _truth_pair(tr)
        err = (est.theta_est - th_t + math.pi) % (2 * math.pi) - math.pi
        frames.append(est.frame)
        eth.append(abs(math.degrees(err)))
        ed.append(abs(est.delta_est - d_t))
    n = len(estimates)
    mae_t = float(np.mean(eth)) if eth else float("nan")
    mae_d = float(np.mean(ed)) if ed else float("nan")
    avail = 100.0 * len(frames) / n if n else 0.0
    return EvalReport(mae_t, mae_d, avail, n, tuple(frames), tuple(eth), tuple(ed))


# -- files ------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_estimates_csv(path, estimates: Sequence[FrameEstimate]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ESTIMATE_COLUMNS)
        for e in estimates:
            w.writerow([_fmt(getattr(e, c)) for c in ESTIMATE_COLUMNS])


def truth_row(truth: FrameTruth, odo: OdometryDelta) -> dict:
    return {"frame": truth.frame, "x": truth.pose.position[0], "y": truth.pose.position[1],
            "heading": truth.pose.heading, "s": truth.s, "theta_true": truth.theta_true,
            "delta_true": truth.delta_true, "odo_dx": odo.dx, "odo_dy": odo.dy,
            "odo_dpsi": odo.dpsi}


def write_truth_csv(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_COLUMNS)
        for r in rows:
            w.writerow([_fmt(float(r[c]) if c != "frame" else int(r[c])) for c in TRUTH_COLUMNS])


def _parse(v: str):
    return None if v == "" else float(v)


def read_truth_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        try:
            d = {k: _parse(v) for k, v in r.items() if k in TRUTH_COLUMNS}
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        missing = {"odo_dx", "odo_dy", "odo_dpsi"} - set(d)
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        d["frame"] = int(d.get("frame") or len(out))
        out.append(d)
    return out


def read_estimates_csv(path) -> list[FrameEstimate]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append(FrameEstimate(
            int(r["frame"]), r["available"] == "1", _parse(r["theta_est"]),
            _parse(r["delta_est"]), r["left_status"], r["right_status"],
            _parse(r["theta_direct"]), _parse(r["delta_direct"]), _parse(r["rho"]),
            _parse(r["w_lane"])))
    return out


def write_run(out_dir, estimates, truth_rows, report: EvalReport | None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_estimates_csv(out / "estimates.csv", estimates)
    write_truth_csv(out / "truth.csv", truth_rows)
    if report is not None:
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return out


def execute(sc: Scenario, out_dir) -> EvalReport | None:
    """Run a scenario and write ``estimates.csv``, ``truth.csv`` and ``report.json``."""
    if sc.masks is not None:
        estimates, rows = run_scenario(sc)
        has_truth = rows and all(r.get("theta_true") is not None for r in rows)
        report = compute_report(estimates, rows) if has_truth else None
        write_run(out_dir, estimates, rows, report)
        return report
    pipe = LanePipeline(sc)
    estimates, rows, truths = [], [], []
    for truth, odo, det in synthetic_frames(sc):
        if det.mask is not None:
            estimates.append(pipe.step(truth.frame, odo, grid=det.mask))
        else:
            estimates.append(pipe.step(truth.frame, odo, points=(det.left_points,
                                                                 det.right_points)))
        truths.append(truth)
        rows.append(truth_row(truth, odo))
    report = compute_report(estimates, truths)
    write_run(out_dir, estimates, rows, report)
    return report


def evaluate_run(run_dir) -> EvalReport:
    run = Path(run_dir)
    estimates = read_estimates_csv(run / "estimates.csv")
    truths = read_truth_csv(run / "truth.csv")
    report = compute_report(estimates, truths)
    (run / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report


def write_plot_data(run_dir, out_path=None) -> Path:
    """Heading and offset series, estimate against truth, one row per frame."""
    run = Path(run_dir)
    estimates = read_estimates_csv(run / "estimates.csv")
    truths = read_truth_csv(run / "truth.csv")
    if len(estimates) != len(truths):
        raise LengthMismatchError("estimates and truth differ in length")
    out = Path(out_path) if out_path else run / "series.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("frame", "theta_true_deg", "theta_est_deg", "delta_true", "delta_est"))
        for e, t in zip(estimates, truths):
            th = "" if e.theta_est is None else repr(math.degrees(e.theta_est))
            w.writerow((e.frame, repr(math.degrees(t["theta_true"])), th,
                        repr(t["delta_true"]), _fmt(e.delta_est)))
    return out


def generate_masks(sc: Scenario, out_dir) -> Path:
    """Render the scenario's BEV masks as ``frame_%06d.pgm`` plus truth and points."""
    if sc.raster is None:
        sc = replace(sc, raster=RasterSpec())
    out = Path(out_dir)
    (out / "points").mkdir(parents=True, exist_ok=True)
    rows = []
    for truth, odo, det in synthetic_frames(sc):
        write_pgm(frame_path(out, truth.frame), det.mask.values)
        with open(out / "points" / f"frame_{truth.frame:06d}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("side", "x", "y"))
            for side, pts in (("left", det.left_points), ("right", det.right_points)):
                for x, y in pts:
                    w.writerow((side, repr(float(x)), repr(float(y))))
        rows.append(truth_row(truth, odo))
    write_truth_csv(out / "truth.csv", rows)
    return out
