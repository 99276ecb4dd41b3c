import sys

import numpy as np
import pytest

from lanekit.perceive import MaskGrid, rasterize_points

RES = 0.05


def blank_grid(length=30.0, half_width=6.0, res=RES) -> MaskGrid:
    h = int(round(length / res)) + 1
    w = int(round(2 * half_width / res)) + 1
    return MaskGrid.blank(h, w, res, (0.0, -half_width))


def line_points(y0, slope, curv, x_max=30.0, step=0.02, gaps=()):
    x = np.arange(0.0, x_max, step)
    keep = np.ones_like(x, dtype=bool)
    for a, b in gaps:
        keep &= ~((x >= a) & (x < b))
    x = x[keep]
    return np.column_stack([x, y0 + slope * x + curv * x**2])


def two_line_mask(seed: int, min_sep: float = 2.0):
    """A random pair of gently curved lines, returned with their generators."""
    rng = np.random.default_rng(seed)
    sep = rng.uniform(min_sep, 4.5)
    center = rng.uniform(-0.4, 0.4)
    slope = rng.uniform(-0.04, 0.04)
    curv = rng.uniform(-0.002, 0.002)
    left = line_points(center + sep / 2, slope, curv)
    right = line_points(center - sep / 2, slope, curv)
    grid = rasterize_points(blank_grid(), np.vstack([left, right]), 0.1)
    gen = {"left": (center + sep / 2, slope, curv), "right": (center - sep / 2, slope, curv)}
    return grid, gen


def lateral_distance(points, gen):
    y0, slope, curv = gen
    p = np.asarray(points)
    return np.abs(p[:, 1] - (y0 + slope * p[:, 0] + curv * p[:, 0] ** 2))


@pytest.fixture
def chicane_dict():
    return {
        "seed": 1,
        "track": {"lane_width": 10, "segments": [
            {"kind": "straight", "length": 50},
            {"kind": "arc", "length": 30, "curvature": 0.05},
            {"kind": "arc", "length": 30, "curvature": -0.05},
            {"kind": "straight", "length": 80}]},
        "vehicle": {"style": "centered", "speed": 5, "n_frames": 300},
        "noise": {"detection": 0.05, "odometry": 0.01, "dropout": 0.2},
        "perception": {"range": 20},
    }


def accumulation_rms(seed: int, accumulate: bool, dropout: float = 0.5, frames: int = 60,
                     noise: float = 0.05) -> float:
    """RMS distance of a tracked left line to its ground truth over a drive."""
    from lanekit.lanetrack import TrackConfig, fit_rms, ingest_and_fit, new_track, propagate, prune
    from lanekit.synthtrack import (Segment, Track, TrackSpec, render_detections,
                                    simulate_trajectory)

    track = Track(TrackSpec((Segment("straight", 20), Segment("arc", 150, 0.02),
                             Segment("straight", 100)), 4.0))
    traj = simulate_trajectory(track, "centered", 10.0, 10.0, 0.0, n_frames=frames)
    rng = np.random.default_rng([seed, 7])
    t = new_track(TrackConfig(accumulate=accumulate))
    errs = []
    for truth, odo in traj:
        t = prune(propagate(t, odo))
        det = render_detections(truth, track, noise, dropout, 30.0, rng)
        t, model = ingest_and_fit(t, det.left_points)
        if model is None:
            continue
        clean = render_detections(truth, track, 0.0, 0.0, 25.0).left_points
        errs.append(fit_rms(t, clean))
    return float(np.sqrt(np.mean(np.square(errs))))


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.RESULTS[n])
