"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line with the measured numbers.  The lines are
printed in pytest's terminal summary and also when this file is run as a
script (``python tests/test_acceptance.py``).
"""
import filecmp
import math
import time

import numpy as np
import pytest

from conftest import accumulation_rms, blank_grid, lateral_distance, line_points, two_line_mask
from lanekit.evalrun import (LanePipeline, compute_report, execute, run_scenario,
                             scenario_from_dict, synthetic_frames)
from lanekit.perceive import RECOVERED, rasterize_points, wlf_select
from lanekit.pose import (EkfState, ekf_to_relpose, measurement, measurement_jacobian,
                          rel_pose, solve_foot)
from lanekit.curvilin import CurveOrigin, PolyModel, eval_poly
from lanekit.rlsfit import basis, rls_init, rls_update

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[n]


def chicane(style: str) -> dict:
    d = {
        "seed": 1,
        "track": {"lane_width": 10, "segments": [
            {"kind": "straight", "length": 50},
            {"kind": "arc", "length": 30, "curvature": 0.05},
            {"kind": "arc", "length": 30, "curvature": -0.05},
            {"kind": "straight", "length": 80}]},
        "vehicle": {"style": style, "speed": 5, "n_frames": 300},
        "noise": {"detection": 0.05, "odometry": 0.01, "dropout": 0.2},
        "perception": {"range": 20},
    }
    if style == "racing":
        d["vehicle"]["style_params"] = {"transition": 60}
    return d


# 1 ------------------------------------------------------------------------

def test_rls_batch_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    w_true = rng.normal(0, [1e-4, 1e-3, 1e-2, 0.5])
    s = rng.uniform(0, 30, 500)
    theta = np.polyval(w_true, s) + rng.normal(0, 0.01, s.size)
    st = rls_init(1.0, 1e8)
    for chunk in np.array_split(np.arange(s.size), 50):
        st = rls_update(st, np.column_stack([s[chunk], theta[chunk]]))
    dt = time.perf_counter() - t0
    w_batch = np.linalg.lstsq(basis(s), theta, rcond=None)[0]
    rel = np.linalg.norm(st.w - w_batch) / np.linalg.norm(w_batch)
    record(1, rel < 1e-6 and dt < 1.0, f"relative error {rel:.2e} (< 1e-6), {dt:.3f} s (< 1 s)")


# 2 ------------------------------------------------------------------------

def test_noiseless_circle():
    t0 = time.perf_counter()
    sc = scenario_from_dict({
        "seed": 0,
        "track": {"lane_width": 4, "segments": [{"kind": "arc", "length": 300,
                                                 "curvature": 0.02}]},
        "vehicle": {"style": "centered", "speed": 10, "frame_rate": 10, "n_frames": 200},
        "perception": {"mode": "points"},
    })
    pipe = LanePipeline(sc)
    slopes, th_err, d_err, avail = [], [], [], 0
    for truth, odo, det in synthetic_frames(sc):
        e = pipe.step(truth.frame, odo, points=(det.left_points, det.right_points))
        model = pipe.center.model
        s = np.linspace(model.domain[0], model.domain[1], 50)
        slopes.append(np.polyfit(s, eval_poly(model, s), 1)[0])
        if e.available:
            avail += 1
            th_err.append(abs(math.degrees(e.theta_est - truth.theta_true)))
            d_err.append(abs(e.delta_est - truth.delta_true))
    dt = time.perf_counter() - t0
    slope_dev = max(abs(v - 0.02) for v in slopes)
    ok = (slope_dev <= 2e-4 and avail == 200 and max(th_err) < 0.1 and max(d_err) < 0.02
          and dt < 10.0)
    record(2, ok, f"max slope deviation {slope_dev:.2e} (<= 2e-4), max theta error "
                  f"{max(th_err):.4f} deg (< 0.1), max delta error {max(d_err):.4f} m (< 0.02), "
                  f"{avail}/200 frames, {dt:.1f} s (< 10 s)")


# 3 ------------------------------------------------------------------------

def test_chicane_three_styles():
    t0 = time.perf_counter()
    lines, ok = [], True
    for style in ("centered", "oscillating", "racing"):
        r = compute_report(*run_scenario(scenario_from_dict(chicane(style))))
        need_avail = 99.0 if style == "centered" else 95.0
        good = r.mae_theta <= 4.0 and r.mae_delta <= 1.0 and r.avail_pct >= need_avail
        ok &= good
        lines.append(f"{style} [{r.table_row()}]")
    dt = time.perf_counter() - t0
    ok &= dt < 60.0
    record(3, ok, "; ".join(lines) + f" (MAE_theta <= 4 deg, MAE_delta <= 1.0 m, avail >= 99/95 %)"
                  f", {dt:.1f} s (< 60 s)")


# 4 ------------------------------------------------------------------------

def test_jacobian_against_central_differences():
    rng = np.random.default_rng(44)
    worst = 0.0
    for _ in range(20):
        x = np.array([rng.uniform(-1.0, 1.0), rng.uniform(-0.95, 0.95), rng.uniform(2.0, 15.0)])
        h = 1e-6
        num = np.column_stack([(measurement(x + h * e) - measurement(x - h * e)) / (2 * h)
                               for e in np.eye(3)])
        worst = max(worst, float(np.max(np.abs(measurement_jacobian(x) - num))))
    record(4, worst < 1e-6, f"max element error {worst:.2e} over 20 states (< 1e-6)")


# 5 ------------------------------------------------------------------------

def test_state_geometry_sign_consistency():
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(100):
        theta, rho, w = rng.uniform(-1.2, 1.2), rng.uniform(-0.95, 0.95), rng.uniform(2, 15)
        kappa = rng.uniform(-0.02, 0.02)
        z = measurement((theta, rho, w))
        foot = 0.5 * (z[:2] + z[2:])
        model = PolyModel((0, 0, kappa, theta), (-15.0, 15.0))
        got = rel_pose(solve_foot(model, CurveOrigin(tuple(foot)), (0.0, 0.0)))
        want = ekf_to_relpose(EkfState(theta, rho, w, np.eye(3)))
        worst = max(worst, abs(got.theta - want.theta), abs(got.delta - want.delta))
    record(5, worst < 1e-6, f"max deviation {worst:.2e} over 100 states (< 1e-6)")


# 6 ------------------------------------------------------------------------

def test_line_following_purity_and_recall():
    cross = 0
    for seed in range(100):
        grid, gen = two_line_mask(1000 + seed)
        res = wlf_select(grid)
        for side, other in (("left", "right"), ("right", "left")):
            cells = grid.cell_centers(*getattr(res, side).cells.T)
            if len(cells):
                cross += int(np.sum(lateral_distance(cells, gen[side])
                                    >= lateral_distance(cells, gen[other])))
    rng = np.random.default_rng(66)
    recalls = []
    for _ in range(20):
        y0, slope, curv = rng.uniform(1.6, 2.2), rng.uniform(-0.03, 0.03), rng.uniform(-1e-3, 1e-3)
        starts = np.arange(rng.uniform(2.0, 4.0), 28.0, 5.0)
        gaps = [(a, a + 2.0) for a in starts]
        dashed = rasterize_points(blank_grid(), line_points(y0, slope, curv, gaps=gaps), 0.1)
        both = rasterize_points(dashed, line_points(-y0, slope, curv), 0.1)
        prior = {"left": line_points(y0, slope, curv, step=0.5)}
        res = wlf_select(both, prior=prior)
        truth = set(map(tuple, np.argwhere(dashed.values > 0)))
        got = set(map(tuple, res.left.cells))
        recalls.append(len(truth & got) / len(truth))
        assert res.left.status == RECOVERED
    rec = min(recalls)
    record(6, cross == 0 and rec >= 0.95,
           f"{cross} cross-assigned cells on 100 masks (== 0), dashed recall min {rec:.3f} "
           f"mean {np.mean(recalls):.3f} (>= 0.95)")


# 7 ------------------------------------------------------------------------

def test_accumulation_benefit():
    wins, pairs = 0, []
    for seed in range(20):
        a = accumulation_rms(seed, True, frames=50)
        b = accumulation_rms(seed, False, frames=50)
        wins += a < b
        pairs.append((a, b))
    acc, single = np.mean(pairs, axis=0)
    record(7, wins >= 19, f"accumulated fit better in {wins}/20 seeds (>= 19); mean RMS "
                          f"{acc:.3f} m vs {single:.3f} m")


# 8 ------------------------------------------------------------------------

def test_bit_identical_reruns(tmp_path):
    d = chicane("oscillating")
    d["vehicle"]["n_frames"] = 80
    sc = scenario_from_dict(d)
    execute(sc, tmp_path / "a")
    execute(sc, tmp_path / "b")
    same = filecmp.cmp(tmp_path / "a" / "estimates.csv", tmp_path / "b" / "estimates.csv",
                       shallow=False)
    record(8, same, "estimates.csv identical across two runs" if same else "files differ")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
