"""Why a line tracker keeps points from earlier frames.

A single frame with half the detections missing gives a shaky line.  Carrying
the previous points forward with odometry fills the holes.  Both trackers
below move their state with the vehicle; only one keeps the old points.
"""
import numpy as np

from lanekit.lanetrack import TrackConfig, fit_rms, ingest_and_fit, new_track, propagate, prune
from lanekit.synthtrack import Segment, Track, TrackSpec, render_detections, simulate_trajectory

track = Track(TrackSpec((Segment("straight", 20), Segment("arc", 150, 0.02),
                         Segment("straight", 100)), 4.0))
traj = simulate_trajectory(track, "centered", speed=10.0, frame_rate=10.0, n_frames=60)

for accumulate in (False, True):
    rng = np.random.default_rng(3)
    line = new_track(TrackConfig(accumulate=accumulate))
    errors = []
    for truth, odo in traj:
        line = prune(propagate(line, odo))
        det = render_detections(truth, track, 0.05, 0.5, 30.0, rng)
        line, model = ingest_and_fit(line, det.left_points)
        if model is None:
            continue
        clean = render_detections(truth, track, 0.0, 0.0, 25.0).left_points
        errors.append(fit_rms(line, clean))
    label = "points carried forward" if accumulate else "current frame only    "
    print(f"{label}: RMS distance to the true line {np.sqrt(np.mean(np.square(errors))):.3f} m,"
          f" {len(line.points)} points in the buffer at the end")
