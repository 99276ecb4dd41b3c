"""Lane line fitting, centerline reconstruction and relative pose estimation.

Lines are represented in curvilinear form: heading as a cubic in arc length,
tracked frame to frame by recursive least squares.  The centerline is rebuilt
from both lateral lines and an EKF turns it into the vehicle's heading and
lateral offset relative to the lane.
"""
from .curvilin import (ArcCurve, CartesianPoint, CurveOrigin, CurviPoint, PolyModel,
                       eval_poly, fit_spline, reconstruct_cartesian, shift_matrix,
                       to_curvilinear, wrap_angle)
from .errors import ConfigError, LanekitError
from .evalrun import (EvalReport, LanePipeline, Scenario, compute_report, execute,
                      load_scenario, run_scenario, scenario_from_dict)
from .pose import (EkfState, FootSolution, LanePointPair, RelPose, ekf_init, ekf_predict,
                   ekf_to_relpose, ekf_update, measure_lane_points, measurement,
                   measurement_jacobian, rel_pose, solve_foot)
from .rlsfit import RlsState, rls_init, rls_model, rls_shift, rls_update
from .synthtrack import Segment, Track, TrackSpec, build_track, simulate_trajectory

__version__ = "0.1.0"

__all__ = [
    "ArcCurve", "CartesianPoint", "CurveOrigin", "CurviPoint", "PolyModel", "eval_poly",
    "fit_spline", "reconstruct_cartesian", "shift_matrix", "to_curvilinear", "wrap_angle",
    "ConfigError", "LanekitError",
    "EvalReport", "LanePipeline", "Scenario", "compute_report", "execute", "load_scenario",
    "run_scenario", "scenario_from_dict",
    "EkfState", "FootSolution", "LanePointPair", "RelPose", "ekf_init", "ekf_predict",
    "ekf_to_relpose", "ekf_update", "measure_lane_points", "measurement",
    "measurement_jacobian", "rel_pose", "solve_foot",
    "RlsState", "rls_init", "rls_model", "rls_shift", "rls_update",
    "Segment", "Track", "TrackSpec", "build_track", "simulate_trajectory",
]
