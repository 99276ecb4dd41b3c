"""Recursive least squares with exponential forgetting on the cubic heading basis.

For each frame of observations ``(s_i, theta_i)`` and each point ``i``::

    mu~  = mu if i == 1 else 1
    e    = theta_i - w . phi(s_i)
    R    = (R - R phi phi' R / (mu~ (1 + phi' R phi / mu~))) / mu~
    w    = w + e R phi

The forgetting factor is applied once per frame, so all points of a frame
carry the same weight and a frame's weight decays geometrically with its
age.  The measurement-noise covariance of the observations never enters the
recursion and is not stored.

Numerics: ``R`` is propagated as a square-root factor ``R = S S'`` (Potter
form of the same recursion), with the regressor evaluated on ``s / 10`` so
the cubic column does not swamp the constant one.  Both are exact
reformulations; :func:`rls_update_literal` keeps the plain covariance form
for cross-checking.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .curvilin import PolyModel, shift_matrix
from .errors import EmptyFrameError, InvalidMuError, InvalidScaleError

log = logging.getLogger(__name__)

DEFAULT_MU = 0.95
DEFAULT_PRIOR_SCALE = 1e6
_MIN_DENOM = 1e-12
_ARC_SCALE = 10.0
_D = np.array([_ARC_SCALE**3, _ARC_SCALE**2, _ARC_SCALE, 1.0])


@dataclass(frozen=True)
class RlsState:
    """Coefficients ``w``, inverse information matrix ``R`` and forgetting ``mu``.

    ``sqrt_R`` is a factor with ``R = sqrt_R @ sqrt_R.T``; when omitted it is
    obtained from ``R`` by Cholesky decomposition.
    """

    w: np.ndarray
    R: np.ndarray
    mu: float
    sqrt_R: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(4)
        if self.sqrt_R is None:
            R = np.array(self.R, dtype=float).reshape(4, 4)
            S = np.linalg.cholesky(0.5 * (R + R.T))
        else:
            S = np.array(self.sqrt_R, dtype=float).reshape(4, 4)
        R = S @ S.T
        R = 0.5 * (R + R.T)
        for a in (w, R, S):
            a.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "sqrt_R", S)
        object.__setattr__(self, "mu", float(self.mu))


@dataclass(frozen=True)
class Observation:
    s: float
    theta: float


def basis(s) -> np.ndarray:
    """Regressor rows ``(s^3, s^2, s, 1)``."""
    s = np.asarray(s, dtype=float)
    return np.stack([s**3, s**2, s, np.ones_like(s)], axis=-1)


def rls_init(mu: float = DEFAULT_MU, prior_scale: float = DEFAULT_PRIOR_SCALE) -> RlsState:
    if not (0.0 < mu <= 1.0):
        raise InvalidMuError(f"forgetting factor must lie in (0, 1], got {mu}")
    if not prior_scale > 0.0:
        raise InvalidScaleError(f"prior scale must be positive, got {prior_scale}")
    S = np.sqrt(prior_scale) * np.eye(4)
    return RlsState(np.zeros(4), S @ S.T, mu, sqrt_R=S)


def _as_frame(frame) -> np.ndarray:
    if isinstance(frame, np.ndarray):
        return frame.astype(float).reshape(-1, 2)
    rows = [(o.s, o.theta) if isinstance(o, Observation) else tuple(o) for o in frame]
    return np.array(rows, dtype=float).reshape(-1, 2)


def rls_update(state: RlsState, frame) -> RlsState:
    """Fold one frame of ``(s, theta)`` observations into the estimate.

    ``frame`` is a sequence of :class:`Observation` or ``(s, theta)`` pairs,
    or an ``(n, 2)`` array.  Points are processed in the given order.  A
    frame that would produce non-finite values is rejected with a warning
    and the input state is returned unchanged.
    """
    obs = _as_frame(frame)
    if len(obs) == 0:
        raise EmptyFrameError("RLS update needs at least one observation")
    # work on u = s / L: coefficients scale by D, the factor by 1 / D
    w = state.w * _D
    S = state.sqrt_R * _D[:, None]
    Phi = basis(obs[:, 0] / _ARC_SCALE)
    for i, (phi, theta) in enumerate(zip(Phi, obs[:, 1])):
        mu_t = state.mu if i == 0 else 1.0
        f = S.T @ phi
        ff = f @ f
        denom = max(mu_t + ff, _MIN_DENOM)
        gain = (S @ f) / denom
        beta = 1.0 / (np.sqrt(denom) * (np.sqrt(denom) + np.sqrt(mu_t)))
        S = (S - beta * np.outer(S @ f, f)) / np.sqrt(mu_t)
        w = w + (theta - w @ phi) * gain
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(S))):
        log.warning("RLS update produced non-finite values; frame rejected")
        return state
    S = S / _D[:, None]
    return RlsState(w / _D, S @ S.T, state.mu, sqrt_R=S)


def rls_update_literal(state: RlsState, frame) -> RlsState:
    """Plain covariance-form recursion, without factorization or scaling."""
    obs = _as_frame(frame)
    if len(obs) == 0:
        raise EmptyFrameError("RLS update needs at least one observation")
    w = state.w.copy()
    R = state.R.copy()
    for i, (s, theta) in enumerate(obs):
        mu_t = state.mu if i == 0 else 1.0
        phi = basis(s)
        Rphi = R @ phi
        r_tilde = 1.0 / max(1.0 + phi @ Rphi / mu_t, _MIN_DENOM)
        R = (R - np.outer(Rphi, Rphi) * r_tilde / mu_t) / mu_t
        R = 0.5 * (R + R.T)
        e = theta - w @ phi
        w = w + e * (R @ phi)
    return RlsState(w, R, state.mu)


def rls_model(state: RlsState, domain=(0.0, 0.0)) -> PolyModel:
    return PolyModel(state.w, domain)


def rls_shift(state: RlsState, a: float, dtheta: float = 0.0) -> RlsState:
    """Re-express the tracked polynomial in a moved frame.

    The new parameterization is ``theta'(s) = theta(s + a) + dtheta``: the
    arc-length origin moves forward by ``a`` and all headings rotate by
    ``dtheta``.  The coefficient map is affine, so the factor of ``R``
    transforms with the same matrix.
    """
    T = shift_matrix(a)
    w = T @ state.w
    w[3] += dtheta
    S = T @ state.sqrt_R
    return RlsState(w, S @ S.T, state.mu, sqrt_R=S)
