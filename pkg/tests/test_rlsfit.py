import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lanekit.curvilin import PolyModel, eval_poly
from lanekit.errors import EmptyFrameError, InvalidMuError, InvalidScaleError
from lanekit.rlsfit import (Observation, RlsState, basis, rls_init, rls_model, rls_shift,
                            rls_update, rls_update_literal)


def batch_lstsq(s, theta):
    """Oracle: ordinary least squares through the normal equations."""
    A = basis(s)
    return np.linalg.solve(A.T @ A, A.T @ theta)


def test_init_definition():
    st_ = rls_init(1.0, 1e6)
    np.testing.assert_array_equal(st_.w, np.zeros(4))
    np.testing.assert_allclose(st_.R, 1e6 * np.eye(4))
    assert st_.mu == 1.0


def test_init_preconditions():
    with pytest.raises(InvalidMuError):
        rls_init(0.0, 1e6)
    with pytest.raises(InvalidMuError):
        rls_init(1.01, 1e6)
    with pytest.raises(InvalidScaleError):
        rls_init(0.9, 0.0)
    assert rls_init(0.98, 1e4).mu == 0.98


def test_constant_heading_converges():
    rng = np.random.default_rng(0)
    s = rng.uniform(0, 30, 200)
    out = rls_update(rls_init(1.0, 1e6), [Observation(a, 0.3) for a in s])
    np.testing.assert_allclose(out.w, [0, 0, 0, 0.3], atol=1e-6)


def test_cubic_recovered_after_three_frames():
    true_w = np.array([0.001, -0.01, 0.1, 0.2])
    s = np.linspace(0, 30, 61)
    frame = np.column_stack([s, np.polyval(true_w, s)])
    st_ = rls_init(1.0, 1e6)
    for _ in range(3):
        st_ = rls_update(st_, frame)
    np.testing.assert_allclose(st_.w, true_w, atol=1e-5)
    m = rls_model(st_, (0.0, 30.0))
    assert m.domain == (0.0, 30.0)
    np.testing.assert_allclose(m.w, true_w, atol=1e-5)


def test_empty_frame_rejected():
    with pytest.raises(EmptyFrameError):
        rls_update(rls_init(), [])


def test_model_projection():
    st_ = RlsState(np.array([0, 0, 0, 0.3]), np.eye(4), 0.9)
    m = rls_model(st_, (0, 30))
    np.testing.assert_array_equal(m.w, [0, 0, 0, 0.3])
    assert m.domain == (0.0, 30.0)
    np.testing.assert_array_equal(rls_model(rls_init()).w, np.zeros(4))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_batch_equivalence_without_forgetting(seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(0, [1e-4, 1e-3, 1e-2, 0.5])
    s = rng.uniform(0, 30, 60)
    theta = np.polyval(w, s) + rng.normal(0, 0.01, s.size)
    st_ = rls_init(1.0, 1e8)
    for chunk in np.array_split(np.arange(s.size), 5):
        st_ = rls_update(st_, np.column_stack([s[chunk], theta[chunk]]))
    ref = batch_lstsq(s, theta)
    assert np.linalg.norm(st_.w - ref) / np.linalg.norm(ref) < 1e-6


def test_forgetting_matches_weighted_least_squares():
    # oracle: frame k of n carries weight mu^(n-1-k)
    rng = np.random.default_rng(5)
    mu = 0.8
    frames = []
    for k in range(6):
        s = rng.uniform(0, 25, 15)
        frames.append(np.column_stack([s, 0.1 * k + 0.02 * s + rng.normal(0, 0.01, 15)]))
    st_ = rls_init(mu, 1e10)
    for f in frames:
        st_ = rls_update(st_, f)
    A = np.vstack([basis(f[:, 0]) for f in frames])
    y = np.concatenate([f[:, 1] for f in frames])
    wts = np.concatenate([np.full(15, mu ** (5 - k)) for k in range(6)])
    ref = np.linalg.solve(A.T @ (wts[:, None] * A), A.T @ (wts * y))
    np.testing.assert_allclose(st_.w, ref, rtol=1e-6, atol=1e-9)


def test_r_stays_symmetric():
    rng = np.random.default_rng(1)
    st_ = rls_init(0.9, 1e6)
    for _ in range(40):
        s = rng.uniform(0, 30, 20)
        st_ = rls_update(st_, np.column_stack([s, rng.normal(0, 0.1, 20)]))
        assert np.max(np.abs(st_.R - st_.R.T)) < 1e-9
        assert np.all(np.linalg.eigvalsh(st_.R) > 0)


def test_forgetting_tracks_regime_change_geometrically():
    mu = 0.9
    s = np.linspace(0, 30, 31)
    st_ = rls_init(mu, 1e6)
    for _ in range(30):
        st_ = rls_update(st_, np.column_stack([s, 0.1 + 0.0 * s]))
    errs = []
    for _ in range(50):
        st_ = rls_update(st_, np.column_stack([s, 0.4 + 0.0 * s]))
        errs.append(abs(eval_poly(rls_model(st_), 10.0) - 0.4))
    errs = np.array(errs)
    live = errs > 1e-12
    ratios = errs[1:][live[1:] & live[:-1]] / errs[:-1][live[1:] & live[:-1]]
    assert np.all(ratios <= mu + 1e-6)
    assert errs[-1] < 1e-2


def test_order_invariance_without_forgetting():
    rng = np.random.default_rng(2)
    s = rng.uniform(0, 30, 40)
    f = np.column_stack([s, 0.3 + 0.01 * s + rng.normal(0, 0.02, 40)])
    a = rls_update(rls_init(1.0, 1e6), f)
    b = rls_update(rls_init(1.0, 1e6), f[rng.permutation(40)])
    assert np.linalg.norm(a.w - b.w) / np.linalg.norm(a.w) < 1e-9


def test_literal_and_factored_forms_agree():
    rng = np.random.default_rng(3)
    a = b = rls_init(0.95, 1e4)
    for _ in range(10):
        s = rng.uniform(0, 20, 25)
        f = np.column_stack([s, 0.2 - 0.005 * s + rng.normal(0, 0.01, 25)])
        a, b = rls_update(a, f), rls_update_literal(b, f)
    np.testing.assert_allclose(a.w, b.w, rtol=1e-5, atol=1e-8)


def test_non_finite_frame_is_rejected():
    st_ = rls_update(rls_init(), np.column_stack([np.arange(5.0), np.zeros(5)]))
    out = rls_update(st_, [(1.0, np.inf)])
    assert out is st_


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-15, 15), dtheta=st.floats(-1, 1))
def test_shift_transports_polynomial_and_covariance(a, dtheta):
    rng = np.random.default_rng(7)
    st_ = rls_init(0.95, 1e4)
    s = rng.uniform(0, 30, 30)
    st_ = rls_update(st_, np.column_stack([s, 0.1 + 0.01 * s + 1e-4 * s**2]))
    moved = rls_shift(st_, a, dtheta)
    q = np.linspace(-5, 25, 7)
    np.testing.assert_allclose(eval_poly(rls_model(moved), q),
                               eval_poly(rls_model(st_), q + a) + dtheta, atol=1e-9)
    # prediction variance at the same physical point is unchanged
    for x in q:
        v0 = basis(x + a) @ st_.R @ basis(x + a)
        v1 = basis(x) @ moved.R @ basis(x)
        assert v1 == pytest.approx(v0, rel=1e-6)


def test_state_arrays_are_read_only():
    st_ = rls_init()
    with pytest.raises(ValueError):
        st_.w[0] = 1.0
    assert isinstance(rls_model(st_), PolyModel)
