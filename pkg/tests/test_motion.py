import numpy as np
import pytest

from ghosttrack.core import BoundingBox, Detection, Track, TrackStatus
from ghosttrack.geometry import iou
from ghosttrack.motion import KalmanBoxFilter, estimate_velocity, predict


def box_at(x, y=0.0, w=10.0, h=20.0):
    return BoundingBox(x, y, w, h)


def make_track(frames_boxes, velocity=None, inactive=None):
    track = Track(
        id=1,
        detections=[Detection(frame=f, box=b) for f, b in frames_boxes],
    )
    if velocity is not None:
        track.velocity = np.asarray(velocity, dtype=float)
    if inactive is not None:
        frames, box, at_frame = inactive
        track.status = TrackStatus.inactive(frames)
        track.last_predicted_box = box
        track.last_predicted_frame = at_frame
    return track


# -- velocity estimation --------------------------------------------------------

def test_constant_velocity():
    history = [(1, box_at(0)), (2, box_at(1)), (3, box_at(2))]
    v = estimate_velocity(history, None)
    np.testing.assert_allclose(v, [1, 0, 0, 0], atol=1e-12)


def test_single_detection_zero_velocity():
    assert np.all(estimate_velocity([(1, box_at(5))], None) == 0)


def test_frame_gap_divides_delta():
    history = [(1, box_at(0)), (3, box_at(4))]
    v = estimate_velocity(history, None)
    np.testing.assert_allclose(v, [2, 0, 0, 0], atol=1e-12)


def test_window_k_one_takes_last_difference():
    history = [(1, box_at(0)), (2, box_at(10)), (3, box_at(11))]
    np.testing.assert_allclose(estimate_velocity(history, 1), [1, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(
        estimate_velocity(history, None), [5.5, 0, 0, 0], atol=1e-12
    )


def test_window_larger_than_history():
    history = [(1, box_at(0)), (2, box_at(2))]
    np.testing.assert_allclose(estimate_velocity(history, 99), [2, 0, 0, 0], atol=1e-12)


# -- linear prediction ------------------------------------------------------------

def test_active_prediction():
    track = make_track([(5, box_at(10))], velocity=[2, 0, 0, 0])
    assert predict(track, 6).x == pytest.approx(12.0)


def test_inactive_chained_prediction():
    # inactive for 3 frames: 10 -> 12 -> 14 -> 16 when chained one frame at a time
    track = make_track([(5, box_at(10))], velocity=[2, 0, 0, 0])
    track.status = TrackStatus.inactive(1)
    track.last_predicted_box = box_at(12)
    track.last_predicted_frame = 6
    assert predict(track, 7).x == pytest.approx(14.0)
    track.last_predicted_box = box_at(14)
    track.last_predicted_frame = 7
    track.status = TrackStatus.inactive(2)
    assert predict(track, 8).x == pytest.approx(16.0)


def test_zero_velocity_keeps_box():
    track = make_track([(5, box_at(10, 3))])
    out = predict(track, 9)
    assert (out.x, out.y, out.w, out.h) == (10, 3, 10, 20)


def test_size_clamped_to_one_pixel():
    track = make_track([(1, box_at(0, 0, 3, 3))], velocity=[0, 0, -5, -5])
    out = predict(track, 2)
    assert out.w == 1.0 and out.h == 1.0


def test_prediction_requires_future_frame():
    track = make_track([(5, box_at(10))])
    with pytest.raises(ValueError):
        predict(track, 5)


def test_exact_linear_motion_reproduced_at_any_horizon():
    v = np.array([1.5, -0.75, 0.2, 0.1])
    start = np.array([50.0, 80.0, 20.0, 40.0])
    history = [
        (f, BoundingBox.from_array(start + v * (f - 1))) for f in range(1, 31)
    ]
    track = make_track(history)
    track.velocity = estimate_velocity(track.history(), None)
    for horizon in (1, 5, 10):
        truth = BoundingBox.from_array(start + v * (30 + horizon - 1))
        assert iou(predict(track, 30 + horizon), truth) >= 1 - 1e-9


# -- Kalman filter -----------------------------------------------------------------

def test_noiseless_limit_matches_linear_model():
    # zero process noise, near-zero observation noise: after convergence the
    # filter tracks exact constant-velocity motion like the linear model
    v = np.array([2.0, -1.0, 0.0, 0.0])
    start = np.array([100.0, 100.0, 20.0, 40.0])
    kf = KalmanBoxFilter(BoundingBox.from_array(start), q_pos=0.0, q_vel=0.0, r_obs=1e-6)
    for f in range(1, 25):
        kf.predict()
        kf.update(BoundingBox.from_array(start + v * f))
    predicted = kf.predict()
    truth = BoundingBox.from_array(start + v * 25)
    assert iou(predicted, truth) >= 1 - 1e-6


def test_update_with_predicted_box_keeps_mean():
    kf = KalmanBoxFilter(box_at(10, 10, 20, 40))
    kf.predict()
    before = kf.x.copy()
    kf.update(kf.predicted_box())
    np.testing.assert_allclose(kf.x, before, atol=1e-9)


def test_posterior_variance_nonincreasing_for_stationary_target():
    # monotone segment after the initial velocity uncertainty drains out
    rng = np.random.default_rng(17)
    kf = KalmanBoxFilter(box_at(50, 50, 20, 40), q_pos=0.0, q_vel=0.0)
    variances = []
    for _ in range(100):
        kf.predict()
        noisy = box_at(50 + rng.normal(0, 1.0), 50 + rng.normal(0, 1.0), 20, 40)
        kf.update(noisy)
        variances.append(kf.P[0, 0])
    diffs = np.diff(variances[5:])
    assert len(diffs) > 80
    assert np.all(diffs <= 1e-12)


def test_covariance_stays_symmetric_psd():
    rng = np.random.default_rng(23)
    kf = KalmanBoxFilter(box_at(0, 0, 20, 40))
    for _ in range(1000):
        kf.predict()
        if rng.uniform() < 0.7:
            kf.update(
                box_at(
                    rng.uniform(-50, 50),
                    rng.uniform(-50, 50),
                    rng.uniform(5, 60),
                    rng.uniform(5, 120),
                )
            )
        assert np.max(np.abs(kf.P - kf.P.T)) < 1e-9
        assert np.linalg.eigvalsh(kf.P).min() >= -1e-8
