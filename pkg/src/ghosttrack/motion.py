"""Position prediction: constant-velocity extrapolation and a Kalman variant.

The linear model estimates a mean per-frame velocity over the last k finite
differences of the observed (x, y, w, h) history and extrapolates from the
last observed box while the track is active, or from the last predicted box
while it is inactive, so predictions chain across occlusions.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .core import BoundingBox, Track
from .errors import SingularInnovation

MIN_BOX_SIZE = 1.0  # extrapolated width/height never collapse below one pixel


def estimate_velocity(
    history: Sequence[tuple[int, BoundingBox]],
    k: Optional[int] = None,
) -> np.ndarray:
    """Mean per-frame finite difference of (x, y, w, h) over the last k steps.

    `k=None` uses the whole history. Gaps in the frame index divide the step
    by the actual frame delta, so missing detections do not inflate velocity.
    A single-entry (or empty) history yields zero velocity.
    """
    if len(history) < 2:
        return np.zeros(4)
    n_steps = len(history) - 1 if k is None else min(k, len(history) - 1)
    window = history[-(n_steps + 1):]
    deltas = []
    for (f0, b0), (f1, b1) in zip(window[:-1], window[1:]):
        dt = f1 - f0
        deltas.append((b1.as_array() - b0.as_array()) / dt)
    return np.mean(deltas, axis=0)


def _extrapolate(box: BoundingBox, velocity: np.ndarray, dt: float) -> BoundingBox:
    vec = box.as_array() + np.asarray(velocity, dtype=np.float64) * dt
    vec[2] = max(vec[2], MIN_BOX_SIZE)
    vec[3] = max(vec[3], MIN_BOX_SIZE)
    return BoundingBox.from_array(vec)


def predict(track: Track, target_frame: int) -> BoundingBox:
    """Predicted box for `target_frame` under the linear model.

    Active tracks extrapolate from their last observed box; inactive tracks
    from their last predicted box, chaining one prediction onto the next.
    """
    if track.status.is_active or track.last_predicted_box is None:
        base = track.last_detection.box
        base_frame = track.last_frame
    else:
        base = track.last_predicted_box
        base_frame = track.last_predicted_frame
    dt = target_frame - base_frame
    if dt <= 0:
        raise ValueError(f"target frame {target_frame} not after frame {base_frame}")
    return _extrapolate(base, track.velocity, dt)


class KalmanBoxFilter:
    """Constant-velocity Kalman filter over [cx, cy, w, h] observations.

    State is [cx, cy, w, h, vcx, vcy, vw, vh]. Noise follows the usual
    box-tracking convention of scaling with box height: per-step position
    std h/20, velocity std h/160, observation std h/20. Pass explicit
    `q_pos`/`q_vel`/`r_obs` scales to override (0 disables process noise).
    """

    def __init__(
        self,
        box: BoundingBox,
        q_pos: float = 1.0 / 20,
        q_vel: float = 1.0 / 160,
        r_obs: float = 1.0 / 20,
    ):
        self.q_pos = q_pos
        self.q_vel = q_vel
        self.r_obs = r_obs

        self.x = np.zeros(8)
        self.x[:4] = self._to_center(box)
        h = self.x[3]
        # Wider initial uncertainty than the per-step noise; velocities are
        # unknown at init, so their std never starts below 1 px/frame even
        # when process noise is disabled.
        init_std = np.array(
            [max(2 * q_pos * h, 1e-3)] * 4 + [max(10 * q_vel * h, 1.0)] * 4
        )
        self.P = np.diag(init_std**2)

        self.F = np.eye(8)
        self.F[:4, 4:] = np.eye(4)
        self.H = np.zeros((4, 8))
        self.H[:, :4] = np.eye(4)

    @staticmethod
    def _to_center(box: BoundingBox) -> np.ndarray:
        return np.array([box.x + box.w / 2, box.y + box.h / 2, box.w, box.h])

    def _to_box(self) -> BoundingBox:
        cx, cy, w, h = self.x[:4]
        w = max(w, MIN_BOX_SIZE)
        h = max(h, MIN_BOX_SIZE)
        return BoundingBox(cx - w / 2, cy - h / 2, w, h)

    def _process_noise(self) -> np.ndarray:
        h = max(abs(self.x[3]), MIN_BOX_SIZE)
        std = np.array([self.q_pos * h] * 4 + [self.q_vel * h] * 4)
        return np.diag(std**2)

    def predict(self) -> BoundingBox:
        """Advance one frame; returns the predicted box."""
        self.x = self.F @ self.x
        self.P = self.F @ self.P @ self.F.T + self._process_noise()
        self.P = (self.P + self.P.T) / 2
        return self._to_box()

    def update(self, box: BoundingBox) -> None:
        """Fold in an observed box with standard Kalman gain."""
        z = self._to_center(box)
        h = max(abs(self.x[3]), MIN_BOX_SIZE)
        R = np.diag([(self.r_obs * h) ** 2] * 4)
        S = self.H @ self.P @ self.H.T + R
        try:
            K = np.linalg.solve(S.T, (self.P @ self.H.T).T).T
        except np.linalg.LinAlgError as exc:
            raise SingularInnovation(str(exc)) from exc
        innovation = z - self.H @ self.x
        self.x = self.x + K @ innovation
        ikh = np.eye(8) - K @ self.H
        # Joseph form keeps the covariance symmetric PSD.
        self.P = ikh @ self.P @ ikh.T + K @ R @ K.T
        self.P = (self.P + self.P.T) / 2

    def predicted_box(self) -> BoundingBox:
        return self._to_box()
