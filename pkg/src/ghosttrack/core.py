"""Domain types shared by the whole tracking engine.

Boxes are top-left + width/height in pixels (MOTChallenge convention) and
frame indices are 1-based, matching the input/output file format. All types
are plain values; nothing here owns shared mutable state.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidConfig


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: (x, y) is the top-left corner, w/h strictly positive."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"box field {name} is not finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive size, got w={self.w}, h={self.h}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "BoundingBox":
        return BoundingBox(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass
class Detection:
    """One observed bounding box in one frame.

    `source_index` is the 0-based row order within the detection file block of
    that frame; it keys the embedding sidecar. `obj_id` and `visibility` are
    populated from ground-truth files only.
    """

    frame: int
    box: BoundingBox
    confidence: float = 1.0
    embedding: Optional[np.ndarray] = None
    source_index: int = 0
    obj_id: Optional[int] = None
    visibility: Optional[float] = None

    def __post_init__(self):
        if self.visibility is not None and not (0.0 <= self.visibility <= 1.0):
            raise ValueError(f"visibility must be in [0,1], got {self.visibility}")


@dataclass(frozen=True)
class TrackStatus:
    """Active when `frames_inactive == 0`, otherwise inactive for that many frames."""

    frames_inactive: int = 0

    def __post_init__(self):
        if self.frames_inactive < 0:
            raise ValueError("frames_inactive must be >= 0")

    @property
    def is_active(self) -> bool:
        return self.frames_inactive == 0

    @staticmethod
    def active() -> "TrackStatus":
        return TrackStatus(0)

    @staticmethod
    def inactive(frames: int) -> "TrackStatus":
        if frames < 1:
            raise ValueError("inactive status requires frames_inactive >= 1")
        return TrackStatus(frames)


@dataclass
class Track:
    """A trajectory: time-ordered detections plus association state.

    `predicted_box` is the motion prediction for the frame currently being
    associated. While the track is inactive, `last_predicted_box` carries the
    chained prediction forward so re-activation picks up where motion left off.
    """

    id: int
    detections: list[Detection] = field(default_factory=list)
    status: TrackStatus = field(default_factory=TrackStatus.active)
    predicted_box: Optional[BoundingBox] = None
    last_predicted_box: Optional[BoundingBox] = None
    last_predicted_frame: Optional[int] = None
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(4))
    embeddings: list[np.ndarray] = field(default_factory=list)
    kalman: Optional[object] = None  # motion.KalmanBoxFilter when motion_model is KalmanCV

    @property
    def last_detection(self) -> Detection:
        return self.detections[-1]

    @property
    def last_frame(self) -> int:
        return self.detections[-1].frame

    def history(self) -> list[tuple[int, BoundingBox]]:
        return [(d.frame, d.box) for d in self.detections]


class ProxyMethod(enum.Enum):
    """How an inactive track summarizes its stored embeddings for matching."""

    MEAN_OF_DISTANCES = "mean_of_distances"
    MEAN_FEATURE = "mean_feature"
    MODE_FEATURE = "mode_feature"
    MEDIAN_FEATURE = "median_feature"
    EMA_FEATURE = "ema_feature"


class MotionModel(enum.Enum):
    LINEAR = "linear"
    KALMAN_CV = "kalman"
    NONE = "none"


@dataclass
class TrackerConfig:
    """All tracker tunables.

    `velocity_window_k=None` means "use the whole history". `bn_gamma`/`bn_beta`
    may be scalars (broadcast) or per-dimension vectors loaded from a parameter
    file.
    """

    tau_act: float = 0.7
    tau_inact: float = 0.8
    motion_weight: float = 0.5
    velocity_window_k: Optional[int] = None
    inactive_patience: int = 50
    det_confidence_min: float = 0.5
    new_track_confidence_min: float = 0.6
    proxy_method: ProxyMethod = ProxyMethod.MEAN_OF_DISTANCES
    ema_alpha: float = 0.9
    motion_model: MotionModel = MotionModel.LINEAR
    appearance_enabled: bool = True
    renormalize_per_frame: bool = True
    bn_gamma: float | np.ndarray = 1.0
    bn_beta: float | np.ndarray = 0.0
    bn_eps: float = 1e-5

    def copy(self, **overrides) -> "TrackerConfig":
        return replace(self, **overrides)


# Motion-regime presets. Weights and velocity windows follow the per-regime
# settings that work best for mostly-static, crowded, erratic-motion, and
# moving-camera footage respectively.
TRACKER_PRESETS: dict[str, dict] = {
    "default": {},
    "steady": {"motion_weight": 0.6, "velocity_window_k": 90},
    "crowded": {"motion_weight": 0.8, "velocity_window_k": 30},
    "erratic": {"motion_weight": 0.4, "velocity_window_k": 5},
    "moving-camera": {"motion_weight": 0.4, "velocity_window_k": 10},
}


def tracker_preset(name: str) -> TrackerConfig:
    if name not in TRACKER_PRESETS:
        raise KeyError(f"unknown tracker preset '{name}', choose from {sorted(TRACKER_PRESETS)}")
    return TrackerConfig(**TRACKER_PRESETS[name])


def validate_config(cfg: TrackerConfig) -> None:
    """Raise InvalidConfig naming the first violated field; return None if valid."""
    if not (0.0 <= cfg.motion_weight <= 1.0):
        raise InvalidConfig("motion_weight", f"must be in [0,1], got {cfg.motion_weight}")
    if not (cfg.tau_act > 0):
        raise InvalidConfig("tau_act", f"must be > 0, got {cfg.tau_act}")
    if not (cfg.tau_inact > 0):
        raise InvalidConfig("tau_inact", f"must be > 0, got {cfg.tau_inact}")
    if cfg.velocity_window_k is not None and cfg.velocity_window_k < 1:
        raise InvalidConfig("velocity_window_k", "must be >= 1 or None (all)")
    if cfg.inactive_patience < 0:
        raise InvalidConfig("inactive_patience", "must be >= 0")
    if not (0.0 <= cfg.ema_alpha <= 1.0):
        raise InvalidConfig("ema_alpha", f"must be in [0,1], got {cfg.ema_alpha}")
    if not (cfg.bn_eps > 0):
        raise InvalidConfig("bn_eps", "must be > 0")
    if not cfg.appearance_enabled and cfg.motion_model is MotionModel.NONE:
        raise InvalidConfig("appearance_enabled", "at least one cue must be enabled")
    for name in ("det_confidence_min", "new_track_confidence_min"):
        if not math.isfinite(getattr(cfg, name)):
            raise InvalidConfig(name, "must be finite")
