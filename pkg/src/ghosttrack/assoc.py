"""Per-frame association: fused costs, one Hungarian solve, dual thresholds.

Active and inactive tracks are matched jointly in a single assignment per
frame; the active/inactive distinction only enters through the row partition
of the cost matrix and the post-matching thresholds. Track lifecycle (birth,
deactivation, eviction from the memory bank) lives in `Tracker.step`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import appearance, geometry, motion
from .core import (
    Detection,
    MotionModel,
    ProxyMethod,
    Track,
    TrackStatus,
    TrackerConfig,
    validate_config,
)
from .errors import MissingEmbedding, OutOfOrderFrame

logger = logging.getLogger(__name__)

PAD_COST_FACTOR = 10.0  # padding cost = factor * max(tau_act, tau_inact)


@dataclass
class CostMatrix:
    """Tracks x detections combined costs; rows [0, n_active) are active tracks."""

    costs: np.ndarray
    n_active: int

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64)
        if self.costs.ndim != 2:
            raise ValueError("cost matrix must be 2-D")
        if not (0 <= self.n_active <= self.costs.shape[0]):
            raise ValueError("n_active out of range")
        if self.costs.size and (
            not np.all(np.isfinite(self.costs)) or np.any(self.costs < 0)
        ):
            raise ValueError("cost entries must be finite and >= 0")


@dataclass
class FrameResult:
    """Outcome of one association step.

    `deactivated` lists tracks that entered the inactive memory bank this
    frame; tracks removed outright appear only in `evicted`.
    """

    frame: int
    matches: list[tuple[int, int, float]] = field(default_factory=list)
    new_tracks: list[int] = field(default_factory=list)
    deactivated: list[int] = field(default_factory=list)
    evicted: list[int] = field(default_factory=list)


def hungarian(costs: np.ndarray) -> list[tuple[int, int]]:
    """Minimum-cost assignment of size min(R, C) over a finite cost matrix.

    Among equal-cost optima the lexicographically smallest (row, column)
    pairing is returned, so results are stable across runs and platforms.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    n_rows, n_cols = costs.shape
    if n_rows == 0 or n_cols == 0:
        return []
    if not np.all(np.isfinite(costs)):
        raise ValueError("cost matrix entries must be finite")

    rows, cols = linear_sum_assignment(costs)
    budget = float(costs[rows, cols].sum())
    base = {int(r): int(c) for r, c in zip(rows, cols)}
    tol = 1e-9 * max(1.0, abs(budget))

    def sub_optimum(row_idx: list[int], col_idx: list[int]) -> float:
        if not row_idx or not col_idx:
            return 0.0
        sub = costs[np.ix_(row_idx, col_idx)]
        r, c = linear_sum_assignment(sub)
        return float(sub[r, c].sum())

    need = min(n_rows, n_cols)
    avail = list(range(n_cols))
    result: list[tuple[int, int]] = []
    for r in range(n_rows):
        if len(result) == need:
            break
        rows_after = list(range(r + 1, n_rows))
        pairs_left = need - len(result)
        # The solver's own column for this row always completes optimally, so
        # only strictly smaller columns need a probe.
        known = base.get(r)
        chosen = None
        for c in avail:
            if c == known:
                chosen = c
                break
            remaining = [x for x in avail if x != c]
            completion = sub_optimum(rows_after, remaining) if pairs_left > 1 else 0.0
            if costs[r, c] + completion <= budget + tol:
                chosen = c
                break
        if chosen is None:
            # Optimal solutions leave this row unassigned (only when R > C).
            continue
        result.append((r, chosen))
        avail.remove(chosen)
        budget -= float(costs[r, chosen])
        # Columns freed up may re-route later rows; refresh their anchors.
        if rows_after and avail and len(result) < need:
            sub = costs[np.ix_(rows_after, avail)]
            rr, cc = linear_sum_assignment(sub)
            base = {rows_after[i]: avail[j] for i, j in zip(rr, cc)}
    return result


def _appearance_row(track: Track, det_embeddings: np.ndarray, cfg: TrackerConfig) -> np.ndarray:
    # Same arithmetic as appearance.appearance_cost, vectorized over the
    # frame's detections.
    if not track.embeddings:
        raise MissingEmbedding(f"track {track.id} has no stored embeddings")
    if track.status.is_active:
        last = track.embeddings[-1]
        return appearance.cosine_distance_matrix(last[None, :], det_embeddings)[0]
    if cfg.proxy_method is ProxyMethod.MEAN_OF_DISTANCES:
        gallery = np.stack(track.embeddings)
        return appearance.cosine_distance_matrix(gallery, det_embeddings).mean(axis=0)
    proxy = appearance.proxy_feature(track.embeddings, cfg.proxy_method, alpha=cfg.ema_alpha)
    return appearance.cosine_distance_matrix(proxy[None, :], det_embeddings)[0]


def build_cost_matrix(
    tracks: list[Track], detections: list[Detection], cfg: TrackerConfig
) -> CostMatrix:
    """Weighted sum of motion and appearance costs, one row per track.

    Tracks must be ordered active-first. A disabled cue hands its weight to
    the other one.
    """
    n_active = sum(1 for t in tracks if t.status.is_active)
    if any(not tracks[i].status.is_active and tracks[i + 1].status.is_active
           for i in range(len(tracks) - 1)):
        raise ValueError("tracks must be ordered active-first")

    w = cfg.motion_weight
    if not cfg.appearance_enabled:
        w = 1.0
    if cfg.motion_model is MotionModel.NONE:
        w = 0.0

    n_t, n_d = len(tracks), len(detections)
    combined = np.zeros((n_t, n_d))
    if n_t == 0 or n_d == 0:
        return CostMatrix(combined, n_active)

    if cfg.appearance_enabled and any(d.embedding is None for d in detections):
        raise MissingEmbedding("appearance is enabled but a detection has no embedding")

    if w > 0.0:
        pred = np.stack([t.predicted_box.as_array() for t in tracks])
        det_boxes = np.stack([d.box.as_array() for d in detections])
        combined += w * (1.0 - geometry.iou_matrix(pred, det_boxes))
    if w < 1.0:
        det_emb = np.stack([d.embedding for d in detections])
        app = np.empty((n_t, n_d))
        for j, track in enumerate(tracks):
            app[j] = _appearance_row(track, det_emb, cfg)
        combined += (1.0 - w) * app
    # Guard against -1e-16 style float dust; the matrix contract is >= 0.
    np.maximum(combined, 0.0, out=combined)
    return CostMatrix(combined, n_active)


def filter_matches(
    assignment: list[tuple[int, int]], cm: CostMatrix, cfg: TrackerConfig
) -> list[tuple[int, int]]:
    """Keep pairs whose cost clears the threshold for their row partition.

    Active rows require cost < tau_act, inactive rows cost < tau_inact; both
    comparisons are strict.
    """
    approved = []
    for r, c in assignment:
        cost = cm.costs[r, c]
        tau = cfg.tau_act if r < cm.n_active else cfg.tau_inact
        if cost < tau:
            approved.append((r, c))
    return approved


class Tracker:
    """Stateful per-sequence tracker; feed frames in increasing order."""

    def __init__(self, cfg: TrackerConfig | None = None, first_track_id: int = 1):
        self.cfg = cfg if cfg is not None else TrackerConfig()
        validate_config(self.cfg)
        self.tracks: list[Track] = []  # live memory bank: active + inactive
        self._all_tracks: list[Track] = []  # everything ever born, for output
        self._next_id = first_track_id
        self._last_frame: int | None = None

    # -- embedding preprocessing ------------------------------------------

    def _prepare_embeddings(self, detections: list[Detection]) -> list[Detection]:
        if not self.cfg.appearance_enabled:
            return detections
        if any(d.embedding is None for d in detections):
            raise MissingEmbedding("appearance is enabled but a detection has no embedding")
        if not detections:
            return detections
        feats = np.stack([d.embedding for d in detections]).astype(np.float64)
        if self.cfg.renormalize_per_frame:
            feats = appearance.renormalize_frame(
                feats.T, self.cfg.bn_gamma, self.cfg.bn_beta, self.cfg.bn_eps
            ).T
        out = []
        for det, vec in zip(detections, feats):
            out.append(replace(det, embedding=appearance.normalize(vec)))
        return out

    # -- motion ------------------------------------------------------------

    def _predict_all(self, frame: int) -> None:
        dt = 1 if self._last_frame is None else frame - self._last_frame
        for track in self.tracks:
            if self.cfg.motion_model is MotionModel.KALMAN_CV:
                for _ in range(dt):
                    track.kalman.predict()
                track.predicted_box = track.kalman.predicted_box()
            elif self.cfg.motion_model is MotionModel.LINEAR:
                track.predicted_box = motion.predict(track, frame)
            else:
                base = (
                    track.last_predicted_box
                    if not track.status.is_active and track.last_predicted_box is not None
                    else track.last_detection.box
                )
                track.predicted_box = base

    def _absorb(self, track: Track, det: Detection) -> None:
        track.detections.append(det)
        track.status = TrackStatus.active()
        track.last_predicted_box = None
        track.last_predicted_frame = None
        if self.cfg.appearance_enabled and det.embedding is not None:
            track.embeddings.append(det.embedding)
        track.velocity = motion.estimate_velocity(
            track.history(), self.cfg.velocity_window_k
        )
        if self.cfg.motion_model is MotionModel.KALMAN_CV:
            track.kalman.update(det.box)

    def _spawn(self, det: Detection) -> Track:
        track = Track(id=self._next_id, detections=[det])
        self._next_id += 1
        if self.cfg.appearance_enabled and det.embedding is not None:
            track.embeddings.append(det.embedding)
        if self.cfg.motion_model is MotionModel.KALMAN_CV:
            track.kalman = motion.KalmanBoxFilter(det.box)
        self.tracks.append(track)
        self._all_tracks.append(track)
        return track

    # -- the association step ----------------------------------------------

    def step(self, detections: list[Detection], frame: int) -> FrameResult:
        """Associate one frame of detections; returns what changed."""
        if self._last_frame is not None and frame <= self._last_frame:
            raise OutOfOrderFrame(f"frame {frame} after frame {self._last_frame}")

        kept_idx = [
            i for i, d in enumerate(detections)
            if d.confidence >= self.cfg.det_confidence_min
        ]
        if len(kept_idx) < len(detections):
            logger.debug(
                "frame %d: dropped %d low-confidence detections",
                frame,
                len(detections) - len(kept_idx),
            )
        kept = self._prepare_embeddings([detections[i] for i in kept_idx])

        self._predict_all(frame)

        ordered = [t for t in self.tracks if t.status.is_active] + [
            t for t in self.tracks if not t.status.is_active
        ]
        cm = build_cost_matrix(ordered, kept, self.cfg)

        approved: list[tuple[int, int]] = []
        if ordered and kept:
            pad_value = PAD_COST_FACTOR * max(self.cfg.tau_act, self.cfg.tau_inact)
            size = max(len(ordered), len(kept))
            padded = np.full((size, size), pad_value)
            padded[: len(ordered), : len(kept)] = cm.costs
            assignment = hungarian(padded)  # exactly one solve per frame
            real = [(r, c) for r, c in assignment if r < len(ordered) and c < len(kept)]
            approved = filter_matches(real, cm, self.cfg)

        result = FrameResult(frame=frame)
        matched_tracks = set()
        matched_dets = set()
        for r, c in approved:
            track = ordered[r]
            self._absorb(track, kept[c])
            matched_tracks.add(track.id)
            matched_dets.add(c)
            result.matches.append((track.id, kept_idx[c], float(cm.costs[r, c])))

        survivors = []
        for track in self.tracks:
            if track.id in matched_tracks:
                survivors.append(track)
                continue
            was_active = track.status.is_active
            track.status = TrackStatus(track.status.frames_inactive + 1)
            track.last_predicted_box = track.predicted_box
            track.last_predicted_frame = frame
            if track.status.frames_inactive > self.cfg.inactive_patience:
                result.evicted.append(track.id)
            else:
                survivors.append(track)
                if was_active:
                    result.deactivated.append(track.id)
        self.tracks = survivors

        for c, det in enumerate(kept):
            if c in matched_dets:
                continue
            if det.confidence >= self.cfg.new_track_confidence_min:
                track = self._spawn(det)
                result.new_tracks.append(track.id)
            else:
                logger.debug(
                    "frame %d: unmatched detection %d below new-track confidence",
                    frame,
                    det.source_index,
                )

        self._last_frame = frame
        return result

    def result_tracks(self) -> list[Track]:
        """Every track ever born, including evicted ones (their output remains)."""
        return list(self._all_tracks)
