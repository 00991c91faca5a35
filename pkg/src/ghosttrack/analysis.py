"""Diagnostics: GT matching, association-rate tables, distance histograms,
threshold suggestion, and the MOTA / IDF1 tracking metrics.

Ground-truth rows whose consider flag (the confidence column) is 0 are
ignored everywhere, matching the convention that fully occluded targets are
not scored. Per-frame matching between rows and ground truth is a plain
minimum-cost assignment on 1 - IoU with an IoU floor.
"""
from __future__ import annotations

import enum
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import appearance, motion
from .assoc import hungarian
from .core import BoundingBox, Detection, ProxyMethod, TrackerConfig
from .errors import EmptyHistogram, MissingEmbedding, MissingTrackIds
from .fileio import EmbeddingFile, SequenceMeta
from .geometry import iou, iou_matrix

INFEASIBLE = 1e6  # large finite cost so the solver only uses feasible pairs

DEFAULT_HIST_EDGES = np.round(np.arange(0.0, 2.0 + 1e-9, 0.05), 10)
DEFAULT_VISIBILITY_BINS = [(0.0, 0.33), (0.33, 0.66), (0.66, 1.0)]
DEFAULT_OCCLUSION_BINS_S = [(0.0, 0.2), (0.2, 0.5), (0.5, 1.0), (1.0, 2.0), (2.0, math.inf)]


def considered(gt: Sequence[Detection]) -> list[Detection]:
    """Ground-truth rows that carry a nonzero consider flag."""
    return [g for g in gt if g.confidence > 0]


def _remove_ignored(
    results: Sequence[Detection], gt: Sequence[Detection], iou_min: float
) -> list[Detection]:
    # Result boxes covering a don't-care GT row (flag 0) are dropped before
    # scoring, so fully occluded targets neither help nor hurt.
    ignored = _group_by_frame([g for g in gt if g.confidence <= 0])
    if not ignored:
        return list(results)
    kept = []
    for row in results:
        zones = ignored.get(row.frame)
        if zones and any(iou(row.box, z.box) >= iou_min for z in zones):
            continue
        kept.append(row)
    return kept


# -- matching rows to ground truth --------------------------------------------

@dataclass
class GtMatchTable:
    """Per-frame matches: each row paired with a GT identity (or None) and IoU."""

    frames: dict[int, list[tuple[Detection, Optional[int], float]]]

    def matched(self) -> list[tuple[Detection, int, float]]:
        out = []
        for frame in sorted(self.frames):
            for row, gt_id, overlap in self.frames[frame]:
                if gt_id is not None:
                    out.append((row, gt_id, overlap))
        return out


def _group_by_frame(rows: Sequence[Detection]) -> dict[int, list[Detection]]:
    grouped: dict[int, list[Detection]] = defaultdict(list)
    for row in rows:
        grouped[row.frame].append(row)
    return grouped


def match_to_gt(
    rows: Sequence[Detection], gt: Sequence[Detection], iou_min: float = 0.5
) -> GtMatchTable:
    """Frame-wise minimum-cost matching of rows against ground truth.

    Each GT identity is matched to at most one row per frame; pairs below the
    IoU floor stay unmatched.
    """
    gt_rows = considered(gt)
    by_frame_rows = _group_by_frame(rows)
    by_frame_gt = _group_by_frame(gt_rows)
    table: dict[int, list[tuple[Detection, Optional[int], float]]] = {}
    for frame in sorted(set(by_frame_rows) | set(by_frame_gt)):
        frame_rows = by_frame_rows.get(frame, [])
        frame_gt = by_frame_gt.get(frame, [])
        assigned: dict[int, tuple[int, float]] = {}
        if frame_rows and frame_gt:
            overlaps = iou_matrix(
                np.stack([r.box.as_array() for r in frame_rows]),
                np.stack([g.box.as_array() for g in frame_gt]),
            )
            costs = np.where(overlaps >= iou_min, 1.0 - overlaps, INFEASIBLE)
            for r, c in hungarian(costs):
                if overlaps[r, c] >= iou_min:
                    assigned[r] = (frame_gt[c].obj_id, float(overlaps[r, c]))
        table[frame] = [
            (row, assigned[i][0] if i in assigned else None,
             assigned[i][1] if i in assigned else 0.0)
            for i, row in enumerate(frame_rows)
        ]
    return GtMatchTable(frames=table)


# -- rate of correct associations ----------------------------------------------

class RcaBinning(enum.Enum):
    OVERALL = "overall"
    VISIBILITY = "visibility"
    OCCLUSION = "occlusion"
    CAMERA = "camera"


@dataclass
class RcaBin:
    label: str
    lo: float
    hi: float
    tp_ass: int = 0
    fp_ass: int = 0

    @property
    def rca(self) -> Optional[float]:
        total = self.tp_ass + self.fp_ass
        return self.tp_ass / total if total > 0 else None


@dataclass
class RcaReport:
    binning: RcaBinning
    bins: list[RcaBin]

    def bin_for(self, value: float) -> Optional[RcaBin]:
        for b in self.bins:
            if b.lo <= value < b.hi or (value == b.hi and b is self.bins[-1]):
                return b
        return None


def compute_rca(
    table: GtMatchTable,
    gt: Sequence[Detection],
    meta: SequenceMeta,
    binning: RcaBinning = RcaBinning.OVERALL,
    visibility_bins: Sequence[tuple[float, float]] = tuple(DEFAULT_VISIBILITY_BINS),
    occlusion_bins_s: Sequence[tuple[float, float]] = tuple(DEFAULT_OCCLUSION_BINS_S),
) -> RcaReport:
    """Count associations as correct or wrong, aggregated into bins.

    A row matched to a GT identity is compared against the previous row
    matched to the same identity (searched backward without a time cap): same
    tracker id counts as a correct association, a different id as a wrong one.
    Occlusion time is the number of missed frames divided by the frame rate;
    visibility is taken from the GT row at the current frame.
    """
    if binning is RcaBinning.VISIBILITY:
        bins = [RcaBin(f"vis {lo:.2f}-{hi:.2f}", lo, hi) for lo, hi in visibility_bins]
    elif binning is RcaBinning.OCCLUSION:
        bins = [RcaBin(f"occl {lo:g}-{hi:g}s", lo, hi) for lo, hi in occlusion_bins_s]
    elif binning is RcaBinning.CAMERA:
        label = "moving camera" if meta.camera_moving else "static camera"
        bins = [RcaBin(label, 0.0, math.inf)]
    else:
        bins = [RcaBin("overall", 0.0, math.inf)]
    report = RcaReport(binning=binning, bins=bins)

    gt_vis = {(g.frame, g.obj_id): g.visibility for g in considered(gt)}

    last_row: dict[int, tuple[int, int]] = {}  # gt identity -> (frame, tracker id)
    for row, gt_id, _ in table.matched():
        if row.obj_id is None:
            raise MissingTrackIds("result rows must carry tracker ids")
        prev = last_row.get(gt_id)
        last_row[gt_id] = (row.frame, row.obj_id)
        if prev is None:
            continue
        prev_frame, prev_tid = prev
        if binning is RcaBinning.VISIBILITY:
            vis = gt_vis.get((row.frame, gt_id))
            value = 1.0 if vis is None else vis
        elif binning is RcaBinning.OCCLUSION:
            value = (row.frame - prev_frame - 1) / meta.frame_rate
        else:
            value = 0.0
        target = report.bin_for(value)
        if target is None:
            continue
        if row.obj_id == prev_tid:
            target.tp_ass += 1
        else:
            target.fp_ass += 1
    return report


# -- distance histograms ---------------------------------------------------------

class HistPopulation(enum.Enum):
    ACTIVE_SAME = "active_same"
    ACTIVE_DIFF = "active_diff"
    INACTIVE_SAME = "inactive_same"
    INACTIVE_DIFF = "inactive_diff"


class DistanceMode(enum.Enum):
    LAST_FEATURE = "last"
    PROXY = "proxy"
    MOTION = "motion"


@dataclass
class Histogram:
    population: HistPopulation
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class _IdentityState:
    frames: list[int] = field(default_factory=list)
    boxes: list[BoundingBox] = field(default_factory=list)
    embeddings: list[np.ndarray] = field(default_factory=list)


def _appearance_distance(
    state: _IdentityState, emb: np.ndarray, mode: DistanceMode, cfg: TrackerConfig, active: bool
) -> float:
    if mode is DistanceMode.LAST_FEATURE or active:
        return appearance.cosine_distance(emb, state.embeddings[-1])
    if cfg.proxy_method is ProxyMethod.MEAN_OF_DISTANCES:
        return appearance.proxy_distance_mean(emb, state.embeddings)
    proxy = appearance.proxy_feature(state.embeddings, cfg.proxy_method, alpha=cfg.ema_alpha)
    return appearance.cosine_distance(emb, proxy)


def _motion_distance(
    state: _IdentityState, box: BoundingBox, frame: int, cfg: TrackerConfig
) -> float:
    history = list(zip(state.frames, state.boxes))
    velocity = motion.estimate_velocity(history, cfg.velocity_window_k)
    predicted = state.boxes[-1].as_array() + velocity * (frame - state.frames[-1])
    predicted[2] = max(predicted[2], motion.MIN_BOX_SIZE)
    predicted[3] = max(predicted[3], motion.MIN_BOX_SIZE)
    return 1.0 - iou(BoundingBox.from_array(predicted), box)


def build_distance_histograms(
    gt: Sequence[Detection],
    dets: Sequence[Detection],
    embeddings: Optional[EmbeddingFile],
    cfg: TrackerConfig,
    mode: DistanceMode = DistanceMode.PROXY,
    bin_edges: np.ndarray = DEFAULT_HIST_EDGES,
    iou_min: float = 0.5,
) -> dict[HistPopulation, Histogram]:
    """Replay GT-matched detections and histogram same/different-identity distances.

    Mirrors what the tracker would see: detections below the confidence floor
    are skipped, and embeddings are renormalized per frame when the config asks
    for it. An identity occurring at the previous frame counts as active; one
    occurring earlier (within the inactive patience) as inactive. In proxy mode
    active identities still use their last embedding, like the tracker does.
    """
    use_embeddings = mode is not DistanceMode.MOTION
    rows = [d for d in dets if d.confidence >= cfg.det_confidence_min]
    if use_embeddings:
        prepared = []
        for frame, frame_rows in sorted(_group_by_frame(rows).items()):
            vecs = []
            for det in frame_rows:
                emb = det.embedding
                if embeddings is not None:
                    emb = embeddings.get(det.frame, det.source_index)
                if emb is None:
                    raise MissingEmbedding(
                        f"detection (frame {det.frame}, index {det.source_index}) has no embedding"
                    )
                vecs.append(np.asarray(emb, dtype=np.float64))
            feats = np.stack(vecs)
            if cfg.renormalize_per_frame:
                feats = appearance.renormalize_frame(
                    feats.T, cfg.bn_gamma, cfg.bn_beta, cfg.bn_eps
                ).T
            for det, vec in zip(frame_rows, feats):
                copy = Detection(
                    frame=det.frame,
                    box=det.box,
                    confidence=det.confidence,
                    embedding=appearance.normalize(vec),
                    source_index=det.source_index,
                )
                prepared.append(copy)
        rows = prepared

    table = match_to_gt(rows, gt, iou_min=iou_min)
    edges = np.asarray(bin_edges, dtype=np.float64)
    values: dict[HistPopulation, list[float]] = {pop: [] for pop in HistPopulation}

    states: dict[int, _IdentityState] = defaultdict(_IdentityState)
    for frame in sorted(table.frames):
        matched_now: list[tuple[Detection, int]] = [
            (row, gt_id) for row, gt_id, _ in table.frames[frame] if gt_id is not None
        ]
        for row, gt_id in matched_now:
            for other_id, state in states.items():
                if not state.frames:
                    continue
                gap = frame - state.frames[-1] - 1
                if gap == 0:
                    active = True
                elif gap <= cfg.inactive_patience:
                    active = False
                else:
                    continue
                if mode is DistanceMode.MOTION:
                    dist = _motion_distance(state, row.box, frame, cfg)
                else:
                    dist = _appearance_distance(state, row.embedding, mode, cfg, active)
                if other_id == gt_id:
                    pop = HistPopulation.ACTIVE_SAME if active else HistPopulation.INACTIVE_SAME
                else:
                    pop = HistPopulation.ACTIVE_DIFF if active else HistPopulation.INACTIVE_DIFF
                values[pop].append(dist)
        # State updates happen after the whole frame so same-frame rows never
        # compare against each other.
        for row, gt_id in matched_now:
            state = states[gt_id]
            state.frames.append(frame)
            state.boxes.append(row.box)
            if use_embeddings:
                state.embeddings.append(row.embedding)

    out = {}
    for pop, vals in values.items():
        clipped = np.clip(np.asarray(vals, dtype=np.float64), edges[0], edges[-1]) if vals else np.empty(0)
        counts, _ = np.histogram(clipped, bins=edges)
        out[pop] = Histogram(population=pop, bin_edges=edges, counts=counts)
    return out


def find_intersection_point(same: Histogram, diff: Histogram) -> tuple[float, float]:
    """Distance threshold minimizing false-positive plus false-negative cost.

    Candidates are the shared bin edges. The false-positive cost at x is the
    percentile of the different-identity mass left of x; the false-negative
    cost is 100 minus the percentile of the same-identity mass left of x. Ties
    resolve to the midpoint of the span of minimizing edges.
    """
    if not np.array_equal(same.bin_edges, diff.bin_edges):
        raise ValueError("histograms must share bin edges")
    if same.total == 0 or diff.total == 0:
        raise EmptyHistogram("both histograms need mass to intersect")
    edges = same.bin_edges
    cum_same = np.concatenate([[0], np.cumsum(same.counts)]) / same.total * 100.0
    cum_diff = np.concatenate([[0], np.cumsum(diff.counts)]) / diff.total * 100.0
    cost = cum_diff + (100.0 - cum_same)
    best = cost.min()
    minimizing = np.flatnonzero(np.isclose(cost, best, rtol=0, atol=1e-9))
    x_star = (edges[minimizing[0]] + edges[minimizing[-1]]) / 2.0
    return float(x_star), float(best)


# -- CLEAR-MOT accuracy and identity F1 --------------------------------------------

@dataclass
class MotaResult:
    mota: float
    fp: int
    fn: int
    idsw: int
    gt_count: int


def compute_mota(
    gt: Sequence[Detection], results: Sequence[Detection], iou_min: float = 0.5
) -> MotaResult:
    """CLEAR-MOT accuracy with correspondence persistence across frames."""
    gt_rows = considered(gt)
    by_frame_gt = _group_by_frame(gt_rows)
    by_frame_res = _group_by_frame(_remove_ignored(results, gt, iou_min))
    total_gt = len(gt_rows)

    fp = fn = idsw = 0
    corr: dict[int, int] = {}  # gt identity -> tracker id currently bound
    last_seen: dict[int, int] = {}  # gt identity -> last matched tracker id ever
    for frame in sorted(set(by_frame_gt) | set(by_frame_res)):
        frame_gt = by_frame_gt.get(frame, [])
        frame_res = by_frame_res.get(frame, [])
        res_by_id = {}
        for row in frame_res:
            if row.obj_id is None:
                raise MissingTrackIds("result rows must carry tracker ids")
            res_by_id[row.obj_id] = row

        matched_gt: dict[int, int] = {}
        used_rows: set[int] = set()
        # Persist previous correspondences still overlapping enough.
        for g in frame_gt:
            tid = corr.get(g.obj_id)
            if tid is not None and tid in res_by_id and tid not in used_rows:
                if iou(g.box, res_by_id[tid].box) >= iou_min:
                    matched_gt[g.obj_id] = tid
                    used_rows.add(tid)
        # Match the remainder with one assignment.
        rest_gt = [g for g in frame_gt if g.obj_id not in matched_gt]
        rest_rows = [r for r in frame_res if r.obj_id not in used_rows]
        if rest_gt and rest_rows:
            overlaps = iou_matrix(
                np.stack([g.box.as_array() for g in rest_gt]),
                np.stack([r.box.as_array() for r in rest_rows]),
            )
            costs = np.where(overlaps >= iou_min, 1.0 - overlaps, INFEASIBLE)
            for gi, ri in hungarian(costs):
                if overlaps[gi, ri] >= iou_min:
                    matched_gt[rest_gt[gi].obj_id] = rest_rows[ri].obj_id
                    used_rows.add(rest_rows[ri].obj_id)

        for g in frame_gt:
            tid = matched_gt.get(g.obj_id)
            if tid is None:
                fn += 1
                corr.pop(g.obj_id, None)
                continue
            previous = last_seen.get(g.obj_id)
            if previous is not None and previous != tid:
                idsw += 1
            corr[g.obj_id] = tid
            last_seen[g.obj_id] = tid
        fp += len(frame_res) - len(used_rows)

    mota = 1.0 - (fp + fn + idsw) / max(total_gt, 1)
    return MotaResult(mota=mota, fp=fp, fn=fn, idsw=idsw, gt_count=total_gt)


def compute_idf1(
    gt: Sequence[Detection], results: Sequence[Detection], iou_min: float = 0.5
) -> float:
    """Identity F1: one global trajectory-level assignment maximizing overlap."""
    gt_rows = considered(gt)
    gt_traj: dict[int, dict[int, BoundingBox]] = defaultdict(dict)
    for g in gt_rows:
        gt_traj[g.obj_id][g.frame] = g.box
    res_traj: dict[int, dict[int, BoundingBox]] = defaultdict(dict)
    for r in _remove_ignored(results, gt, iou_min):
        if r.obj_id is None:
            raise MissingTrackIds("result rows must carry tracker ids")
        res_traj[r.obj_id][r.frame] = r.box

    gt_ids = sorted(gt_traj)
    tr_ids = sorted(res_traj)
    len_gt = {g: len(gt_traj[g]) for g in gt_ids}
    len_tr = {t: len(res_traj[t]) for t in tr_ids}
    total_len = sum(len_gt.values()) + sum(len_tr.values())
    if total_len == 0:
        return 1.0
    if not gt_ids or not tr_ids:
        return 0.0

    n_g, n_t = len(gt_ids), len(tr_ids)
    big = float(total_len + 1)
    size = n_g + n_t
    costs = np.full((size, size), 0.0)
    costs[:n_g, :n_t] = 0.0
    for i, g in enumerate(gt_ids):
        frames_g = gt_traj[g]
        for j, t in enumerate(tr_ids):
            frames_t = res_traj[t]
            overlap = 0
            common = frames_g.keys() & frames_t.keys()
            for f in common:
                if iou(frames_g[f], frames_t[f]) >= iou_min:
                    overlap += 1
            costs[i, j] = len_gt[g] + len_tr[t] - 2 * overlap
    costs[:n_g, n_t:] = big
    for i, g in enumerate(gt_ids):
        costs[i, n_t + i] = len_gt[g]  # leaving this identity unmatched
    costs[n_g:, :n_t] = big
    for j, t in enumerate(tr_ids):
        costs[n_g + j, j] = len_tr[t]  # leaving this track unmatched
    costs[n_g:, n_t:] = 0.0

    assignment = hungarian(costs)
    errors = sum(costs[r, c] for r, c in assignment)
    idtp = (total_len - errors) / 2.0
    return 2.0 * idtp / total_len


# -- report serialization -------------------------------------------------------

def rca_report_to_tsv(report: RcaReport) -> str:
    lines = ["condition\tlo\thi\ttp_ass\tfp_ass\trca"]
    for b in report.bins:
        rca = "-" if b.rca is None else f"{b.rca:.4f}"
        hi = "inf" if math.isinf(b.hi) else f"{b.hi:g}"
        lines.append(f"{b.label}\t{b.lo:g}\t{hi}\t{b.tp_ass}\t{b.fp_ass}\t{rca}")
    return "\n".join(lines) + "\n"


def rca_report_to_jsonl(report: RcaReport) -> str:
    lines = []
    for b in report.bins:
        lines.append(
            json.dumps(
                {
                    "binning": report.binning.value,
                    "label": b.label,
                    "lo": b.lo,
                    "hi": None if math.isinf(b.hi) else b.hi,
                    "tp_ass": b.tp_ass,
                    "fp_ass": b.fp_ass,
                    "rca": b.rca,
                }
            )
        )
    return "\n".join(lines) + "\n"


def histograms_to_tsv(hists: dict[HistPopulation, Histogram]) -> str:
    lines = ["population\tbin_lo\tbin_hi\tcount"]
    for pop in HistPopulation:
        h = hists[pop]
        for lo, hi, count in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts):
            lines.append(f"{pop.value}\t{lo:g}\t{hi:g}\t{int(count)}")
    return "\n".join(lines) + "\n"


def histograms_to_jsonl(hists: dict[HistPopulation, Histogram]) -> str:
    lines = []
    for pop in HistPopulation:
        h = hists[pop]
        for lo, hi, count in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts):
            lines.append(
                json.dumps(
                    {"population": pop.value, "lo": float(lo), "hi": float(hi), "count": int(count)}
                )
            )
    return "\n".join(lines) + "\n"
