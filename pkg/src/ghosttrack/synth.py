"""Seeded generator of synthetic sequences for tracker verification.

Identities move under a linear or sinusoidal law (plus optional global camera
drift), occlusion episodes suppress detections for an exact number of frames,
and embeddings cluster around per-identity prototypes with noise that grows as
visibility drops. Everything is a pure function of the parameters, so a fixed
seed reproduces files byte for byte.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import BoundingBox, Detection
from .errors import InvalidParams
from .fileio import (
    EmbeddingFile,
    SequenceMeta,
    write_embeddings,
    write_mot_detections,
    write_mot_gt,
    write_seqinfo,
)


class MotionLaw(enum.Enum):
    LINEAR = "linear"
    SINUSOIDAL = "sinusoidal"


@dataclass(frozen=True)
class OcclusionEpisode:
    """Full occlusion of one identity for `length` consecutive frames.

    While occluded the identity's ground-truth visibility is 0. Detections are
    emitted only when visibility >= visibility_floor, so any positive floor
    suppresses the whole episode; a floor of 0 keeps the detections but doubles
    their embedding noise (a "visible but degraded" episode).
    """

    identity: int
    start_frame: int
    length: int
    visibility_floor: float = 0.5


@dataclass
class SynthParams:
    n_identities: int = 5
    n_frames: int = 200
    frame_rate: float = 30.0
    motion: MotionLaw = MotionLaw.LINEAR
    velocity_range: tuple[float, float] = (-2.0, 2.0)
    box_noise_std: float = 0.0
    embedding_dim: int = 32
    embedding_noise_std: float = 0.0
    occlusion_episodes: list[OcclusionEpisode] = field(default_factory=list)
    miss_rate: float = 0.0
    false_positive_rate: float = 0.0
    camera_drift: tuple[float, float] = (0.0, 0.0)
    seed: int = 0
    img_width: int = 1920
    img_height: int = 1080
    orthogonal_prototypes: bool = False
    name: str = "synth"


@dataclass
class SynthSequence:
    gt: list[Detection]
    dets: list[Detection]
    embeddings: EmbeddingFile
    meta: SequenceMeta


SYNTH_PRESETS: dict[str, SynthParams] = {
    "clean": SynthParams(n_identities=5, n_frames=200, name="synth-clean"),
    "occlusion": SynthParams(
        n_identities=8,
        n_frames=200,
        occlusion_episodes=[
            OcclusionEpisode(identity=2, start_frame=60, length=10),
            OcclusionEpisode(identity=4, start_frame=90, length=10),
            OcclusionEpisode(identity=6, start_frame=120, length=10),
            OcclusionEpisode(identity=8, start_frame=150, length=10),
        ],
        name="synth-occlusion",
    ),
    "moving-camera": SynthParams(
        n_identities=6,
        n_frames=150,
        motion=MotionLaw.SINUSOIDAL,
        camera_drift=(2.0, 0.5),
        box_noise_std=0.5,
        embedding_noise_std=0.05,
        name="synth-moving-camera",
    ),
    "crowded": SynthParams(
        n_identities=20,
        n_frames=120,
        velocity_range=(-1.5, 1.5),
        box_noise_std=0.5,
        embedding_noise_std=0.05,
        miss_rate=0.05,
        false_positive_rate=0.5,
        occlusion_episodes=[
            OcclusionEpisode(identity=3, start_frame=40, length=8),
            OcclusionEpisode(identity=11, start_frame=70, length=12),
        ],
        name="synth-crowded",
    ),
}


def preset(name: str, seed: int | None = None) -> SynthParams:
    if name not in SYNTH_PRESETS:
        raise InvalidParams(f"unknown preset '{name}', choose from {sorted(SYNTH_PRESETS)}")
    params = SYNTH_PRESETS[name]
    return replace(params, seed=seed) if seed is not None else replace(params)


def _validate(p: SynthParams) -> None:
    if p.n_identities < 1:
        raise InvalidParams("n_identities must be >= 1")
    if p.n_frames < 1:
        raise InvalidParams("n_frames must be >= 1")
    if p.frame_rate <= 0:
        raise InvalidParams("frame_rate must be > 0")
    if not (0.0 <= p.miss_rate <= 1.0):
        raise InvalidParams("miss_rate must be in [0,1]")
    if p.false_positive_rate < 0:
        raise InvalidParams("false_positive_rate must be >= 0")
    if p.embedding_dim < 1:
        raise InvalidParams("embedding_dim must be >= 1")
    if p.box_noise_std < 0 or p.embedding_noise_std < 0:
        raise InvalidParams("noise stds must be >= 0")
    if p.velocity_range[0] > p.velocity_range[1]:
        raise InvalidParams("velocity_range must be (lo, hi) with lo <= hi")
    if p.orthogonal_prototypes and p.n_identities > p.embedding_dim:
        raise InvalidParams("orthogonal prototypes need n_identities <= embedding_dim")
    for ep in p.occlusion_episodes:
        if not (1 <= ep.identity <= p.n_identities):
            raise InvalidParams(f"episode identity {ep.identity} out of range")
        if ep.length < 1 or ep.start_frame < 1:
            raise InvalidParams("episode start_frame and length must be >= 1")
        if not (0.0 <= ep.visibility_floor <= 1.0):
            raise InvalidParams("visibility_floor must be in [0,1]")


def _prototypes(p: SynthParams, rng: np.random.Generator) -> np.ndarray:
    raw = rng.normal(size=(p.embedding_dim, max(p.n_identities, 1)))
    if p.orthogonal_prototypes:
        q, _ = np.linalg.qr(raw)
        return q[:, : p.n_identities].T
    vecs = raw[:, : p.n_identities].T
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def generate(p: SynthParams) -> SynthSequence:
    """Build ground truth, detections, embeddings, and metadata in memory."""
    _validate(p)
    rng = np.random.default_rng(p.seed)

    prototypes = _prototypes(p, rng)

    # Per-identity trajectory parameters, sampled in identity order.
    cols = math.ceil(math.sqrt(p.n_identities))
    rows = math.ceil(p.n_identities / cols)
    cell_w = p.img_width / cols
    cell_h = p.img_height / rows
    starts, sizes, velocities, wobble = [], [], [], []
    for i in range(p.n_identities):
        cx = (i % cols + 0.5) * cell_w + rng.uniform(-cell_w / 8, cell_w / 8)
        cy = (i // cols + 0.5) * cell_h + rng.uniform(-cell_h / 8, cell_h / 8)
        w = rng.uniform(30, 50)
        h = rng.uniform(60, 100)
        starts.append((cx - w / 2, cy - h / 2))
        sizes.append((w, h))
        velocities.append(rng.uniform(p.velocity_range[0], p.velocity_range[1], size=2))
        wobble.append(
            (rng.uniform(10, 40), rng.uniform(40, 80), rng.uniform(0, 2 * math.pi))
        )

    episodes = {
        (ep.identity, f): ep
        for ep in p.occlusion_episodes
        for f in range(ep.start_frame, ep.start_frame + ep.length)
    }

    gt: list[Detection] = []
    dets: list[Detection] = []
    records: dict[tuple[int, int], np.ndarray] = {}

    for frame in range(1, p.n_frames + 1):
        t = frame - 1
        frame_dets: list[tuple[BoundingBox, float, np.ndarray]] = []
        for i in range(p.n_identities):
            x0, y0 = starts[i]
            w, h = sizes[i]
            vx, vy = velocities[i]
            x = x0 + vx * t + p.camera_drift[0] * t
            y = y0 + vy * t + p.camera_drift[1] * t
            if p.motion is MotionLaw.SINUSOIDAL:
                amp, period, phase = wobble[i]
                x += amp * math.sin(2 * math.pi * t / period + phase)
                y += amp * math.cos(2 * math.pi * t / period + phase)
            box = BoundingBox(x, y, w, h)

            episode = episodes.get((i + 1, frame))
            visibility = 0.0 if episode is not None else 1.0
            suppressed = episode is not None and visibility < episode.visibility_floor
            gt.append(
                Detection(
                    frame=frame,
                    box=box,
                    confidence=0.0 if suppressed else 1.0,  # GT consider-flag
                    obj_id=i + 1,
                    visibility=visibility,
                )
            )
            if suppressed:
                continue
            if p.miss_rate > 0 and rng.uniform() < p.miss_rate:
                continue
            if p.box_noise_std > 0:
                jitter = rng.normal(0.0, p.box_noise_std, size=4)
                det_box = BoundingBox(
                    box.x + jitter[0],
                    box.y + jitter[1],
                    max(box.w + jitter[2], 1.0),
                    max(box.h + jitter[3], 1.0),
                )
            else:
                det_box = box
            emb = prototypes[i].copy()
            if p.embedding_noise_std > 0:
                scale = p.embedding_noise_std * (1.0 + (1.0 - visibility))
                emb = emb + rng.normal(0.0, scale, size=p.embedding_dim)
            emb = emb / np.linalg.norm(emb)
            frame_dets.append((det_box, 1.0, emb))

        if p.false_positive_rate > 0:
            for _ in range(rng.poisson(p.false_positive_rate)):
                w = rng.uniform(25, 60)
                h = rng.uniform(50, 120)
                fp_box = BoundingBox(
                    rng.uniform(0, p.img_width - w),
                    rng.uniform(0, p.img_height - h),
                    w,
                    h,
                )
                fp_emb = rng.normal(size=p.embedding_dim)
                fp_emb = fp_emb / np.linalg.norm(fp_emb)
                frame_dets.append((fp_box, float(rng.uniform(0.5, 1.0)), fp_emb))

        for source_index, (box, conf, emb) in enumerate(frame_dets):
            dets.append(
                Detection(
                    frame=frame,
                    box=box,
                    confidence=conf,
                    embedding=emb,
                    source_index=source_index,
                )
            )
            records[(frame, source_index)] = emb

    meta = SequenceMeta(
        name=p.name,
        frame_rate=p.frame_rate,
        seq_length=p.n_frames,
        camera_moving=p.camera_drift != (0.0, 0.0),
        img_width=p.img_width,
        img_height=p.img_height,
    )
    return SynthSequence(
        gt=gt,
        dets=dets,
        embeddings=EmbeddingFile(dim=p.embedding_dim, records=records),
        meta=meta,
    )


def write_sequence(seq: SynthSequence, out_dir) -> dict[str, Path]:
    """Emit gt.txt, det.txt, embeddings.gemb, and seqinfo.ini into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "gt": out / "gt.txt",
        "det": out / "det.txt",
        "embeddings": out / "embeddings.gemb",
        "seqinfo": out / "seqinfo.ini",
    }
    write_mot_gt(paths["gt"], seq.gt)
    write_mot_detections(paths["det"], seq.dets)
    write_embeddings(paths["embeddings"], seq.embeddings)
    write_seqinfo(paths["seqinfo"], seq.meta)
    return paths
