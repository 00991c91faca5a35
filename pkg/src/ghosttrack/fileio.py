"""Readers and writers: MOTChallenge CSV, embedding sidecar, seqinfo, config.

All readers are total: any input either parses or raises a structured error
from `errors`; nothing crashes on arbitrary bytes. Files are read fully before
tracking starts.
"""
from __future__ import annotations

import configparser
import enum
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import BoundingBox, Detection, MotionModel, ProxyMethod, Track, TrackerConfig, validate_config
from .errors import (
    BadMagic,
    ConfigValueError,
    DuplicateRecord,
    MissingKey,
    ParseError,
    TruncatedFile,
    UnknownKey,
    VersionUnsupported,
)

GEMB_MAGIC = b"GEMB"
GBNP_MAGIC = b"GBNP"

# MOTChallenge ground-truth class ids treated as trackable targets by default
# (1 = pedestrian). Rows of other classes are dropped on read.
DEFAULT_KEEP_CLASSES = frozenset({1})


class MotKind(enum.Enum):
    DETECTIONS = "detections"
    GROUND_TRUTH = "ground_truth"
    RESULTS = "results"  # tracker output; the id column is the track id


@dataclass
class SequenceMeta:
    name: str
    frame_rate: float
    seq_length: int
    camera_moving: bool = False
    img_width: int = 1920
    img_height: int = 1080


@dataclass
class EmbeddingFile:
    """Per-detection feature vectors keyed by (frame, source_index)."""

    dim: int
    records: dict[tuple[int, int], np.ndarray]

    def get(self, frame: int, source_index: int) -> Optional[np.ndarray]:
        return self.records.get((frame, source_index))


# -- MOTChallenge text files -------------------------------------------------

def read_mot(
    path,
    kind: MotKind = MotKind.DETECTIONS,
    keep_classes: frozenset[int] = DEFAULT_KEEP_CLASSES,
) -> list[Detection]:
    """Parse `frame,id,x,y,w,h,conf,class,visibility` rows.

    Detection files use id -1 and may omit trailing fields. Ground-truth and
    result rows keep their id in `obj_id`; GT rows also keep their visibility,
    and GT rows whose class is not in `keep_classes` are dropped. Frames are
    1-based as stored. An empty file is a valid empty list.
    """
    text = Path(path).read_text()
    detections: list[Detection] = []
    per_frame_count: dict[int, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 6:
            raise ParseError(line_no, f"expected at least 6 fields, got {len(parts)}")
        try:
            frame = int(float(parts[0]))
            obj_id = int(float(parts[1]))
            x, y, w, h = (float(p) for p in parts[2:6])
            conf = float(parts[6]) if len(parts) > 6 else 1.0
            cls = int(float(parts[7])) if len(parts) > 7 else -1
            vis = float(parts[8]) if len(parts) > 8 else None
        except ValueError as exc:
            raise ParseError(line_no, f"bad number: {exc}") from exc
        if frame < 1:
            raise ParseError(line_no, f"frame index must be >= 1, got {frame}")
        if w <= 0 or h <= 0:
            raise ParseError(line_no, f"non-positive box size {w}x{h}")
        if not math.isfinite(conf):
            raise ParseError(line_no, "confidence must be finite")
        if vis is not None:
            vis = min(max(vis, 0.0), 1.0) if vis >= 0 else None  # -1 marks absent
        if kind is MotKind.GROUND_TRUTH and cls != -1 and cls not in keep_classes:
            continue
        source_index = per_frame_count.get(frame, 0)
        per_frame_count[frame] = source_index + 1
        try:
            box = BoundingBox(x, y, w, h)
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        detections.append(
            Detection(
                frame=frame,
                box=box,
                confidence=conf,
                source_index=source_index,
                obj_id=None if kind is MotKind.DETECTIONS else obj_id,
                visibility=vis if kind is MotKind.GROUND_TRUTH else None,
            )
        )
    return detections


def write_mot_results(path, tracks: list[Track]) -> None:
    """Write tracker output rows sorted by (frame, track id), 2-decimal boxes."""
    rows = []
    for track in tracks:
        for det in track.detections:
            rows.append((det.frame, track.id, det.box, det.confidence))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w") as fh:
        for frame, tid, box, conf in rows:
            fh.write(
                f"{frame},{tid},{box.x:.2f},{box.y:.2f},{box.w:.2f},{box.h:.2f},"
                f"{conf:.2f},-1,-1,-1\n"
            )


def write_mot_gt(path, rows: list[Detection]) -> None:
    """Write ground-truth rows; the confidence field is the 0/1 consider flag."""
    ordered = sorted(rows, key=lambda d: (d.frame, d.obj_id))
    with open(path, "w") as fh:
        for det in ordered:
            flag = 0 if det.confidence <= 0 else 1
            vis = 1.0 if det.visibility is None else det.visibility
            fh.write(
                f"{det.frame},{det.obj_id},{det.box.x:.2f},{det.box.y:.2f},"
                f"{det.box.w:.2f},{det.box.h:.2f},{flag},1,{vis:.2f}\n"
            )


def write_mot_detections(path, rows: list[Detection]) -> None:
    ordered = sorted(rows, key=lambda d: (d.frame, d.source_index))
    with open(path, "w") as fh:
        for det in ordered:
            fh.write(
                f"{det.frame},-1,{det.box.x:.2f},{det.box.y:.2f},"
                f"{det.box.w:.2f},{det.box.h:.2f},{det.confidence:.2f},-1,-1\n"
            )


# -- embedding sidecar (binary) ----------------------------------------------

_GEMB_HEADER = struct.Struct("<4sIIQ")
_GEMB_RECORD_KEY = struct.Struct("<II")


def write_embeddings(path, emb: EmbeddingFile) -> None:
    keys = sorted(emb.records)
    with open(path, "wb") as fh:
        fh.write(_GEMB_HEADER.pack(GEMB_MAGIC, 1, emb.dim, len(keys)))
        for key in keys:
            vec = np.asarray(emb.records[key], dtype="<f4")
            if vec.shape != (emb.dim,):
                raise ValueError(f"record {key} has dim {vec.shape}, expected ({emb.dim},)")
            fh.write(_GEMB_RECORD_KEY.pack(key[0], key[1]))
            fh.write(vec.tobytes())


def read_embeddings(path) -> EmbeddingFile:
    data = Path(path).read_bytes()
    if len(data) < _GEMB_HEADER.size:
        raise TruncatedFile(f"{path}: shorter than header")
    magic, version, dim, count = _GEMB_HEADER.unpack_from(data, 0)
    if magic != GEMB_MAGIC:
        raise BadMagic(f"{path}: expected {GEMB_MAGIC!r}, found {magic!r}")
    if version != 1:
        raise VersionUnsupported(f"{path}: version {version}")
    offset = _GEMB_HEADER.size
    record_size = _GEMB_RECORD_KEY.size + 4 * dim
    if len(data) - offset != count * record_size:
        raise TruncatedFile(
            f"{path}: expected {count * record_size} record bytes, found {len(data) - offset}"
        )
    records: dict[tuple[int, int], np.ndarray] = {}
    for _ in range(count):
        frame, source_index = _GEMB_RECORD_KEY.unpack_from(data, offset)
        offset += _GEMB_RECORD_KEY.size
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
        offset += 4 * dim
        key = (frame, source_index)
        if key in records:
            raise DuplicateRecord(f"{path}: duplicate record for {key}")
        records[key] = vec
    return EmbeddingFile(dim=dim, records=records)


def attach_embeddings(detections: list[Detection], emb: EmbeddingFile) -> None:
    """Set each detection's embedding from its (frame, source_index) record."""
    for det in detections:
        det.embedding = emb.get(det.frame, det.source_index)


# -- normalization parameter file ---------------------------------------------

def write_bn_params(path, gamma: np.ndarray, beta: np.ndarray) -> None:
    gamma = np.asarray(gamma, dtype="<f4").ravel()
    beta = np.asarray(beta, dtype="<f4").ravel()
    if gamma.shape != beta.shape:
        raise ValueError("gamma and beta must have equal length")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", GBNP_MAGIC, 1, gamma.shape[0]))
        fh.write(gamma.tobytes())
        fh.write(beta.tobytes())


def read_bn_params(path) -> tuple[np.ndarray, np.ndarray]:
    data = Path(path).read_bytes()
    head = struct.Struct("<4sII")
    if len(data) < head.size:
        raise TruncatedFile(f"{path}: shorter than header")
    magic, version, dim = head.unpack_from(data, 0)
    if magic != GBNP_MAGIC:
        raise BadMagic(f"{path}: expected {GBNP_MAGIC!r}, found {magic!r}")
    if version != 1:
        raise VersionUnsupported(f"{path}: version {version}")
    if len(data) != head.size + 8 * dim:
        raise TruncatedFile(f"{path}: expected {8 * dim} parameter bytes")
    gamma = np.frombuffer(data, dtype="<f4", count=dim, offset=head.size).astype(np.float64)
    beta = np.frombuffer(data, dtype="<f4", count=dim, offset=head.size + 4 * dim).astype(np.float64)
    return gamma, beta


# -- sequence metadata ---------------------------------------------------------

def read_seqinfo(path) -> SequenceMeta:
    """Parse a seqinfo.ini; frameRate and seqLength are required."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(Path(path).read_text())
    except configparser.Error as exc:
        raise ParseError(0, f"bad ini file: {exc}") from exc
    if not parser.has_section("Sequence"):
        raise MissingKey("Sequence")
    section = parser["Sequence"]
    if "frameRate" not in section:
        raise MissingKey("frameRate")
    if "seqLength" not in section:
        raise MissingKey("seqLength")
    try:
        return SequenceMeta(
            name=section.get("name", "unnamed"),
            frame_rate=float(section["frameRate"]),
            seq_length=int(section["seqLength"]),
            camera_moving=section.get("cameraMoving", "false").strip().lower()
            in ("true", "1", "yes"),
            img_width=int(section.get("imWidth", 1920)),
            img_height=int(section.get("imHeight", 1080)),
        )
    except ValueError as exc:
        raise ParseError(0, f"bad seqinfo value: {exc}") from exc


def write_seqinfo(path, meta: SequenceMeta) -> None:
    with open(path, "w") as fh:
        fh.write("[Sequence]\n")
        fh.write(f"name={meta.name}\n")
        fh.write(f"frameRate={meta.frame_rate:g}\n")
        fh.write(f"seqLength={meta.seq_length}\n")
        fh.write(f"imWidth={meta.img_width}\n")
        fh.write(f"imHeight={meta.img_height}\n")
        fh.write(f"cameraMoving={'true' if meta.camera_moving else 'false'}\n")


# -- tracker configuration -----------------------------------------------------

def _parse_bool(key: str, value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigValueError(key, f"expected a boolean, got '{value}'")


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigValueError(key, f"expected a number, got '{value}'") from exc


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigValueError(key, f"expected an integer, got '{value}'") from exc


def read_config(path) -> TrackerConfig:
    """Flat `key=value` config file; unknown keys are errors to catch typos.

    Absent keys take the defaults documented on TrackerConfig. `bn_params`
    names a parameter file whose gamma/beta vectors override the scalar
    defaults.
    """
    cfg = TrackerConfig()
    base = Path(path).parent
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(line_no, "expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "tau_act":
            cfg.tau_act = _parse_float(key, value)
        elif key == "tau_inact":
            cfg.tau_inact = _parse_float(key, value)
        elif key == "motion_weight":
            cfg.motion_weight = _parse_float(key, value)
        elif key == "velocity_window_k":
            cfg.velocity_window_k = None if value.lower() == "all" else _parse_int(key, value)
        elif key == "inactive_patience":
            cfg.inactive_patience = _parse_int(key, value)
        elif key == "det_confidence_min":
            cfg.det_confidence_min = _parse_float(key, value)
        elif key == "new_track_confidence_min":
            cfg.new_track_confidence_min = _parse_float(key, value)
        elif key == "proxy_method":
            try:
                cfg.proxy_method = ProxyMethod(value.lower())
            except ValueError:
                raise ConfigValueError(
                    key, f"'{value}' not one of {[m.value for m in ProxyMethod]}"
                ) from None
        elif key == "ema_alpha":
            cfg.ema_alpha = _parse_float(key, value)
        elif key == "motion_model":
            try:
                cfg.motion_model = MotionModel(value.lower())
            except ValueError:
                raise ConfigValueError(
                    key, f"'{value}' not one of {[m.value for m in MotionModel]}"
                ) from None
        elif key == "appearance_enabled":
            cfg.appearance_enabled = _parse_bool(key, value)
        elif key == "renormalize_per_frame":
            cfg.renormalize_per_frame = _parse_bool(key, value)
        elif key == "bn_eps":
            cfg.bn_eps = _parse_float(key, value)
        elif key == "bn_params":
            gamma, beta = read_bn_params(base / value if not Path(value).is_absolute() else value)
            cfg.bn_gamma, cfg.bn_beta = gamma, beta
        else:
            raise UnknownKey(key)
    validate_config(cfg)
    return cfg
