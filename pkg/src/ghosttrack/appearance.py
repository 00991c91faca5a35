"""Appearance costs between embedding features.

Active tracks are compared through the embedding of their most recent
detection. Inactive tracks summarize their whole gallery, either through the
mean of pairwise cosine distances or through a proxy feature vector
(mean/mode/median/EMA). `renormalize_frame` re-standardizes the embeddings of
one frame with that frame's own batch statistics, which stands in for running
a normalization layer with test-batch moments.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .core import Detection, ProxyMethod, Track, TrackerConfig
from .errors import (
    DimensionMismatch,
    EmptyGallery,
    MissingEmaState,
    MissingEmbedding,
    ZeroVector,
)

_ZERO_NORM = 1e-12
MODE_QUANTUM = 1e-4  # quantization bin for the per-dimension mode of continuous features


def normalize(vec: np.ndarray) -> np.ndarray:
    """Scale to unit L2 norm. Raises ZeroVector for degenerate input."""
    vec = np.asarray(vec, dtype=np.float64)
    n = np.linalg.norm(vec)
    if n < _ZERO_NORM:
        raise ZeroVector(f"cannot normalize vector with norm {n}")
    return vec / n


def cosine_distance(f_i: np.ndarray, f_j: np.ndarray) -> float:
    """1 - cos(f_i, f_j): 0 parallel, 1 orthogonal, 2 antiparallel."""
    f_i = np.asarray(f_i, dtype=np.float64)
    f_j = np.asarray(f_j, dtype=np.float64)
    if f_i.shape != f_j.shape:
        raise DimensionMismatch(f"shape {f_i.shape} vs {f_j.shape}")
    ni = np.linalg.norm(f_i)
    nj = np.linalg.norm(f_j)
    if ni < _ZERO_NORM or nj < _ZERO_NORM:
        raise ZeroVector("cosine distance undefined for zero vector")
    return float(1.0 - np.dot(f_i, f_j) / (ni * nj))


def cosine_distance_matrix(queries: np.ndarray, gallery: np.ndarray) -> np.ndarray:
    """Pairwise cosine distances between rows of two matrices (rows unit-normalized here)."""
    q = np.asarray(queries, dtype=np.float64)
    g = np.asarray(gallery, dtype=np.float64)
    qn = np.linalg.norm(q, axis=1, keepdims=True)
    gn = np.linalg.norm(g, axis=1, keepdims=True)
    if np.any(qn < _ZERO_NORM) or np.any(gn < _ZERO_NORM):
        raise ZeroVector("cosine distance undefined for zero vector")
    return 1.0 - (q / qn) @ (g / gn).T


def proxy_distance_mean(f_i: np.ndarray, gallery: Sequence[np.ndarray]) -> float:
    """Mean cosine distance from a query to every stored gallery vector.

    With unit-normalized vectors this equals 1 - mean(f_i . g) over the gallery.
    """
    if len(gallery) == 0:
        raise EmptyGallery("proxy distance needs at least one gallery vector")
    total = 0.0
    for g in gallery:
        total += cosine_distance(f_i, g)
    return total / len(gallery)


def _mode_vector(stack: np.ndarray) -> np.ndarray:
    # Per-dimension most frequent value after quantizing; ties go to the
    # smaller value, which sorting guarantees when counts are equal.
    quantized = np.round(stack / MODE_QUANTUM) * MODE_QUANTUM
    out = np.empty(stack.shape[1])
    for d in range(stack.shape[1]):
        values, counts = np.unique(quantized[:, d], return_counts=True)
        out[d] = values[np.argmax(counts)]
    return out


def proxy_feature(
    gallery: Sequence[np.ndarray],
    method: ProxyMethod,
    ema_state: Optional[np.ndarray] = None,
    alpha: float = 0.9,
) -> np.ndarray:
    """Summarize a gallery into one unit-normalized feature vector.

    For EMA the gallery is folded through `alpha * prev + (1 - alpha) * new`
    starting from `ema_state` (or from the first gallery vector if no state is
    given).
    """
    if method is ProxyMethod.EMA_FEATURE:
        state = None if ema_state is None else np.asarray(ema_state, dtype=np.float64)
        vectors = list(gallery)
        if state is None:
            if not vectors:
                raise MissingEmaState("EMA proxy needs a previous state or a gallery")
            state, vectors = np.asarray(vectors[0], dtype=np.float64), vectors[1:]
        for v in vectors:
            state = alpha * state + (1.0 - alpha) * np.asarray(v, dtype=np.float64)
        return normalize(state)

    if len(gallery) == 0:
        raise EmptyGallery("proxy feature needs at least one gallery vector")
    stack = np.stack([np.asarray(g, dtype=np.float64) for g in gallery])
    if method is ProxyMethod.MEAN_FEATURE:
        return normalize(stack.mean(axis=0))
    if method is ProxyMethod.MODE_FEATURE:
        return normalize(_mode_vector(stack))
    if method is ProxyMethod.MEDIAN_FEATURE:
        return normalize(np.median(stack, axis=0))
    raise ValueError(f"{method} does not define a proxy feature vector")


def renormalize_frame(
    features: np.ndarray,
    gamma: float | np.ndarray = 1.0,
    beta: float | np.ndarray = 0.0,
    eps: float = 1e-5,
) -> np.ndarray:
    """Re-standardize one frame's feature matrix with its own batch moments.

    `features` is D x M (one column per detection). Each dimension is mapped to
    gamma * (x - mean) / sqrt(var + eps) + beta, with mean/variance taken over
    the M detections of this frame (population variance). Frames with fewer
    than two detections pass through unchanged since batch variance is then
    zero or undefined.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimensionMismatch(f"expected D x M matrix, got shape {features.shape}")
    d = features.shape[0]
    gamma = np.asarray(gamma, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    for name, arr in (("gamma", gamma), ("beta", beta)):
        if arr.ndim not in (0, 1) or (arr.ndim == 1 and arr.shape[0] != d):
            raise DimensionMismatch(f"{name} must be scalar or length {d}")
    if features.shape[1] < 2:
        return features.copy()
    mu = features.mean(axis=1, keepdims=True)
    var = features.var(axis=1, keepdims=True)  # population variance
    g = gamma.reshape(-1, 1) if gamma.ndim == 1 else gamma
    b = beta.reshape(-1, 1) if beta.ndim == 1 else beta
    return g * (features - mu) / np.sqrt(var + eps) + b


def appearance_cost(track: Track, detection: Detection, cfg: TrackerConfig) -> float:
    """Cosine-based cost between a detection and a track.

    Active tracks use their last stored embedding; inactive tracks use the
    configured proxy over the whole gallery.
    """
    if detection.embedding is None:
        raise MissingEmbedding(f"detection at frame {detection.frame} has no embedding")
    if not track.embeddings:
        raise MissingEmbedding(f"track {track.id} has no stored embeddings")

    if track.status.is_active:
        return cosine_distance(detection.embedding, track.embeddings[-1])

    if cfg.proxy_method is ProxyMethod.MEAN_OF_DISTANCES:
        return proxy_distance_mean(detection.embedding, track.embeddings)
    # Proxies are derived on demand from the raw per-detection gallery; the
    # EMA fold starts from the track's first embedding.
    proxy = proxy_feature(track.embeddings, cfg.proxy_method, alpha=cfg.ema_alpha)
    return cosine_distance(detection.embedding, proxy)
