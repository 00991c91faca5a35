"""Bounding-box arithmetic for motion costs and ground-truth matching."""
from __future__ import annotations

import numpy as np

from .core import BoundingBox


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Touching edges have measure-zero overlap and count as 0. Areas use the
    same (x + w) - x arithmetic as the intersection so iou(a, a) is exactly 1.
    """
    ax2, ay2 = a.x + a.w, a.y + a.h
    bx2, by2 = b.x + b.w, b.y + b.h
    ix = max(0.0, min(ax2, bx2) - max(a.x, b.x))
    iy = max(0.0, min(ay2, by2) - max(a.y, b.y))
    inter = ix * iy
    if inter <= 0.0:
        return 0.0
    area_a = (ax2 - a.x) * (ay2 - a.y)
    area_b = (bx2 - b.x) * (by2 - b.y)
    union = area_a + area_b - inter
    return inter / union


def motion_cost(a: BoundingBox, b: BoundingBox) -> float:
    """1 - IoU, so 0 is perfect overlap and 1 is disjoint."""
    return 1.0 - iou(a, b)


def iou_matrix(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two (N, 4) / (M, 4) arrays of [x, y, w, h] rows."""
    boxes_a = np.asarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    boxes_b = np.asarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    if boxes_a.size == 0 or boxes_b.size == 0:
        return np.zeros((boxes_a.shape[0], boxes_b.shape[0]))
    ax1, ay1 = boxes_a[:, 0:1], boxes_a[:, 1:2]
    ax2, ay2 = ax1 + boxes_a[:, 2:3], ay1 + boxes_a[:, 3:4]
    bx1, by1 = boxes_b[:, 0], boxes_b[:, 1]
    bx2, by2 = bx1 + boxes_b[:, 2], by1 + boxes_b[:, 3]

    ix = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    iy = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = ix * iy
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = area_a + area_b - inter
    out = np.where(inter > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)
    return out
