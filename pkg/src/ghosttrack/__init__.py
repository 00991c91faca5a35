"""Online tracking-by-detection with joint active/inactive association.

One Hungarian assignment per frame over a weighted sum of motion (1 - IoU
against a constant-velocity prediction) and appearance (cosine distance, with
gallery proxies for inactive tracks) costs, filtered by separate thresholds
for active and inactive track rows. Ships with MOTChallenge-style file I/O, a
seeded synthetic-sequence generator, and diagnostics (distance histograms,
association-rate tables, MOTA/IDF1).
"""

from .core import (
    BoundingBox,
    Detection,
    MotionModel,
    ProxyMethod,
    Track,
    TrackStatus,
    TrackerConfig,
    tracker_preset,
    validate_config,
)
from .assoc import CostMatrix, FrameResult, Tracker, build_cost_matrix, filter_matches, hungarian
from .geometry import iou, iou_matrix, motion_cost
from .appearance import (
    appearance_cost,
    cosine_distance,
    normalize,
    proxy_distance_mean,
    proxy_feature,
    renormalize_frame,
)
from .motion import KalmanBoxFilter, estimate_velocity, predict
from .fileio import (
    EmbeddingFile,
    MotKind,
    SequenceMeta,
    attach_embeddings,
    read_config,
    read_embeddings,
    read_mot,
    read_seqinfo,
    write_embeddings,
    write_mot_results,
)
from .synth import MotionLaw, OcclusionEpisode, SynthParams, SynthSequence, generate, preset, write_sequence
from .analysis import (
    DistanceMode,
    GtMatchTable,
    HistPopulation,
    Histogram,
    MotaResult,
    RcaBinning,
    RcaReport,
    build_distance_histograms,
    compute_idf1,
    compute_mota,
    compute_rca,
    find_intersection_point,
    match_to_gt,
)

__version__ = "0.1.0"
