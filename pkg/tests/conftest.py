from collections import defaultdict

import pytest

from ghosttrack.assoc import Tracker
from ghosttrack.core import Detection, TrackerConfig
from ghosttrack.synth import SynthSequence


def group_by_frame(detections):
    grouped = defaultdict(list)
    for det in detections:
        grouped[det.frame].append(det)
    return grouped


def run_tracker(seq: SynthSequence, cfg: TrackerConfig) -> list[Detection]:
    """Step a tracker over a synthetic sequence and return its output rows."""
    by_frame = group_by_frame(seq.dets)
    tracker = Tracker(cfg)
    for frame in range(1, seq.meta.seq_length + 1):
        tracker.step(by_frame.get(frame, []), frame)
    rows = []
    for track in tracker.result_tracks():
        for det in track.detections:
            rows.append(
                Detection(
                    frame=det.frame,
                    box=det.box,
                    confidence=det.confidence,
                    obj_id=track.id,
                )
            )
    return rows


@pytest.fixture
def tracker_rows():
    return run_tracker
