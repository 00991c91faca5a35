"""Command-line surface: track, synth, eval, analyze.

Data goes to files or stdout; progress and timing go to stderr so outputs stay
pipe-safe. Exit codes: 0 success, 1 structured failure, 2 usage error. The
GHOST_LOG environment variable (error|info|debug) controls log verbosity.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from collections import defaultdict
from pathlib import Path

from . import analysis, synth
from .assoc import Tracker
from .core import TrackerConfig
from .errors import GhostError, MissingEmbedding
from .fileio import (
    MotKind,
    SequenceMeta,
    attach_embeddings,
    read_config,
    read_embeddings,
    read_mot,
    read_seqinfo,
    write_mot_results,
)

logger = logging.getLogger("ghosttrack")


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("GHOST_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def cmd_track(args) -> int:
    cfg = read_config(args.config) if args.config else TrackerConfig()
    detections = read_mot(args.det, MotKind.DETECTIONS)
    if cfg.appearance_enabled:
        if not args.emb:
            raise MissingEmbedding("appearance is enabled but no --emb file was given")
        attach_embeddings(detections, read_embeddings(args.emb))

    if args.seqinfo:
        meta = read_seqinfo(args.seqinfo)
        n_frames = meta.seq_length
    else:
        n_frames = max((d.frame for d in detections), default=0)

    by_frame = defaultdict(list)
    for det in detections:
        by_frame[det.frame].append(det)

    tracker = Tracker(cfg)
    born = evicted = 0
    start = time.perf_counter()
    for frame in range(1, n_frames + 1):
        result = tracker.step(by_frame.get(frame, []), frame)
        born += len(result.new_tracks)
        evicted += len(result.evicted)
    elapsed = time.perf_counter() - start

    write_mot_results(args.out, tracker.result_tracks())
    print(
        f"tracked {n_frames} frames: {born} tracks born, {evicted} evicted, "
        f"motion_weight={cfg.motion_weight:g}, {elapsed:.3f}s",
        file=sys.stderr,
    )
    return 0


def cmd_synth(args) -> int:
    if args.preset:
        params = synth.preset(args.preset, seed=args.seed)
    else:
        params = synth.SynthParams(
            n_identities=args.identities,
            n_frames=args.frames,
            frame_rate=args.fps,
            seed=args.seed if args.seed is not None else 0,
        )
    seq = synth.generate(params)
    paths = synth.write_sequence(seq, args.out)
    print(
        f"wrote {len(seq.gt)} gt rows, {len(seq.dets)} detections to {args.out}",
        file=sys.stderr,
    )
    for p in paths.values():
        logger.info("wrote %s", p)
    return 0


def _load_meta(args) -> SequenceMeta:
    if args.seqinfo:
        return read_seqinfo(args.seqinfo)
    return SequenceMeta(name="unknown", frame_rate=30.0, seq_length=0)


def cmd_eval(args) -> int:
    gt = read_mot(args.gt, MotKind.GROUND_TRUTH)
    results = read_mot(args.res, MotKind.RESULTS)
    meta = _load_meta(args)
    wanted = [m.strip().lower() for m in args.metrics.split(",") if m.strip()]
    known = {"mota", "idf1", "rca"}
    for m in wanted:
        if m not in known:
            raise GhostError(f"unknown metric '{m}', choose from {sorted(known)}")

    lines = ["metric\tvalue"]
    if "mota" in wanted:
        r = analysis.compute_mota(gt, results, iou_min=args.iou_min)
        lines.append(f"mota\t{r.mota:.4f}")
        lines.append(f"mota_fp\t{r.fp}")
        lines.append(f"mota_fn\t{r.fn}")
        lines.append(f"mota_idsw\t{r.idsw}")
    if "idf1" in wanted:
        idf1 = analysis.compute_idf1(gt, results, iou_min=args.iou_min)
        lines.append(f"idf1\t{idf1:.4f}")
    print("\n".join(lines))
    if "rca" in wanted:
        table = analysis.match_to_gt(results, gt, iou_min=args.iou_min)
        binning = analysis.RcaBinning(args.bins)
        report = analysis.compute_rca(table, gt, meta, binning)
        print(analysis.rca_report_to_tsv(report), end="")
    return 0


def cmd_analyze(args) -> int:
    cfg = read_config(args.config) if args.config else TrackerConfig()
    gt = read_mot(args.gt, MotKind.GROUND_TRUTH)
    dets = read_mot(args.det, MotKind.DETECTIONS)
    mode = analysis.DistanceMode(args.mode)
    emb = None
    if mode is not analysis.DistanceMode.MOTION:
        if not args.emb:
            raise MissingEmbedding(f"--mode {args.mode} needs an --emb file")
        emb = read_embeddings(args.emb)

    hists = analysis.build_distance_histograms(gt, dets, emb, cfg, mode)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"histograms_{mode.value}.tsv").write_text(analysis.histograms_to_tsv(hists))
        (out / f"histograms_{mode.value}.jsonl").write_text(analysis.histograms_to_jsonl(hists))
        print(f"wrote histograms to {out}", file=sys.stderr)
    else:
        print(analysis.histograms_to_tsv(hists), end="")

    if args.suggest_thresholds:
        act_x, act_cost = analysis.find_intersection_point(
            hists[analysis.HistPopulation.ACTIVE_SAME],
            hists[analysis.HistPopulation.ACTIVE_DIFF],
        )
        inact_x, inact_cost = analysis.find_intersection_point(
            hists[analysis.HistPopulation.INACTIVE_SAME],
            hists[analysis.HistPopulation.INACTIVE_DIFF],
        )
        print(f"suggested_tau_act\t{act_x:.4f}\tcost\t{act_cost:.2f}")
        print(f"suggested_tau_inact\t{inact_x:.4f}\tcost\t{inact_cost:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghosttrack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="run the tracker over a detection file")
    p_track.add_argument("--det", required=True, help="MOT detection file")
    p_track.add_argument("--emb", help="embedding sidecar (.gemb)")
    p_track.add_argument("--seqinfo", help="seqinfo.ini for the sequence")
    p_track.add_argument("--config", help="tracker config file (key=value)")
    p_track.add_argument("--out", required=True, help="result file to write")
    p_track.set_defaults(func=cmd_track)

    p_synth = sub.add_parser("synth", help="generate a synthetic sequence")
    p_synth.add_argument("--preset", choices=sorted(synth.SYNTH_PRESETS), help="parameter bundle")
    p_synth.add_argument("--identities", type=int, default=5)
    p_synth.add_argument("--frames", type=int, default=200)
    p_synth.add_argument("--fps", type=float, default=30.0)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.set_defaults(func=cmd_synth)

    p_eval = sub.add_parser("eval", help="score a result file against ground truth")
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--res", required=True)
    p_eval.add_argument("--seqinfo")
    p_eval.add_argument("--metrics", default="mota,idf1")
    p_eval.add_argument("--bins", default="overall",
                        choices=[b.value for b in analysis.RcaBinning])
    p_eval.add_argument("--iou-min", type=float, default=0.5)
    p_eval.set_defaults(func=cmd_eval)

    p_an = sub.add_parser("analyze", help="distance histograms and threshold suggestion")
    p_an.add_argument("--gt", required=True)
    p_an.add_argument("--det", required=True)
    p_an.add_argument("--emb")
    p_an.add_argument("--config")
    p_an.add_argument("--mode", default="proxy",
                      choices=[m.value for m in analysis.DistanceMode])
    p_an.add_argument("--suggest-thresholds", action="store_true")
    p_an.add_argument("--out", help="directory for histogram files")
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GhostError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
