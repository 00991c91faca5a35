"""Distance histograms and data-driven matching thresholds.

Builds the four same/different-identity distance populations (active and
inactive) from a ground-truth-matched sequence, then finds the threshold that
minimizes false-positive plus false-negative match cost for each pair. With
well-separated embeddings the suggested thresholds split the histograms at
zero cost.
"""
from ghosttrack import (
    DistanceMode,
    HistPopulation,
    TrackerConfig,
    build_distance_histograms,
    find_intersection_point,
    generate,
)
from ghosttrack.synth import OcclusionEpisode, SynthParams

params = SynthParams(
    n_identities=5,
    n_frames=120,
    embedding_dim=32,
    embedding_noise_std=0.03,          # a little realism
    occlusion_episodes=[
        OcclusionEpisode(identity=2, start_frame=30, length=8),
        OcclusionEpisode(identity=4, start_frame=70, length=12),
    ],
    seed=11,
)
seq = generate(params)
cfg = TrackerConfig()

hists = build_distance_histograms(
    seq.gt, seq.dets, seq.embeddings, cfg, mode=DistanceMode.PROXY
)

for pop in HistPopulation:
    h = hists[pop]
    nonzero = [
        f"[{lo:.2f},{hi:.2f}):{c}"
        for lo, hi, c in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts)
        if c
    ]
    print(f"{pop.value:14s} n={h.total:5d}  {' '.join(nonzero[:6])}")

print()
tau_act, cost_act = find_intersection_point(
    hists[HistPopulation.ACTIVE_SAME], hists[HistPopulation.ACTIVE_DIFF]
)
tau_inact, cost_inact = find_intersection_point(
    hists[HistPopulation.INACTIVE_SAME], hists[HistPopulation.INACTIVE_DIFF]
)
print(f"suggested tau_act   = {tau_act:.3f} (fp+fn cost {cost_act:.1f})")
print(f"suggested tau_inact = {tau_inact:.3f} (fp+fn cost {cost_inact:.1f})")
print()
print("feed these into TrackerConfig(tau_act=..., tau_inact=...) or a config file.")
