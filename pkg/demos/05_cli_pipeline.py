"""The whole pipeline through the command-line interface.

synth -> track -> eval -> analyze, exactly as you would run it in a shell,
using the documented file formats (MOT text files, .gemb embedding sidecar,
seqinfo.ini, key=value config).
"""
import tempfile
from pathlib import Path

from ghosttrack.cli import main

workdir = Path(tempfile.mkdtemp(prefix="ghosttrack-demo-"))
seq_dir = workdir / "seq"
print(f"working in {workdir}\n")

# 1. generate a sequence with occlusions
assert main(["synth", "--preset", "occlusion", "--seed", "7", "--out", str(seq_dir)]) == 0
print("files:", sorted(p.name for p in seq_dir.iterdir()), "\n")

# 2. write a config that overrides one knob, then track
config = workdir / "tracker.cfg"
config.write_text("motion_weight=0.5\ninactive_patience=50\n")
result_file = workdir / "result.txt"
assert main([
    "track",
    "--det", str(seq_dir / "det.txt"),
    "--emb", str(seq_dir / "embeddings.gemb"),
    "--seqinfo", str(seq_dir / "seqinfo.ini"),
    "--config", str(config),
    "--out", str(result_file),
]) == 0
print(f"first result rows:\n{''.join(result_file.read_text().splitlines(True)[:3])}")

# 3. score it
assert main([
    "eval",
    "--gt", str(seq_dir / "gt.txt"),
    "--res", str(result_file),
    "--seqinfo", str(seq_dir / "seqinfo.ini"),
    "--metrics", "mota,idf1,rca",
    "--bins", "occlusion",
]) == 0
print()

# 4. suggest thresholds from the ground truth + embeddings
assert main([
    "analyze",
    "--gt", str(seq_dir / "gt.txt"),
    "--det", str(seq_dir / "det.txt"),
    "--emb", str(seq_dir / "embeddings.gemb"),
    "--mode", "proxy",
    "--suggest-thresholds",
    "--out", str(workdir / "histograms"),
]) == 0
