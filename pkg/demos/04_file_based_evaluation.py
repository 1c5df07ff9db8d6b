"""The full file-based path: materialize a scene, then evaluate it.

Synthetic data flows through exactly the same manifests, PGM files, and
evaluation code as real datasets, so this doubles as a worked example of
the on-disk formats.  Equivalent CLI session:

    flameval synth --spec scene.json --out-dir out/
    flameval eval --dataset out/dataset.json \
        --predictions out/predictions_delayed_oracle.json \
        --mode flame --out report.json
    flameval offset 180 60
"""

import json
import tempfile
from pathlib import Path

from flameval import (
    DELAYED_ORACLE,
    FLAME,
    STATIC,
    LatencyModel,
    evaluate,
    load_manifest,
    load_predictions,
    load_scene_spec,
    materialize_scene,
    with_latencies,
)

scene_doc = {
    "width": 48,
    "height": 48,
    "num_frames": 15,
    "interval_ms": 60.0,
    "objects": [
        {"class_id": 1, "width": 12, "height": 8, "x": 2, "y": 6, "vx": 2, "vy": 0},
        {"class_id": 2, "width": 6, "height": 6, "x": 38, "y": 38, "vx": -1, "vy": -2},
    ],
    "predictors": [{"kind": DELAYED_ORACLE, "latency_ms": 180.0}],
}

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    spec_path = tmp / "scene.json"
    spec_path.write_text(json.dumps(scene_doc, indent=2), encoding="utf-8")

    job = load_scene_spec(spec_path)
    manifests = materialize_scene(job, tmp / "out")
    print("materialized:", sorted(p.name for p in (tmp / "out").iterdir()))

    dataset = load_manifest(manifests["dataset"])
    predictions = load_predictions(manifests[DELAYED_ORACLE])
    print(f"{len(predictions)} predictions over {len(dataset.sequences)} sequence(s)")
    print()

    for mode in (STATIC, FLAME):
        report = evaluate(dataset, predictions, mode)
        print(f"--- {mode} ---")
        print(report.render_table())

    # Latency traces: re-score the same prediction files as if they were
    # produced by slower hardware (one measured latency per input frame).
    trace = tmp / "slow_gpu.csv"
    trace.write_text(
        "frame_index,latency_ms\n"
        + "".join(f"{p.input_frame_index},300.0\n" for p in predictions),
        encoding="utf-8",
    )
    slower = with_latencies(predictions, LatencyModel.from_trace(trace))
    report = evaluate(dataset, slower, FLAME)
    print("--- flame, same predictions re-timed at 300 ms (k = 5) ---")
    print(report.render_table())
