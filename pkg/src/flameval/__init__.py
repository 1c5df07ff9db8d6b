"""Latency-aware evaluation for real-time video semantic segmentation.

Two evaluation modes share one confusion-matrix engine:

* static: a prediction is scored against the ground truth of its own
  input frame (latency ignored).
* flame: a prediction is scored against the ground truth of the frame
  that is current once its processing latency has elapsed, i.e. the
  frame appearing ceil(latency / interval) steps after the input.

The package also ships a deterministic synthetic-scene generator and
simulated predictors whose flame scores are exactly computable, so the
metric's behavior under latency can be verified at desk scale.
"""

from .labelmap import (
    IGNORE_VALUE,
    ClassSet,
    LabelMap,
    LabelMapError,
    read_labelmap,
    validate_labels,
    write_labelmap,
)
from .latency import (
    FrameTiming,
    LatencyModel,
    frame_offset,
    load_latency_trace,
    resolve_target_frame,
)
from .metrics import ClassIoU, ConfusionMatrix, EmptyEvaluationError, MiouResult
from .dataset import (
    FLAME,
    STATIC,
    Dataset,
    EvalPair,
    FrameEntry,
    ManifestError,
    PairingResult,
    PredictionRecord,
    SequenceManifest,
    cityscapes_input_index,
    load_manifest,
    load_predictions,
    pair_predictions,
    with_latencies,
)
from .report import EvalReport, LatencySummary, build_report, evaluate, evaluate_pairs
from .synth import (
    DELAYED_ORACLE,
    EXTRAPOLATING_ORACLE,
    ORACLE,
    ObjectSpec,
    Scene,
    SceneSpec,
    SimPredictor,
    SynthJob,
    load_scene_spec,
    materialize_scene,
    object_position,
    random_scene,
    render_frame,
    render_scene,
    run_predictor,
    simulate_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "IGNORE_VALUE",
    "ClassSet",
    "LabelMap",
    "LabelMapError",
    "read_labelmap",
    "validate_labels",
    "write_labelmap",
    "FrameTiming",
    "LatencyModel",
    "frame_offset",
    "load_latency_trace",
    "resolve_target_frame",
    "ClassIoU",
    "ConfusionMatrix",
    "EmptyEvaluationError",
    "MiouResult",
    "FLAME",
    "STATIC",
    "Dataset",
    "EvalPair",
    "FrameEntry",
    "ManifestError",
    "PairingResult",
    "PredictionRecord",
    "SequenceManifest",
    "cityscapes_input_index",
    "load_manifest",
    "load_predictions",
    "pair_predictions",
    "with_latencies",
    "EvalReport",
    "LatencySummary",
    "build_report",
    "evaluate",
    "evaluate_pairs",
    "DELAYED_ORACLE",
    "EXTRAPOLATING_ORACLE",
    "ORACLE",
    "ObjectSpec",
    "Scene",
    "SceneSpec",
    "SimPredictor",
    "SynthJob",
    "load_scene_spec",
    "materialize_scene",
    "object_position",
    "random_scene",
    "render_frame",
    "render_scene",
    "run_predictor",
    "simulate_experiment",
]
