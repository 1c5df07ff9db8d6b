"""Deterministic synthetic scenes and simulated predictors.

Scenes are axis-aligned rectangles moving at constant integer velocity
over a background of class 0.  Rectangles under integer translation have
a closed-form IoU, so every latency-aware score produced here can be
checked exactly by hand: no rasterization or anti-aliasing ambiguity.

Three simulated predictors bracket how real systems behave under latency
(offset k frames between input and the frame current at output time):

* ``oracle`` returns the future ground truth itself: the upper bound.
* ``delayed_oracle`` returns the perfect segmentation of its *input*
  frame: perfect but stale, like a network trained frame-to-frame.
* ``extrapolating_oracle`` shifts every object by k times its last
  observed per-frame displacement, like a two-frame network that infers
  direction and speed.  Under constant velocity its output matches the
  future ground truth exactly.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .labelmap import ClassSet, LabelMap, write_labelmap
from .latency import FrameTiming, frame_offset, resolve_target_frame
from .metrics import ConfusionMatrix
from .report import EvalReport, build_report
from .dataset import FLAME, STATIC, EXCLUDE_OUT_OF_SEQUENCE

BACKGROUND_CLASS = 0

ORACLE = "oracle"
DELAYED_ORACLE = "delayed_oracle"
EXTRAPOLATING_ORACLE = "extrapolating_oracle"
PREDICTOR_KINDS = (ORACLE, DELAYED_ORACLE, EXTRAPOLATING_ORACLE)


@dataclass(frozen=True)
class ObjectSpec:
    """A class_id rectangle at (x, y) moving (vx, vy) pixels per frame."""

    class_id: int
    width: int
    height: int
    x: int
    y: int
    vx: int = 0
    vy: int = 0


@dataclass(frozen=True)
class SceneSpec:
    """Frame geometry plus the moving rectangles drawn onto it.

    Later-listed objects draw over earlier ones.  Objects must fit inside
    the frame at frame 0; afterwards they are clipped at the borders.
    The seed only feeds randomized scene construction helpers; rendering
    itself is fully deterministic.
    """

    width: int
    height: int
    num_frames: int
    objects: tuple[ObjectSpec, ...] = ()
    num_classes: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame must be at least 1x1, got {self.width}x{self.height}")
        if self.num_frames < 1:
            raise ValueError(f"num_frames must be positive, got {self.num_frames}")
        k = self.resolved_num_classes
        if not 1 <= k <= 255:
            raise ValueError(f"num_classes must be in [1, 255], got {k}")
        for obj in self.objects:
            if obj.width < 1 or obj.height < 1:
                raise ValueError(f"degenerate object {obj.width}x{obj.height}")
            if obj.width > self.width or obj.height > self.height:
                raise ValueError(
                    f"object larger than frame: {obj.width}x{obj.height} "
                    f"in {self.width}x{self.height}"
                )
            if not (0 <= obj.x and obj.x + obj.width <= self.width):
                raise ValueError(f"object at x={obj.x} does not fit within the frame at frame 0")
            if not (0 <= obj.y and obj.y + obj.height <= self.height):
                raise ValueError(f"object at y={obj.y} does not fit within the frame at frame 0")
            if not 1 <= obj.class_id < k:
                raise ValueError(f"object class_id {obj.class_id} outside [1, {k})")

    @property
    def resolved_num_classes(self) -> int:
        if self.num_classes is not None:
            return self.num_classes
        return max((obj.class_id for obj in self.objects), default=0) + 1


@dataclass(frozen=True)
class Scene:
    """A rendered scene: the spec plus one ground-truth map per frame."""

    spec: SceneSpec
    frames: tuple[LabelMap, ...]

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, index: int) -> LabelMap:
        return self.frames[index]

    @property
    def num_classes(self) -> int:
        return self.spec.resolved_num_classes

    @property
    def classes(self) -> ClassSet:
        return ClassSet(self.num_classes)


@dataclass(frozen=True)
class SimPredictor:
    kind: str
    latency_ms: float

    def __post_init__(self):
        if self.kind not in PREDICTOR_KINDS:
            raise ValueError(f"unknown predictor kind {self.kind!r}")
        if self.latency_ms < 0:
            raise ValueError(f"latency_ms must be non-negative, got {self.latency_ms}")


def object_position(obj: ObjectSpec, frame: int) -> tuple[int, int]:
    return obj.x + frame * obj.vx, obj.y + frame * obj.vy


def _paint(spec: SceneSpec, positions) -> LabelMap:
    """Draw each object at the given (x, y), clipped to the frame bounds."""
    grid = np.full((spec.height, spec.width), BACKGROUND_CLASS, dtype=np.uint8)
    for obj, (x, y) in zip(spec.objects, positions):
        x0, x1 = max(x, 0), min(x + obj.width, spec.width)
        y0, y1 = max(y, 0), min(y + obj.height, spec.height)
        if x0 < x1 and y0 < y1:
            grid[y0:y1, x0:x1] = obj.class_id
    return LabelMap(grid)


def render_frame(spec: SceneSpec, frame: int) -> LabelMap:
    return _paint(spec, [object_position(obj, frame) for obj in spec.objects])


def render_scene(spec: SceneSpec) -> Scene:
    """Render every ground-truth frame; bit-identical for identical specs."""
    return Scene(spec=spec, frames=tuple(render_frame(spec, t) for t in range(spec.num_frames)))


def run_predictor(
    predictor: SimPredictor, scene: Scene, input_index: int, timing: FrameTiming
) -> LabelMap:
    """Simulated model output for one input frame.

    The predictor's latency and the frame interval fix the offset k it
    must bridge.  The extrapolating oracle reads the generator's object
    states (position at the input frame and one frame before), not
    pixels: it models the information ceiling of a system that sees two
    consecutive frames.
    """
    n = len(scene.frames)
    if not 0 <= input_index < n:
        raise ValueError(f"input_index {input_index} out of range [0, {n})")
    k = frame_offset(predictor.latency_ms, timing.interval_ms)
    if predictor.kind == DELAYED_ORACLE:
        return scene.frames[input_index]
    if predictor.kind == ORACLE:
        if input_index + k >= n:
            raise ValueError(f"oracle target {input_index + k} out of range [0, {n})")
        return scene.frames[input_index + k]
    if input_index < 1:
        raise ValueError("extrapolating oracle requires input_index >= 1")
    positions = []
    for obj in scene.spec.objects:
        x_now, y_now = object_position(obj, input_index)
        x_prev, y_prev = object_position(obj, input_index - 1)
        positions.append((x_now + k * (x_now - x_prev), y_now + k * (y_now - y_prev)))
    return _paint(scene.spec, positions)


def admissible_inputs(predictor: SimPredictor, num_frames: int, offset: int) -> range:
    """Input frames on which the predictor can produce an output at all."""
    if predictor.kind == ORACLE:
        return range(0, max(0, num_frames - offset))
    if predictor.kind == EXTRAPOLATING_ORACLE:
        return range(1, num_frames)
    return range(0, num_frames)


@dataclass(frozen=True)
class _SimPair:
    latency_ms: float
    offset_used: int


def simulate_experiment(
    spec: SceneSpec,
    predictor: SimPredictor,
    timing: FrameTiming,
    mode: str = FLAME,
) -> EvalReport:
    """Render, predict on every admissible frame, pair, accumulate, report.

    Predictions whose latency-resolved target falls past the end of the
    sequence are excluded and counted, exactly as in file-based runs.
    """
    if mode not in (STATIC, FLAME):
        raise ValueError(f"mode must be 'static' or 'flame', got {mode!r}")
    scene = render_scene(spec)
    n = spec.num_frames
    k = frame_offset(predictor.latency_ms, timing.interval_ms)
    cm = ConfusionMatrix(scene.classes)
    pairs: list[_SimPair] = []
    exclusions: Counter[str] = Counter()
    for i in admissible_inputs(predictor, n, k):
        if mode == FLAME:
            target = resolve_target_frame(i, predictor.latency_ms, timing, n)
            if target is None:
                exclusions[EXCLUDE_OUT_OF_SEQUENCE] += 1
                continue
        else:
            target = i
        cm.update(scene.frames[target], run_predictor(predictor, scene, i, timing))
        pairs.append(_SimPair(latency_ms=predictor.latency_ms, offset_used=target - i))
    return build_report(mode, cm, pairs, dict(exclusions), timing.interval_ms)


def random_scene(
    width: int = 64,
    height: int = 64,
    num_frames: int = 16,
    num_objects: int = 3,
    num_classes: int = 4,
    max_speed: int = 3,
    seed: int = 0,
) -> SceneSpec:
    """Seeded random rectangles, each fitting the frame at frame 0."""
    rng = np.random.default_rng(seed)
    objects = []
    for _ in range(num_objects):
        w = int(rng.integers(4, max(5, width // 3)))
        h = int(rng.integers(4, max(5, height // 3)))
        objects.append(
            ObjectSpec(
                class_id=int(rng.integers(1, num_classes)),
                width=w,
                height=h,
                x=int(rng.integers(0, width - w + 1)),
                y=int(rng.integers(0, height - h + 1)),
                vx=int(rng.integers(-max_speed, max_speed + 1)),
                vy=int(rng.integers(-max_speed, max_speed + 1)),
            )
        )
    return SceneSpec(
        width=width,
        height=height,
        num_frames=num_frames,
        objects=tuple(objects),
        num_classes=num_classes,
        seed=seed,
    )


@dataclass(frozen=True)
class SynthJob:
    """A scene plus the timing and predictors to materialize it with."""

    spec: SceneSpec
    timing: FrameTiming
    predictors: tuple[SimPredictor, ...]


def load_scene_spec(path) -> SynthJob:
    """Parse a scene spec JSON file.

    Schema: width, height, num_frames, interval_ms, plus optional seed,
    num_classes, objects (class_id, width, height, x, y, vx, vy) and
    predictors (kind, latency_ms).  When predictors are omitted, one of
    each kind at latency = interval_ms is used.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: top-level value must be an object")
    for key in ("width", "height", "num_frames", "interval_ms"):
        if not isinstance(doc.get(key), (int, float)):
            raise ValueError(f"{path}: missing or non-numeric {key!r}")
    objects = tuple(
        ObjectSpec(
            class_id=int(o["class_id"]),
            width=int(o["width"]),
            height=int(o["height"]),
            x=int(o["x"]),
            y=int(o["y"]),
            vx=int(o.get("vx", 0)),
            vy=int(o.get("vy", 0)),
        )
        for o in doc.get("objects", [])
    )
    spec = SceneSpec(
        width=int(doc["width"]),
        height=int(doc["height"]),
        num_frames=int(doc["num_frames"]),
        objects=objects,
        num_classes=doc.get("num_classes"),
        seed=int(doc.get("seed", 0)),
    )
    timing = FrameTiming(interval_ms=float(doc["interval_ms"]))
    if "predictors" in doc:
        predictors = tuple(
            SimPredictor(kind=p["kind"], latency_ms=float(p["latency_ms"]))
            for p in doc["predictors"]
        )
    else:
        predictors = tuple(
            SimPredictor(kind=kind, latency_ms=timing.interval_ms) for kind in PREDICTOR_KINDS
        )
    return SynthJob(spec=spec, timing=timing, predictors=predictors)


def _frame_name(index: int) -> str:
    return f"frame_{index:05d}.pgm"


def materialize_scene(job: SynthJob, out_dir) -> dict[str, Path]:
    """Write ground-truth PGM frames, a dataset manifest, and one
    prediction manifest (plus prediction maps) per predictor.

    Output is byte-deterministic: running twice yields identical trees.
    Returns the manifest paths keyed by "dataset" and each predictor kind.
    Synthetic data then flows through the exact same file-based
    evaluation path as real data.
    """
    kinds = [p.kind for p in job.predictors]
    if len(set(kinds)) != len(kinds):
        raise ValueError("predictor kinds must be unique per synth job (outputs are keyed by kind)")
    out_dir = Path(out_dir)
    spec, timing = job.spec, job.timing
    scene = render_scene(spec)

    gt_dir = out_dir / "gt"
    gt_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(scene.frames):
        write_labelmap(frame, gt_dir / _frame_name(i))

    manifests: dict[str, Path] = {}
    dataset_doc = {
        "num_classes": scene.num_classes,
        "sequences": [
            {
                "sequence_id": "synthetic",
                "interval_ms": timing.interval_ms,
                "frames": [
                    {"index": i, "gt": f"gt/{_frame_name(i)}"} for i in range(spec.num_frames)
                ],
            }
        ],
    }
    dataset_path = out_dir / "dataset.json"
    dataset_path.write_text(
        json.dumps(dataset_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    manifests["dataset"] = dataset_path

    for predictor in job.predictors:
        k = frame_offset(predictor.latency_ms, timing.interval_ms)
        pred_dir = out_dir / f"pred_{predictor.kind}"
        pred_dir.mkdir(parents=True, exist_ok=True)
        records = []
        for i in admissible_inputs(predictor, spec.num_frames, k):
            rel = f"pred_{predictor.kind}/{_frame_name(i)}"
            write_labelmap(run_predictor(predictor, scene, i, timing), out_dir / rel)
            records.append(
                {
                    "sequence_id": "synthetic",
                    "input_frame_index": i,
                    "latency_ms": predictor.latency_ms,
                    "pred": rel,
                }
            )
        pred_path = out_dir / f"predictions_{predictor.kind}.json"
        pred_path.write_text(
            json.dumps({"predictions": records}, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        manifests[predictor.kind] = pred_path
    return manifests
