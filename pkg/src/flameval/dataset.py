"""Sequence and prediction manifests, and prediction/ground-truth pairing.

Datasets are described by an explicit JSON manifest rather than inferred
from directory layout: the frame interval is load-bearing for the
latency-aware metric and must never be guessed.  Referenced image files
stay unopened until evaluation (lazy).

Dataset manifest schema::

    { "sequences": [ { "sequence_id": str,
                       "interval_ms": number,
                       "timestamps_ms": [number] (optional),
                       "frames": [ { "index": int,
                                     "image": str (optional),
                                     "gt": str (optional) } ] } ],
      "num_classes": int }

Prediction manifest schema::

    { "predictions": [ { "sequence_id": str,
                         "input_frame_index": int,
                         "latency_ms": number,
                         "pred": str } ] }

All file paths are relative to the manifest file's directory.

Predictions whose required ground truth does not exist are excluded and
counted per reason ("missing_gt", "out_of_sequence"), never scored as
zero: with sparsely annotated data (e.g. Cityscapes, one labeled frame
per 30-frame sequence) missing ground truth is the norm.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

from .labelmap import ClassSet
from .latency import FrameTiming, LatencyModel, frame_offset, resolve_target_frame

STATIC = "static"
FLAME = "flame"
MODES = (STATIC, FLAME)

EXCLUDE_MISSING_GT = "missing_gt"
EXCLUDE_OUT_OF_SEQUENCE = "out_of_sequence"


class ManifestError(ValueError):
    """Schema violation or reference to a frame/sequence that does not exist."""


@dataclass(frozen=True)
class FrameEntry:
    index: int
    image_path: Path | None = None
    gt_path: Path | None = None


@dataclass(frozen=True)
class SequenceManifest:
    """Ordered frames of one video sequence plus its timing."""

    sequence_id: str
    timing: FrameTiming
    frames: tuple[FrameEntry, ...]

    def __post_init__(self):
        if not self.frames:
            raise ManifestError(f"sequence {self.sequence_id!r}: no frames")
        indices = [f.index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ManifestError(
                f"sequence {self.sequence_id!r}: frame indices must be strictly increasing"
            )
        if not any(f.gt_path is not None for f in self.frames):
            raise ManifestError(f"sequence {self.sequence_id!r}: no frame has ground truth")
        if self.timing.timestamps_ms is not None and len(self.timing.timestamps_ms) != len(
            self.frames
        ):
            raise ManifestError(
                f"sequence {self.sequence_id!r}: timestamps_ms must have one entry per frame"
            )

    @property
    def max_index(self) -> int:
        return self.frames[-1].index

    def entry_at(self, index: int) -> FrameEntry | None:
        return self._by_index().get(index)

    def position_of(self, index: int) -> int | None:
        entry = self._by_index().get(index)
        return None if entry is None else self._positions()[index]

    def _by_index(self) -> dict[int, FrameEntry]:
        # frozen dataclass: cache on first use
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {f.index: f for f in self.frames}
            self.__dict__["_index_cache"] = cache
        return cache

    def _positions(self) -> dict[int, int]:
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {f.index: pos for pos, f in enumerate(self.frames)}
            self.__dict__["_pos_cache"] = cache
        return cache


@dataclass(frozen=True)
class Dataset:
    classes: ClassSet
    sequences: tuple[SequenceManifest, ...]

    def __post_init__(self):
        ids = [s.sequence_id for s in self.sequences]
        if len(set(ids)) != len(ids):
            raise ManifestError("duplicate sequence_id in dataset")

    def sequence(self, sequence_id: str) -> SequenceManifest:
        for seq in self.sequences:
            if seq.sequence_id == sequence_id:
                return seq
        raise ManifestError(f"unknown sequence {sequence_id!r}")


@dataclass(frozen=True)
class PredictionRecord:
    """One model output: which frame went in, how long it took, where the map is."""

    sequence_id: str
    input_frame_index: int
    latency_ms: float
    pred_path: Path

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ManifestError(
                f"prediction for {self.sequence_id!r} frame {self.input_frame_index}: "
                f"negative latency {self.latency_ms}"
            )


@dataclass(frozen=True)
class EvalPair:
    """A prediction matched with the ground truth it is scored against."""

    sequence_id: str
    input_index: int
    target_index: int
    offset_used: int
    latency_ms: float
    pred_path: Path
    gt_path: Path


@dataclass(frozen=True)
class PairingResult:
    pairs: tuple[EvalPair, ...]
    exclusions: dict[str, int]

    @property
    def total_predictions(self) -> int:
        return len(self.pairs) + sum(self.exclusions.values())


def _require(condition: bool, message: str):
    if not condition:
        raise ManifestError(message)


def _load_json(path: Path) -> dict:
    try:
        with path.open(encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}") from None
    _require(isinstance(doc, dict), f"{path}: top-level value must be an object")
    return doc


def load_manifest(path) -> Dataset:
    """Load and validate a dataset manifest; referenced files stay unopened."""
    path = Path(path)
    doc = _load_json(path)
    base = path.parent

    _require("num_classes" in doc, f"{path}: missing num_classes")
    _require(isinstance(doc["num_classes"], int), f"{path}: num_classes must be an integer")
    classes = ClassSet(doc["num_classes"])

    _require(isinstance(doc.get("sequences"), list), f"{path}: sequences must be a list")
    sequences = []
    for raw in doc["sequences"]:
        _require(isinstance(raw, dict), f"{path}: each sequence must be an object")
        _require(isinstance(raw.get("sequence_id"), str), f"{path}: sequence_id must be a string")
        seq_id = raw["sequence_id"]
        _require(
            isinstance(raw.get("interval_ms"), (int, float)) and raw["interval_ms"] > 0,
            f"{path}: sequence {seq_id!r}: interval_ms must be a positive number",
        )
        timestamps = raw.get("timestamps_ms")
        if timestamps is not None:
            _require(
                isinstance(timestamps, list)
                and all(isinstance(t, (int, float)) for t in timestamps),
                f"{path}: sequence {seq_id!r}: timestamps_ms must be a list of numbers",
            )
            timestamps = tuple(float(t) for t in timestamps)
        timing = FrameTiming(interval_ms=float(raw["interval_ms"]), timestamps_ms=timestamps)

        _require(
            isinstance(raw.get("frames"), list) and raw["frames"],
            f"{path}: sequence {seq_id!r}: frames must be a non-empty list",
        )
        frames = []
        for f in raw["frames"]:
            _require(
                isinstance(f, dict) and isinstance(f.get("index"), int),
                f"{path}: sequence {seq_id!r}: each frame needs an integer index",
            )
            for key in ("image", "gt"):
                _require(
                    f.get(key) is None or isinstance(f[key], str),
                    f"{path}: sequence {seq_id!r} frame {f['index']}: {key} must be a path string",
                )
            frames.append(
                FrameEntry(
                    index=f["index"],
                    image_path=base / f["image"] if f.get("image") else None,
                    gt_path=base / f["gt"] if f.get("gt") else None,
                )
            )
        sequences.append(
            SequenceManifest(sequence_id=seq_id, timing=timing, frames=tuple(frames))
        )
    return Dataset(classes=classes, sequences=tuple(sequences))


def load_predictions(path) -> list[PredictionRecord]:
    """Load a prediction manifest; paths resolve relative to the manifest."""
    path = Path(path)
    doc = _load_json(path)
    base = path.parent
    _require(isinstance(doc.get("predictions"), list), f"{path}: predictions must be a list")
    records = []
    for raw in doc["predictions"]:
        _require(isinstance(raw, dict), f"{path}: each prediction must be an object")
        _require(isinstance(raw.get("sequence_id"), str), f"{path}: sequence_id must be a string")
        _require(
            isinstance(raw.get("input_frame_index"), int),
            f"{path}: input_frame_index must be an integer",
        )
        _require(
            isinstance(raw.get("latency_ms"), (int, float)),
            f"{path}: latency_ms must be a number",
        )
        _require(isinstance(raw.get("pred"), str), f"{path}: pred must be a path string")
        records.append(
            PredictionRecord(
                sequence_id=raw["sequence_id"],
                input_frame_index=raw["input_frame_index"],
                latency_ms=float(raw["latency_ms"]),
                pred_path=base / raw["pred"],
            )
        )
    return records


def with_latencies(
    predictions: list[PredictionRecord], model: LatencyModel
) -> list[PredictionRecord]:
    """Override each record's latency from a latency model (e.g. a measured trace)."""
    return [replace(p, latency_ms=model.latency_for(p.input_frame_index)) for p in predictions]


def pair_predictions(dataset: Dataset, predictions, mode: str) -> PairingResult:
    """Match predictions with the ground truth they are scored against.

    Static mode pairs each prediction with the ground truth of its own
    input frame; flame mode pairs it with the ground truth of the frame
    current once the prediction's latency has elapsed.  The result is
    sorted by (sequence_id, input index), so it does not depend on the
    order of the prediction list.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    pairs: list[EvalPair] = []
    exclusions: Counter[str] = Counter()

    for rec in predictions:
        seq = dataset.sequence(rec.sequence_id)
        input_entry = seq.entry_at(rec.input_frame_index)
        if input_entry is None:
            raise ManifestError(
                f"prediction references frame {rec.input_frame_index} "
                f"not present in sequence {rec.sequence_id!r}"
            )

        if mode == STATIC:
            target_entry, offset = input_entry, 0
        elif seq.timing.timestamps_ms is not None:
            pos = seq.position_of(rec.input_frame_index)
            target_pos = resolve_target_frame(pos, rec.latency_ms, seq.timing, len(seq.frames))
            if target_pos is None:
                exclusions[EXCLUDE_OUT_OF_SEQUENCE] += 1
                continue
            target_entry, offset = seq.frames[target_pos], target_pos - pos
        else:
            offset = frame_offset(rec.latency_ms, seq.timing.interval_ms)
            target_index = rec.input_frame_index + offset
            if target_index > seq.max_index:
                exclusions[EXCLUDE_OUT_OF_SEQUENCE] += 1
                continue
            target_entry = seq.entry_at(target_index)

        if target_entry is None or target_entry.gt_path is None:
            exclusions[EXCLUDE_MISSING_GT] += 1
            continue
        pairs.append(
            EvalPair(
                sequence_id=rec.sequence_id,
                input_index=rec.input_frame_index,
                target_index=target_entry.index,
                offset_used=offset,
                latency_ms=rec.latency_ms,
                pred_path=rec.pred_path,
                gt_path=target_entry.gt_path,
            )
        )

    pairs.sort(key=lambda p: (p.sequence_id, p.input_index))
    return PairingResult(pairs=tuple(pairs), exclusions=dict(sorted(exclusions.items())))


def cityscapes_input_index(annotated_index: int, latency_ms: float, interval_ms: float) -> int:
    """Input frame to feed a model so its output lands on the annotated frame.

    With only one annotated frame per sequence, latency-aware evaluation
    runs the model on the frame `offset` steps before the annotation:
    annotated_index - ceil(latency / interval).
    """
    offset = frame_offset(latency_ms, interval_ms)
    if offset > annotated_index:
        raise ValueError(
            f"frame offset {offset} exceeds annotated index {annotated_index}; "
            f"no valid input frame exists"
        )
    return annotated_index - offset
