"""Evaluation report assembly, JSON serialization, and text rendering.

Rational quantities (per-class IoU, mIoU) are serialized twice: as exact
integer numerator/denominator for golden-file comparisons, and as a
4-place decimal for human consumption.  The text table is rendered from
the same structure as the JSON, so the two always agree.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .dataset import Dataset, pair_predictions
from .labelmap import ClassSet, read_labelmap
from .metrics import ClassIoU, ConfusionMatrix, EmptyEvaluationError


def decimal4(value) -> float:
    """4-place decimal rendering shared by the JSON and the text table."""
    return float(f"{float(value):.4f}")


@dataclass(frozen=True)
class LatencySummary:
    min_ms: float
    max_ms: float
    mean_ms: float

    @property
    def fps(self) -> float | None:
        """Throughput implied by the mean latency, frames per second."""
        if self.mean_ms <= 0:
            return None
        return 1000.0 / self.mean_ms


@dataclass(frozen=True)
class EvalReport:
    mode: str
    per_class: tuple[ClassIoU, ...]
    miou: Fraction
    num_defined_classes: int
    pairs_evaluated: int
    exclusions: dict[str, int]
    offsets_histogram: dict[int, int]
    latency_summary: LatencySummary
    dataset_interval_ms: float | None

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "miou": {
                "numerator": self.miou.numerator,
                "denominator": self.miou.denominator,
                "decimal": decimal4(self.miou),
            },
            "num_defined_classes": self.num_defined_classes,
            "per_class": [
                {
                    "class_id": c.class_id,
                    "intersection": c.intersection,
                    "union": c.union,
                    "iou": decimal4(c.iou) if c.defined else None,
                }
                for c in self.per_class
            ],
            "pairs_evaluated": self.pairs_evaluated,
            "exclusions": dict(sorted(self.exclusions.items())),
            "offsets_histogram": {str(k): v for k, v in sorted(self.offsets_histogram.items())},
            "latency_summary": {
                "min_ms": self.latency_summary.min_ms,
                "max_ms": self.latency_summary.max_ms,
                "mean_ms": self.latency_summary.mean_ms,
                "fps": decimal4(self.latency_summary.fps)
                if self.latency_summary.fps is not None
                else None,
            },
            "dataset_interval_ms": self.dataset_interval_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EvalReport":
        summary = doc["latency_summary"]
        return cls(
            mode=doc["mode"],
            per_class=tuple(
                ClassIoU(
                    class_id=c["class_id"],
                    intersection=c["intersection"],
                    union=c["union"],
                )
                for c in doc["per_class"]
            ),
            miou=Fraction(doc["miou"]["numerator"], doc["miou"]["denominator"]),
            num_defined_classes=doc["num_defined_classes"],
            pairs_evaluated=doc["pairs_evaluated"],
            exclusions={str(k): int(v) for k, v in doc["exclusions"].items()},
            offsets_histogram={int(k): int(v) for k, v in doc["offsets_histogram"].items()},
            latency_summary=LatencySummary(
                min_ms=summary["min_ms"],
                max_ms=summary["max_ms"],
                mean_ms=summary["mean_ms"],
            ),
            dataset_interval_ms=doc["dataset_interval_ms"],
        )

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_json_dict(json.loads(text))

    def render_table(self) -> str:
        """Aligned text table; every number is rendered from the same
        values that land in the JSON report."""
        doc = self.to_json_dict()
        summary = doc["latency_summary"]
        rows = [
            ("mode", doc["mode"]),
            ("pairs evaluated", str(doc["pairs_evaluated"])),
            (
                "mIoU",
                f"{doc['miou']['decimal']:.4f}  "
                f"(= {doc['miou']['numerator']}/{doc['miou']['denominator']})",
            ),
            ("defined classes", f"{doc['num_defined_classes']} of {len(doc['per_class'])}"),
            (
                "interval (ms)",
                str(doc["dataset_interval_ms"]) if doc["dataset_interval_ms"] is not None else "mixed",
            ),
            (
                "latency (ms)",
                f"min {summary['min_ms']} / mean {summary['mean_ms']} / max {summary['max_ms']}",
            ),
            ("FPS", f"{summary['fps']:.4f}" if summary["fps"] is not None else "n/a"),
            (
                "offsets (k)",
                ", ".join(f"{k}:{v}" for k, v in doc["offsets_histogram"].items()) or "none",
            ),
            (
                "exclusions",
                ", ".join(f"{k}:{v}" for k, v in doc["exclusions"].items()) or "none",
            ),
        ]
        label_width = max(len(label) for label, _ in rows)
        lines = [f"{label:<{label_width}}  {value}" for label, value in rows]
        lines.append("")
        lines.append(f"{'class':>5}  {'intersection':>12}  {'union':>12}  {'IoU':>9}")
        for c in doc["per_class"]:
            iou = f"{c['iou']:.4f}" if c["iou"] is not None else "undefined"
            lines.append(
                f"{c['class_id']:>5}  {c['intersection']:>12}  {c['union']:>12}  {iou:>9}"
            )
        return "\n".join(lines) + "\n"


def evaluate_pairs(pairs, classes: ClassSet, jobs: int | None = None) -> ConfusionMatrix:
    """Load each pair's label maps and accumulate one confusion matrix.

    With jobs > 1 the pairs are split across threads into independent
    matrices that are merged afterwards; integer addition makes the
    result identical to the sequential one.
    """
    pairs = list(pairs)
    jobs = max(1, jobs if jobs is not None else (os.cpu_count() or 1))

    def accumulate_chunk(chunk) -> ConfusionMatrix:
        cm = ConfusionMatrix(classes)
        for pair in chunk:
            gt = read_labelmap(pair.gt_path, classes)
            pred = read_labelmap(pair.pred_path, classes)
            cm.update(gt, pred)
        return cm

    if jobs == 1 or len(pairs) <= 1:
        return accumulate_chunk(pairs)
    chunks = [pairs[i::jobs] for i in range(jobs)]
    chunks = [c for c in chunks if c]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        matrices = list(pool.map(accumulate_chunk, chunks))
    merged = matrices[0]
    for other in matrices[1:]:
        merged = merged.merge(other)
    return merged


def build_report(
    mode: str,
    cm: ConfusionMatrix,
    pairs,
    exclusions: dict[str, int],
    dataset_interval_ms: float | None,
) -> EvalReport:
    pairs = list(pairs)
    if not pairs:
        raise EmptyEvaluationError(f"no evaluable pairs (exclusions: {dict(exclusions)})")
    result = cm.miou()
    latencies = [p.latency_ms for p in pairs]
    histogram = Counter(p.offset_used for p in pairs)
    return EvalReport(
        mode=mode,
        per_class=result.per_class,
        miou=result.miou,
        num_defined_classes=result.num_defined_classes,
        pairs_evaluated=len(pairs),
        exclusions=dict(sorted(exclusions.items())),
        offsets_histogram=dict(sorted(histogram.items())),
        latency_summary=LatencySummary(
            min_ms=min(latencies),
            max_ms=max(latencies),
            mean_ms=sum(latencies) / len(latencies),
        ),
        dataset_interval_ms=dataset_interval_ms,
    )


def evaluate(dataset: Dataset, predictions, mode: str, jobs: int | None = None) -> EvalReport:
    """Pair, accumulate, and report: the full evaluation for one dataset."""
    pairing = pair_predictions(dataset, predictions, mode)
    if not pairing.pairs:
        raise EmptyEvaluationError(f"no evaluable pairs (exclusions: {pairing.exclusions})")
    cm = evaluate_pairs(pairing.pairs, dataset.classes, jobs=jobs)
    intervals = {seq.timing.interval_ms for seq in dataset.sequences}
    interval = intervals.pop() if len(intervals) == 1 else None
    return build_report(mode, cm, pairing.pairs, pairing.exclusions, interval)
