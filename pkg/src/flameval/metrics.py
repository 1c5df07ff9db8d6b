"""Confusion-matrix accumulation and IoU / mIoU computation.

All pixel counts are kept as exact integers; IoU values are exact
rationals (`fractions.Fraction`) formed by a single division at read
time, so golden values can be asserted without floating-point tolerance.

The K x K confusion matrix is the sole accumulator: counts[g][p] is the
number of pixels whose ground truth is class g and whose prediction is
class p.  Ground-truth pixels carrying the ignore value contribute
nothing; predictions may never contain the ignore value.  Dataset-level
mIoU is computed from summed intersections and unions over all images,
not by averaging per-image mIoU values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .labelmap import ClassSet, LabelMap


class EmptyEvaluationError(RuntimeError):
    """No class has a non-zero union: there is nothing to score."""


@dataclass(frozen=True)
class ClassIoU:
    """Exact intersection/union tally for one class.

    A class absent from both ground truth and predictions has union 0 and
    an undefined IoU (`iou` is None).
    """

    class_id: int
    intersection: int
    union: int

    def __post_init__(self):
        if self.intersection < 0 or self.union < 0 or self.intersection > self.union:
            raise ValueError(
                f"invalid tally for class {self.class_id}: "
                f"intersection {self.intersection}, union {self.union}"
            )

    @property
    def defined(self) -> bool:
        return self.union > 0

    @property
    def iou(self) -> Fraction | None:
        if self.union == 0:
            return None
        return Fraction(self.intersection, self.union)


@dataclass(frozen=True)
class MiouResult:
    """Mean IoU over the classes with a defined (non-zero-union) IoU."""

    per_class: tuple[ClassIoU, ...]
    miou: Fraction
    num_defined_classes: int


class ConfusionMatrix:
    """K x K integer pixel-count accumulator.

    Independent matrices can be accumulated concurrently and combined
    with `merge`; integer addition makes the merge order irrelevant.
    """

    def __init__(self, classes: ClassSet, counts: np.ndarray | None = None) -> None:
        self.classes = classes
        k = classes.num_classes
        if counts is None:
            counts = np.zeros((k, k), dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
            if counts.shape != (k, k):
                raise ValueError(f"counts must be {k}x{k}, got {counts.shape}")
            if (counts < 0).any():
                raise ValueError("counts must be non-negative")
            counts = counts.copy()
        self.counts = counts

    @property
    def num_classes(self) -> int:
        return self.classes.num_classes

    def total(self) -> int:
        """Total number of accumulated (non-ignored) pixels."""
        return int(self.counts.sum())

    def update(self, gt: LabelMap, pred: LabelMap) -> "ConfusionMatrix":
        """Accumulate one ground-truth / prediction pair in place.

        Dimensions must match exactly; the engine never resizes.  Returns
        self for chaining.
        """
        if gt.shape != pred.shape:
            raise ValueError(f"dimension mismatch: gt {gt.shape} vs pred {pred.shape}")
        k = self.num_classes
        ignore = self.classes.ignore_value
        g = gt.values.ravel()
        p = pred.values.ravel()
        if (p == ignore).any():
            raise ValueError(f"ignore value {ignore} present in prediction")
        valid = g != ignore
        g = g[valid].astype(np.int64)
        p = p[valid].astype(np.int64)
        if g.size and (g.max() >= k or p.max() >= k):
            raise ValueError(f"class index out of range for K={k}")
        self.counts += np.bincount(g * k + p, minlength=k * k).reshape(k, k)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Element-wise sum of two matrices over the same class set."""
        if other.num_classes != self.num_classes:
            raise ValueError(
                f"cannot merge: K={self.num_classes} vs K={other.num_classes}"
            )
        return ConfusionMatrix(self.classes, self.counts + other.counts)

    def copy(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.classes, self.counts)

    def class_iou(self, class_id: int) -> ClassIoU:
        """Intersection = counts[c][c]; union = row sum + column sum - counts[c][c]."""
        if not 0 <= class_id < self.num_classes:
            raise ValueError(f"class_id {class_id} out of range [0, {self.num_classes})")
        tp = int(self.counts[class_id, class_id])
        union = (
            int(self.counts[class_id, :].sum())
            + int(self.counts[:, class_id].sum())
            - tp
        )
        return ClassIoU(class_id=class_id, intersection=tp, union=union)

    def per_class_iou(self) -> tuple[ClassIoU, ...]:
        return tuple(self.class_iou(c) for c in range(self.num_classes))

    def miou(self) -> MiouResult:
        """Mean of defined per-class IoUs, as an exact rational.

        Classes with union 0 never occurred and are excluded from the
        mean rather than scored 0 or 1.
        """
        per_class = self.per_class_iou()
        defined = [c.iou for c in per_class if c.defined]
        if not defined:
            raise EmptyEvaluationError("all classes undefined: empty evaluation")
        mean = sum(defined, Fraction(0)) / len(defined)
        return MiouResult(per_class=per_class, miou=mean, num_defined_classes=len(defined))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.classes == other.classes and bool(np.array_equal(self.counts, other.counts))

    __hash__ = None

    def __repr__(self) -> str:
        return f"ConfusionMatrix(K={self.num_classes}, total={self.total()})"
