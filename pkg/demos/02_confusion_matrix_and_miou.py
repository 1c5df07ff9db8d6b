"""Confusion-matrix accumulation and the dataset-aggregation pitfall.

Everything IoU-related derives from one K x K integer matrix.  Counts
stay integers until a single division at report time, so the numbers
below are exact rationals, not float approximations.
"""

import numpy as np

from flameval import ClassSet, ConfusionMatrix, IGNORE_VALUE, LabelMap

classes = ClassSet(num_classes=2)

print("--- accumulating one image pair (ignore label excluded) ---")
gt = LabelMap([[0, 1], [IGNORE_VALUE, 1]])
pred = LabelMap([[0, 0], [1, 1]])
cm = ConfusionMatrix(classes).update(gt, pred)
print("gt:  ", gt.values.tolist(), " pred:", pred.values.tolist())
print("counts[g][p]:", cm.counts.tolist(), " (3 scorable pixels, 1 ignored)")
for c in cm.per_class_iou():
    print(f"class {c.class_id}: intersection {c.intersection}, union {c.union}, IoU {c.iou}")
print("mIoU =", cm.miou().miou)

print()
print("--- dataset mIoU is NOT the mean of per-image mIoUs ---")
img_a = (LabelMap([[0], [1]]), LabelMap([[0], [1]]))          # perfect
img_b = (LabelMap([[0, 0], [0, 1]]), LabelMap([[0, 0], [1, 1]]))  # one error

miou_a = ConfusionMatrix(classes).update(*img_a).miou().miou
miou_b = ConfusionMatrix(classes).update(*img_b).miou().miou
aggregate = ConfusionMatrix(classes).update(*img_a).update(*img_b).miou().miou

print(f"per-image mIoUs:        {miou_a} and {miou_b}")
print(f"mean of per-image mIoUs: {(miou_a + miou_b) / 2}   <- wrong for a dataset")
print(f"aggregate mIoU:          {aggregate}   <- sums intersections/unions first")

print()
print("--- independent per-worker matrices merge exactly ---")
rng = np.random.default_rng(0)
maps = [
    (
        LabelMap(rng.integers(0, 2, size=(8, 8)).astype(np.uint8)),
        LabelMap(rng.integers(0, 2, size=(8, 8)).astype(np.uint8)),
    )
    for _ in range(4)
]
whole = ConfusionMatrix(classes)
for gt, pred in maps:
    whole.update(gt, pred)
left = ConfusionMatrix(classes).update(*maps[0]).update(*maps[1])
right = ConfusionMatrix(classes).update(*maps[2]).update(*maps[3])
print("merge(left, right) == sequential accumulation:", left.merge(right) == whole)
