from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from flameval.labelmap import IGNORE_VALUE, ClassSet, LabelMap
from flameval.metrics import ClassIoU, ConfusionMatrix, EmptyEvaluationError

from oracles import set_class_tally, set_miou, tally_confusion


def cm_from_counts(counts):
    counts = np.asarray(counts)
    return ConfusionMatrix(ClassSet(counts.shape[0]), counts)


def random_pair(rng, shape, num_classes, ignore_fraction=0.0):
    gt = rng.integers(0, num_classes, size=shape).astype(np.uint8)
    if ignore_fraction > 0:
        mask = rng.random(size=shape) < ignore_fraction
        gt[mask] = IGNORE_VALUE
    pred = rng.integers(0, num_classes, size=shape).astype(np.uint8)
    return LabelMap(gt), LabelMap(pred)


class TestAccumulate:
    def test_perfect_prediction(self):
        m = LabelMap(np.zeros((2, 2), dtype=np.uint8))
        cm = ConfusionMatrix(ClassSet(2)).update(m, m)
        assert cm.counts.tolist() == [[4, 0], [0, 0]]

    def test_ignore_pixel_skipped(self):
        gt = LabelMap([[0, 1], [IGNORE_VALUE, 1]])
        pred = LabelMap([[0, 0], [1, 1]])
        cm = ConfusionMatrix(ClassSet(2)).update(gt, pred)
        assert cm.counts.tolist() == [[1, 0], [1, 1]]
        assert cm.total() == 3

    def test_matches_per_pixel_tally_on_random_pairs(self):
        rng = np.random.default_rng(11)
        classes = ClassSet(4)
        cm = ConfusionMatrix(classes)
        expected = np.zeros((4, 4), dtype=np.int64)
        for _ in range(100):
            gt, pred = random_pair(rng, (16, 16), 4, ignore_fraction=0.1)
            cm.update(gt, pred)
            expected += np.asarray(tally_confusion(gt.values, pred.values, 4))
        assert cm.counts.tolist() == expected.tolist()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            ConfusionMatrix(ClassSet(2)).update(LabelMap([[0]]), LabelMap([[0, 0]]))

    def test_ignore_in_prediction_is_an_error(self):
        gt = LabelMap([[0]])
        pred = LabelMap([[IGNORE_VALUE]])
        with pytest.raises(ValueError, match="ignore value"):
            ConfusionMatrix(ClassSet(2)).update(gt, pred)

    def test_class_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            ConfusionMatrix(ClassSet(2)).update(LabelMap([[3]]), LabelMap([[0]]))

    def test_pixel_conservation(self):
        rng = np.random.default_rng(5)
        cm = ConfusionMatrix(ClassSet(3))
        non_ignored = 0
        for _ in range(20):
            gt, pred = random_pair(rng, (9, 7), 3, ignore_fraction=0.25)
            cm.update(gt, pred)
            non_ignored += int((gt.values != IGNORE_VALUE).sum())
        assert cm.total() == non_ignored


class TestClassIoU:
    def test_perfect_class(self):
        assert cm_from_counts([[4, 0], [0, 0]]).class_iou(0).iou == Fraction(1)

    def test_hand_tally(self):
        # TP=1, FP=0, FN=1 for class 1 of the ignore-skipped example
        c = cm_from_counts([[1, 0], [1, 1]]).class_iou(1)
        assert (c.intersection, c.union) == (1, 2)
        assert c.iou == Fraction(1, 2)

    def test_hand_tally_matches_set_oracle(self):
        gt = [[0, 1], [IGNORE_VALUE, 1]]
        pred = [[0, 0], [1, 1]]
        cm = ConfusionMatrix(ClassSet(2)).update(LabelMap(gt), LabelMap(pred))
        for class_id in (0, 1):
            c = cm.class_iou(class_id)
            assert (c.intersection, c.union) == set_class_tally([(gt, pred)], class_id)

    def test_absent_class_is_undefined(self):
        c = cm_from_counts([[4, 0], [0, 0]]).class_iou(1)
        assert c.union == 0 and not c.defined and c.iou is None

    def test_class_id_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            cm_from_counts([[1]]).class_iou(1)

    def test_invalid_tally_rejected(self):
        with pytest.raises(ValueError):
            ClassIoU(class_id=0, intersection=3, union=2)


class TestMiou:
    def test_perfect(self):
        assert cm_from_counts([[4, 0], [0, 4]]).miou().miou == Fraction(1)

    def test_half(self):
        res = cm_from_counts([[1, 0], [1, 1]]).miou()
        assert res.miou == Fraction(1, 2)
        assert res.num_defined_classes == 2

    def test_undefined_class_excluded_from_mean(self):
        res = cm_from_counts([[4, 0], [0, 0]]).miou()
        assert res.miou == Fraction(1)
        assert res.num_defined_classes == 1

    def test_empty_evaluation(self):
        with pytest.raises(EmptyEvaluationError):
            cm_from_counts([[0, 0], [0, 0]]).miou()

    def test_aggregate_differs_from_mean_of_per_image_mious(self):
        # Image A is perfect; image B is not. Averaging per-image mIoUs
        # would give 19/24; the dataset-level aggregation must give 17/24.
        img_a = (LabelMap([[0], [1]]), LabelMap([[0], [1]]))
        img_b = (LabelMap([[0, 0], [0, 1]]), LabelMap([[0, 0], [1, 1]]))
        classes = ClassSet(2)

        miou_a = ConfusionMatrix(classes).update(*img_a).miou().miou
        miou_b = ConfusionMatrix(classes).update(*img_b).miou().miou
        mean_of_mious = (miou_a + miou_b) / 2
        assert mean_of_mious == Fraction(19, 24)

        aggregate = ConfusionMatrix(classes).update(*img_a).update(*img_b).miou().miou
        assert aggregate == Fraction(17, 24)
        assert aggregate != mean_of_mious

        pairs = [(m[0].values, m[1].values) for m in (img_a, img_b)]
        assert aggregate == set_miou(pairs, 2)

    def test_matches_set_oracle_on_random_dataset(self):
        rng = np.random.default_rng(23)
        classes = ClassSet(5)
        cm = ConfusionMatrix(classes)
        pairs = []
        for _ in range(30):
            gt, pred = random_pair(rng, (12, 12), 5, ignore_fraction=0.1)
            cm.update(gt, pred)
            pairs.append((gt.values, pred.values))
        for class_id in range(5):
            c = cm.class_iou(class_id)
            assert (c.intersection, c.union) == set_class_tally(pairs, class_id)
        assert cm.miou().miou == set_miou(pairs, 5)


class TestMerge:
    def test_identity(self):
        classes = ClassSet(2)
        m = ConfusionMatrix(classes).update(LabelMap([[0, 1]]), LabelMap([[1, 1]]))
        assert ConfusionMatrix(classes).merge(m) == m
        assert m.merge(ConfusionMatrix(classes)) == m

    def test_commutative(self):
        classes = ClassSet(3)
        rng = np.random.default_rng(2)
        a = ConfusionMatrix(classes).update(*random_pair(rng, (5, 5), 3))
        b = ConfusionMatrix(classes).update(*random_pair(rng, (5, 5), 3))
        assert a.merge(b) == b.merge(a)

    def test_associative(self):
        classes = ClassSet(3)
        rng = np.random.default_rng(8)
        mats = [
            ConfusionMatrix(classes).update(*random_pair(rng, (4, 6), 3)) for _ in range(3)
        ]
        a, b, c = mats
        assert a.merge(b).merge(c) == a.merge(b.merge(c))

    def test_split_image_equals_whole_image(self):
        rng = np.random.default_rng(17)
        classes = ClassSet(4)
        gt, pred = random_pair(rng, (10, 8), 4, ignore_fraction=0.2)
        whole = ConfusionMatrix(classes).update(gt, pred)
        top = ConfusionMatrix(classes).update(
            LabelMap(gt.values[:5]), LabelMap(pred.values[:5])
        )
        bottom = ConfusionMatrix(classes).update(
            LabelMap(gt.values[5:]), LabelMap(pred.values[5:])
        )
        assert top.merge(bottom) == whole

    def test_k_mismatch(self):
        with pytest.raises(ValueError, match="merge"):
            ConfusionMatrix(ClassSet(2)).merge(ConfusionMatrix(ClassSet(3)))


label_grids = arrays(
    dtype=np.uint8,
    shape=st.tuples(st.integers(1, 12), st.integers(1, 12)),
    elements=st.integers(0, 3),
)


@settings(max_examples=50, deadline=None)
@given(gt=label_grids, pred=label_grids, ignore_row=st.booleans())
def test_iou_bounds_and_conservation_property(gt, pred, ignore_row):
    h = min(gt.shape[0], pred.shape[0])
    w = min(gt.shape[1], pred.shape[1])
    gt = gt[:h, :w].copy()
    pred = pred[:h, :w]
    if ignore_row:
        gt[0, :] = IGNORE_VALUE
    cm = ConfusionMatrix(ClassSet(4)).update(LabelMap(gt), LabelMap(pred))
    assert cm.total() == int((gt != IGNORE_VALUE).sum())
    for class_id in range(4):
        c = cm.class_iou(class_id)
        if c.defined:
            assert Fraction(0) <= c.iou <= Fraction(1)
    if cm.total() > 0:
        assert Fraction(0) <= cm.miou().miou <= Fraction(1)
