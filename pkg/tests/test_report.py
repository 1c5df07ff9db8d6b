import json
from dataclasses import replace
from fractions import Fraction

import pytest

from flameval.dataset import FLAME, STATIC, load_manifest, load_predictions, pair_predictions
from flameval.latency import FrameTiming
from flameval.metrics import EmptyEvaluationError
from flameval.report import EvalReport, LatencySummary, build_report, evaluate, evaluate_pairs
from flameval.synth import (
    DELAYED_ORACLE,
    ObjectSpec,
    SceneSpec,
    SimPredictor,
    SynthJob,
    materialize_scene,
    simulate_experiment,
)

TIMING = FrameTiming(60.0)


def moving_spec(num_frames=12):
    return SceneSpec(
        width=48,
        height=32,
        num_frames=num_frames,
        objects=(
            ObjectSpec(class_id=1, width=10, height=8, x=2, y=4, vx=2, vy=0),
            ObjectSpec(class_id=2, width=6, height=6, x=30, y=20, vx=-1, vy=-1),
        ),
        num_classes=3,
    )


@pytest.fixture()
def materialized(tmp_path):
    job = SynthJob(
        spec=moving_spec(),
        timing=TIMING,
        predictors=(SimPredictor(DELAYED_ORACLE, 180.0),),
    )
    manifests = materialize_scene(job, tmp_path)
    dataset = load_manifest(manifests["dataset"])
    predictions = load_predictions(manifests[DELAYED_ORACLE])
    return job, dataset, predictions


class TestEvaluatePairs:
    def test_parallel_equals_sequential(self, materialized):
        _, dataset, predictions = materialized
        pairing = pair_predictions(dataset, predictions, FLAME)
        sequential = evaluate_pairs(pairing.pairs, dataset.classes, jobs=1)
        parallel = evaluate_pairs(pairing.pairs, dataset.classes, jobs=4)
        assert sequential == parallel

    def test_oversubscribed_jobs(self, materialized):
        _, dataset, predictions = materialized
        pairing = pair_predictions(dataset, predictions, FLAME)
        assert evaluate_pairs(pairing.pairs, dataset.classes, jobs=64) == evaluate_pairs(
            pairing.pairs, dataset.classes, jobs=1
        )


class TestEvaluate:
    def test_file_based_run_matches_in_memory_simulation(self, materialized):
        job, dataset, predictions = materialized
        from_files = evaluate(dataset, predictions, FLAME)
        simulated = simulate_experiment(job.spec, job.predictors[0], job.timing, mode=FLAME)
        assert from_files == simulated

    def test_static_and_flame_differ_on_moving_scene(self, materialized):
        _, dataset, predictions = materialized
        static = evaluate(dataset, predictions, STATIC)
        flame = evaluate(dataset, predictions, FLAME)
        assert static.miou == Fraction(1)
        assert flame.miou < static.miou

    def test_empty_evaluation_raises(self, materialized):
        _, dataset, _ = materialized
        with pytest.raises(EmptyEvaluationError):
            evaluate(dataset, [], FLAME)


class TestBuildReport:
    def test_accounting_invariants(self, materialized):
        job, dataset, predictions = materialized
        report = evaluate(dataset, predictions, FLAME)
        assert report.pairs_evaluated + sum(report.exclusions.values()) == len(predictions)
        assert sum(report.offsets_histogram.values()) == report.pairs_evaluated
        assert report.dataset_interval_ms == 60.0
        assert report.latency_summary == LatencySummary(180.0, 180.0, 180.0)

    def test_no_pairs_is_empty_evaluation(self):
        from flameval.labelmap import ClassSet
        from flameval.metrics import ConfusionMatrix

        with pytest.raises(EmptyEvaluationError):
            build_report(FLAME, ConfusionMatrix(ClassSet(2)), [], {"missing_gt": 3}, 60.0)


class TestSerialization:
    def test_json_round_trip(self, materialized):
        _, dataset, predictions = materialized
        report = evaluate(dataset, predictions, FLAME)
        assert EvalReport.from_json(report.to_json()) == report

    def test_round_trip_preserves_exact_rationals(self, materialized):
        _, dataset, predictions = materialized
        report = evaluate(dataset, predictions, FLAME)
        parsed = EvalReport.from_json(report.to_json())
        assert parsed.miou == report.miou
        assert all(
            (a.intersection, a.union) == (b.intersection, b.union)
            for a, b in zip(parsed.per_class, report.per_class)
        )

    def test_decimal_rendering_has_four_places(self, materialized):
        _, dataset, predictions = materialized
        doc = evaluate(dataset, predictions, FLAME).to_json_dict()
        assert doc["miou"]["decimal"] == round(
            doc["miou"]["numerator"] / doc["miou"]["denominator"], 4
        )

    def test_fps_is_inverse_mean_latency(self, materialized):
        _, dataset, predictions = materialized
        doc = evaluate(dataset, predictions, FLAME).to_json_dict()
        assert doc["latency_summary"]["fps"] == round(1000.0 / 180.0, 4)

    def test_zero_latency_fps_is_null(self, materialized):
        job, dataset, _ = materialized
        report = simulate_experiment(job.spec, SimPredictor(DELAYED_ORACLE, 0.0), TIMING)
        assert report.latency_summary.fps is None
        assert report.to_json_dict()["latency_summary"]["fps"] is None

    def test_undefined_class_serializes_as_null(self, tmp_path):
        # class 2 never occurs: one-object scene with explicit K=3
        spec = SceneSpec(
            width=16, height=16, num_frames=4, num_classes=3,
            objects=(ObjectSpec(class_id=1, width=4, height=4, x=0, y=0, vx=1),),
        )
        report = simulate_experiment(spec, SimPredictor(DELAYED_ORACLE, 60.0), TIMING)
        doc = report.to_json_dict()
        assert doc["per_class"][2]["iou"] is None
        assert doc["num_defined_classes"] == 2
        assert EvalReport.from_json(report.to_json()) == report

    def test_mode_is_the_only_difference_between_matching_reports(self, materialized):
        job, dataset, _ = materialized
        static = simulate_experiment(job.spec, SimPredictor(DELAYED_ORACLE, 0.0), TIMING, mode=STATIC)
        flame = simulate_experiment(job.spec, SimPredictor(DELAYED_ORACLE, 0.0), TIMING, mode=FLAME)
        assert replace(static, mode=FLAME) == flame


class TestMultiSequence:
    def test_aggregates_across_sequences_with_mixed_intervals(self, tmp_path):
        from flameval.labelmap import LabelMap, write_labelmap
        from flameval.metrics import ConfusionMatrix

        from conftest import write_json

        # seq a: interval 60, gt at 1; seq b: interval 30, gt at 2
        maps = {
            "a_gt": LabelMap([[0, 1], [1, 1]]),
            "a_pred": LabelMap([[0, 0], [1, 1]]),
            "b_gt": LabelMap([[1, 0], [0, 0]]),
            "b_pred": LabelMap([[1, 1], [0, 0]]),
        }
        for name, m in maps.items():
            write_labelmap(m, tmp_path / f"{name}.pgm")
        write_json(
            tmp_path / "dataset.json",
            {
                "num_classes": 2,
                "sequences": [
                    {
                        "sequence_id": "a",
                        "interval_ms": 60.0,
                        "frames": [{"index": 0}, {"index": 1, "gt": "a_gt.pgm"}],
                    },
                    {
                        "sequence_id": "b",
                        "interval_ms": 30.0,
                        "frames": [{"index": 0}, {"index": 1}, {"index": 2, "gt": "b_gt.pgm"}],
                    },
                ],
            },
        )
        write_json(
            tmp_path / "preds.json",
            {
                "predictions": [
                    {"sequence_id": "a", "input_frame_index": 0,
                     "latency_ms": 55.0, "pred": "a_pred.pgm"},
                    {"sequence_id": "b", "input_frame_index": 0,
                     "latency_ms": 55.0, "pred": "b_pred.pgm"},
                ]
            },
        )
        dataset = load_manifest(tmp_path / "dataset.json")
        report = evaluate(dataset, load_predictions(tmp_path / "preds.json"), FLAME)

        expected = (
            ConfusionMatrix(dataset.classes)
            .update(maps["a_gt"], maps["a_pred"])
            .update(maps["b_gt"], maps["b_pred"])
        )
        assert report.miou == expected.miou().miou
        assert report.pairs_evaluated == 2
        # 55 ms is 1 frame at 60 ms but 2 frames at 30 ms
        assert report.offsets_histogram == {1: 1, 2: 1}
        assert report.dataset_interval_ms is None
        assert "mixed" in report.render_table()
        assert EvalReport.from_json(report.to_json()) == report


class TestRenderTable:
    def test_table_numbers_come_from_the_json_document(self, materialized):
        _, dataset, predictions = materialized
        report = evaluate(dataset, predictions, FLAME)
        doc = report.to_json_dict()
        table = report.render_table()
        assert f"{doc['miou']['decimal']:.4f}" in table
        assert f"(= {doc['miou']['numerator']}/{doc['miou']['denominator']})" in table
        assert str(doc["pairs_evaluated"]) in table
        assert str(doc["latency_summary"]["mean_ms"]) in table
        assert f"{doc['latency_summary']['fps']:.4f}" in table
        for c in doc["per_class"]:
            assert str(c["intersection"]) in table
            assert str(c["union"]) in table
            if c["iou"] is not None:
                assert f"{c['iou']:.4f}" in table
        for k, v in doc["offsets_histogram"].items():
            assert f"{k}:{v}" in table

    def test_table_lists_exclusions(self, materialized):
        _, dataset, predictions = materialized
        table = evaluate(dataset, predictions, FLAME).render_table()
        assert "out_of_sequence:3" in table

    def test_json_text_is_valid_json(self, materialized):
        _, dataset, predictions = materialized
        report = evaluate(dataset, predictions, FLAME)
        json.loads(report.to_json())
