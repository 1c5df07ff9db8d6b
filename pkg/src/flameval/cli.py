"""Command-line entry points.

Exit codes: 0 success, 1 input error (bad arguments, malformed manifests
or label maps), 2 empty evaluation (zero evaluable pairs or no scorable
class).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import MODES, load_manifest, load_predictions
from .metrics import EmptyEvaluationError
from .latency import frame_offset
from .report import evaluate
from .synth import load_scene_spec, materialize_scene

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_EMPTY_EVALUATION = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; bad arguments are input
    # errors here (exit 1), so route them through an exception instead.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flameval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="score a prediction manifest against a dataset")
    p_eval.add_argument("--dataset", required=True, help="dataset manifest JSON")
    p_eval.add_argument("--predictions", required=True, help="prediction manifest JSON")
    p_eval.add_argument("--mode", required=True, choices=MODES)
    p_eval.add_argument("--out", help="write the JSON report here (default: stdout)")
    p_eval.add_argument("--jobs", type=int, default=None, help="parallel workers (default: CPU count)")

    p_synth = sub.add_parser("synth", help="materialize a synthetic scene to disk")
    p_synth.add_argument("--spec", required=True, help="scene spec JSON")
    p_synth.add_argument("--out-dir", required=True, help="output directory")

    p_offset = sub.add_parser("offset", help="frame offset for a latency and frame interval")
    p_offset.add_argument("latency_ms", type=float)
    p_offset.add_argument("interval_ms", type=float)
    return parser


def _cmd_eval(args) -> int:
    dataset = load_manifest(args.dataset)
    predictions = load_predictions(args.predictions)
    report = evaluate(dataset, predictions, args.mode, jobs=args.jobs)
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
        print(report.render_table(), end="")
    else:
        # Keep stdout machine-parseable when no output file was asked for.
        print(report.render_table(), end="", file=sys.stderr)
        print(report.to_json(), end="")
    return EXIT_OK


def _cmd_synth(args) -> int:
    job = load_scene_spec(args.spec)
    manifests = materialize_scene(job, args.out_dir)
    print(f"dataset manifest: {manifests['dataset']}")
    for predictor in job.predictors:
        print(f"{predictor.kind} predictions: {manifests[predictor.kind]}")
    return EXIT_OK


def _cmd_offset(args) -> int:
    k = frame_offset(args.latency_ms, args.interval_ms)
    print(k)
    print(
        f"bounds: (k-1)*d = {(k - 1) * args.interval_ms} < {args.latency_ms} "
        f"<= {k * args.interval_ms} = k*d"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_offset(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except EmptyEvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_EVALUATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
