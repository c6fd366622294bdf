"""Command-line interface.

Subcommands: ``predict`` (score sessions with a weight file), ``fit``
(estimate weights from a labeled dataset), ``evaluate`` (PCC/RMSE,
optionally under the repeated split protocol), ``gen`` (synthesize
datasets).  Exit codes: 0 success, 1 usage or parse failure, 2 domain
validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import io
from .baselines import baseline_runner, baseline_predict, extract_baseline_features, fit_baseline_coefficients
from .errors import DegenerateMetricError, UsageError, ValidationError
from .evaluation import (
    SplitProtocol,
    evaluate_predictions,
    fixed_weights_runner,
    refit_runner,
    run_split_protocol,
)
from .fitting import LabeledDataset, fit
from .model import extract_features, predict
from .synth import GeneratorConfig, generate_labeled_dataset, generate_sessions

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _emit(text: str, output: str | None) -> None:
    if output:
        io.atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def _read_input_sessions(spec: str):
    if spec == "example":
        return io.example_sessions()
    return io.read_sessions(spec)


def cmd_predict(args) -> None:
    weights = io.read_weights(args.weights)
    sessions = _read_input_sessions(args.input)
    features = [extract_features(s) for s in sessions]
    values = [predict(s, weights) for s in sessions]
    if args.format == "json":
        payload = []
        for k, value in enumerate(values):
            record: dict = {"index": k, "prediction": value}
            if args.features:
                record["features"] = list(features[k].as_vector())
            payload.append(record)
        _emit(json.dumps(payload, indent=2) + "\n", args.output)
    else:
        _emit(
            io.predictions_csv_text(values, features if args.features else None),
            args.output,
        )


def cmd_fit(args) -> None:
    dataset = LabeledDataset(tuple(io.read_sessions(args.input)))
    report = fit(dataset, nonnegative=args.nonnegative)
    io.write_weights(report.weights, args.output)
    if args.report:
        io.write_json(report.to_dict(), args.report)
    else:
        sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")


def cmd_evaluate(args) -> None:
    dataset = LabeledDataset(tuple(io.read_sessions(args.input)))
    truths = dataset.labels()
    compensate = not args.no_compensation

    modes = [
        args.weights is not None,
        args.refit,
        args.baseline is not None,
        args.external_predictions is not None,
    ]
    if sum(modes) != 1:
        raise UsageError(
            "choose exactly one of --weights, --refit, --baseline, "
            "--external-predictions"
        )

    if args.splits is not None:
        if args.external_predictions:
            raise UsageError("--external-predictions cannot be combined with --splits")
        protocol = SplitProtocol(
            n_repetitions=args.splits,
            test_size=args.test_size,
            test_pool=args.test_pool,
            rng_seed=args.seed,
        )
        if args.weights is not None:
            runner = fixed_weights_runner(io.read_weights(args.weights))
        elif args.refit:
            runner = refit_runner(nonnegative=args.nonnegative)
        else:
            coefficients = (
                io.read_baseline_coefficients(args.coefficients)
                if args.coefficients
                else None
            )
            runner = baseline_runner(args.baseline, coefficients)
        report = run_split_protocol(
            dataset,
            protocol,
            runner,
            compensate=compensate,
            compensation_on=args.compensate_on,
        )
    else:
        if args.refit:
            raise UsageError("--refit only makes sense with --splits")
        if args.weights is not None:
            weights = io.read_weights(args.weights)
            predictions = [predict(s, weights) for s in dataset.sessions]
        elif args.baseline is not None:
            coefficients = (
                io.read_baseline_coefficients(args.coefficients)
                if args.coefficients
                else fit_baseline_coefficients(dataset, args.baseline)
            )
            predictions = [
                baseline_predict(extract_baseline_features(s), coefficients)
                for s in dataset.sessions
            ]
        else:
            table = io.read_external_predictions(args.external_predictions)
            missing = [k for k in range(len(dataset)) if k not in table]
            if missing:
                raise UsageError(
                    f"external predictions missing session ids {missing[:5]}"
                    f"{'...' if len(missing) > 5 else ''}"
                )
            predictions = [table[k] for k in range(len(dataset))]
        report = evaluate_predictions(predictions, truths, compensate=compensate)

    if args.format == "csv":
        _emit(io.per_split_csv_text(report), args.output)
    else:
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)


def cmd_gen(args) -> None:
    config = (
        io.read_generator_config(args.config) if args.config else GeneratorConfig()
    )
    if args.seed is not None:
        config = dataclasses.replace(config, rng_seed=args.seed)
    if args.weights:
        weights = io.read_weights(args.weights)
        dataset = generate_labeled_dataset(
            config,
            args.count,
            weights,
            noise_std=args.noise_std,
            skip_clamped=args.skip_clamped,
        )
        sessions = dataset.sessions
    else:
        sessions = generate_sessions(config, args.count)
    io.write_dataset(sessions, args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hasqoe",
        description="Histogram-based QoE modeling for HTTP adaptive streaming sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="predict session MOS with a weight file")
    p.add_argument("--input", required=True,
                   help="session or dataset JSON ('example' for the bundled demo trace)")
    p.add_argument("--weights", required=True,
                   help="weights JSON file, or 'paper' for the bundled reference set")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--features", action="store_true",
                   help="include the 22 histogram features per session")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("fit", help="fit the 22 weights to a labeled dataset")
    p.add_argument("--input", required=True, help="labeled dataset JSON")
    p.add_argument("--output", required=True, help="where to write the weights JSON")
    p.add_argument("--report", help="where to write the fit report JSON (default: stdout)")
    p.add_argument("--nonnegative", action="store_true",
                   help="constrain all weights to be non-negative")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--input", required=True, help="labeled dataset JSON")
    p.add_argument("--weights", help="weights JSON file or 'paper'")
    p.add_argument("--refit", action="store_true",
                   help="refit the model on each training split (requires --splits)")
    p.add_argument("--baseline", choices=("guo", "vriendt", "liu"),
                   help="evaluate a comparison model instead")
    p.add_argument("--coefficients",
                   help="baseline coefficients JSON (fitted from data when omitted)")
    p.add_argument("--external-predictions",
                   help="CSV of precomputed 'session-id,predicted-mos' rows")
    p.add_argument("--splits", type=int,
                   help="run the repeated random train/test protocol with this many repetitions")
    p.add_argument("--test-size", type=int, default=90,
                   help="test sessions per split (default: 90)")
    p.add_argument("--test-pool", default="multi-factor",
                   help="session tag test sets are drawn from, or 'all' (default: multi-factor)")
    p.add_argument("--seed", type=int, default=0, help="protocol RNG seed (default: 0)")
    p.add_argument("--no-compensation", action="store_true",
                   help="skip the first-order linear compensation")
    p.add_argument("--compensate-on", choices=("train", "test"), default="train",
                   help="portion the compensation line is fitted on (default: train)")
    p.add_argument("--nonnegative", action="store_true",
                   help="with --refit, constrain fitted weights to be non-negative")
    p.add_argument("--output", help="report file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv writes the per-split metric table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--count", type=int, required=True, help="number of sessions")
    p.add_argument("--output", required=True, help="dataset file to write")
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--seed", type=int, help="override the config RNG seed")
    p.add_argument("--weights",
                   help="label sessions with this weight file ('paper' for the bundled set)")
    p.add_argument("--noise-std", type=float, default=0.0,
                   help="Gaussian label noise (only with --weights)")
    p.add_argument("--skip-clamped", action="store_true",
                   help="regenerate sessions whose raw score falls below 1.0 MOS")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DegenerateMetricError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
