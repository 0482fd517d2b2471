"""``oagrade`` command line: synth, extract, train, evaluate, predict, gradcheck.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import neuralnet, pipeline, synth
from .errors import DataError, NumericError, OagradeError, ParameterError
from .features import feature_names

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oagrade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("synth", help="generate the synthetic PGM dataset and manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--per-grade-train", type=_nonneg_int, default=9)
    p.add_argument("--per-grade-val", type=_nonneg_int, default=5)
    p.add_argument("--per-grade-test", type=_nonneg_int, default=3)

    p = sub.add_parser("extract", help="write the feature CSV of every manifest entry")
    p.add_argument("--manifest", required=True)
    p.add_argument("--threshold", type=int, default=40)
    p.add_argument("--quant-bits", type=int, default=7)
    p.add_argument("--out", default="features.csv")

    p = sub.add_parser("train", help="fit scaler and network on the train split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--learning-rate", type=float, default=0.3)
    p.add_argument("--momentum", type=float, default=0.5)
    p.add_argument("--hidden", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=0.001)
    p.add_argument("--max-epochs", type=_nonneg_int, default=2000)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--threshold", type=int, default=40)
    p.add_argument("--quant-bits", type=int, default=7)
    p.add_argument("--model", required=True, help="bundle output path")

    p = sub.add_parser("evaluate", help="confusion matrix and accuracy on one split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=pipeline.SPLITS, default="test")
    p.add_argument("--csv", help="also write the confusion matrix as CSV")

    p = sub.add_parser("predict", help="grade a single image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)

    p = sub.add_parser("gradcheck", help="finite-difference check of the backprop gradients")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--trials", type=_nonneg_int, default=20)
    p.add_argument("--epsilon", type=float, default=1e-5)
    return parser


def _cmd_synth(args, out):
    spec = synth.SynthSpec(
        per_grade_train=args.per_grade_train,
        per_grade_validation=args.per_grade_val,
        per_grade_test=args.per_grade_test,
        seed=args.seed,
    )
    manifest = synth.generate(spec, args.out)
    counts = {s: len(manifest.split(s)) for s in pipeline.SPLITS}
    print(f"wrote {len(manifest.entries)} images to {args.out}", file=out)
    print(" ".join(f"{s}={n}" for s, n in counts.items()), file=out)
    print(f"manifest: {Path(args.out) / 'manifest.csv'}", file=out)


def _record(args) -> pipeline.PreprocessingRecord:
    if not 0 <= args.threshold <= 255:
        raise ParameterError("--threshold must be in [0, 255]")
    if not 1 <= args.quant_bits <= 8:
        raise ParameterError("--quant-bits must be in [1, 8]")
    return pipeline.PreprocessingRecord(threshold=args.threshold, quant_bits=args.quant_bits)


def _cmd_extract(args, out):
    record = _record(args)
    manifest = pipeline.load_manifest(args.manifest)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "grade"] + feature_names(record.quant_bits))
        for e in manifest.entries:
            vec = pipeline.image_features(manifest.resolve(e), record)
            writer.writerow([e.path, e.grade] + [format(float(v), ".17g") for v in vec])
    print(f"wrote {len(manifest.entries)} feature rows to {args.out}", file=out)


def _cmd_train(args, out):
    record = _record(args)
    config = neuralnet.MlpConfig(
        n_in=record.n_features,
        n_hidden=args.hidden,
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        tolerance=args.tolerance,
        max_epochs=args.max_epochs,
        rng_seed=args.seed,
    )
    manifest = pipeline.load_manifest(args.manifest)

    def log_epoch(r):
        print(f"epoch {r.epoch} mse {r.mse:.6e} recognition {r.recognition:.4f}", file=out)

    bundle, history = pipeline.train_pipeline(manifest, config, record, callback=log_epoch)
    pipeline.save_bundle(bundle, args.model)
    if history:
        last = history[-1]
        status = "converged" if last.mse < config.tolerance else "stopped at max epochs"
        print(f"{status} after {last.epoch} epochs; recognition {last.recognition:.4f}", file=out)
    print(f"model: {args.model}", file=out)


def _cmd_evaluate(args, out):
    bundle = pipeline.load_bundle(args.model)
    manifest = pipeline.load_manifest(args.manifest)
    report = pipeline.evaluate(bundle, manifest, args.split)
    print(f"split: {args.split} ({report.total} images)", file=out)
    print(pipeline.render_report(report), file=out)
    if args.csv:
        Path(args.csv).write_text(pipeline.report_csv(report))


def _cmd_predict(args, out):
    bundle = pipeline.load_bundle(args.model)
    grade, outputs = pipeline.predict(bundle, args.image)
    print(f"outputs: {outputs[0]:.6f} {outputs[1]:.6f}", file=out)
    print(f"grade: {grade}", file=out)


def _cmd_gradcheck(args, out):
    if args.trials < 1:
        raise ParameterError("--trials must be at least 1")
    err = neuralnet.gradient_check_trials(args.seed, args.trials, args.epsilon)
    print(f"max relative gradient error: {err:.3e} over {args.trials} trials", file=out)
    if err >= 1e-6:
        raise NumericError(f"gradient check failed: {err:.3e} >= 1e-6")


_COMMANDS = {
    "synth": _cmd_synth,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "gradcheck": _cmd_gradcheck,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        _COMMANDS[args.command](args, out)
    except NumericError as exc:
        print(f"oagrade: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ParameterError as exc:
        print(f"oagrade: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OagradeError, OSError, ValueError) as exc:
        print(f"oagrade: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    sys.exit(run())


if __name__ == "__main__":
    main()
