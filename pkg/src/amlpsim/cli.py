"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
invariant violation.
"""

import argparse
import sys

import numpy as np

from . import dataset, plots, sweep, trainer
from .datapath import run_dataset
from .errors import DataFormatError, SimulationInvariantError
from .power_model import savings_pct
from .trainer import TrainConfig

USAGE_EXIT = 1
DATA_EXIT = 2
INTERNAL_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def _config_arg(text: str) -> int:
    value = int(text)
    if not 0 <= value < 32:
        raise argparse.ArgumentTypeError(f"configuration must be in [0, 31], got {value}")
    return value


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="amlpsim",
        description=(
            "Bit-exact simulator of a 62-30-10 MLP accelerator whose MAC units "
            "contain a 32-configuration error-controllable approximate multiplier."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train on MNIST and export a quantized model")
    p_train.add_argument("--mnist-dir", required=True, help="directory with the IDX files")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--seed", type=int, default=TrainConfig.seed)
    p_train.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p_train.add_argument("--batch", type=int, default=TrainConfig.batch_size)
    p_train.add_argument("--lr", type=float, default=TrainConfig.learning_rate)
    p_train.add_argument("--momentum", type=float, default=TrainConfig.momentum)

    p_eval = sub.add_parser("eval", help="evaluate one configuration on the test set")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--mnist-dir", required=True)
    p_eval.add_argument("--config", type=_config_arg, default=0, metavar="N", help="mask 0..31")

    p_sweep = sub.add_parser("sweep", help="accuracy/error/power sweep over all 32 configs")
    p_sweep.add_argument("--model", required=True)
    p_sweep.add_argument("--mnist-dir", required=True)
    p_sweep.add_argument("--out", required=True, help="CSV to write")
    p_sweep.add_argument("--no-timestamp", action="store_true", help="byte-reproducible CSV")
    p_sweep.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    p_metrics = sub.add_parser("metrics", help="exhaustive multiplier error metrics")
    p_metrics.add_argument("--out", required=True, help="CSV to write")
    p_metrics.add_argument("--no-timestamp", action="store_true")
    p_metrics.add_argument("--no-plots", action="store_true")

    p_info = sub.add_parser("info", help="dump a model file's header and metadata")
    p_info.add_argument("--model", required=True)
    return parser


def _load_test_features(model, mnist_dir):
    images, labels = dataset.load_split(mnist_dir, train=False)
    return dataset.prepare_features(images, np.asarray(model.feature_indices)), labels


def _cmd_train(args) -> int:
    tc = TrainConfig(
        seed=args.seed,
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        momentum=args.momentum,
    )
    print(f"loading training split from {args.mnist_dir}")
    images, labels = dataset.load_split(args.mnist_dir, train=True)
    pooled = dataset.pool2x2_batch(images)
    indices = dataset.select_features(pooled)
    mags = dataset.quantize_input(pooled, indices)
    x01 = mags / 127.0
    print(f"training on {len(labels)} images ({tc.epochs} epochs, seed {tc.seed})")
    result = trainer.train_float(x01, labels, tc)
    print(f"float training accuracy: {100 * result.train_accuracy:.4f}%")
    model = trainer.quantize_model(result.model, x01[:5000], indices)
    trainer.export_model(model, args.out)
    print(
        f"wrote {args.out} (hidden act_shift {model.hidden_act_shift}, "
        f"bias shifts {model.hidden_bias_shift}/{model.output_bias_shift})"
    )
    return 0


def _cmd_eval(args) -> int:
    mask = args.config
    model = trainer.import_model(args.model)
    features, labels = _load_test_features(model, args.mnist_dir)
    result = run_dataset(model, features, labels, mask)
    cost = savings_pct(mask)
    print(f"configuration {mask} (mask {mask:05b}) on {len(labels)} images")
    print(f"accuracy:      {100 * result.accuracy:.4f}%")
    print(f"total cycles:  {result.total_cycles} ({result.total_cycles // len(labels)}/image)")
    print(f"mult cost:     {cost.mult_cost} units  (saving {100 * cost.mult_saving:.4f}%)")
    print(f"mac cost:      {cost.mac_cost} units  (saving {100 * cost.mac_saving:.4f}%)")
    print(f"neuron cost:   {cost.neuron_cost} units  (saving {100 * cost.neuron_saving:.4f}%)")
    print(
        f"network cost:  {cost.network_cost_per_image} units/image  "
        f"(saving {100 * cost.network_saving:.4f}%)"
    )
    return 0


def _cmd_sweep(args) -> int:
    model = trainer.import_model(args.model)
    features, labels = _load_test_features(model, args.mnist_dir)
    rows = sweep.run_sweep(
        model,
        features,
        labels,
        args.out,
        timestamp=not args.no_timestamp,
        log=print,
    )
    for line in sweep.sweep_summary_lines(rows):
        print(line.lstrip("# "))
    print(f"wrote {args.out}")
    if not args.no_plots:
        for path in plots.render_sweep_figures(rows, args.out):
            print(f"wrote {path}")
    return 0


def _cmd_metrics(args) -> int:
    summary, reports = sweep.run_metrics(args.out, timestamp=not args.no_timestamp)
    for line in sweep.summary_lines(summary):
        print(line.lstrip("# "))
    print(f"wrote {args.out}")
    if not args.no_plots:
        for path in plots.render_metrics_figures(reports, args.out):
            print(f"wrote {path}")
    return 0


def _cmd_info(args) -> int:
    model = trainer.import_model(args.model)
    print(f"model file:        {args.model} (CRC32 verified)")
    print(f"format version:    {model.version}")
    print("topology:          62-30-10 fully connected, sign-magnitude 8-bit")
    print(f"hidden act_shift:  {model.hidden_act_shift}")
    print(f"hidden bias_shift: {model.hidden_bias_shift}")
    print(f"output bias_shift: {model.output_bias_shift}")
    print("bias convention:   stored 8-bit value << bias_shift, at accumulator scale")
    print("input pipeline:    2x2 average pooling (floor), then the feature")
    print("                   indices below, then round-half-up 8-bit requantization")
    indices = " ".join(str(i) for i in model.feature_indices)
    print(f"feature indices:   {indices}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "metrics": _cmd_metrics,
    "info": _cmd_info,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DataFormatError, FileNotFoundError) as exc:
        print(f"amlpsim: data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (SimulationInvariantError, ValueError, AssertionError) as exc:
        print(f"amlpsim: internal error: {exc}", file=sys.stderr)
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
