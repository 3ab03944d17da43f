"""Command-line entry point: ``pbmvboost {synth,split-mnist,train,eval,bounds}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .boost import ALGORITHMS, MVMajorityVote, make_estimator
from .data import (
    DataError,
    MultiviewDataset,
    atomic_write,
    load_class_ids,
    load_idx,
    load_manifest,
    split_image_views,
    synth_multiview,
    write_manifest,
)
from .evaluation import one_vs_all_protocol
from .measures import model_bounds

log = logging.getLogger("pbmvboost")


class UsageError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _delta(text):
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in (0, 1], got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _noise(text):
    value = float(text)
    if not 0.0 <= value < 0.5:
        raise argparse.ArgumentTypeError(f"noise must lie in [0, 0.5), got {text}")
    return value


def _add_boost_flags(p):
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="pb-mvboost")
    p.add_argument("--iterations", type=_positive_int, default=100, help="boosting rounds T")
    p.add_argument("--depth", type=_positive_int, default=2, help="tree depth of each voter")
    p.add_argument("--seed", type=_nonneg_int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbmvboost", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic multiview dataset")
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--noise", type=_noise, nargs="+", default=[0.3, 0.35, 0.4],
                   help="one label-flip rate per view")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", required=True, help="manifest path")

    p = sub.add_parser("split-mnist", help="cut MNIST IDX files into four 14x14 views")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--mode", choices=["quarters", "center_overlap"], default="quarters")
    p.add_argument("--positive-class", type=int, default=0)
    p.add_argument("--limit", type=_positive_int, help="keep only the first N images")
    p.add_argument("--out", required=True, help="manifest path")

    p = sub.add_parser("train", help="train one model, write it and its iteration trace")
    p.add_argument("--train", required=True, help="training manifest")
    p.add_argument("--test", help="optional evaluation manifest for the trace")
    _add_boost_flags(p)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--trace", help="trace CSV path")

    p = sub.add_parser("eval", help="one-vs-all protocol over repeated subsamples")
    p.add_argument("--train", required=True, help="training manifest")
    p.add_argument("--test", required=True, help="test manifest")
    p.add_argument("--classes", type=int, nargs="+",
                   help="classes to evaluate (default: all ids in the manifest)")
    _add_boost_flags(p)
    p.add_argument("--n", type=_positive_int, default=500, help="training examples per run")
    p.add_argument("--runs", type=_positive_int, default=20)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", required=True, help="report JSON path; a CSV is written alongside")

    p = sub.add_parser("bounds", help="empirical and PAC-Bayesian bounds of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--delta", type=_delta, default=0.05)
    p.add_argument("--capital-c", type=_positive_float, default=1.0, dest="capital_c")
    p.add_argument("--out", help="also write the JSON here")
    return parser


def _load(path) -> MultiviewDataset:
    if not Path(path).is_file():
        raise UsageError(f"manifest not found: {path}")
    return load_manifest(path)


def _class_data(path):
    ds = _load(path)
    ids = load_class_ids(path)
    if ids is None:
        ids = ds.labels
    elif ids.shape[0] != ds.n_samples:
        raise DataError(f"{path}: class id count differs from example count")
    return [np.asarray(X) for X in ds.views], ids


def cmd_synth(args) -> int:
    ds = synth_multiview(args.n, len(args.noise), args.noise, args.seed)
    write_manifest(ds, args.out)
    return 0


def cmd_split_mnist(args) -> int:
    images, labels = load_idx(args.images, args.labels)
    if args.limit:
        images, labels = images[: args.limit], labels[: args.limit]
    ds = split_image_views(images, labels, args.positive_class, args.mode)
    write_manifest(ds, args.out, class_ids=labels)
    return 0


def cmd_train(args) -> int:
    train = _load(args.train)
    test = _load(args.test) if args.test else None
    est = make_estimator(args.algorithm, args.iterations, args.depth)
    est.fit(train, eval_set=test)
    est.model_.config["seed"] = args.seed
    text = est.model_.dumps()
    trace = est.trace_.to_csv()
    atomic_write(args.out, text)
    if args.trace:
        atomic_write(args.trace, trace)
    return 0


def cmd_eval(args) -> int:
    train = _class_data(args.train)
    test = _class_data(args.test)
    if args.n > train[1].shape[0]:
        raise UsageError(f"--n {args.n} exceeds the {train[1].shape[0]} training examples")
    present = [int(c) for c in np.unique(train[1])]
    # a plain binary manifest has a single "class": the +1 label
    default = [1] if set(present) <= {-1, 1} else present
    classes = args.classes or default
    report = one_vs_all_protocol(
        train, test, classes, args.n, args.runs, args.algorithm, args.iterations, args.depth,
        args.seed, n_jobs=args.jobs,
    )
    out = Path(args.out)
    atomic_write(out, report.to_json() + "\n")
    atomic_write(out.with_suffix(".csv"), report.to_csv())
    return 0


def cmd_bounds(args) -> int:
    if not Path(args.model).is_file():
        raise UsageError(f"model not found: {args.model}")
    model = MVMajorityVote.load(args.model)
    ds = _load(args.manifest)
    if [X.shape[1] for X in ds.views] != model.n_features:
        raise DataError("manifest views do not match the model")
    result = model_bounds(model.per_view, model.rho, ds.views, ds.labels, args.delta, args.capital_c)
    result["delta"] = args.delta
    result["C"] = args.capital_c
    text = json.dumps(result, indent=2)
    if args.out:
        atomic_write(args.out, text + "\n")
    print(text)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "split-mnist": cmd_split_mnist,
    "train": cmd_train,
    "eval": cmd_eval,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DataError, FileNotFoundError) as exc:
        print(f"pbmvboost {args.command}: input error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"pbmvboost {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
