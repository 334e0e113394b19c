"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .dataset import save_dataset
from .errors import DataError, InvalidParameter, KOutOfRange, NumericalError, PalmError
from .features import write_feature_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("palmid")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, default_split: str | None) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", type=Path, help="dataset root (<root>/<person>/<index>_<spectrum>.pgm)")
    src.add_argument("--synthetic", action="store_true", help="use a generated dataset (default)")
    g = p.add_argument_group("synthetic data")
    g.add_argument("--persons", type=int, default=50)
    g.add_argument("--samples", type=int, default=12, help="samples per person")
    g.add_argument("--size", type=int, default=128, help="image side in pixels (multiple of 16)")
    g.add_argument("--sigma", type=float, default=8.0, help="pixel noise standard deviation")
    p.add_argument("--seed", type=int, default=42, help="RNG seed for synthetic data and random splits")
    if default_split is not None:
        p.add_argument("--split", default=default_split, help="training fractions, e.g. 4/12,5/12")
        p.add_argument("--random-split", action="store_true", help="permute samples per person with --seed")
    p.add_argument("--dct-count", type=int, default=9, help="zig-zag DCT coefficients per block")
    p.add_argument("--out", type=Path, help="output path")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="palmid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic dataset to disk")
    _add_common(p, None)

    p = sub.add_parser("extract", help="write per-image feature vectors as CSV")
    _add_common(p, None)

    p = sub.add_parser("table1", help="accuracy over all features per training fraction")
    _add_common(p, "4/12,5/12,6/12")
    p.add_argument("--method", choices=("majority", "min-distance"), default="majority")
    p.add_argument("--pool", choices=("entry", "person"), default="entry", help="majority-vote score pooling")
    p.add_argument("--granularity", choices=("scalar", "block"), default="scalar", help="majority-vote unit")

    p = sub.add_parser("pca-curve", help="minimum-distance accuracy versus PCA components")
    _add_common(p, "4/12")
    p.add_argument("--k", default="10,25,50,100,150,all", help="component counts; 'all' = no reduction")
    return parser


def _config(args: argparse.Namespace, **extra) -> harness.RunConfig:
    synthetic = harness.SyntheticParams(args.persons, args.samples, args.size, args.size, args.sigma, args.seed)
    kwargs = dict(data_dir=args.data, synthetic=synthetic, dct_count=args.dct_count, out=args.out)
    if hasattr(args, "split"):
        kwargs["splits"] = harness.parse_splits(args.split)
        kwargs["split_seed"] = args.seed if args.random_split else None
    kwargs.update(extra)
    return harness.RunConfig(**kwargs)


def _emit(report: harness.Report, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(report.to_csv())
    else:
        report.write(out)


def _run(args: argparse.Namespace) -> int:
    if args.command == "synth":
        if args.out is None:
            raise InvalidParameter("synth needs --out <directory>")
        cfg = _config(args)
        save_dataset(cfg.synthetic.generate(), args.out)
        return EXIT_OK

    if args.command == "extract":
        if args.out is None:
            raise InvalidParameter("extract needs --out <file.csv>")
        prep = harness.prepare(_config(args))
        write_feature_csv(args.out, prep.dataset.samples, prep.features)
        return EXIT_OK

    if args.command == "table1":
        method = "majority_vote" if args.method == "majority" else "min_distance"
        vote = {"pool": args.pool, "granularity": args.granularity, "block_size": args.dct_count + 9}
        cfg = _config(args, method=method, vote_options=vote if method == "majority_vote" else {})
        _emit(harness.run_table1(cfg), args.out)
        return EXIT_OK

    if args.command == "pca-curve":
        cfg = _config(args, method="min_distance", pca_k=harness.parse_k_list(args.k))
        _emit(harness.run_pca_curve(cfg), args.out)
        return EXIT_OK

    raise InvalidParameter(f"unknown command {args.command}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except (InvalidParameter, KOutOfRange) as exc:
        print(f"palmid: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"palmid: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"palmid: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PalmError as exc:
        print(f"palmid: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
