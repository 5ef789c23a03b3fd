"""Command-line driver: ``synth``, ``calibrate`` and ``evaluate``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, files
from .errors import DegenerateFitError, InvalidArgumentError, ProjectionError, VisibilityError
from .identification import FINE_OPTIONS, calibrate

EXIT_OK = 0
EXIT_VALIDATION = 3
EXIT_DEGENERATE = 4
EXIT_NOT_CONVERGED = 5
EXIT_IO = 6
EXIT_VISIBILITY = 7


def _write(path, writer) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        writer(path)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write {path}: {exc}") from exc


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def cmd_synth(args) -> int:
    config = bench.BenchConfig(
        seed=args.seed,
        perturbation_scale=args.scale,
        pixel_noise_sigma=args.noise_px,
        angles_per_joint=args.angles_per_joint,
    )
    try:
        dataset = bench.make_dataset(config)
    except VisibilityError as exc:
        raise _Exit(EXIT_VISIBILITY, str(exc)) from exc
    _write(args.out, lambda p: files.save_dataset(dataset, p))
    print(f"wrote {dataset.n_poses} poses x {dataset.plate.n_points} corners to {args.out}")
    return EXIT_OK


def _load_dataset(path):
    try:
        return files.load_dataset(path)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot read {path}: {exc}") from exc
    except (files.FormatError, InvalidArgumentError) as exc:
        raise _Exit(EXIT_VALIDATION, f"{path}: {exc}") from exc


def cmd_calibrate(args) -> int:
    dataset = _load_dataset(args.inp)
    options = replace(FINE_OPTIONS, max_iterations=args.max_iters, workers=args.workers)
    try:
        rough, result = calibrate(dataset, options)
    except DegenerateFitError as exc:
        raise _Exit(EXIT_DEGENERATE, f"circle fit failed: {exc}") from exc
    except ProjectionError as exc:
        raise _Exit(EXIT_VALIDATION, f"seed model does not project: {exc}") from exc

    _write(args.out, lambda p: files.save_result(result, p, rough))
    report = files.build_report(dataset, rough, result)
    if args.report:
        _write(args.report, lambda p: files.save_report(report, p))

    print(f"rough identification: {dataset.n_poses} poses, 7 circle fits")
    print(
        f"fine identification: {result.initial_objective:.6f} -> {result.objective_value:.6f} px "
        f"in {result.iterations} iterations ({result.status})"
    )
    for name, series in report["variants"].items():
        print(f"  {name:12s} mean deviation {series['mean']:.6f} px")
    if not result.converged:
        print("warning: optimization did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = _load_dataset(args.inp)
    result = None
    if args.params:
        try:
            result = files.load_result(args.params)
        except OSError as exc:
            raise _Exit(EXIT_IO, f"cannot read {args.params}: {exc}") from exc
        except files.FormatError as exc:
            raise _Exit(EXIT_VALIDATION, str(exc)) from exc
    try:
        model = files.variant_model(args.variant, dataset, result)
        series = files.variant_series(model, dataset)
    except files.FormatError as exc:
        raise _Exit(EXIT_VALIDATION, str(exc)) from exc
    except ProjectionError as exc:
        raise _Exit(EXIT_VALIDATION, str(exc)) from exc

    print(f"# variant {args.variant}")
    print("# joint  angle_deg  mean_px")
    for j, a, v in zip(series["joint"], series["angle"], series["per_pose"]):
        print(f"{j:7d}  {np.degrees(a):9.3f}  {v:.6f}")
    print(f"mean {series['mean']:.3f} px")
    if args.series:
        doc = files.header("dhcalib-series")
        doc["variant"] = args.variant
        doc.update(series)
        _write(args.series, lambda p: files.write_json(p, doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dhcalib", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="simulate the 7 x 10 sweep capture on the synthetic bench")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="multiplier on the perturbation envelope")
    p.add_argument("--noise-px", type=float, default=0.0, help="pixel noise sigma")
    p.add_argument("--angles-per-joint", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", help="rough + fine identification")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True, help="calibration result file")
    p.add_argument("--max-iters", type=int, default=FINE_OPTIONS.max_iterations)
    p.add_argument("--report", help="report file with comparison series and tables")
    p.add_argument("--workers", type=int, default=1, help="threads for gradient evaluation")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="per-pose pixel deviation of one parameter variant")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--params", help="calibration result file")
    p.add_argument("--variant", choices=files.VARIANTS, default="compensated")
    p.add_argument("--series", help="write plot-ready series to this file")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
