"""
Command line interface.

- ``pgmseg segment``: segment a single image
- ``pgmseg eval``: evaluate a dataset manifest

Exit status: 0 on success, 1 if segmentations or dataset entries failed,
2 for invalid invocations.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from .evaluation import run_dataset, write_records
from .imagecore import (
    BoundingBox,
    build_trimap,
    read_image,
    read_prior,
    read_trimap,
    srgb_to_lab,
    write_mask,
)
from .pipeline import Mode, SegConfig, Solver, check_mode, run_ensemble

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _add_model_arguments(parser: argparse.ArgumentParser):
    defaults = SegConfig()
    group = parser.add_argument_group("model parameters")
    group.add_argument("--kf", type=int, default=defaults.k_f, help="foreground GMM components")
    group.add_argument("--kb", type=int, default=defaults.k_b, help="background GMM components")
    group.add_argument("--m", type=int, default=defaults.m, help="neighbors with pairwise terms")
    group.add_argument(
        "--lambda", dest="lam", type=float, default=defaults.lam, help="unary weight"
    )
    group.add_argument(
        "--iters", type=int, default=defaults.refine_iters, help="refinement iterations"
    )
    group.add_argument("--runs", type=int, default=defaults.runs, help="reruns for majority vote")
    group.add_argument(
        "--sp-size", type=int, default=defaults.target_sp_size, help="superpixel size in pixels"
    )
    group.add_argument("--seed", type=int, default=defaults.seed, help="master seed")
    group.add_argument(
        "--mode",
        choices=[m.value for m in Mode],
        default=defaults.mode.value,
        help="semi (--bbox or --trimap), auto (--prior) or gb (background model only)",
    )
    group.add_argument(
        "--solver",
        choices=[s.value for s in Solver],
        default=defaults.solver.value,
        help="inference scheme",
    )
    group.add_argument("--p0", type=float, default=defaults.p0, help="prior map threshold")
    group.add_argument(
        "--ring-width",
        type=int,
        default=defaults.ring_width,
        help="background training ring around the bounding box",
    )
    group.add_argument(
        "--prior-ring",
        type=int,
        default=defaults.prior_ring,
        help="restrict background training of prior maps to a ring of this width",
    )
    group.add_argument(
        "--pgm-rounds", type=int, default=defaults.pgm_rounds, help="PGM reweighting rounds"
    )
    group.add_argument(
        "--pgm-tol", type=float, default=defaults.pgm_tol, help="PGM convergence threshold"
    )


def config_from_args(args: argparse.Namespace) -> SegConfig:
    """Build configuration from parsed arguments."""
    return SegConfig(
        k_f=args.kf,
        k_b=args.kb,
        m=args.m,
        lam=args.lam,
        refine_iters=args.iters,
        runs=args.runs,
        seed=args.seed,
        mode=args.mode,
        solver=args.solver,
        target_sp_size=args.sp_size,
        p0=args.p0,
        ring_width=args.ring_width,
        pgm_rounds=args.pgm_rounds,
        pgm_tol=args.pgm_tol,
        prior_ring=args.prior_ring,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgmseg",
        description="Foreground/background segmentation by probabilistic graph matching",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug output"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    segment = subparsers.add_parser("segment", help="segment a single image")
    segment.add_argument("--image", required=True, help="input image (PNG/JPEG)")
    init = segment.add_mutually_exclusive_group(required=True)
    init.add_argument("--bbox", help='bounding box "x y w h"')
    init.add_argument("--trimap", help="trimap image (0 background, 128 unknown, 255 foreground)")
    init.add_argument("--prior", help="foreground probability map (.npy or 8-bit image)")
    segment.add_argument("--out", required=True, help="output mask (PNG)")
    segment.add_argument("--workers", type=int, default=1, help="worker processes for reruns")
    segment.add_argument("--debug-dir", help="write superpixels, matrices and masks per run")
    _add_model_arguments(segment)

    evaluate = subparsers.add_parser("eval", help="evaluate a dataset manifest")
    evaluate.add_argument("--manifest", required=True, help="tab-separated dataset manifest")
    evaluate.add_argument("--out-records", help="write per-image records (tab-separated)")
    evaluate.add_argument("--workers", type=int, default=1, help="worker processes for images")
    evaluate.add_argument("--no-progress", action="store_true", help="hide progress bar")
    _add_model_arguments(evaluate)
    return parser


def _configure_logging(verbosity: int):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


def _segment(args: argparse.Namespace, config: SegConfig) -> int:
    try:
        image = srgb_to_lab(read_image(args.image))
        if args.bbox is not None:
            trimap = build_trimap(image.shape, bbox=BoundingBox.from_string(args.bbox))
        elif args.trimap is not None:
            trimap = build_trimap(image.shape, trimap=read_trimap(args.trimap))
        else:
            trimap = build_trimap(image.shape, prior=read_prior(args.prior), p0=config.p0)
        check_mode(config, trimap)
    except (OSError, ValueError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE

    try:
        result = run_ensemble(
            image,
            trimap,
            config,
            max_workers=args.workers,
            show_progress=args.verbose > 0,
            debug_dir=args.debug_dir,
        )
        write_mask(result.mask, args.out)
    except (OSError, ValueError) as e:
        logger.error("Segmentation failed: %s", e)
        return EXIT_FAILURE
    logger.info("Mask written to %s", args.out)
    return EXIT_OK


def _evaluate(args: argparse.Namespace, config: SegConfig) -> int:
    try:
        records, summary = run_dataset(
            args.manifest, config, max_workers=args.workers, show_progress=not args.no_progress
        )
    except (OSError, ValueError) as e:
        logger.error("Invalid manifest: %s", e)
        return EXIT_USAGE

    if args.out_records:
        write_records(records, args.out_records)
    for metric, mean in summary.means.items():
        print(f"mean {metric}\t{mean:.6f}")
    print(f"images\t{summary.n_records}\terrors\t{summary.n_errors}")
    return EXIT_FAILURE if summary.n_errors else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``pgmseg`` command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = config_from_args(args)
    except ValueError as e:
        parser.error(str(e))  # exits with status 2
    if args.command == "segment":
        return _segment(args, config)
    return _evaluate(args, config)
