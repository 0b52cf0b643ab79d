"""Command-line entry point: ``geomis gen|run|oracle|lattice|experiment``."""

import argparse
import logging
import math
import sys
from collections.abc import Sequence
from dataclasses import replace
from typing import IO, NoReturn, Optional, get_args

import numpy as np

from geomis.__about__ import __version__
from geomis.adversaries import AdversaryConfig, AdversaryKind, star_adversary
from geomis.errors import CheckFailed, GeomisError, UsageError
from geomis.geometry import Point, distance
from geomis.harness import ALGORITHMS, ExperimentConfig, run_experiment, write_csv
from geomis.instance import dumps, load_instance
from geomis.lattice import (
    DEFAULT_DELTA,
    ROW_STEP,
    LatticeParams,
    SampleBox,
    brute_force_nearest,
    closest_lattice_point,
    covered_mask,
    is_covered,
    mc_volume_fraction,
    min_pairwise_distance,
    unit_ball_volume,
    volume_estimates_agree,
)
from geomis.online import FirstFit, OnlineAlgorithm, run_online
from geomis.oracle import exact_mis, independent_kissing_number, verify_ratio
from geomis.randomized import Classify, Filter, HRClassify, filter_acceptance_probability

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting, so ``main`` owns the exit code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed")
    common.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="lattice slack delta")
    common.add_argument("--M", type=float, default=4.0, help="upper end of the width range [1, M]")
    common.add_argument("--dim", type=int, default=3, help="dimension")
    common.add_argument("--trials", type=int, default=None, help="number of trials")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default $GEOMIS_THREADS)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="geomis", description="Online maximum independent set on geometric intersection graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="generate an instance file")
    gen.add_argument("--kind", required=True, choices=get_args(AdversaryKind))
    gen.add_argument("--zeta", type=int, default=1)
    gen.add_argument("--n", type=int, default=0)
    gen.add_argument("--box", type=float, default=10.0, help="side of the box holding the centres")

    run = sub.add_parser("run", parents=[common], help="run an online algorithm on an instance")
    run.add_argument("--alg", required=True, choices=ALGORITHMS)
    run.add_argument("--instance", required=True)
    run.add_argument("--shift", type=_floats, default=None, help="force the Filter shift, comma separated")
    run.add_argument("--force-class", type=_ints, default=None, help="force the Classify / HR-Classify class")
    run.add_argument("--literal", action="store_true", help="run Filter as FirstFit on the covered balls")

    oracle = sub.add_parser("oracle", parents=[common], help="exact computations on an instance")
    oracle.add_argument("--what", required=True, choices=["mis", "ikn", "ratio"])
    oracle.add_argument("--instance", required=True)
    oracle.add_argument("--node-limit", type=int, default=40)

    lattice = sub.add_parser("lattice", parents=[common], help="numerical checks of the lattice")
    lattice.add_argument("--check", required=True, choices=["mindist", "closest", "volume", "acceptance"])
    lattice.add_argument("--window", type=int, default=3)
    lattice.add_argument("--samples", type=int, default=100_000)

    experiment = sub.add_parser("experiment", parents=[common], help="run a JSON-configured experiment")
    experiment.add_argument("--config", required=True)
    return parser


def _open_out(path: Optional[str]) -> IO[str]:
    return open(path, "w", encoding="utf-8", newline="") if path else sys.stdout


def _emit(text: str, path: Optional[str]) -> None:
    out = _open_out(path)
    try:
        out.write(text)
    finally:
        if out is not sys.stdout:
            out.close()


def _cmd_gen(args: argparse.Namespace) -> int:
    config = AdversaryConfig(args.kind, args.zeta, args.n, args.dim, args.M, args.box, args.seed)
    if args.kind == "star":
        transcript = star_adversary(args.zeta, FirstFit())
        _emit(dumps(transcript.stream, transcript.result.decisions), args.out)
    else:
        _emit(dumps(config.generate()), args.out)
    return EXIT_OK


def _make_algorithm(args: argparse.Namespace, dim: Optional[int]) -> OnlineAlgorithm:
    if args.alg == "firstfit":
        return FirstFit()
    if dim is None:
        raise UsageError(f"{args.alg} needs a geometric instance")
    if args.alg == "filter":
        shift = Point(args.shift) if args.shift is not None else None
        return Filter(LatticeParams(dim, args.delta), args.seed, shift, args.literal)
    if args.alg == "classify":
        force = None
        if args.force_class is not None:
            if len(args.force_class) != 1:
                raise UsageError("classify takes a single class index")
            force = args.force_class[0]
        return Classify(args.M, args.seed, force)
    return HRClassify(args.M, dim, args.seed, args.force_class)


def _cmd_run(args: argparse.Namespace) -> int:
    stream = load_instance(args.instance)
    result = run_online(_make_algorithm(args, stream.dim), stream)
    print(f"accepted {result.size}: {' '.join(map(str, result.accepted)) or '-'}")
    if args.out:
        _emit(dumps(stream, result.decisions), args.out)
    if not result.valid:
        raise CheckFailed(
            f"invalid run: independent={result.valid_independent} irrevocable={result.valid_irrevocable}"
        )
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    stream = load_instance(args.instance)
    graph = stream.adjacency()
    if args.what == "mis":
        mis = exact_mis(graph, args.node_limit)
        print(mis.size)
        logger.info("witness %s", mis.witness)
    elif args.what == "ikn":
        ikn = independent_kissing_number(graph, args.node_limit)
        print(ikn.zeta)
        logger.info("centre %s, witness %s", ikn.witness_center, ikn.witness_set)
    else:
        check = verify_ratio(stream, run_online(FirstFit(), stream), args.node_limit)
        print(f"opt {check.opt} alg {check.alg} ratio {check.ratio} zeta {check.zeta}")
        if not (check.bound_satisfied and check.maximal):
            raise CheckFailed(f"FirstFit check failed: {check}")
    return EXIT_OK


def _check_closest(params: LatticeParams, queries: int, window: int, rng: np.random.Generator) -> int:
    span = np.array([2 * params.period] + [2 * ROW_STEP] * (params.dim - 1))
    mismatches = 0
    for row in rng.uniform(-span, span, size=(queries, params.dim)):
        c = Point(row)
        p, _ = closest_lattice_point(params, c)
        best, _ = brute_force_nearest(params, c, window)
        if abs(distance(p, c) - best) > 1e-9 or is_covered(params, c) != (best <= 1.0):
            logger.warning("closest point mismatch at %s", c)
            mismatches += 1
    return mismatches


def _cmd_lattice(args: argparse.Namespace) -> int:
    params = LatticeParams(args.dim, args.delta)
    rng = np.random.default_rng(args.seed)
    if args.check == "mindist":
        value = min_pairwise_distance(params, args.window)
        print(f"{value:.9f}")
        if not value > 4:
            raise CheckFailed(f"minimum distance {value} is not above 4")
    elif args.check == "closest":
        queries = args.trials or 10_000
        mismatches = _check_closest(params, queries, args.window, rng)
        print(f"{queries - mismatches}/{queries} queries agree")
        if mismatches:
            raise CheckFailed(f"{mismatches} closest-point mismatches")
    elif args.check == "volume":
        expected = unit_ball_volume(params.dim)
        boxes = args.trials or 20
        estimates = []
        for i in range(boxes):
            origin = Point(rng.uniform(-10.0, 10.0, size=params.dim))
            estimate = mc_volume_fraction(params, SampleBox(origin, params), args.samples, args.seed + i + 1)
            print(f"{origin} {estimate.volume:.6f} +- {estimate.volume_stderr:.6f}")
            estimates.append(estimate)
        print(f"expected {expected:.6f}")
        if not volume_estimates_agree(estimates, expected):
            raise CheckFailed(f"volume estimates of {boxes} boxes disagree with {expected}")
    else:
        expected = filter_acceptance_probability(params)
        centre = rng.uniform(-10.0, 10.0, size=params.dim)
        limits = np.array([params.period] + [ROW_STEP] * (params.dim - 1))
        shifts = rng.random((args.samples, params.dim)) * limits
        rate = float(covered_mask(params, centre + shifts).mean())
        sigma = math.sqrt(expected * (1 - expected) / args.samples)
        print(f"acceptance {rate:.6f} expected {expected:.6f} sigma {sigma:.6f}")
        if abs(rate - expected) > 3 * sigma:
            raise CheckFailed(f"acceptance rate {rate} more than 3 sigma from {expected}")
    return EXIT_OK


def _cmd_experiment(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.trials is not None:
        config = replace(config, trials=args.trials)
    report = run_experiment(config, args.threads)
    s = report.summary
    logger.info(
        "mean accepted %.6f (3 sigma: %.6f..%.6f), mean ratio %s, expected ratio %s, refused %d",
        s.mean_alg_size,
        s.ci_low,
        s.ci_high,
        s.mean_ratio,
        s.expected_ratio,
        s.refused,
    )
    out = _open_out(args.out or config.output)
    try:
        write_csv(report.records, out, config.timing)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "run": _cmd_run,
    "oracle": _cmd_oracle,
    "lattice": _cmd_lattice,
    "experiment": _cmd_experiment,
}


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"geomis: error: {e}", file=sys.stderr)
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)
    _configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"geomis: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailed as e:
        print(f"geomis: check failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    except GeomisError as e:
        print(f"geomis: {e}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as e:
        print(f"geomis: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
