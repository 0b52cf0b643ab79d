"""
Seeded experiments: repeated trials of one online algorithm against the exact optimum.

Every trial owns its generator, seeded by ``derive_seed(base_seed, trial)``, so the records
do not depend on how trials are scheduled over worker threads.
"""

import csv
import json
import logging
import math
import os
import time
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import IO, Any, Literal, Optional, Union

import numpy as np
from typing_extensions import assert_never

from geomis.adversaries import AdversaryConfig
from geomis.errors import OracleRefusal, UsageError
from geomis.instance import load_instance
from geomis.lattice import DEFAULT_DELTA, LatticeParams
from geomis.online import ArrivalSequence, FirstFit, OnlineAlgorithm, empirical_ratio, run_online
from geomis.oracle import DEFAULT_NODE_LIMIT, exact_mis
from geomis.randomized import Classify, Filter, HRClassify, all_rect_classes, num_classes

logger = logging.getLogger(__name__)

AlgorithmId = Literal["firstfit", "filter", "classify", "hr_classify"]
ALGORITHMS: tuple[AlgorithmId, ...] = ("firstfit", "filter", "classify", "hr_classify")

CSV_COLUMNS = ("trial", "seed", "alg", "n", "alg_size", "opt_size", "ratio", "time_ms")
THREADS_ENV = "GEOMIS_THREADS"

_MASK64 = (1 << 64) - 1


def derive_seed(base_seed: int, trial: int) -> int:
    """
    Per-trial seed: the SplitMix64 finaliser applied to
    ``(base_seed XOR trial * 0xD1B54A32D192ED03) + 0x9E3779B97F4A7C15`` modulo 2^64.

    The finaliser is a bijection on 64-bit words, so distinct trials of one base seed never
    share a seed. ``derive_seed(0, 0) == 0xE220A8397B1DCDAF``.
    """
    z = ((base_seed ^ (trial * 0xD1B54A32D192ED03)) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One experiment, usually read from a JSON document.

    Exactly one of ``instance_file`` and ``generator`` names the instance. With ``vary_instance``
    the generator is re-seeded from each trial's derived seed; otherwise every trial sees the
    same instance and the optimum is computed once.
    """

    algorithm: AlgorithmId
    trials: int = 1
    base_seed: int = 0
    instance_file: Optional[str] = None
    generator: Optional[AdversaryConfig] = None
    vary_instance: bool = False
    delta: float = DEFAULT_DELTA
    M: float = 4.0
    dim: Optional[int] = None
    output: Optional[str] = None
    enumerate_classes: bool = False
    timing: bool = False
    node_limit: int = DEFAULT_NODE_LIMIT

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"Unknown algorithm {self.algorithm!r}, expected one of {', '.join(ALGORITHMS)}")
        if self.trials < 1:
            raise UsageError(f"trials must be at least 1, got {self.trials}")
        if (self.instance_file is None) == (self.generator is None):
            raise UsageError("Exactly one of 'file' and 'generator' must name the instance")
        if self.vary_instance and self.generator is None:
            raise UsageError("vary_instance needs a generator")
        if self.algorithm in ("classify", "hr_classify") and not self.M > 2:
            raise UsageError(f"M must be greater than 2 for {self.algorithm}, got {self.M}")
        if self.enumerate_classes and self.algorithm not in ("classify", "hr_classify"):
            raise UsageError(f"enumerate_classes needs classify or hr_classify, not {self.algorithm}")
        if not self.delta > 0:
            raise UsageError(f"delta must be positive, got {self.delta}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)} | {"file"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"Unknown experiment keys: {', '.join(unknown)}")
        values = dict(data)
        if "file" in values:
            values["instance_file"] = values.pop("file")
        generator = values.get("generator")
        if isinstance(generator, Mapping):
            try:
                values["generator"] = AdversaryConfig(**generator)
            except TypeError as e:
                raise UsageError(f"Bad generator config: {e}") from e
        if "algorithm" not in values:
            raise UsageError("Experiment config needs an 'algorithm'")
        return cls(**values)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise UsageError(f"{path}: {e}") from e
        if not isinstance(data, dict):
            raise UsageError(f"{path}: expected a JSON object")
        return cls.from_mapping(data)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    alg: str
    n: int
    alg_size: int
    opt_size: Optional[int]
    ratio: Optional[float]
    wall_time: float


@dataclass(frozen=True)
class ExperimentSummary:
    trials: int
    mean_alg_size: float
    stderr: float
    ci_low: float
    ci_high: float
    mean_ratio: Optional[float]
    expected_ratio: Optional[float]
    refused: int


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    records: tuple[TrialRecord, ...]
    summary: ExperimentSummary


def summarize(records: Sequence[TrialRecord]) -> ExperimentSummary:
    """
    Mean accepted size with its standard error and a 3-sigma interval.

    Ratios are averaged over the trials the oracle solved; ``expected_ratio`` divides the mean
    optimum by the mean accepted size of those same trials.
    """
    if not records:
        raise UsageError("Cannot summarize an empty experiment")
    sizes = np.array([r.alg_size for r in records], dtype=float)
    mean = float(sizes.mean())
    stderr = float(sizes.std(ddof=1) / math.sqrt(len(sizes))) if len(sizes) > 1 else 0.0
    solved = [r for r in records if r.opt_size is not None]
    mean_ratio: Optional[float] = None
    expected_ratio: Optional[float] = None
    if solved:
        mean_ratio = float(np.mean([r.ratio for r in solved]))
        mean_opt = float(np.mean([r.opt_size for r in solved]))
        mean_alg = float(np.mean([r.alg_size for r in solved]))
        if mean_alg > 0:
            expected_ratio = mean_opt / mean_alg
        else:
            expected_ratio = 1.0 if mean_opt == 0 else math.inf
    return ExperimentSummary(
        trials=len(records),
        mean_alg_size=mean,
        stderr=stderr,
        ci_low=mean - 3 * stderr,
        ci_high=mean + 3 * stderr,
        mean_ratio=mean_ratio,
        expected_ratio=expected_ratio,
        refused=len(records) - len(solved),
    )


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: an explicit value, else ``GEOMIS_THREADS``, else the core count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError as e:
                raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from e
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise UsageError(f"Thread count must be at least 1, got {threads}")
    return threads


@dataclass(frozen=True)
class _Trial:
    index: int
    seed: int
    label: str
    force_class: Optional[tuple[int, ...]] = None


def _plan(config: ExperimentConfig, dim: Optional[int]) -> list[_Trial]:
    if not config.enumerate_classes:
        return [_Trial(t, derive_seed(config.base_seed, t), config.algorithm) for t in range(config.trials)]
    if config.algorithm == "classify":
        classes: list[tuple[int, ...]] = [(j,) for j in range(num_classes(config.M))]
    else:
        if dim is None:
            raise UsageError("hr_classify needs a dimension")
        classes = list(all_rect_classes(config.M, dim))
    return [
        _Trial(t, derive_seed(config.base_seed, t), f"{config.algorithm}[j={','.join(map(str, cls))}]", cls)
        for t, cls in enumerate(classes)
    ]


def _algorithm(config: ExperimentConfig, trial: _Trial, stream: ArrivalSequence) -> OnlineAlgorithm:
    dim = stream.dim if stream.dim is not None else config.dim
    if config.algorithm == "firstfit":
        return FirstFit()
    elif config.algorithm == "filter":
        if dim is None:
            raise UsageError("filter needs a geometric instance")
        return Filter(LatticeParams(dim, config.delta), trial.seed)
    elif config.algorithm == "classify":
        force = trial.force_class[0] if trial.force_class is not None else None
        return Classify(config.M, trial.seed, force)
    elif config.algorithm == "hr_classify":
        if dim is None:
            raise UsageError("hr_classify needs a geometric instance")
        return HRClassify(config.M, dim, trial.seed, trial.force_class)
    else:
        assert_never(config.algorithm)


def _optimum(stream: ArrivalSequence, node_limit: int) -> Optional[int]:
    try:
        return exact_mis(stream.adjacency(), node_limit).size
    except OracleRefusal as e:
        logger.info("Oracle refused: %s", e)
        return None


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None) -> ExperimentReport:
    """
    Run every trial of ``config`` and summarize them.

    Oracle refusals leave ``opt_size`` and ``ratio`` empty on the affected records and are counted
    in the summary. Records come back in trial order whatever the thread count. With
    ``enumerate_classes`` there is one trial per size class and ``trials`` is ignored.
    """
    fixed: Optional[ArrivalSequence] = None
    if config.instance_file is not None:
        fixed = load_instance(config.instance_file)
    elif not config.vary_instance:
        assert config.generator is not None
        fixed = config.generator.generate()
    dim = fixed.dim if fixed is not None else config.generator.dim  # type: ignore[union-attr]
    plan = _plan(config, config.dim or dim)
    fixed_opt = _optimum(fixed, config.node_limit) if fixed is not None else None

    def run_trial(trial: _Trial) -> TrialRecord:
        start = time.perf_counter()
        if fixed is not None:
            stream = fixed
        else:
            assert config.generator is not None
            stream = replace(config.generator, seed=trial.seed).generate()
        result = run_online(_algorithm(config, trial, stream), stream)
        if not result.valid:
            logger.warning("Trial %d produced an invalid run", trial.index)
        opt = fixed_opt if fixed is not None else _optimum(stream, config.node_limit)
        return TrialRecord(
            trial=trial.index,
            seed=trial.seed,
            alg=trial.label,
            n=len(stream),
            alg_size=result.size,
            opt_size=opt,
            ratio=None if opt is None else empirical_ratio(opt, result),
            wall_time=time.perf_counter() - start,
        )

    workers = min(resolve_threads(threads), len(plan))
    logger.info("Running %d trials of %s on %d threads", len(plan), config.algorithm, workers)
    if workers == 1:
        records = [run_trial(t) for t in plan]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, plan))
    summary = summarize(records)
    if summary.refused:
        logger.warning("Oracle refused %d of %d trials", summary.refused, summary.trials)
    return ExperimentReport(config, tuple(records), summary)


def _format_ratio(ratio: Optional[float]) -> str:
    if ratio is None:
        return ""
    return "inf" if math.isinf(ratio) else repr(ratio)


def write_csv(records: Sequence[TrialRecord], out: IO[str], timing: bool = False) -> None:
    """Write records with the fixed columns; ``time_ms`` stays empty unless ``timing`` is set."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.trial,
                r.seed,
                r.alg,
                r.n,
                r.alg_size,
                "" if r.opt_size is None else r.opt_size,
                _format_ratio(r.ratio),
                f"{r.wall_time * 1000:.3f}" if timing else "",
            ]
        )


def save_csv(report: ExperimentReport, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_csv(report.records, f, report.config.timing)
