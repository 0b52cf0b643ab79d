# SPDX-FileCopyrightText: 2025-present geomis contributors
#
# SPDX-License-Identifier: MIT

from .adversaries import (
    AdversaryConfig,
    level_graph_gen,
    random_balls_gen,
    random_fat_balls_gen,
    random_rects_gen,
    star_adversary,
)
from .errors import CheckFailed, GeomisError, InstanceFormatError, OracleRefusal, UsageError
from .geometry import Ball, HyperRectangle, Point, SizedObject, intersection_graph
from .harness import ExperimentConfig, TrialRecord, derive_seed, run_experiment, summarize
from .instance import dumps, load_instance, loads, save_instance
from .lattice import LatticeParams, closest_lattice_point, is_covered, min_pairwise_distance, parity_round
from .online import ArrivalEvent, ArrivalSequence, FirstFit, OnlineAlgorithm, RunResult, empirical_ratio, first_fit
from .oracle import exact_mis, independent_kissing_number, verify_ratio
from .randomized import Classify, Filter, HRClassify, classify_alg, filter_alg, hr_classify_alg

__all__ = [
    "Point",
    "Ball",
    "HyperRectangle",
    "SizedObject",
    "intersection_graph",
    "LatticeParams",
    "parity_round",
    "closest_lattice_point",
    "is_covered",
    "min_pairwise_distance",
    "ArrivalEvent",
    "ArrivalSequence",
    "OnlineAlgorithm",
    "RunResult",
    "FirstFit",
    "first_fit",
    "empirical_ratio",
    "Filter",
    "Classify",
    "HRClassify",
    "filter_alg",
    "classify_alg",
    "hr_classify_alg",
    "AdversaryConfig",
    "star_adversary",
    "level_graph_gen",
    "random_balls_gen",
    "random_fat_balls_gen",
    "random_rects_gen",
    "exact_mis",
    "independent_kissing_number",
    "verify_ratio",
    "ExperimentConfig",
    "TrialRecord",
    "derive_seed",
    "run_experiment",
    "summarize",
    "loads",
    "dumps",
    "load_instance",
    "save_instance",
    "GeomisError",
    "UsageError",
    "InstanceFormatError",
    "OracleRefusal",
    "CheckFailed",
]
