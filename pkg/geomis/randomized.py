"""
Randomized online algorithms that use the geometric representation of the arrivals.

Each algorithm draws its random choice once, when the first object arrives, from a
generator seeded by the run seed; the ``force_*`` arguments pin that choice for tests.
"""

import itertools
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np
from typing_extensions import override

from geomis.errors import UsageError
from geomis.geometry import Ball, HyperRectangle, Point, distance
from geomis.lattice import ROW_STEP, CoeffVector, LatticeParams, parity_round, unit_ball_volume
from geomis.online import ArrivalEvent, ArrivalSequence, FirstFit, OnlineAlgorithm, RunResult, run_online


def width_class(width: float) -> int:
    """The j with width in [2^j, 2^(j+1)), computed exactly from the binary exponent."""
    if not (math.isfinite(width) and width > 0):
        raise UsageError(f"Width must be positive, got {width}")
    _, exponent = math.frexp(width)
    return exponent - 1


def num_classes(M: float) -> int:
    """floor(log2 M) + 1 size classes cover [1, M]."""
    return width_class(M) + 1


def _check_M(M: float) -> None:
    if not (math.isfinite(M) and M > 2):
        raise UsageError(f"M must be greater than 2, got {M}")


def _check_range(value: float, M: float, what: str) -> None:
    if not 1 <= value <= M:
        raise UsageError(f"{what} {value} outside [1, {M}]")


@dataclass
class FilterState:
    params: LatticeParams
    shift: Point
    occupied: dict[CoeffVector, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.shift.dim != self.params.dim:
            raise UsageError(f"Shift has dimension {self.shift.dim}, lattice has {self.params.dim}")
        limits = (self.params.period,) + (ROW_STEP,) * (self.params.dim - 1)
        if not all(0 <= b < limit for b, limit in zip(self.shift, limits)):
            raise UsageError(f"Shift {self.shift} outside [0, 4+delta) x [0, 2*sqrt(3))^(d-1)")


def draw_shift(params: LatticeParams, rng: np.random.Generator) -> Point:
    first = rng.uniform(0.0, params.period)
    rest = rng.uniform(0.0, ROW_STEP, size=params.dim - 1)
    return Point([first, *rest])


class Filter(OnlineAlgorithm):
    """
    Unit balls: run FirstFit only on balls whose shifted centre lies within distance 1 of a
    lattice point.

    Covered balls intersect exactly when they share a lattice point, so FirstFit on the covered
    subsequence accepts the first ball seen at each lattice point. That map form is the default;
    ``literal=True`` runs FirstFit on the covered balls instead.
    """

    name: ClassVar[str] = "filter"

    def __init__(
        self,
        params: LatticeParams,
        seed: int = 0,
        force_shift: Optional[Point] = None,
        literal: bool = False,
    ) -> None:
        self.params = params
        self.seed = seed
        self.literal = literal
        self._force_shift = force_shift
        self._state: Optional[FilterState] = None
        self._first_fit = FirstFit()
        self._accepted: list[int] = []

    @property
    def state(self) -> FilterState:
        if self._state is None:
            shift = self._force_shift
            if shift is None:
                shift = draw_shift(self.params, np.random.default_rng(self.seed))
            self._state = FilterState(self.params, shift)
        return self._state

    def lattice_cell(self, ball: Ball) -> Optional[CoeffVector]:
        """Coefficients of the lattice point covering the shifted centre, if any."""
        shifted = ball.center + self.state.shift
        p, coeffs = parity_round(self.params, shifted)
        return coeffs if distance(p, shifted) <= 1.0 else None

    def _ball(self, event: ArrivalEvent) -> Ball:
        shape = event.payload.shape if event.payload is not None else None
        if not isinstance(shape, Ball) or not shape.is_unit:
            raise UsageError(f"Filter needs unit balls, vertex {event.id} is {shape}")
        if shape.dim != self.params.dim:
            raise UsageError(f"Vertex {event.id} has dimension {shape.dim}, lattice has {self.params.dim}")
        return shape

    @override
    def decide(self, event: ArrivalEvent) -> bool:
        cell = self.lattice_cell(self._ball(event))
        if cell is None:
            return False
        if self.literal:
            accept = self._first_fit.decide(event)
        else:
            accept = cell not in self.state.occupied
        if accept:
            self.state.occupied.setdefault(cell, event.id)
            self._accepted.append(event.id)
        return accept

    @property
    @override
    def accepted(self) -> tuple[int, ...]:
        return tuple(self._accepted)


def filter_alg(
    stream: ArrivalSequence,
    params: LatticeParams,
    seed: int,
    force_shift: Optional[Point] = None,
) -> RunResult:
    return run_online(Filter(params, seed, force_shift), stream)


def filter_acceptance_probability(params: LatticeParams) -> float:
    """Probability that a ball is covered under a uniform shift: Vol(unit ball) / ((4+delta)(2*sqrt(3))^(d-1))."""
    return unit_ball_volume(params.dim) / params.fundamental_volume


def filter_competitive_bound(params: LatticeParams) -> float:
    return 1 / filter_acceptance_probability(params)


def filter_epsilon(delta: float) -> float:
    """The epsilon with filter_competitive_bound = (36 + epsilon)/pi in three dimensions."""
    return 9 * delta


@dataclass(frozen=True)
class ClassifyConfig:
    M: float
    chosen_class: int

    def __post_init__(self) -> None:
        _check_M(self.M)
        if not 0 <= self.chosen_class < num_classes(self.M):
            raise UsageError(f"Class {self.chosen_class} outside 0..{num_classes(self.M) - 1}")

    @classmethod
    def draw(cls, M: float, rng: np.random.Generator) -> "ClassifyConfig":
        _check_M(M)
        return cls(M, int(rng.integers(num_classes(M))))


class Classify(OnlineAlgorithm):
    """
    Objects with widths in [1, M]: pick one width class [2^j, 2^(j+1)) uniformly at random and
    run FirstFit on the objects of that class, rejecting every other object.
    """

    name: ClassVar[str] = "classify"

    def __init__(self, M: float, seed: int = 0, force_class: Optional[int] = None) -> None:
        _check_M(M)
        self.M = M
        self.seed = seed
        self._force_class = force_class
        self._config: Optional[ClassifyConfig] = None
        self._first_fit = FirstFit()

    @property
    def config(self) -> ClassifyConfig:
        if self._config is None:
            if self._force_class is None:
                self._config = ClassifyConfig.draw(self.M, np.random.default_rng(self.seed))
            else:
                self._config = ClassifyConfig(self.M, self._force_class)
        return self._config

    @override
    def decide(self, event: ArrivalEvent) -> bool:
        if event.payload is None:
            raise UsageError(f"Classify needs the width of vertex {event.id}")
        _check_range(event.payload.width, self.M, f"Width of vertex {event.id}")
        if width_class(event.payload.width) != self.config.chosen_class:
            return False
        return self._first_fit.decide(event)

    @property
    @override
    def accepted(self) -> tuple[int, ...]:
        return self._first_fit.accepted


def classify_alg(
    stream: ArrivalSequence, M: float, seed: int, force_class: Optional[int] = None
) -> RunResult:
    return run_online(Classify(M, seed, force_class), stream)


def classify_ratio_bound(zeta_prime: int, M: float) -> float:
    """Expected competitive ratio guaranteed by Classify: zeta' * (floor(log2 M) + 1)."""
    return zeta_prime * num_classes(M)


@dataclass(frozen=True)
class HRClassifyConfig:
    M: float
    dim: int
    chosen: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_M(self.M)
        object.__setattr__(self, "chosen", tuple(int(i) for i in self.chosen))
        if len(self.chosen) != self.dim:
            raise UsageError(f"Need {self.dim} class indices, got {len(self.chosen)}")
        if not all(0 <= i < num_classes(self.M) for i in self.chosen):
            raise UsageError(f"Class indices {self.chosen} outside 0..{num_classes(self.M) - 1}")

    @classmethod
    def draw(cls, M: float, dim: int, rng: np.random.Generator) -> "HRClassifyConfig":
        _check_M(M)
        return cls(M, dim, tuple(int(i) for i in rng.integers(num_classes(M), size=dim)))

    @property
    def num_classes(self) -> int:
        return num_classes(self.M) ** self.dim


def rect_class(rect: HyperRectangle) -> tuple[int, ...]:
    return tuple(width_class(side) for side in rect.sides)


def all_rect_classes(M: float, dim: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(num_classes(M)), repeat=dim)


class HRClassify(OnlineAlgorithm):
    """
    Hyper-rectangles with side lengths in [1, M]: pick a class index per axis uniformly at
    random and run FirstFit on the rectangles whose side j lies in [2^(i_j), 2^(i_j+1)) for all j.
    """

    name: ClassVar[str] = "hr_classify"

    def __init__(
        self, M: float, dim: int, seed: int = 0, force_class: Optional[Sequence[int]] = None
    ) -> None:
        _check_M(M)
        self.M = M
        self.dim = dim
        self.seed = seed
        self._force_class = None if force_class is None else tuple(force_class)
        self._config: Optional[HRClassifyConfig] = None
        self._first_fit = FirstFit()

    @property
    def config(self) -> HRClassifyConfig:
        if self._config is None:
            if self._force_class is None:
                self._config = HRClassifyConfig.draw(self.M, self.dim, np.random.default_rng(self.seed))
            else:
                self._config = HRClassifyConfig(self.M, self.dim, self._force_class)
        return self._config

    @override
    def decide(self, event: ArrivalEvent) -> bool:
        shape = event.payload.shape if event.payload is not None else None
        if not isinstance(shape, HyperRectangle):
            raise UsageError(f"HR-Classify needs hyper-rectangles, vertex {event.id} is {shape}")
        if shape.dim != self.dim:
            raise UsageError(f"Vertex {event.id} has dimension {shape.dim}, expected {self.dim}")
        for side in shape.sides:
            _check_range(side, self.M, f"Side length of vertex {event.id}")
        if rect_class(shape) != self.config.chosen:
            return False
        return self._first_fit.decide(event)

    @property
    @override
    def accepted(self) -> tuple[int, ...]:
        return self._first_fit.accepted


def hr_classify_alg(
    stream: ArrivalSequence,
    M: float,
    seed: int,
    force_class: Optional[Sequence[int]] = None,
) -> RunResult:
    if stream.dim is None:
        raise UsageError("HR-Classify needs a geometric stream")
    return run_online(HRClassify(M, stream.dim, seed, force_class), stream)


def hr_classify_ratio_bound(M: float, dim: int) -> float:
    """Expected competitive ratio guaranteed by HR-Classify: (4 * (floor(log2 M) + 1))^d."""
    return float((4 * num_classes(M)) ** dim)
