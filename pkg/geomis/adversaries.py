"""Lower-bound constructions and random instance generators."""

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, get_args

import numpy as np
from typing_extensions import assert_never

from geomis.errors import UsageError
from geomis.geometry import Ball, HyperRectangle, Point, SizedObject
from geomis.online import ArrivalEvent, ArrivalSequence, FirstFit, OnlineAlgorithm, OnlineRunner, RunResult
from geomis.randomized import rect_class

AdversaryKind = Literal["star", "levels", "random_balls", "random_fat_balls", "random_rects"]


@dataclass(frozen=True)
class AdversaryConfig:
    kind: AdversaryKind
    zeta: int = 1
    n: int = 0
    dim: int = 3
    M: float = 4.0
    box_side: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in get_args(AdversaryKind):
            raise UsageError(f"Unknown generator kind {self.kind!r}")
        if self.zeta < 1:
            raise UsageError(f"zeta must be at least 1, got {self.zeta}")
        if self.n < 0 or self.dim < 1 or self.box_side <= 0:
            raise UsageError(f"Invalid generator size parameters: n={self.n} dim={self.dim} box={self.box_side}")
        if self.kind == "random_fat_balls" and not self.M >= 1:
            raise UsageError(f"M must be at least 1, got {self.M}")
        if self.kind == "random_rects" and not self.M > 2:
            raise UsageError(f"M must be greater than 2 for rectangles, got {self.M}")

    def generate(self) -> ArrivalSequence:
        """Build the instance; the star adversary is played against FirstFit."""
        if self.kind == "star":
            return star_adversary(self.zeta, FirstFit()).stream
        elif self.kind == "levels":
            return level_graph_gen(self.zeta, self.seed)
        elif self.kind == "random_balls":
            return random_balls_gen(self.n, self.dim, self.box_side, self.seed)
        elif self.kind == "random_fat_balls":
            return random_fat_balls_gen(self.n, self.dim, self.M, self.box_side, self.seed)
        elif self.kind == "random_rects":
            return random_rects_gen(self.n, self.dim, self.M, self.box_side, self.seed)
        else:
            assert_never(self.kind)


class StarTranscript(NamedTuple):
    stream: ArrivalSequence
    result: RunResult
    opt_size: int


def star_adversary(zeta: int, algorithm: OnlineAlgorithm) -> StarTranscript:
    """
    Adaptive adversary against a deterministic algorithm.

    Reveals v0; if it is rejected nothing else arrives. Otherwise reveals zeta pairwise
    non-adjacent neighbours of v0, none of which the algorithm may take.
    """
    if zeta < 1:
        raise UsageError(f"zeta must be at least 1, got {zeta}")
    runner = OnlineRunner(algorithm)
    events = [ArrivalEvent(0)]
    if not runner.feed(events[0]):
        return StarTranscript(ArrivalSequence(tuple(events)), runner.result(), 1)
    for i in range(1, zeta + 1):
        event = ArrivalEvent(i, frozenset({0}))
        events.append(event)
        runner.feed(event)
    return StarTranscript(ArrivalSequence(tuple(events)), runner.result(), zeta)


def level_graph_gen(zeta: int, seed: int) -> ArrivalSequence:
    """
    Oblivious two-per-level construction.

    Level i holds vertices 2(i-1) (left) and 2(i-1)+1 (right), revealed left then right.
    For every level i >= 2 a fair coin picks the left or right vertex of level i-1 as the
    parent; both level-i vertices are joined to the parent and to every earlier vertex the
    parent is joined to.
    """
    if zeta < 1:
        raise UsageError(f"zeta must be at least 1, got {zeta}")
    rng = np.random.default_rng(seed)
    neighbors: list[frozenset[int]] = [frozenset(), frozenset()]
    for level in range(2, zeta + 1):
        parent = 2 * (level - 2) + int(rng.integers(2))
        joined = neighbors[parent] | {parent}
        neighbors.extend([joined, joined])
    return ArrivalSequence.from_adjacency(neighbors)


def level_graph_expected_bound(zeta: int) -> float:
    """Upper bound on the expected accepted size of any online algorithm on the level graph."""
    return sum(2.0 ** -(i - 1) for i in range(1, zeta)) + 2 * 2.0 ** -(zeta - 1)


def _uniform_centres(rng: np.random.Generator, n: int, dim: int, box_side: float) -> np.ndarray:
    return rng.uniform(0.0, box_side, size=(n, dim))


def random_balls_gen(n: int, dim: int, box_side: float, seed: int) -> ArrivalSequence:
    """n unit balls with centres uniform in [0, box_side]^dim."""
    rng = np.random.default_rng(seed)
    centres = _uniform_centres(rng, n, dim, box_side)
    objects = [SizedObject.of(Ball(Point(c))) for c in centres]
    return _sequence(objects, dim)


def random_fat_balls_gen(n: int, dim: int, M: float, box_side: float, seed: int) -> ArrivalSequence:
    """n balls with radii (their widths) uniform in [1, M] and centres uniform in the box."""
    rng = np.random.default_rng(seed)
    centres = _uniform_centres(rng, n, dim, box_side)
    radii = rng.uniform(1.0, M, size=n)
    objects = [SizedObject.of(Ball(Point(c), float(r))) for c, r in zip(centres, radii)]
    return _sequence(objects, dim)


def _side_within(lo: float, side: float, M: float) -> float:
    """Upper end hi = lo + side nudged so that the stored side hi - lo stays in [1, M]."""
    hi = lo + side
    while hi - lo < 1.0:
        hi = math.nextafter(hi, math.inf)
    while hi - lo > M:
        hi = math.nextafter(hi, -math.inf)
    return hi


def random_rects_gen(n: int, dim: int, M: float, box_side: float, seed: int) -> ArrivalSequence:
    """n hyper-rectangles with lower corners uniform in the box and side lengths uniform in [1, M]."""
    if not M > 2:
        raise UsageError(f"M must be greater than 2 for rectangles, got {M}")
    rng = np.random.default_rng(seed)
    corners = _uniform_centres(rng, n, dim, box_side)
    sides = rng.uniform(1.0, M, size=(n, dim))
    objects = []
    for corner, side in zip(corners, sides):
        lo = [float(x) for x in corner]
        hi = [_side_within(l, float(s), M) for l, s in zip(lo, side)]
        objects.append(SizedObject.of(HyperRectangle(Point(lo), Point(hi))))
    return _sequence(objects, dim)


def _class_side(low: float, high: float, t: float) -> float:
    return low + (high - low) * t


def random_class_neighbourhood(
    M: float, chosen: tuple[int, ...], count: int, rng: np.random.Generator
) -> list[SizedObject]:
    """
    A centre hyper-rectangle of class ``chosen`` followed by ``count`` rectangles of the same
    class that touch it.

    The centre is drawn near the largest sides of the class and the neighbours are biased
    towards the smallest ones, where large independent neighbourhoods live.
    """
    low = [2.0**i for i in chosen]
    high = [min(2.0 ** (i + 1), float(M)) for i in chosen]

    def draw(t: list[float], corner: list[float]) -> Optional[SizedObject]:
        sides = [_class_side(l, h, x) for l, h, x in zip(low, high, t)]
        rect = HyperRectangle(Point(corner), Point([c + s for c, s in zip(corner, sides)]))
        if rect_class(rect) != tuple(chosen) or max(rect.sides) > M:
            return None
        return SizedObject.of(rect)

    centre = None
    while centre is None:
        centre = draw([1 - 1e-3 * rng.random() for _ in chosen], [0.0] * len(chosen))
    extent = centre.shape.hi.coords  # type: ignore[union-attr]
    objects = [centre]
    while len(objects) <= count:
        t = [rng.random() ** 4 for _ in chosen]
        sides = [_class_side(l, h, x) for l, h, x in zip(low, high, t)]
        corner = [rng.uniform(-s, e) for s, e in zip(sides, extent)]
        candidate = draw(t, corner)
        if candidate is not None and candidate.shape.intersects(centre.shape):
            objects.append(candidate)
    return objects


def _sequence(objects: list[SizedObject], dim: int) -> ArrivalSequence:
    if not objects:
        return ArrivalSequence((), dim)
    return ArrivalSequence.from_objects(objects)
