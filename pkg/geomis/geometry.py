import math
from abc import ABC, abstractmethod
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import Union

from typing_extensions import Self, override

from geomis.errors import UsageError

Adjacency = dict[int, frozenset[int]]


def _check_dim(a: int, b: int) -> None:
    if a != b:
        raise UsageError(f"Dimension mismatch: {a} != {b}")


@dataclass(frozen=True)
class Point:
    """A point of R^d with 64-bit float coordinates."""

    coords: tuple[float, ...]

    def __init__(self, coords: Sequence[float]) -> None:
        values = tuple(float(x) for x in coords)
        if not values:
            raise UsageError("A point needs at least one coordinate")
        if not all(math.isfinite(x) for x in values):
            raise UsageError(f"Point coordinates must be finite: {values}")
        object.__setattr__(self, "coords", values)

    @classmethod
    def origin(cls, dim: int) -> Self:
        return cls([0.0] * dim)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[float]:
        return iter(self.coords)

    def __getitem__(self, index: int) -> float:
        return self.coords[index]

    def __add__(self, other: "Point") -> "Point":
        _check_dim(self.dim, other.dim)
        return Point([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "Point") -> "Point":
        _check_dim(self.dim, other.dim)
        return Point([a - b for a, b in zip(self.coords, other.coords)])

    @override
    def __str__(self) -> str:
        return "(" + ", ".join(repr(x) for x in self.coords) + ")"


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points of the same dimension."""
    _check_dim(a.dim, b.dim)
    return math.dist(a.coords, b.coords)


class Shape(ABC):
    """Base class for the compact objects whose intersection graphs we study."""

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @property
    @abstractmethod
    def width(self) -> float:
        """The width used by the size-classifying algorithms."""
        pass

    @property
    @abstractmethod
    def alpha(self) -> float:
        """Fatness metadata in (0, 1]."""
        pass

    @abstractmethod
    def intersects(self, other: "Shape") -> bool:
        """Closed intersection test: touching boundaries count."""
        pass

    @abstractmethod
    def translate(self, vector: Point) -> Self:
        pass


@dataclass(frozen=True)
class Ball(Shape):
    center: Point
    radius: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise UsageError(f"Ball radius must be positive, got {self.radius}")

    @property
    @override
    def dim(self) -> int:
        return self.center.dim

    @property
    @override
    def width(self) -> float:
        return self.radius

    @property
    @override
    def alpha(self) -> float:
        return 1.0

    @property
    def is_unit(self) -> bool:
        return self.radius == 1.0

    @override
    def intersects(self, other: Shape) -> bool:
        if not isinstance(other, Ball):
            raise UsageError(f"Unsupported intersection pair: Ball and {type(other).__name__}")
        return balls_intersect(self, other)

    @override
    def translate(self, vector: Point) -> "Ball":
        return Ball(self.center + vector, self.radius)


@dataclass(frozen=True)
class HyperRectangle(Shape):
    """Axis-aligned box, the product of the closed intervals [lo_i, hi_i]."""

    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        _check_dim(self.lo.dim, self.hi.dim)
        for axis, (l, u) in enumerate(zip(self.lo, self.hi)):
            if not l < u:
                raise UsageError(f"Empty extent on axis {axis}: [{l}, {u}]")

    @property
    @override
    def dim(self) -> int:
        return self.lo.dim

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(u - l for l, u in zip(self.lo, self.hi))

    @property
    @override
    def width(self) -> float:
        return min(self.sides) / 2

    @property
    @override
    def alpha(self) -> float:
        # min side over the diameter of the circumscribed ball
        return min(self.sides) / math.hypot(*self.sides)

    @override
    def intersects(self, other: Shape) -> bool:
        if not isinstance(other, HyperRectangle):
            raise UsageError(f"Unsupported intersection pair: HyperRectangle and {type(other).__name__}")
        return rects_intersect(self, other)

    @override
    def translate(self, vector: Point) -> "HyperRectangle":
        return HyperRectangle(self.lo + vector, self.hi + vector)


AnyShape = Union[Ball, HyperRectangle]


@dataclass(frozen=True)
class SizedObject:
    """A shape together with the width and fatness revealed on arrival."""

    shape: AnyShape
    width: float
    alpha: float

    def __post_init__(self) -> None:
        if not math.isclose(self.width, self.shape.width, rel_tol=1e-12):
            raise UsageError(f"Width {self.width} inconsistent with shape width {self.shape.width}")
        if not 0 < self.alpha <= 1:
            raise UsageError(f"alpha must lie in (0, 1], got {self.alpha}")

    @classmethod
    def of(cls, shape: AnyShape) -> Self:
        return cls(shape, shape.width, shape.alpha)

    @property
    def dim(self) -> int:
        return self.shape.dim


def balls_intersect(b1: Ball, b2: Ball) -> bool:
    _check_dim(b1.dim, b2.dim)
    return distance(b1.center, b2.center) <= b1.radius + b2.radius


def rects_intersect(r1: HyperRectangle, r2: HyperRectangle) -> bool:
    _check_dim(r1.dim, r2.dim)
    return all(l1 <= u2 and l2 <= u1 for l1, u1, l2, u2 in zip(r1.lo, r1.hi, r2.lo, r2.hi))


def objects_intersect(a: SizedObject, b: SizedObject) -> bool:
    return a.shape.intersects(b.shape)


def intersection_graph(objects: Sequence[SizedObject]) -> Adjacency:
    """
    Build the intersection graph of a list of objects.

    Args:
        objects: Objects of one dimension and one shape kind; vertex ids are list positions.

    Returns:
        Symmetric, irreflexive adjacency as a mapping from id to neighbour ids.

    Raises:
        UsageError: On dimension mismatch or a ball/rectangle pair.
    """
    neighbours: dict[int, set[int]] = {i: set() for i in range(len(objects))}
    for i in range(len(objects)):
        for j in range(i):
            if objects_intersect(objects[i], objects[j]):
                neighbours[i].add(j)
                neighbours[j].add(i)
    return {i: frozenset(ns) for i, ns in neighbours.items()}
