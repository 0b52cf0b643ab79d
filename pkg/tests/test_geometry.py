import math

import numpy as np
import pytest

from geomis.errors import UsageError
from geomis.geometry import (
    Ball,
    HyperRectangle,
    Point,
    SizedObject,
    balls_intersect,
    distance,
    intersection_graph,
    rects_intersect,
)


def ball(*center: float, radius: float = 1.0) -> Ball:
    return Ball(Point(center), radius)


def rect(lo: tuple[float, ...], hi: tuple[float, ...]) -> HyperRectangle:
    return HyperRectangle(Point(lo), Point(hi))


def test_distance():
    assert distance(Point([0, 0]), Point([3, 4])) == 5.0
    assert distance(Point([1, 2, 3]), Point([1, 2, 3])) == 0.0


def test_distance_dimension_mismatch():
    with pytest.raises(UsageError, match="Dimension mismatch"):
        distance(Point([0, 0]), Point([0, 0, 0]))


@pytest.mark.parametrize("coords", [[], [math.nan], [0.0, math.inf]])
def test_point_rejects_bad_coordinates(coords):
    with pytest.raises(UsageError):
        Point(coords)


def test_point_arithmetic():
    p = Point([1, 2])
    assert p + Point([0.5, -1]) == Point([1.5, 1])
    assert p - p == Point.origin(2)
    assert str(Point([1, 2.5])) == "(1.0, 2.5)"


ball_pairs = [
    ("far apart", ball(0, 0, 0), ball(2.1, 0, 0), False),
    ("tangent", ball(0, 0, 0), ball(2.0, 0, 0), True),
    ("overlapping", ball(0, 0, 0), ball(1.0, 1.0, 0), True),
    ("radii add up", ball(0, 0, radius=3), ball(4, 0), True),
    ("diagonal gap", ball(0, 0, 0), ball(1.2, 1.2, 1.2), False),
]


@pytest.mark.parametrize("name,a,b,expected", ball_pairs, ids=[x[0] for x in ball_pairs])
def test_balls_intersect(name: str, a: Ball, b: Ball, expected: bool):
    assert balls_intersect(a, b) == expected
    assert balls_intersect(b, a) == expected


rect_pairs = [
    ("disjoint on x", rect((0, 0), (1, 1)), rect((1.5, 0), (2.5, 1)), False),
    ("touching edge", rect((0, 0), (1, 1)), rect((1, 0), (2, 1)), True),
    ("touching corner", rect((0, 0), (1, 1)), rect((1, 1), (2, 2)), True),
    ("nested", rect((0, 0), (4, 4)), rect((1, 1), (2, 2)), True),
    ("overlap on x only", rect((0, 0), (2, 1)), rect((1, 2), (3, 3)), False),
]


@pytest.mark.parametrize("name,a,b,expected", rect_pairs, ids=[x[0] for x in rect_pairs])
def test_rects_intersect(name: str, a: HyperRectangle, b: HyperRectangle, expected: bool):
    assert rects_intersect(a, b) == expected
    assert rects_intersect(b, a) == expected


def test_translate_keeps_shape():
    a, b = ball(0, 0), ball(1.5, 0.5)
    shift = Point([10.25, -3.5])
    assert a.translate(shift).intersects(b.translate(shift)) == a.intersects(b)
    r = rect((0, 0), (1, 2)).translate(shift)
    assert r.lo == Point([10.25, -3.5])
    assert r.sides == (1.0, 2.0)


def test_ball_and_rect_do_not_mix():
    with pytest.raises(UsageError, match="Unsupported intersection pair"):
        intersection_graph([SizedObject.of(ball(0, 0)), SizedObject.of(rect((0, 0), (1, 1)))])


def test_invalid_shapes():
    with pytest.raises(UsageError, match="radius"):
        ball(0, 0, radius=0)
    with pytest.raises(UsageError, match="Empty extent"):
        rect((0, 0), (1, 0))


def test_sized_object_metadata():
    unit = SizedObject.of(ball(0, 0, 0))
    assert unit.width == 1.0
    assert unit.alpha == 1.0
    box = SizedObject.of(rect((0, 0), (2, 6)))
    assert box.width == 1.0
    assert box.alpha == pytest.approx(2 / math.hypot(2, 6))
    with pytest.raises(UsageError, match="inconsistent"):
        SizedObject(ball(0, 0), 2.0, 1.0)


def test_intersection_graph_is_symmetric():
    objects = [SizedObject.of(ball(x, 0)) for x in (0.0, 1.5, 3.0, 10.0)]
    graph = intersection_graph(objects)
    assert graph == {
        0: frozenset({1}),
        1: frozenset({0, 2}),
        2: frozenset({1}),
        3: frozenset(),
    }
    for v, ns in graph.items():
        assert v not in ns
        assert all(v in graph[u] for u in ns)


def test_intersection_graph_of_nothing():
    assert intersection_graph([]) == {}


def random_shapes(kind: str, n: int, dim: int, box: float, rng: np.random.Generator) -> list[SizedObject]:
    if kind == "balls":
        return [
            SizedObject.of(Ball(Point(rng.uniform(0, box, dim)), float(rng.uniform(0.5, 2.0)))) for _ in range(n)
        ]
    shapes = []
    for _ in range(n):
        lo = rng.uniform(0, box, dim)
        shapes.append(SizedObject.of(HyperRectangle(Point(lo), Point(lo + rng.uniform(0.5, 3.0, dim)))))
    return shapes


def pairwise(a, b) -> bool:
    if isinstance(a, Ball):
        return balls_intersect(a, b)
    return rects_intersect(a, b)


@pytest.mark.parametrize("kind", ["balls", "rects"])
@pytest.mark.parametrize("dim", [2, 3])
def test_random_translations_preserve_intersection(kind: str, dim: int):
    rng = np.random.default_rng(dim)
    for _ in range(300):
        a, b = (obj.shape for obj in random_shapes(kind, 2, dim, 4.0, rng))
        shift = Point(rng.uniform(-50.0, 50.0, dim))
        assert a.translate(shift).intersects(b.translate(shift)) == pairwise(a, b)


@pytest.mark.parametrize("kind", ["balls", "rects"])
def test_intersection_graph_matches_pairwise_predicate(kind: str):
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(0, 51))
        dim = int(rng.integers(1, 4))
        objects = random_shapes(kind, n, dim, 10.0, rng)
        expected = {
            i: frozenset(j for j in range(n) if j != i and pairwise(objects[i].shape, objects[j].shape))
            for i in range(n)
        }
        assert intersection_graph(objects) == expected
