import math
from typing import ClassVar

import numpy as np
import pytest
from typing_extensions import override

from geomis.errors import UsageError
from geomis.geometry import Ball, Point, SizedObject
from geomis.online import (
    ArrivalEvent,
    ArrivalSequence,
    FirstFit,
    OnlineAlgorithm,
    OnlineRunner,
    RunResult,
    empirical_ratio,
    first_fit,
    run_online,
)


def unit_ball(*center: float) -> SizedObject:
    return SizedObject.of(Ball(Point(center)))


PATH = ArrivalSequence.from_adjacency([[], [0], [1], [2]])


class AcceptEverything(OnlineAlgorithm):
    name: ClassVar[str] = "greedy-everything"

    def __init__(self) -> None:
        self._accepted: list[int] = []

    @override
    def decide(self, event: ArrivalEvent) -> bool:
        self._accepted.append(event.id)
        return True

    @property
    @override
    def accepted(self) -> tuple[int, ...]:
        return tuple(self._accepted)


class ForgetFirst(AcceptEverything):
    """Accepts everything but drops vertex 0 from its reported set once vertex 1 arrives."""

    name: ClassVar[str] = "forgetful"

    @property
    @override
    def accepted(self) -> tuple[int, ...]:
        return tuple(v for v in self._accepted if len(self._accepted) < 2 or v != 0)


def test_first_fit_on_a_path():
    result = first_fit(PATH)
    assert result.accepted == (0, 2)
    assert result.decisions == (True, False, True, False)
    assert result.valid
    assert result.algorithm == "firstfit"


def test_first_fit_on_balls():
    stream = ArrivalSequence.from_objects([unit_ball(0, 0), unit_ball(1.5, 0), unit_ball(3.0, 0), unit_ball(2.9, 0)])
    result = first_fit(stream)
    assert result.accepted == (0, 2)
    assert stream.events[1].neighbors == {0}
    assert stream.events[3].neighbors == {1, 2}


def test_empty_sequence():
    result = first_fit(ArrivalSequence())
    assert result.size == 0
    assert empirical_ratio(0, result) == 1.0


@pytest.mark.parametrize(
    "opt,accepted,expected",
    [
        (0, (), 1.0),
        (3, (), math.inf),
        (4, (0, 1), 2.0),
        (5, (0,), 5.0),
    ],
)
def test_empirical_ratio(opt: int, accepted: tuple[int, ...], expected: float):
    result = RunResult(accepted, tuple(True for _ in accepted))
    assert empirical_ratio(opt, result) == expected


def test_runner_flags_dependent_acceptance():
    result = run_online(AcceptEverything(), PATH)
    assert result.size == 4
    assert not result.valid_independent
    assert result.valid_irrevocable
    assert not result.valid


def test_runner_flags_revoked_acceptance():
    result = run_online(ForgetFirst(), ArrivalSequence.from_adjacency([[], []]))
    assert result.valid_independent
    assert not result.valid_irrevocable


def test_runner_requires_arrival_order():
    runner = OnlineRunner(FirstFit())
    runner.feed(ArrivalEvent(0))
    with pytest.raises(UsageError, match="Expected arrival 1"):
        runner.feed(ArrivalEvent(2))


invalid_sequences = [
    ("ids out of order", lambda: ArrivalSequence((ArrivalEvent(1),)), "ids must be 0..n-1"),
    ("future neighbour", lambda: ArrivalSequence((ArrivalEvent(0, frozenset({1})), ArrivalEvent(1))), "unrevealed"),
    ("self loop", lambda: ArrivalSequence((ArrivalEvent(0, frozenset({0})),)), "unrevealed"),
    (
        "mixed payloads",
        lambda: ArrivalSequence((ArrivalEvent(0, payload=unit_ball(0, 0)), ArrivalEvent(1)), 2),
        "every arrival",
    ),
    (
        "wrong geometric neighbours",
        lambda: ArrivalSequence(
            (ArrivalEvent(0, payload=unit_ball(0, 0)), ArrivalEvent(1, frozenset(), unit_ball(1, 0))), 2
        ),
        "disagree",
    ),
    (
        "dimension mismatch",
        lambda: ArrivalSequence((ArrivalEvent(0, payload=unit_ball(0, 0, 0)),), 2),
        "dimension",
    ),
]


@pytest.mark.parametrize("name,build,message", invalid_sequences, ids=[x[0] for x in invalid_sequences])
def test_invalid_sequences(name, build, message):
    with pytest.raises(UsageError, match=message):
        build()


def test_adjacency_is_symmetric():
    assert PATH.adjacency() == {
        0: frozenset({1}),
        1: frozenset({0, 2}),
        2: frozenset({1, 3}),
        3: frozenset({2}),
    }


def test_prefix_and_subsequence():
    assert len(PATH.prefix(2)) == 2
    sub = PATH.subsequence([1, 3, 2])
    assert [e.id for e in sub] == [0, 1, 2]
    # old 1-2-3 path becomes 0-1-2
    assert sub.adjacency() == {0: frozenset({1}), 1: frozenset({0, 2}), 2: frozenset({1})}


@pytest.mark.parametrize("seed", range(20))
def test_prefix_runs_repeat_the_same_decisions(seed: int):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 25))
    p = (0.1, 0.3, 0.6)[seed % 3]
    stream = ArrivalSequence.from_adjacency([[u for u in range(v) if rng.random() < p] for v in range(n)])
    full = first_fit(stream).decisions
    for k in range(n + 1):
        assert first_fit(stream.prefix(k)).decisions == full[:k]


def test_geometric_subsequence_keeps_payloads():
    stream = ArrivalSequence.from_objects([unit_ball(0, 0), unit_ball(5, 0), unit_ball(6, 0)])
    sub = stream.subsequence([1, 2])
    assert sub.is_geometric
    assert sub.dim == 2
    assert sub.events[1].neighbors == {0}


def test_first_fit_is_maximal():
    stream = ArrivalSequence.from_adjacency([[], [0], [], [1, 2], [0, 3], [4]])
    result = first_fit(stream)
    graph = stream.adjacency()
    accepted = set(result.accepted)
    for v in graph:
        assert v in accepted or graph[v] & accepted
