import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import ClassVar, Optional

from typing_extensions import override

from geomis.errors import UsageError
from geomis.geometry import Adjacency, SizedObject, objects_intersect

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ArrivalEvent:
    """One online reveal: a vertex with its adjacency to the vertices revealed before it."""

    id: int
    neighbors: frozenset[int] = frozenset()
    payload: Optional[SizedObject] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "neighbors", frozenset(self.neighbors))


@dataclass(frozen=True)
class ArrivalSequence:
    """
    An online instance.

    Ids run 0..n-1 in order and neighbours only point backwards. Either every event carries
    a geometric payload of dimension ``dim`` (and the neighbour sets must then equal the
    intersection adjacency) or none does.
    """

    events: tuple[ArrivalEvent, ...] = ()
    dim: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        with_payload = [e.payload is not None for e in self.events]
        if any(with_payload) and not all(with_payload):
            raise UsageError("Either every arrival carries a geometric payload or none does")
        for position, event in enumerate(self.events):
            if event.id != position:
                raise UsageError(f"Arrival {position} has id {event.id}; ids must be 0..n-1 in order")
            bad = [n for n in event.neighbors if not 0 <= n < event.id]
            if bad:
                raise UsageError(f"Vertex {event.id} is adjacent to unrevealed ids {sorted(bad)}")
            if event.payload is not None:
                if self.dim is None or event.payload.dim != self.dim:
                    raise UsageError(f"Vertex {event.id} has dimension {event.payload.dim}, sequence has {self.dim}")
                expected = {
                    j
                    for j in range(event.id)
                    if objects_intersect(event.payload, self.events[j].payload)  # type: ignore[arg-type]
                }
                if expected != event.neighbors:
                    raise UsageError(f"Vertex {event.id}: neighbours disagree with the geometric intersections")

    @classmethod
    def from_objects(cls, objects: Sequence[SizedObject]) -> "ArrivalSequence":
        """Reveal objects in list order, deriving adjacency from the intersection predicate."""
        dim = objects[0].dim if objects else None
        events = []
        for i, obj in enumerate(objects):
            neighbors = frozenset(j for j in range(i) if objects_intersect(obj, objects[j]))
            events.append(ArrivalEvent(i, neighbors, obj))
        return cls(tuple(events), dim)

    @classmethod
    def from_adjacency(cls, neighbors: Iterable[Iterable[int]]) -> "ArrivalSequence":
        """Abstract sequence from the backward neighbour lists of vertices 0..n-1."""
        return cls(tuple(ArrivalEvent(i, frozenset(ns)) for i, ns in enumerate(neighbors)))

    @property
    def is_geometric(self) -> bool:
        return bool(self.events) and self.events[0].payload is not None

    @property
    def objects(self) -> list[SizedObject]:
        return [e.payload for e in self.events if e.payload is not None]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[ArrivalEvent]:
        return iter(self.events)

    def prefix(self, n: int) -> "ArrivalSequence":
        return ArrivalSequence(self.events[:n], self.dim)

    def subsequence(self, ids: Iterable[int]) -> "ArrivalSequence":
        """The induced instance on the given ids, renumbered in arrival order."""
        keep = sorted(set(ids))
        index = {old: new for new, old in enumerate(keep)}
        events = []
        for old in keep:
            event = self.events[old]
            neighbors = frozenset(index[n] for n in event.neighbors if n in index)
            events.append(ArrivalEvent(index[old], neighbors, event.payload))
        return ArrivalSequence(tuple(events), self.dim if keep else None)

    def adjacency(self) -> Adjacency:
        """Full symmetric adjacency of the revealed graph."""
        neighbours: dict[int, set[int]] = {e.id: set() for e in self.events}
        for event in self.events:
            for n in event.neighbors:
                neighbours[event.id].add(n)
                neighbours[n].add(event.id)
        return {v: frozenset(ns) for v, ns in neighbours.items()}


@dataclass(frozen=True)
class RunResult:
    accepted: tuple[int, ...]
    decisions: tuple[bool, ...]
    valid_independent: bool = True
    valid_irrevocable: bool = True
    algorithm: str = ""

    @property
    def size(self) -> int:
        return len(self.accepted)

    @property
    def valid(self) -> bool:
        return self.valid_independent and self.valid_irrevocable


class OnlineAlgorithm(ABC):
    """
    Decision interface of an online algorithm.

    The algorithm sees one arrival at a time and must answer accept or reject immediately.
    Subclasses keep whatever state they need; ``accepted`` reports the ids accepted so far.
    """

    name: ClassVar[str] = "online"

    @abstractmethod
    def decide(self, event: ArrivalEvent) -> bool:
        pass

    @property
    @abstractmethod
    def accepted(self) -> tuple[int, ...]:
        pass


class FirstFit(OnlineAlgorithm):
    """Accept a vertex iff it is not adjacent to any vertex accepted before."""

    name: ClassVar[str] = "firstfit"

    def __init__(self) -> None:
        self._accepted: list[int] = []
        self._accepted_set: set[int] = set()

    @override
    def decide(self, event: ArrivalEvent) -> bool:
        if event.neighbors & self._accepted_set:
            return False
        self._accepted.append(event.id)
        self._accepted_set.add(event.id)
        return True

    @property
    @override
    def accepted(self) -> tuple[int, ...]:
        return tuple(self._accepted)


@dataclass
class OnlineRunner:
    """
    Feeds arrivals to an algorithm one at a time and audits its answers.

    Independence of the accepted set and irrevocability of earlier acceptances are checked
    after every decision; violations are flagged on the result rather than raised.
    """

    algorithm: OnlineAlgorithm
    _decisions: list[bool] = field(default_factory=list)
    _accepted: list[int] = field(default_factory=list)
    _accepted_set: set[int] = field(default_factory=set)
    _independent: bool = True
    _irrevocable: bool = True

    def feed(self, event: ArrivalEvent) -> bool:
        if event.id != len(self._decisions):
            raise UsageError(f"Expected arrival {len(self._decisions)}, got {event.id}")
        decision = bool(self.algorithm.decide(event))
        self._decisions.append(decision)
        if decision:
            if event.neighbors & self._accepted_set:
                logger.warning("%s accepted vertex %d adjacent to an accepted vertex", self.algorithm.name, event.id)
                self._independent = False
            self._accepted.append(event.id)
            self._accepted_set.add(event.id)
        if self._irrevocable and tuple(self.algorithm.accepted) != tuple(self._accepted):
            logger.warning("%s changed an earlier decision at vertex %d", self.algorithm.name, event.id)
            self._irrevocable = False
        return decision

    def result(self) -> RunResult:
        return RunResult(
            accepted=tuple(self._accepted),
            decisions=tuple(self._decisions),
            valid_independent=self._independent,
            valid_irrevocable=self._irrevocable,
            algorithm=self.algorithm.name,
        )


def run_online(algorithm: OnlineAlgorithm, stream: ArrivalSequence) -> RunResult:
    runner = OnlineRunner(algorithm)
    for event in stream:
        runner.feed(event)
    return runner.result()


def first_fit(stream: ArrivalSequence) -> RunResult:
    return run_online(FirstFit(), stream)


def empirical_ratio(opt_size: int, result: RunResult) -> float:
    """OPT/ALG with 0/0 = 1 and OPT/0 = +inf."""
    if result.size == 0:
        return 1.0 if opt_size == 0 else math.inf
    if opt_size < result.size:
        logger.warning("Reported optimum %d is below the accepted size %d", opt_size, result.size)
    return opt_size / result.size
