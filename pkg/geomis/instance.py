"""
Line-oriented instance files.

    geomis-instance v1
    dim <d>            (or ``dim -`` for an abstract graph)
    ball <x1> ... <xd> <radius>
    rect <l1> <u1> ... <ld> <ud>
    vertex <id> <comma-separated earlier ids, or ->

Geometric lines derive their adjacency on load; abstract lines carry it. ``#`` starts a comment.
"""

from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from types import MappingProxyType
from typing import Optional, Union

from packaging.specifiers import SpecifierSet
from packaging.version import InvalidVersion, Version

from geomis.errors import InstanceFormatError, UsageError
from geomis.geometry import Ball, HyperRectangle, Point, SizedObject
from geomis.online import ArrivalEvent, ArrivalSequence

MAGIC = "geomis-instance"
FORMAT_VERSION = Version("1")
SUPPORTED_VERSIONS = SpecifierSet(">=1,<2")

PathLike = Union[str, Path]


def _floats(fields: Sequence[str], line_number: int) -> list[float]:
    try:
        return [float(x) for x in fields]
    except ValueError as e:
        raise InstanceFormatError(line_number, str(e)) from e


def _parse_ball(fields: Sequence[str], dim: int, line_number: int) -> SizedObject:
    if len(fields) != dim + 1:
        raise InstanceFormatError(line_number, f"ball needs {dim} coordinates and a radius, got {len(fields)} values")
    values = _floats(fields, line_number)
    return SizedObject.of(Ball(Point(values[:dim]), values[dim]))


def _parse_rect(fields: Sequence[str], dim: int, line_number: int) -> SizedObject:
    if len(fields) != 2 * dim:
        raise InstanceFormatError(line_number, f"rect needs {2 * dim} bounds, got {len(fields)} values")
    values = _floats(fields, line_number)
    return SizedObject.of(HyperRectangle(Point(values[0::2]), Point(values[1::2])))


SHAPE_PARSERS: Mapping[str, Callable[[Sequence[str], int, int], SizedObject]] = MappingProxyType(
    {
        "ball": _parse_ball,
        "rect": _parse_rect,
    }
)


def _parse_vertex(fields: Sequence[str], expected_id: int, line_number: int) -> ArrivalEvent:
    if len(fields) != 2:
        raise InstanceFormatError(line_number, "vertex needs an id and a neighbour list")
    try:
        vertex = int(fields[0])
        neighbors = frozenset() if fields[1] == "-" else frozenset(int(x) for x in fields[1].split(","))
    except ValueError as e:
        raise InstanceFormatError(line_number, str(e)) from e
    if vertex != expected_id:
        raise InstanceFormatError(line_number, f"expected vertex {expected_id}, got {vertex}")
    future = sorted(n for n in neighbors if not 0 <= n < vertex)
    if future:
        raise InstanceFormatError(line_number, f"vertex {vertex} references ids {future} not revealed before it")
    return ArrivalEvent(vertex, neighbors)


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    return lines


def _parse_header(lines: list[tuple[int, str]]) -> Optional[int]:
    if len(lines) < 2:
        raise InstanceFormatError(lines[-1][0] if lines else 1, "missing header lines")
    (n1, magic), (n2, dim_line) = lines[:2]
    parts = magic.split()
    if len(parts) != 2 or parts[0] != MAGIC or not parts[1].startswith("v"):
        raise InstanceFormatError(n1, f"expected '{MAGIC} v{FORMAT_VERSION}', got {magic!r}")
    try:
        version = Version(parts[1][1:])
    except InvalidVersion as e:
        raise InstanceFormatError(n1, str(e)) from e
    if not SUPPORTED_VERSIONS.contains(version):
        raise InstanceFormatError(n1, f"unsupported format version {version}")
    fields = dim_line.split()
    if len(fields) != 2 or fields[0] != "dim":
        raise InstanceFormatError(n2, f"expected 'dim <d>' or 'dim -', got {dim_line!r}")
    if fields[1] == "-":
        return None
    try:
        dim = int(fields[1])
    except ValueError as e:
        raise InstanceFormatError(n2, str(e)) from e
    if dim < 1:
        raise InstanceFormatError(n2, f"dimension must be positive, got {dim}")
    return dim


def loads(text: str) -> ArrivalSequence:
    """
    Parse instance text into a validated ArrivalSequence.

    Raises:
        InstanceFormatError: On the first malformed line, with its line number.
    """
    lines = _content_lines(text)
    dim = _parse_header(lines)
    objects: list[SizedObject] = []
    events: list[ArrivalEvent] = []
    kinds: set[str] = set()
    for number, line in lines[2:]:
        kind, *fields = line.split()
        if kind == "vertex":
            if dim is not None:
                raise InstanceFormatError(number, "vertex lines need 'dim -'")
            events.append(_parse_vertex(fields, len(events), number))
        elif kind in SHAPE_PARSERS:
            if dim is None:
                raise InstanceFormatError(number, f"{kind} lines need a numeric dimension")
            kinds.add(kind)
            if len(kinds) > 1:
                raise InstanceFormatError(number, "balls and rectangles cannot be mixed")
            try:
                objects.append(SHAPE_PARSERS[kind](fields, dim, number))
            except InstanceFormatError:
                raise
            except UsageError as e:
                raise InstanceFormatError(number, str(e)) from e
        else:
            raise InstanceFormatError(number, f"unknown line kind {kind!r}")
    if dim is None:
        return ArrivalSequence(tuple(events))
    if not objects:
        return ArrivalSequence((), dim)
    return ArrivalSequence.from_objects(objects)


def _format_object(obj: SizedObject) -> str:
    shape = obj.shape
    if isinstance(shape, Ball):
        return " ".join(["ball", *(repr(x) for x in shape.center), repr(shape.radius)])
    bounds = [repr(x) for pair in zip(shape.lo, shape.hi) for x in pair]
    return " ".join(["rect", *bounds])


def dumps(stream: ArrivalSequence, decisions: Optional[Sequence[bool]] = None) -> str:
    """
    Serialise a sequence; floats are written with their shortest round-trip representation.

    Args:
        stream: The instance.
        decisions: Optional per-arrival decisions, written as ``# decision`` comments.
    """
    geometric = stream.dim is not None and (stream.is_geometric or not stream.events)
    lines = [f"{MAGIC} v{FORMAT_VERSION}", f"dim {stream.dim if geometric else '-'}"]
    for event in stream:
        if event.payload is not None:
            lines.append(_format_object(event.payload))
        else:
            neighbours = ",".join(str(n) for n in sorted(event.neighbors)) or "-"
            lines.append(f"vertex {event.id} {neighbours}")
        if decisions is not None and event.id < len(decisions):
            lines.append(f"# decision {event.id} {'accept' if decisions[event.id] else 'reject'}")
    return "\n".join(lines) + "\n"


def load_instance(path: PathLike) -> ArrivalSequence:
    return loads(Path(path).read_text(encoding="utf-8"))


def save_instance(stream: ArrivalSequence, path: PathLike, decisions: Optional[Sequence[bool]] = None) -> None:
    Path(path).write_text(dumps(stream, decisions), encoding="utf-8")
