import pytest

from geomis.adversaries import (
    level_graph_gen,
    random_balls_gen,
    random_fat_balls_gen,
    random_rects_gen,
    star_adversary,
)
from geomis.errors import InstanceFormatError, UsageError
from geomis.instance import dumps, load_instance, loads, save_instance
from geomis.online import FirstFit

K3 = """\
geomis-instance v1
dim -
vertex 0 -
vertex 1 0
vertex 2 0,1
"""

TWO_BALLS = """\
# two touching unit discs
geomis-instance v1
dim 2
ball 0.0 0.0 1.0
ball 2.0 0.0 1.0   # tangent
"""

generated = [
    ("star", lambda: star_adversary(4, FirstFit()).stream),
    ("levels", lambda: level_graph_gen(5, 1)),
    ("random balls", lambda: random_balls_gen(20, 3, 6.0, 2)),
    ("fat balls", lambda: random_fat_balls_gen(15, 2, 8.0, 12.0, 3)),
    ("rectangles", lambda: random_rects_gen(15, 3, 5.0, 8.0, 4)),
]


@pytest.mark.parametrize("name,build", generated, ids=[x[0] for x in generated])
def test_round_trip(name, build):
    stream = build()
    text = dumps(stream)
    assert loads(text) == stream
    assert dumps(loads(text)) == text


def test_round_trip_through_a_file(tmp_path):
    stream = random_rects_gen(10, 2, 4.0, 6.0, 9)
    path = tmp_path / "rects.txt"
    save_instance(stream, path)
    assert load_instance(path) == stream


def test_abstract_instance():
    stream = loads(K3)
    assert stream.dim is None
    assert stream.adjacency() == {0: {1, 2}, 1: {0, 2}, 2: {0, 1}}
    assert dumps(stream) == K3


def test_geometric_instance_derives_adjacency():
    stream = loads(TWO_BALLS)
    assert stream.dim == 2
    assert stream.events[1].neighbors == {0}


def test_empty_geometric_instance():
    stream = loads("geomis-instance v1\ndim 3\n")
    assert len(stream) == 0
    assert stream.dim == 3
    assert dumps(stream) == "geomis-instance v1\ndim 3\n"


def test_decisions_are_written_as_comments():
    transcript = star_adversary(2, FirstFit())
    text = dumps(transcript.stream, transcript.result.decisions)
    assert "# decision 0 accept" in text
    assert "# decision 2 reject" in text
    assert loads(text) == transcript.stream


malformed = [
    ("bad magic", "geomis v1\ndim 2\n", 1, "expected 'geomis-instance v1'"),
    ("future version", "geomis-instance v2\ndim 2\n", 1, "unsupported format version"),
    ("bad version", "geomis-instance vX\ndim 2\n", 1, "Invalid version"),
    ("missing dim", "geomis-instance v1\n", 1, "missing header"),
    ("bad dim", "geomis-instance v1\ndim two\n", 2, "invalid literal"),
    ("zero dim", "geomis-instance v1\ndim 0\n", 2, "must be positive"),
    ("future neighbour", "geomis-instance v1\ndim -\nvertex 0 -\nvertex 1 2\n", 4, "not revealed"),
    ("self neighbour", "geomis-instance v1\ndim -\nvertex 0 0\n", 3, "not revealed"),
    ("skipped id", "geomis-instance v1\ndim -\nvertex 0 -\nvertex 2 0\n", 4, "expected vertex 1"),
    ("ball dim mismatch", "geomis-instance v1\ndim 3\nball 0 0 1\n", 3, "ball needs 3 coordinates"),
    ("rect dim mismatch", "geomis-instance v1\ndim 2\nrect 0 1 0 1 0 1\n", 3, "rect needs 4 bounds"),
    ("bad number", "geomis-instance v1\ndim 2\nball 0 zero 1\n", 3, "could not convert"),
    ("bad radius", "geomis-instance v1\ndim 2\nball 0 0 -1\n", 3, "radius must be positive"),
    ("empty rect", "geomis-instance v1\ndim 2\nrect 0 1 1 1\n", 3, "Empty extent"),
    ("mixed shapes", "geomis-instance v1\ndim 2\nball 0 0 1\nrect 0 1 0 1\n", 4, "cannot be mixed"),
    ("vertex with dim", "geomis-instance v1\ndim 2\nvertex 0 -\n", 3, "need 'dim -'"),
    ("ball without dim", "geomis-instance v1\ndim -\nball 0 0 1\n", 3, "numeric dimension"),
    ("unknown kind", "geomis-instance v1\ndim 2\ndisc 0 0 1\n", 3, "unknown line kind"),
]


@pytest.mark.parametrize("name,text,line,message", malformed, ids=[x[0] for x in malformed])
def test_malformed_instances(name, text, line, message):
    with pytest.raises(InstanceFormatError, match=message) as excinfo:
        loads(text)
    assert excinfo.value.line_number == line
    assert str(excinfo.value).startswith(f"line {line}: ")
    assert isinstance(excinfo.value, UsageError)


def test_comment_lines_keep_line_numbers():
    text = "# header comment\ngeomis-instance v1\n\ndim -\nvertex 0 -\n# note\nvertex 1 5\n"
    with pytest.raises(InstanceFormatError) as excinfo:
        loads(text)
    assert excinfo.value.line_number == 7
