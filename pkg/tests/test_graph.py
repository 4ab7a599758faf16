import pytest

from dyncut.errors import ParseError, PreconditionViolated, UnknownVertex
from dyncut.graph import (Multigraph, apply_seq, apply_update, boundary, components, cut_weight,
                          del_edge, del_vertex, format_graph, format_stream, induced, ins_edge,
                          ins_vertex, parse_graph, parse_stream, reverse_op, volume)


def small():
    return Multigraph(range(4), [(0, 1, 2), (1, 2, 1), (2, 3, 3)])


def test_counters():
    g = small()
    assert (g.n, g.m, g.num_pairs) == (4, 6, 3)
    assert g.degree(2) == 4
    assert g.mult(1, 0) == 2 and g.mult(0, 3) == 0
    assert volume(g, {0, 1}) == 5
    assert cut_weight(g, {0, 1}) == 1
    assert sorted(e.pair() for e in boundary(g, {2})) == [(1, 2), (2, 3)]


def test_edge_ids_never_reused():
    g = small()
    e = g.remove_edge(0, 1)
    f = g.add_edge(0, 1, 2)
    assert f.id != e.id and f.id == 3


def test_preconditions():
    g = small()
    with pytest.raises(PreconditionViolated):
        g.add_edge(0, 1)
    with pytest.raises(PreconditionViolated):
        g.add_edge(0, 0)
    with pytest.raises(PreconditionViolated):
        g.add_edge(0, 2, 0)
    with pytest.raises(PreconditionViolated):
        g.remove_edge(0, 2)
    with pytest.raises(UnknownVertex):
        g.add_edge(0, 9)
    with pytest.raises(PreconditionViolated):
        g.remove_vertex(1)
    with pytest.raises(PreconditionViolated):
        g.add_vertex(3)
    with pytest.raises(UnknownVertex):
        g.remove_vertex(9)


def test_apply_and_reverse():
    g = small()
    before = g.canonical()
    seq = [ins_vertex(9), ins_edge(9, 0, 2), del_edge(2, 3), del_edge(0, 9), del_vertex(9)]
    h = g.copy()
    undo = []
    for op in seq:
        undo.append(reverse_op(h, op))
        apply_update(h, op)
    assert h.canonical() != before
    apply_seq(h, reversed(undo))
    assert h.canonical() == before
    assert g.canonical() == before


def test_induced_and_components():
    g = small()
    h = induced(g, {0, 1, 3})
    assert h.triples() == [(0, 1, 2)]
    assert sorted(map(sorted, components(h))) == [[0, 1], [3]]
    assert sorted(map(sorted, components(g, within={0, 2, 3}))) == [[0], [2, 3]]


def test_graph_format_round_trip():
    g = small()
    text = format_graph(g)
    assert text == "4 3\n0 1 2\n1 2 1\n2 3 3\n"
    assert parse_graph(text).canonical() == g.canonical()
    assert parse_graph("# comment\n3 0\n").n == 3


@pytest.mark.parametrize("text", [
    "", "3\n", "2 1\n", "2 1\n0 1\n", "2 1\n0 0 1\n", "2 1\n0 5 1\n",
    "2 1\n0 1 0\n", "3 2\n0 1 1\n1 0 1\n", "x y\n", "2 1\n0 1 a\n",
])
def test_graph_parse_errors(text):
    with pytest.raises(ParseError):
        parse_graph(text)


def test_stream_round_trip():
    text = "# header\nie 0 1 2\nde 0 1\niv 5\ndv 5\nq\n"
    ops = parse_stream(text)
    assert [op.kind for op in ops] == ["ie", "de", "iv", "dv", "q"]
    assert format_stream(ops) == "ie 0 1 2\nde 0 1\niv 5\ndv 5\nq\n"


@pytest.mark.parametrize("text", ["ie 0 1\n", "ie 0 0 1\n", "ie 0 1 0\n", "de 1\n", "xx 1\n", "iv a\n"])
def test_stream_parse_errors(text):
    with pytest.raises(ParseError):
        parse_stream(text)
