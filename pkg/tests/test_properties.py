"""Property tests driven by hypothesis."""
from hypothesis import given
from hypothesis import strategies as st

from dyncut.degree import degree_reduce
from dyncut.flow import UnionFind
from dyncut.graph import Multigraph, del_edge, format_graph, ins_edge, parse_graph
from dyncut.oracle import brute_min_cut, steiner_min_cut
from dyncut.sparsify import build_containment, build_sparsifier_cluster, contract, validate_containment
from dyncut.verify import verify_stream


@st.composite
def multigraphs(draw, min_n=2, max_n=9, max_mult=3):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    g = Multigraph(range(n))
    for u, v in chosen:
        g.add_edge(u, v, draw(st.integers(1, max_mult)))
    return g


@st.composite
def forests(draw):
    n = draw(st.integers(1, 25))
    edges = []
    for v in range(1, n):
        if draw(st.booleans()) or v < 3:
            edges.append((draw(st.integers(0, v - 1)), v))
    K = draw(st.sets(st.integers(0, n - 1), max_size=n))
    return n, edges, K


@given(multigraphs(0, 12))
def test_graph_text_round_trip(g):
    assert parse_graph(format_graph(g)).canonical() == g.canonical()


@given(multigraphs())
def test_min_cut_methods_agree(g):
    a = brute_min_cut(g, "exhaustive")
    b = brute_min_cut(g, "stoer-wagner")
    assert a.min_cut_size == b.min_cut_size


@given(forests())
def test_contract_bound_and_connectivity(f):
    n, edges, K = f
    cf = contract(edges, K, vertices=range(n))
    for k, nv, _ in cf.trees:
        assert nv <= 2 * k
    uf, uc = UnionFind(range(n)), UnionFind(range(n))
    for u, v in edges:
        uf.union(u, v)
    for a, b, path in cf.edges:
        assert path[0] == a and path[-1] == b
        for x, y in zip(path, path[1:]):
            assert (x, y) in edges or (y, x) in edges
        uc.union(a, b)
    for a in K:
        for b in K:
            assert (uf.find(a) == uf.find(b)) == (uc.find(a) == uc.find(b))


@given(multigraphs(3, 10), st.integers(1, 3), st.data())
def test_sparsifier_pair_connectivity(g, c, data):
    T = data.draw(st.sets(st.sampled_from(sorted(g.vertices())), max_size=6))
    cont = build_containment(g, T, c)
    assert validate_containment(g, T, c, cont.cc) is True
    H = build_sparsifier_cluster(g, T, cont.cc, None, c, c + 1).graph
    for a in T:
        for b in T:
            if a < b:
                assert min(c, steiner_min_cut(g, [a], [b], c + 1)) == min(c, steiner_min_cut(H, [a], [b], c + 1))


@given(multigraphs(2, 6, 1), st.integers(1, 3))
def test_degree_reduction_keeps_small_min_cut(g, c):
    red, _ = degree_reduce([(e.u, e.v) for e in g.edges()], c, g.vertices())
    if red.n <= 20:
        a = brute_min_cut(g).min_cut_size
        b = brute_min_cut(red).min_cut_size
        assert min(a, c + 1) == min(b, c + 1)


@given(multigraphs(4, 12, 2), st.integers(1, 3), st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)),
                                                          max_size=30))
def test_engine_agrees_with_oracle(g, c, flips):
    n = g.n
    present = {e.pair() for e in g.edges()}
    ops = []
    for u, v in flips:
        u, v = u % n, v % n
        if u == v:
            continue
        p = (min(u, v), max(u, v))
        ops.append(del_edge(*p) if p in present else ins_edge(*p, 1))
        present ^= {p}
    assert verify_stream(g, ops, c).ok
