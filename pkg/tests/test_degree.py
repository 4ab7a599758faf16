import random

import pytest

from dyncut.degree import degree_reduce, lift_cutset, reduce_update
from dyncut.errors import NonLiftableEdge, PreconditionViolated
from dyncut.graph import apply_update, del_edge, del_vertex, ins_edge, ins_vertex
from dyncut.oracle import brute_min_cut


def test_reduced_shape():
    g, mir = degree_reduce([(0, 1), (1, 2), (0, 2)], c=2)
    # 3 chain heads plus 2 gadget vertices per edge
    assert g.n == 9
    assert max(len(list(g.neighbors(v))) for v in g.vertices()) <= 3
    assert sorted(a for _, _, a in g.triples()) == [1, 1, 1, 3, 3, 3, 3, 3, 3]
    assert brute_min_cut(g).min_cut_size == 2


def test_lift():
    g, mir = degree_reduce([(0, 1), (1, 2)], c=1)
    a, b = mir.vertex(0, 1), mir.vertex(1, 0)
    assert lift_cutset(mir, [(a, b, 1)]) == {(0, 1)}
    with pytest.raises(NonLiftableEdge):
        lift_cutset(mir, [(mir.vertex(0), a, 2)])


def test_updates_match_fresh_reduction():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(2, 8)
        c = rng.randint(1, 3)
        g, mir = degree_reduce([], c, range(n))
        present = set()
        for _ in range(25):
            u, w = sorted(rng.sample(range(n), 2))
            op = del_edge(u, w) if (u, w) in present else ins_edge(u, w)
            present ^= {(u, w)}
            for sub in reduce_update(mir, op):
                apply_update(g, sub)
            fresh, _ = degree_reduce(sorted(present), c, range(n))
            assert g.n == fresh.n and g.m == fresh.m
            assert mir.simple_edges() == sorted(present)
            s = brute_min_cut(g) if g.n <= 20 else None
            f = brute_min_cut(fresh) if fresh.n <= 20 else None
            if s is not None:
                assert min(s.min_cut_size, c + 1) == min(f.min_cut_size, c + 1)


def test_vertex_ops():
    g, mir = degree_reduce([(0, 1)], c=1)
    for sub in reduce_update(mir, ins_vertex(5)):
        apply_update(g, sub)
    with pytest.raises(PreconditionViolated):
        reduce_update(mir, del_vertex(0))
    with pytest.raises(PreconditionViolated):
        reduce_update(mir, ins_edge(0, 1))
    for sub in reduce_update(mir, del_vertex(5)):
        apply_update(g, sub)
    assert sorted(mir.adj) == [0, 1]
