"""Reference oracles on graphs whose answers were worked out by hand."""
import itertools
import math
import random

import pytest

from dyncut.errors import TooLarge
from dyncut.graph import Multigraph, cut_weight
from dyncut.oracle import (brute_conductance, brute_local_cuts, brute_min_cut, disconnects,
                           steiner_min_cut, steiner_min_cut_side, stoer_wagner_size)

from conftest import rand_graph


def build(n, triples):
    g = Multigraph(range(n))
    for t in triples:
        g.add_edge(t[0], t[1], t[2] if len(t) > 2 else 1)
    return g


def complete(n, mult=1):
    return build(n, [(u, v, mult) for u, v in itertools.combinations(range(n), 2)])


def cycle(n, mult=1):
    return build(n, [(i, (i + 1) % n, mult) for i in range(n)])


PETERSEN = [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)] + \
    [(5 + i, 5 + (i + 2) % 5) for i in range(5)]

# (graph, frozen min cut size)
FROZEN = [
    (complete(4), 3),
    (complete(5), 4),
    (complete(4, 3), 9),
    (cycle(6), 2),
    (cycle(7, 2), 4),
    (build(4, [(0, 1), (1, 2), (2, 3)]), 1),
    (build(4, [(0, 1), (2, 3)]), 0),
    (build(6, [(0, 1, 3), (1, 2, 3), (0, 2, 3), (3, 4, 3), (4, 5, 3), (3, 5, 3), (2, 3, 2)]), 2),
    (build(10, PETERSEN), 3),
    (build(6, [(a, b) for a in range(3) for b in range(3, 6)]), 3),
    (build(2, [(0, 1, 5)]), 5),
]


@pytest.mark.parametrize("g,size", FROZEN)
def test_frozen_min_cut(g, size):
    for method in ("exhaustive", "stoer-wagner"):
        r = brute_min_cut(g, method)
        assert r.min_cut_size == size
        assert sum(t[2] for t in r.witness) == size
        if size > 0:
            assert disconnects(g, r.witness)
    assert stoer_wagner_size(g) == size


def test_trivial_graphs():
    assert brute_min_cut(Multigraph()).min_cut_size == math.inf
    assert brute_min_cut(Multigraph([7])).min_cut_size == math.inf
    r = brute_min_cut(Multigraph([1, 2]))
    assert r.min_cut_size == 0 and r.witness == []


def test_exhaustive_refuses_large():
    with pytest.raises(TooLarge):
        brute_min_cut(cycle(30), "exhaustive")


def test_methods_agree_on_random_graphs():
    rng = random.Random(5)
    for _ in range(150):
        n = rng.randint(2, 16)
        g = rand_graph(rng, n, rng.uniform(0.2, 0.8), 3)
        a = brute_min_cut(g, "exhaustive")
        b = brute_min_cut(g, "stoer-wagner")
        assert a.min_cut_size == b.min_cut_size
        assert cut_weight(g, a.side) == a.min_cut_size
        assert cut_weight(g, b.side) == b.min_cut_size


def test_steiner_frozen():
    g = cycle(6)
    assert steiner_min_cut(g, [0], [3], 10) == 2
    assert steiner_min_cut(g, [0, 1], [3, 4], 10) == 2
    k5 = complete(5)
    assert steiner_min_cut(k5, [0], [1], 10) == 4
    # cap truncates
    assert steiner_min_cut(k5, [0], [1], 2) == 2
    side = steiner_min_cut_side(g, [0], [3])
    assert 0 in side and 3 not in side and cut_weight(g, side) == 2


def test_steiner_matches_enumeration():
    rng = random.Random(9)
    for _ in range(100):
        n = rng.randint(3, 9)
        g = rand_graph(rng, n, 0.5, 3)
        a, b = rng.sample(range(n), 2)
        rest = [v for v in range(n) if v not in (a, b)]
        best = min(cut_weight(g, {a, *S}) for k in range(len(rest) + 1)
                   for S in itertools.combinations(rest, k))
        assert steiner_min_cut(g, [a], [b], 100) == best


def test_conductance_frozen():
    assert brute_conductance(complete(4)) == pytest.approx(2 / 3)
    assert brute_conductance(cycle(4)) == pytest.approx(0.5)
    assert brute_conductance(build(4, [(0, 1), (1, 2), (2, 3)])) == pytest.approx(1 / 3)
    assert brute_conductance(build(4, [(0, 1), (2, 3)])) == 0.0
    assert brute_conductance(Multigraph([0])) is None


def test_local_cuts_frozen():
    # path 0-1-2-3 with terminal 3; terminals may sit on either side as a
    # block, and the volume bound is 3*alpha
    g = build(4, [(0, 1), (1, 2), (2, 3)])
    small = {frozenset({0}), frozenset({0, 1}), frozenset({3}), frozenset({2, 3})}
    assert brute_local_cuts(g, {3}, alpha=1, c=1) == small
    assert brute_local_cuts(g, {3}, alpha=2, c=1) == small | {frozenset({0, 1, 2}), frozenset({1, 2, 3})}
    # terminals 0 and 3 must stay together, so only middle-free sets are out
    assert brute_local_cuts(g, {0, 3}, alpha=5, c=2) == {frozenset({1}), frozenset({2}), frozenset({1, 2})}


def test_disconnects():
    g = cycle(5)
    assert not disconnects(g, [(0, 1, 1)])
    assert disconnects(g, [(0, 1, 1), (3, 2, 1)])
    assert not disconnects(Multigraph([0]), [])
