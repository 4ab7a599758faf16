import random

import pytest

from dyncut.errors import ParameterViolation
from dyncut.graph import Multigraph, apply_update, del_edge, ins_edge
from dyncut.hierarchy import (ComponentCounter, mc_multi_init, mc_multi_update, query_min_cut,
                              rebuild_queue, schedule_params, side_hint)
from dyncut.oracle import brute_min_cut, disconnects

from conftest import rand_graph


def test_schedule_frozen():
    s = schedule_params(2, 100, zeta=1)
    assert s.cs == (8, 2) and s.gamma == 9
    assert s.phis == pytest.approx((1 / 18, 1 / 36))
    assert s.alpha == 288
    s = schedule_params(1, 10, zeta=1)
    assert s.cs == (3, 1) and s.gamma == 4
    assert s.phis == pytest.approx((0.125, 0.0625))
    assert s.alpha == 48
    assert schedule_params(1, 10, zeta=2).cs == (15, 3, 1)
    with pytest.raises(ParameterViolation):
        schedule_params(0, 10)


def test_component_counter():
    g = Multigraph(range(5), [(0, 1, 1), (2, 3, 1)])
    cc = ComponentCounter(g)
    assert cc.count == 3
    for op in (ins_edge(1, 2), del_edge(0, 1), del_edge(2, 3)):
        apply_update(g, op)
        cc.apply(op)
    assert cc.count == 4


def test_query_and_queues_track_brute_force():
    for trial in range(25):
        rng = random.Random(trial)
        n = rng.randint(6, 24)
        c = rng.randint(1, 3)
        g = rand_graph(rng, n, rng.uniform(0.15, 0.5))
        ref = g.copy()
        mds = mc_multi_init(g, schedule_params(c, n))
        for step in range(40):
            if step % 12 == 0:
                mds.close_batch()
                mds.batches = 0
            u, v = rng.sample(range(n), 2)
            op = del_edge(u, v) if ref.edge(u, v) is not None else ins_edge(u, v, rng.randint(1, 2), ref.next_eid)
            apply_update(ref, op)
            mc_multi_update(mds, [op])
            for lvl in mds.levels:
                assert rebuild_queue(lvl).entries() == lvl.lam.entries()
            ans = query_min_cut(mds)
            b = brute_min_cut(ref).min_cut_size
            assert ans.size == (b if b <= c else None)
            if ans.size:
                assert disconnects(ref, ans.cutset)
                assert sum(t[2] for t in ans.cutset) == ans.size
                hint = set(side_hint(ref, ans, mds.comp))
                assert 0 < len(hint) <= n // 2
