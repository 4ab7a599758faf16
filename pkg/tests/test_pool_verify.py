import json
import random

import pytest

from dyncut.errors import InfeasibleParameters, PreconditionViolated, SizeCapExceeded
from dyncut.gen import generate, planted_cut
from dyncut.graph import Multigraph, del_edge, del_vertex, ins_edge, ins_vertex
from dyncut.hierarchy import MinCutAnswer
from dyncut.pool import DynamicMinCut, InstancePool, overlap
from dyncut.verify import cutset_problem, verify_stream

from conftest import rand_graph, toggles


def test_overlap():
    assert overlap(12) == 3 and overlap(4) == 2 and overlap(300) == 75


def test_pool_rejects_short_windows():
    with pytest.raises(InfeasibleParameters):
        InstancePool(Multigraph(range(3)), 1, xi=1, w=11)
    with pytest.raises(InfeasibleParameters):
        InstancePool(Multigraph(range(3)), 1, xi=0, w=12)


def test_pool_switches_and_stays_correct():
    rng = random.Random(21)
    g = rand_graph(rng, 18, 0.3)
    ops = toggles(rng, g, 100)
    eng = DynamicMinCut(g.copy(), 2, xi=1, w=12)
    rep = verify_stream(g, ops, 2, engine=eng)
    assert rep.ok and rep.checks == 101
    assert eng.pool.switches >= 7


def test_planted_cut_sizes():
    g, ops, sizes = planted_cut(40, 120, 3, c=2)
    eng = DynamicMinCut(g.copy(), 2)
    for op, want in zip(ops, sizes):
        eng.update(op)
        assert eng.query().size == want


def test_simple_mode_lifts_answers():
    rng = random.Random(4)
    g = rand_graph(rng, 9, 0.4, max_mult=1)
    ops = toggles(rng, g, 40, max_mult=1)
    rep = verify_stream(g, ops, 2, simple=True)
    assert rep.ok
    with pytest.raises(PreconditionViolated):
        DynamicMinCut(Multigraph(range(2), [(0, 1, 2)]), 2, simple=True)


def test_vertex_churn():
    g, ops, _ = generate("churn-burst", 12, 80, 5)
    assert any(op.kind == "iv" for op in ops) and any(op.kind == "dv" for op in ops)
    assert verify_stream(g, ops, 2).ok


def test_engine_preconditions():
    eng = DynamicMinCut(Multigraph(range(3), [(0, 1, 1)]), 1)
    with pytest.raises(PreconditionViolated):
        eng.update(ins_edge(0, 1))
    with pytest.raises(PreconditionViolated):
        eng.update(del_edge(1, 2))
    eng.update(ins_vertex(7))
    eng.update(del_vertex(7))
    assert eng.query().size == 0


def test_answer_json():
    g = Multigraph(range(4), [(0, 1, 2), (1, 2, 1), (2, 3, 2)])
    out = DynamicMinCut(g, 2).answer_json()
    assert out["size"] == 1 and out["cutset"] == [[1, 2, 1]]
    assert out["side_hint"] in ([0, 1], [2, 3])
    assert DynamicMinCut(Multigraph(range(3), [(0, 1, 3), (1, 2, 3)]), 2).answer_json() == {"size": None}


def test_cutset_problem():
    g = Multigraph(range(3), [(0, 1, 1), (1, 2, 2)])
    assert cutset_problem(g, [(0, 1, 1)], 1) == ""
    assert "weighs" in cutset_problem(g, [(0, 1, 1)], 2)
    assert "not an edge" in cutset_problem(g, [(0, 2, 1)], 1)
    assert "disconnect" in cutset_problem(Multigraph(range(3), [(0, 1, 1), (1, 2, 1), (0, 2, 1)]),
                                          [(0, 1, 1)], 1)


class _Liar:
    """Engine stand-in that adds one to every nonempty answer."""

    def __init__(self, inner):
        self.inner = inner

    def update(self, op):
        self.inner.update(op)

    def query(self):
        a = self.inner.query()
        return a if a.size is None else MinCutAnswer(a.size + 1, a.cutset, a.level)


def test_verify_catches_wrong_answers():
    g, ops, _ = planted_cut(20, 30, 1, c=2)
    rep = verify_stream(g, ops, 2, engine=_Liar(DynamicMinCut(g.copy(), 2)))
    assert not rep.ok
    first = json.loads(rep.jsonl().splitlines()[0])
    assert set(first) == {"op_index", "expected", "got", "ok"} and first["op_index"] == 0


def test_verify_size_cap():
    g, ops, _ = planted_cut(20, 5, 1)
    with pytest.raises(SizeCapExceeded):
        verify_stream(g, ops, 2, cap=10)
    with pytest.raises(SizeCapExceeded):
        verify_stream(Multigraph(range(3)), [ins_vertex(3)], 1, cap=3)
