"""Replay harness: run a stream through the engine and compare every answer
with the exhaustive / Stoer-Wagner oracle on an independent graph copy."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .graph import Multigraph, UpdateOp, apply_update
from .errors import SizeCapExceeded
from .oracle import EXHAUSTIVE_MAX_N, brute_min_cut
from .pool import DynamicMinCut


@dataclass
class CheckRecord:
    op_index: int
    expected: int | None
    got: int | None
    ok: bool
    detail: str = ""

    def json(self) -> str:
        return json.dumps({"op_index": self.op_index, "expected": self.expected,
                           "got": self.got, "ok": self.ok})


@dataclass
class VerifyReport:
    records: list = field(default_factory=list)

    @property
    def checks(self) -> int:
        return len(self.records)

    @property
    def mismatches(self) -> list:
        return [r for r in self.records if not r.ok]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def jsonl(self) -> str:
        return "".join(r.json() + "\n" for r in self.records)


def cutset_problem(g: Multigraph, cutset, size) -> str:
    """'' when the cut-set has total multiplicity `size`, only lists edges of
    g and removing it disconnects g; otherwise a short reason."""
    total = 0
    drop = set()
    for u, v, m in cutset:
        e = g.edge(u, v)
        if e is None or e.mult != m:
            return f"({u}, {v}, {m}) is not an edge"
        total += m
        drop.add((min(u, v), max(u, v)))
    if total != size:
        return f"cut-set weighs {total}, reported {size}"
    verts = list(g.vertices())
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        x = stack.pop()
        for y in g.neighbors(x):
            if y not in seen and (min(x, y), max(x, y)) not in drop:
                seen.add(y)
                stack.append(y)
    if len(seen) == len(verts):
        return "cut-set does not disconnect the graph"
    return ""


def _check(idx, ref, ans, c, method, exhaustive_n) -> CheckRecord:
    if method is None:
        method = "exhaustive" if ref.n <= exhaustive_n else "stoer-wagner"
    o = brute_min_cut(ref, method)
    exp = int(o.min_cut_size) if o.min_cut_size <= c else None
    got = ans.size
    why = ""
    if got != exp:
        why = f"size {got} != {exp}"
    elif got is not None:
        why = cutset_problem(ref, ans.cutset, got)
    return CheckRecord(idx, exp, got, not why, why)


def verify_stream(g0: Multigraph, stream, c: int, xi: int = 1, w: int = 12, simple: bool = False,
                  method: str | None = None, engine=None, on_record=None,
                  exhaustive_n: int = EXHAUSTIVE_MAX_N, cap: int | None = None, **kw) -> VerifyReport:
    """Check the answer at init (op_index 0) and after every update op
    (op_index = 1-based position in the stream; 'q' markers are skipped).

    The oracle is exhaustive up to exhaustive_n vertices and Stoer-Wagner
    above, unless `method` forces one. With `cap`, a graph that has or
    grows past cap vertices raises SizeCapExceeded."""
    if cap is not None and g0.n > cap:
        raise SizeCapExceeded(f"graph has {g0.n} vertices, cap is {cap}")
    ref = g0.copy()
    eng = engine if engine is not None else DynamicMinCut(g0.copy(), c, xi, w, simple=simple, **kw)
    rep = VerifyReport()

    def record(i):
        r = _check(i, ref, eng.query(), c, method, exhaustive_n)
        rep.records.append(r)
        if on_record is not None:
            on_record(r, eng)

    record(0)
    for i, op in enumerate(stream, 1):
        if op.kind == "q":
            continue
        eng.update(op)
        apply_update(ref, UpdateOp(op.kind, op.u, op.v, op.mult))
        if cap is not None and ref.n > cap:
            raise SizeCapExceeded(f"graph grew to {ref.n} vertices at op {i}, cap is {cap}")
        record(i)
    return rep
