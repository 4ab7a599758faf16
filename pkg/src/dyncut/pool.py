"""Instance pool that turns the batch structure into a per-op one, and the
engine facade used by the CLI and the verifier.

Each instance lives for xi*w ops and takes them as at most xi batches of
at most w ops. Once the current instance has w/4 ops of life left, a
background instance is started on a snapshot of the graph. Its
construction is a generator that is advanced a fixed number of steps per
op; once built it is fed the ops that arrived meanwhile, two per op. At the
switch any leftover work is finished, so the new current instance always
reflects every applied op.
"""
from __future__ import annotations

import math

from .degree import SimpleMirror, degree_reduce, lift_cutset, reduce_update
from .errors import InfeasibleParameters, PreconditionViolated
from .graph import Multigraph, UpdateOp, apply_update
from .hierarchy import (DEFAULT_K_PHI, DEFAULT_MAX_LEVELS, DEFAULT_PHI_FLOOR, MinCutAnswer,
                        MultiLevelMinCutDS, ParameterSchedule, mc_multi_init_steps, mc_multi_update,
                        query_min_cut, schedule_params, side_hint)

FEED_PER_OP = 2


def overlap(w: int) -> int:
    """Ops a background instance replays before it takes over."""
    return max(2, w // 4)


def _count_run(gen):
    steps = 0
    try:
        while True:
            next(gen)
            steps += 1
    except StopIteration as stop:
        return stop.value, steps


class _Instance:
    __slots__ = ("mds", "received", "in_batch")

    def __init__(self, mds):
        self.mds = mds
        self.received = 0
        self.in_batch = 0

    def feed(self, op, w):
        if self.in_batch >= w:
            self.mds.close_batch()
            self.in_batch = 0
        mc_multi_update(self.mds, [op])
        self.in_batch += 1
        self.received += 1


class _Background:
    __slots__ = ("gen", "inst", "buffer", "per_op", "steps")

    def __init__(self, gen, per_op):
        self.gen = gen
        self.inst = None
        self.buffer: list = []
        self.per_op = per_op
        self.steps = 0

    def advance(self, w):
        if self.inst is None:
            for _ in range(self.per_op):
                try:
                    next(self.gen)
                    self.steps += 1
                except StopIteration as stop:
                    self.inst = _Instance(stop.value)
                    break
            return
        for _ in range(min(FEED_PER_OP, len(self.buffer))):
            self.inst.feed(self.buffer.pop(0), w)

    def finish(self, w):
        if self.inst is None:
            mds, k = _count_run(self.gen)
            self.steps += k
            self.inst = _Instance(mds)
        for op in self.buffer:
            self.inst.feed(op, w)
        self.buffer.clear()
        return self.inst


class InstancePool:
    def __init__(self, g: Multigraph, c: int, xi: int = 1, w: int = 12, zeta: int | None = None,
                 max_levels: int = DEFAULT_MAX_LEVELS, k_phi: float = DEFAULT_K_PHI,
                 phi_floor: float = DEFAULT_PHI_FLOOR):
        if xi < 1:
            raise InfeasibleParameters("xi must be >= 1")
        if w < 2 * 6 ** xi:
            raise InfeasibleParameters(f"w={w} < 2*6^xi={2 * 6 ** xi}")
        self.c = c
        self.xi = xi
        self.w = w
        self.lifetime = xi * w
        self.max_levels = max_levels
        zeta = max(xi, zeta if zeta is not None else 1)
        self.sched: ParameterSchedule = schedule_params(c, max(g.n, 2), zeta, k_phi, phi_floor,
                                                        zeta_cap=max(3, zeta))
        self.g = g
        mds, self.init_steps = _count_run(mc_multi_init_steps(g.copy(), self.sched, max_levels))
        self.cur = _Instance(mds)
        self.bg: _Background | None = None
        self.switches = 0

    def current(self) -> MultiLevelMinCutDS:
        return self.cur.mds

    def _start_background(self):
        # half the overlap for the build, half for catching up
        per_op = max(1, math.ceil(self.init_steps / max(1, overlap(self.w) // 2)))
        gen = mc_multi_init_steps(self.g.copy(), self.sched, self.max_levels)
        self.bg = _Background(gen, per_op)

    def update(self, op: UpdateOp) -> UpdateOp:
        """Apply one op; returns it with the edge id it was given."""
        g = self.g
        if op.kind == "ie":
            if g.has_vertex(op.u) and g.has_vertex(op.v) and g.edge(op.u, op.v) is not None:
                raise PreconditionViolated(op, "pair already present")
            op = UpdateOp("ie", op.u, op.v, op.mult, g.next_eid if op.eid is None else op.eid)
        apply_update(g, op)
        bg = self.bg
        if bg is not None:
            bg.buffer.append(op)
        self.cur.feed(op, self.w)
        if bg is not None:
            bg.advance(self.w)
        if self.cur.received >= self.lifetime:
            self._switch()
        elif bg is None and self.cur.received >= self.lifetime - overlap(self.w):
            self._start_background()
        return op

    def _switch(self):
        bg = self.bg
        if bg is None:
            self._start_background()
            bg = self.bg
        new = bg.finish(self.w)
        self.init_steps = bg.steps
        self.cur = new
        self.bg = None
        self.switches += 1
        if self.cur.received >= self.lifetime - overlap(self.w):
            self._start_background()

    def query(self) -> MinCutAnswer:
        return query_min_cut(self.cur.mds)


def fd_init(g, c, xi=1, w=12, **kw) -> InstancePool:
    return InstancePool(g, c, xi, w, **kw)


def fd_update(pool: InstancePool, op) -> InstancePool:
    pool.update(op)
    return pool


def fd_current(pool: InstancePool) -> MultiLevelMinCutDS:
    return pool.current()


class DynamicMinCut:
    """Per-op engine. With simple=True the input is a simple graph; it is
    degree-reduced internally and answers are mapped back to it."""

    def __init__(self, g: Multigraph, c: int, xi: int = 1, w: int = 12, simple: bool = False, **kw):
        self.c = c
        self.simple = simple
        self.mirror: SimpleMirror | None = None
        if simple:
            for e in g.edges():
                if e.mult != 1:
                    raise PreconditionViolated(UpdateOp("ie", e.u, e.v, e.mult), "simple input needs unit edges")
            red, self.mirror = degree_reduce([(e.u, e.v) for e in g.edges()], c, g.vertices())
            self.pool = InstancePool(red, c, xi, w, **kw)
        else:
            self.pool = InstancePool(g, c, xi, w, **kw)

    @property
    def graph(self) -> Multigraph:
        return self.pool.g

    def update(self, op: UpdateOp):
        if op.kind == "q":
            return
        if not self.simple:
            self.pool.update(op)
            return
        if op.kind == "ie" and op.mult != 1:
            raise PreconditionViolated(op, "simple graphs take unit edges")
        for sub in reduce_update(self.mirror, op):
            self.pool.update(sub)

    def query(self) -> MinCutAnswer:
        ans = self.pool.query()
        if not self.simple or ans.size is None:
            return ans
        lifted = sorted((u, w, 1) for u, w in lift_cutset(self.mirror, ans.cutset))
        return MinCutAnswer(ans.size, lifted, ans.level)

    def answer_json(self) -> dict:
        ans = self.pool.query()
        hint = side_hint(self.pool.g, ans, self.pool.current().comp)
        if self.simple and ans.size is not None:
            owner = self.mirror.owner
            hint = sorted({owner[x][0] for x in hint})
            full = set(self.mirror.adj)
            if 2 * len(hint) > len(full):
                hint = sorted(full - set(hint))
            ans = MinCutAnswer(ans.size, sorted((u, w, 1) for u, w in lift_cutset(self.mirror, ans.cutset)),
                               ans.level)
        return ans.json(hint)
