"""One-level and multi-level minimum cut structures, the parameter
schedule and the top-down query.

Level i holds (G, P, CC, F) as a OneLevelECDS, the auxiliary graph and the
local-cut queue. G of level i+1 is the sparsifier of level i. The top level
has a single cluster; when sparsification stops shrinking the graph the
current level is closed as a single uncertified cluster whose queue covers
every cut (its alpha is raised to a third of the level volume).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InternalInconsistency, LevelCapExceeded, ParameterViolation, RebuildRequired, ScheduleExhausted
from .expander import _run
from .graph import GAMMA, QUERY, apply_update, components
from .localcuts import (ClusterQuotient, LocalCutQueue, _enumerate_nodes, _expand, _node_cut,
                        build_aux, special_id, update_aux)
from .sparsify import GammaIds, OneLevelECDS, ec_init_steps, ec_update

DEFAULT_MAX_LEVELS = 12
DEFAULT_K_PHI = 2.0
DEFAULT_PHI_FLOOR = 1e-3


# ------------------------------------------------------------ schedule

@dataclass(frozen=True)
class ParameterSchedule:
    c: int
    zeta: int
    cs: tuple           # c_0 .. c_zeta
    phis: tuple         # phi_0 .. phi_zeta
    gamma: int
    alpha: int

    def check(self):
        for ci, pi in zip(self.cs, self.phis):
            if self.gamma <= ci:
                raise ParameterViolation(f"gamma={self.gamma} <= c_i={ci}")
            if self.alpha < ci / pi:
                raise ParameterViolation(f"alpha={self.alpha} < c_i/phi_i={ci / pi:g}")
        return self


def raw_zeta(c: int, n: int) -> float:
    """floor(log(loglog n / 100 / log 4c)); -inf when undefined."""
    try:
        x = math.log(math.log(max(n, 3))) / 100 / math.log(4 * c)
        return math.floor(math.log(x))
    except ValueError:
        return -math.inf


def schedule_params(c: int, n: int, zeta: int | None = None, k_phi: float = DEFAULT_K_PHI,
                    phi_floor: float = DEFAULT_PHI_FLOOR, zeta_cap: int = 3) -> ParameterSchedule:
    if c < 1:
        raise ParameterViolation("c must be >= 1")
    if zeta is None:
        zeta = min(max(1, raw_zeta(c, n)), zeta_cap)
    zeta = max(1, int(zeta))
    cs = [c]
    for _ in range(zeta):
        cs.append(cs[-1] * (cs[-1] + 2))
    cs.reverse()
    gamma = cs[0] + 1
    phi0 = 2.0 ** (-(math.log2(max(n, 2)) ** 0.75))
    # the floor keeps alpha finite; the cap keeps gamma-weighted forest paths
    # from reading as sparse cuts
    phi0 = min(max(phi0, phi_floor), 1.0 / (2 * gamma))
    phis = [phi0]
    for _ in range(zeta):
        phis.append(phis[-1] / k_phi)
    alpha = math.ceil(cs[0] / phis[-1])
    return ParameterSchedule(c, zeta, tuple(cs), tuple(phis), gamma, alpha).check()


# ------------------------------------------------------------ one level

class OneLevelMinCutDS:
    """A OneLevelECDS plus the auxiliary graph and the local-cut queue."""

    def __init__(self, ds: OneLevelECDS, c: int, alpha: int):
        self.ds = ds
        self.c = c
        self.alpha = alpha
        self.aux = None
        self.lam = LocalCutQueue()
        self.cq: dict[int, ClusterQuotient] = {}
        self.count = 0                  # ops received since this level was built
        self.n0 = ds.g.n

    @property
    def g(self):
        return self.ds.g

    @property
    def part(self):
        return self.ds.part

    @property
    def is_top(self) -> bool:
        return len(self.ds.part) <= 1

    def quotient(self, cid) -> ClusterQuotient:
        q = self.cq.get(cid)
        if q is None:
            d = self.ds.cd[cid]
            base = d.atoms if self.ds.grade >= self.c else None
            q = self.cq[cid] = ClusterQuotient(self.aux, cid, self.c, base, getattr(d.cert, "local", None))
        return q

    def _insert_from(self, cid, node_sets, cq):
        for U in node_sets:
            self.lam.insert(_expand(cq, U), _node_cut(cq, U), cid)

    def enumerate_from(self, v):
        cid = self.aux.cluster_of(v)
        if cid is None:
            return
        cq = self.quotient(cid)
        self._insert_from(cid, _enumerate_nodes(cq, cq.q.rep[v], 3 * self.alpha, self.c), cq)

    def enumerate_starts(self, cid, starts):
        """Enumerate from each start vertex of one cluster. A cut holding an
        earlier start node was already found from it, so those nodes are
        skipped later on."""
        cq = self.quotient(cid)
        rep = cq.q.rep
        done: set = set()
        for s in sorted({rep[v] for v in starts}, key=lambda a: (a < 0, a)):
            self._insert_from(cid, _enumerate_nodes(cq, s, 3 * self.alpha, self.c, frozenset(done)), cq)
            done.add(s)

    def fill_cluster(self, cid):
        self.enumerate_starts(cid, self.part.members[cid] | {special_id(cid)})

    def cut_edges(self, entry):
        """Edges of G (this level) crossing the real part of a queue entry."""
        _, real, _ = entry
        U = set(real)
        cof = self.part.cluster_of
        cid = cof[real[0]]
        g = self.g
        out = []
        for x in real:
            for y, eid in g.nbrs(x).items():
                if y not in U and cof[y] == cid:
                    out.append(g.edge_by_id(eid))
        return out


def terminal_map(ds: OneLevelECDS) -> dict:
    return {cid: d.terminals for cid, d in ds.cd.items()}


def mc_one_init_steps(g, c, phi, cprime, gamma, alpha, ids=None, force_single=False):
    if cprime < c or gamma <= cprime:
        raise ParameterViolation("need c' >= c and gamma > c'")
    ds = yield from ec_init_steps(g, cprime, phi, gamma, ids, force_single)
    if force_single:
        alpha = max(alpha, -(-(2 * g.m) // 3))
    lvl = OneLevelMinCutDS(ds, c, alpha)
    lvl.aux = build_aux(g, ds.part, terminal_map(ds))
    for cid in sorted(ds.part.members):
        lvl.fill_cluster(cid)
        yield None
    return lvl


def mc_one_init(g, c, phi, cprime, gamma, alpha, ids=None, force_single=False) -> OneLevelMinCutDS:
    if alpha < math.ceil(cprime / phi) and not force_single:
        raise ParameterViolation(f"alpha={alpha} < ceil(c'/phi)")
    return _run(mc_one_init_steps(g, c, phi, cprime, gamma, alpha, ids, force_single))


def mc_one_update(lvl: OneLevelMinCutDS, seq, grade=None, phi=None):
    """Update one level; returns the op sequence for the next level."""
    res = ec_update(lvl.ds, seq, grade, phi)
    lvl.count += len(seq)
    if not seq:
        return []
    touched = set()
    for op in seq:
        if op.kind in ("ie", "de"):
            touched.add(op.u)
            touched.add(op.v)
        else:
            touched.add(op.u)
    changed = set(res.removed) | set(res.added)
    update_aux(lvl.aux, lvl.g, lvl.part, changed, terminal_map(lvl.ds))
    lam = lvl.lam
    S = res.S | touched | res.moved
    for v in S:
        lam.remove_vertex(v)
    for cid in res.removed:
        lam.remove_cluster_special(cid)
        lvl.cq.pop(cid, None)
    g = lvl.g
    cof = lvl.part.cluster_of
    starts: dict = {cid: {special_id(cid)} for cid in res.added}
    for v in S:
        if g.has_vertex(v):
            starts.setdefault(cof[v], set()).add(v)
    for cid in sorted(starts):
        lvl.enumerate_starts(cid, starts[cid])
    if len(lam._heap) > 4 * len(lam) + 64:
        lam.compact()
    return res.seq


def rebuild_queue(lvl: OneLevelMinCutDS) -> LocalCutQueue:
    """From-scratch queue for the level's current (G, P)."""
    fresh = OneLevelMinCutDS(lvl.ds, lvl.c, lvl.alpha)
    fresh.aux = build_aux(lvl.g, lvl.part)
    for cid in sorted(lvl.part.members):
        fresh.fill_cluster(cid)
    return fresh.lam


# ------------------------------------------------------------ multi level

@dataclass
class MinCutAnswer:
    size: int | None
    cutset: list = field(default_factory=list)      # [(u, v, mult)]
    level: int | None = None

    def json(self, side_hint=None) -> dict:
        if self.size is None:
            return {"size": None}
        return {"size": self.size, "cutset": [list(t) for t in self.cutset],
                "side_hint": sorted(side_hint) if side_hint is not None else None}


class ComponentCounter:
    """Connected components of a dynamic graph: labels plus a member list
    per label. Insertions merge small into large; a deletion runs two
    interleaved searches from the endpoints and relabels the smaller side
    if they never meet."""

    def __init__(self, g):
        self.g = g
        self.label: dict[int, int] = {}
        self.members: dict[int, set] = {}
        self._next = 0
        for comp in components(g):
            self._new(comp)

    def _new(self, vs):
        k = self._next
        self._next += 1
        self.members[k] = set(vs)
        for v in vs:
            self.label[v] = k
        return k

    @property
    def count(self) -> int:
        return len(self.members)

    def apply(self, op):
        """Call after op has been applied to g."""
        k = op.kind
        if k == "iv":
            self._new([op.u])
        elif k == "dv":
            lab = self.label.pop(op.u)
            del self.members[lab]
        elif k == "ie":
            a, b = self.label[op.u], self.label[op.v]
            if a != b:
                if len(self.members[a]) < len(self.members[b]):
                    a, b = b, a
                for v in self.members[b]:
                    self.label[v] = a
                self.members[a] |= self.members.pop(b)
        elif k == "de":
            self._split(op.u, op.v)

    def _split(self, u, v):
        g = self.g
        seen = ({u}, {v})
        stacks = ([u], [v])
        while True:
            for side in (0, 1):
                st = stacks[side]
                if not st:
                    small = seen[side]
                    lab = self.label[u]
                    self.members[lab] -= small
                    self._new(small)
                    return
                x = st.pop()
                for y in g.neighbors(x):
                    if y in seen[1 - side]:
                        return
                    if y not in seen[side]:
                        seen[side].add(y)
                        st.append(y)

    def smallest(self):
        return min(self.members.values(), key=lambda s: (len(s), min(s)))


class MultiLevelMinCutDS:
    def __init__(self, sched: ParameterSchedule, max_levels=DEFAULT_MAX_LEVELS):
        self.sched = sched
        self.max_levels = max_levels
        self.levels: list[OneLevelMinCutDS] = []
        self.ids = GammaIds()
        self.batches = 0            # closed plus open batches received
        self.open = False
        self.comp = None

    @property
    def g0(self):
        return self.levels[0].g

    @property
    def c(self):
        return self.sched.c

    def grade_phi(self):
        j = min(self.batches, self.sched.zeta)
        return self.sched.cs[j], self.sched.phis[j]

    def close_batch(self):
        self.open = False

    def sparsifier_check(self):
        """Level telescoping: G of level i+1 equals the sparsifier of level i
        (canonical text)."""
        for a, b in zip(self.levels, self.levels[1:]):
            if a.ds.H.canonical() != b.g.canonical():
                raise InternalInconsistency("level graphs drifted apart")
        for lvl in self.levels:
            lvl.ds.check()


def _build_levels_steps(mds: MultiLevelMinCutDS, g, start: int, grade, phi):
    """(Re)build levels start.. from graph g (owned by the new level)."""
    del mds.levels[start:]
    sched = mds.sched
    i = start
    while True:
        if i >= mds.max_levels:
            raise LevelCapExceeded(f"more than {mds.max_levels} levels")
        lvl = yield from mc_one_init_steps(g, sched.c, phi, grade, sched.gamma, sched.alpha, mds.ids)
        lvl.ds.open_batch = mds.open
        if lvl.is_top:
            mds.levels.append(lvl)
            return
        nxt = lvl.ds.H.copy()
        if nxt.n >= g.n:
            lvl = yield from mc_one_init_steps(g, sched.c, phi, grade, sched.gamma, sched.alpha,
                                               mds.ids, force_single=True)
            lvl.ds.open_batch = mds.open
            mds.levels.append(lvl)
            return
        mds.levels.append(lvl)
        g = nxt
        i += 1


def mc_multi_init_steps(g, sched: ParameterSchedule, max_levels=DEFAULT_MAX_LEVELS):
    mds = MultiLevelMinCutDS(sched, max_levels)
    yield from _build_levels_steps(mds, g, 0, sched.cs[0], sched.phis[0])
    mds.comp = ComponentCounter(mds.g0)
    return mds


def mc_multi_init(g, sched: ParameterSchedule, max_levels=DEFAULT_MAX_LEVELS) -> MultiLevelMinCutDS:
    return _run(mc_multi_init_steps(g, sched, max_levels))


def _threshold(n):
    return n / math.log(max(n, 3))


def mc_multi_update(mds: MultiLevelMinCutDS, seq):
    """Feed seq to the open batch (opening a new one if needed) and cascade
    it upward, rebuilding from the first level whose batch grew past
    n_i / ln n_i."""
    if not mds.open:
        if mds.batches >= mds.sched.zeta:
            raise ScheduleExhausted(f"instance already took {mds.batches} batches")
        mds.batches += 1
        mds.open = True
    grade, phi = mds.grade_phi()
    comp = mds.comp
    cur = list(seq)
    i = 0
    while cur and i < len(mds.levels):
        lvl = mds.levels[i]
        if lvl.count + len(cur) > _threshold(lvl.n0) or lvl.ds.forced:
            g = lvl.g
            for op in cur:
                apply_update(g, op)
                if i == 0:
                    comp.apply(op)
            _run(_build_levels_steps(mds, g, i, grade, phi))
            return mds
        if i == 0:
            nxt = []
            for op in cur:
                nxt.extend(mc_one_update(lvl, [op], grade, phi))
                comp.apply(op)
        else:
            nxt = mc_one_update(lvl, cur, grade, phi)
        cur = nxt
        i += 1
    top = mds.levels[-1]
    if not top.is_top:
        _run(_build_levels_steps(mds, top.ds.H.copy(), len(mds.levels), grade, phi))
    return mds


def query_min_cut(mds: MultiLevelMinCutDS) -> MinCutAnswer:
    """Minimum cut of G^(0) if it has size <= c, else size None."""
    g0 = mds.g0
    if g0.n < 2:
        return MinCutAnswer(None)
    if mds.comp.count > 1:
        return MinCutAnswer(0, [], None)
    best = None
    best_level = None
    for i in range(len(mds.levels) - 1, -1, -1):
        ent = mds.levels[i].lam.min()
        if ent is not None and (best is None or ent[0] < best[0]):
            best, best_level = ent, i
    if best is None:
        return MinCutAnswer(None)
    edges = mds.levels[best_level].cut_edges(best)
    cut = []
    for e in edges:
        if e.origin == GAMMA or e.id < 0:
            raise InternalInconsistency(f"forest edge {e} in a small cut")
        e0 = g0.edge_by_id(e.id)
        if e0 is None or e0.mult != e.mult or {e0.u, e0.v} != {e.u, e.v}:
            raise InternalInconsistency(f"edge {e} does not lift to the base graph ({e0}, level {best_level})")
        cut.append((min(e.u, e.v), max(e.u, e.v), e.mult))
    cut.sort()
    size = sum(t[2] for t in cut)
    if size != best[0]:
        raise InternalInconsistency("cut size differs from queue key")
    return MinCutAnswer(size, cut, best_level)


def side_hint(g, answer: MinCutAnswer, comp: ComponentCounter | None = None):
    """Vertices of the smaller side of the answer's bipartition."""
    if answer.size is None:
        return None
    if answer.size == 0:
        if comp is not None:
            return sorted(comp.smallest())
        comps = components(g)
        return sorted(min(comps, key=lambda s: (len(s), min(s))))
    drop = {(u, v) for u, v, _ in answer.cutset}
    s = answer.cutset[0][0]
    seen = {s}
    st = [s]
    while st:
        x = st.pop()
        for y in g.neighbors(x):
            if y not in seen and (min(x, y), max(x, y)) not in drop:
                seen.add(y)
                st.append(y)
    other = set(g.vertices()) - seen
    side = seen if (len(seen), min(seen)) <= (len(other), min(other) if other else 0) else other
    return sorted(side)
