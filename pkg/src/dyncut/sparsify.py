"""Forest contraction, cut containment sets, terminal sparsifiers and the
one-level terminal edge-connectivity structure.

The sparsifier of a partition keeps every intercluster edge and, inside
each cluster P, the containment edges CC_P at their own multiplicity plus
the contraction of a spanning forest of G[P] - CC_P with respect to
K_P = (terminals of P) + End(CC_P); contracted forest edges get
multiplicity gamma > c so no small cut can use them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import oracle
from .errors import InternalInconsistency, ParameterViolation, RebuildRequired, TooManyTerminals
from .expander import LARGE_N, Partition, _certify_local, _Local, decompose_steps, _run
from .flow import UnionFind, build_quotient, capped_flow
from .graph import CHAIN, GAMMA, Multigraph, apply_update, del_edge, del_vertex, ins_edge, ins_vertex

EXACT_TERMINAL_LIMIT = 10
VALIDATE_TERMINAL_LIMIT = 16


# ------------------------------------------------------------ contraction

@dataclass
class ConnectingPaths:
    paths: list                     # vertex lists, endpoints first/last
    endpoints: frozenset = frozenset()


@dataclass
class ContractedForest:
    vertices: set
    edges: list                     # (a, b, path) with a < b, path from a to b
    trees: list = field(default_factory=list)   # per tree: (|K in tree|, n_vertices, n_edges)


def _tree_adj(forest, vertices=None):
    """Normalize a forest given as {v: nbrs}, a Multigraph or (u, v) pairs."""
    if isinstance(forest, Multigraph):
        adj = {v: set(forest.neighbors(v)) for v in forest.vertices()}
    elif isinstance(forest, dict):
        adj = {v: set(ns) for v, ns in forest.items()}
    else:
        adj = {}
        for t in forest:
            u, v = t[0], t[1]
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    for v in vertices or ():
        adj.setdefault(v, set())
    return adj


def _contract_adj(adj, K):
    """Core of Contract_K on a forest adjacency (mutated copy semantics)."""
    K = set(K) & set(adj)
    deg = {v: len(ns) for v, ns in adj.items()}
    alive = set(adj)
    stack = [v for v in adj if deg[v] <= 1 and v not in K]
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for w in adj[v]:
            if w in alive:
                deg[w] -= 1
                if deg[w] <= 1 and w not in K:
                    stack.append(w)
    branch = {v for v in alive if v in K or deg[v] >= 3}
    edges = []
    used = set()
    for b in sorted(branch):
        for w0 in sorted(adj[b]):
            if w0 not in alive:
                continue
            key = (b, w0) if b < w0 else (w0, b)
            if key in used:
                continue
            used.add(key)
            path = [b, w0]
            prev, cur = b, w0
            while cur not in branch:
                nxt = [x for x in adj[cur] if x in alive and x != prev]
                # cur has exactly two live neighbors here
                prev, cur = cur, nxt[0]
                k2 = (prev, cur) if prev < cur else (cur, prev)
                used.add(k2)
                path.append(cur)
            a, z = path[0], path[-1]
            if a > z:
                path.reverse()
                a, z = z, a
            edges.append((a, z, path))
    return branch, edges


def connecting_paths(tree, K) -> ConnectingPaths:
    """The edge-disjoint paths whose contraction is Contract_K(tree)."""
    adj = _tree_adj(tree)
    branch, edges = _contract_adj(adj, K)
    paths = sorted((p for _, _, p in edges), key=lambda p: (p[0], p[-1], len(p)))
    ends = frozenset(x for p in paths for x in (p[0], p[-1]))
    return ConnectingPaths(paths, ends)


def contract(forest, K, vertices=None) -> ContractedForest:
    adj = _tree_adj(forest, vertices)
    branch, edges = _contract_adj(adj, K)
    edges.sort(key=lambda t: (t[0], t[1]))
    # per-tree accounting
    uf = UnionFind(adj)
    for v, ns in adj.items():
        for w in ns:
            uf.union(v, w)
    K = set(K) & set(adj)
    stats: dict = {}
    for v in K:
        stats.setdefault(uf.find(v), [0, 0, 0])[0] += 1
    for v in branch:
        stats.setdefault(uf.find(v), [0, 0, 0])[1] += 1
    for a, _, _ in edges:
        stats[uf.find(a)][2] += 1
    trees = [tuple(s) for _, s in sorted(stats.items())]
    return ContractedForest(set(branch), edges, trees)


# ------------------------------------------------------------ containment

@dataclass
class CutContainmentSet:
    cc: frozenset                   # edge ids
    regions: list                   # partition of the vertex set; CC = its boundary
    method: str = "exact"
    atoms: object = field(default=None, repr=False, compare=False)   # Quotient at threshold c
    base: object = field(default=None, repr=False, compare=False)    # atoms before terminal merges


def _min_side(adj, A, B, cap):
    val, side = capped_flow(adj, A, B, cap)
    return val, side


def build_containment(g, T, c, vertices=None, exact_limit=EXACT_TERMINAL_LIMIT,
                      flow_tests=True, loc=None, base=None) -> CutContainmentSet:
    """A c-cut containment set of g[vertices] for terminal set T.

    Vertices are first grouped into atoms (groups no cut of size <= c can
    split). Terminal atoms joined by more than c edge-disjoint paths merge.
    With at most `exact_limit` terminal atoms left, every terminal
    bipartition gets its source-minimal minimum cut and CC is the union of
    those cut-sets; otherwise CC is the boundary of the atoms.

    loc (array view of g[vertices]) and base (the terminal-free atoms of an
    earlier call on the same induced graph) only save work.
    """
    S = set(g.vertices() if vertices is None else vertices)
    T = set(T) & S
    if len(T) <= 1:
        return CutContainmentSet(frozenset(), [frozenset(S)] if S else [], "trivial")
    if base is not None:
        q = base.copy()
    else:
        q = build_quotient(g, S, c, flow_tests=flow_tests, loc=loc)
    q0 = q.copy() if len(S) > LARGE_N else None
    tatoms = sorted({q.rep[t] for t in T})
    # pairwise terminal-atom connectivity: merge pairs above c
    if flow_tests and len(tatoms) > 1:
        i = 0
        while i < len(tatoms):
            j = i + 1
            while j < len(tatoms):
                a, b = q.rep[tatoms[i]], q.rep[tatoms[j]]
                if a != b:
                    val, _ = capped_flow(q.adj, (a,), (b,), c + 1)
                    if val > c:
                        keep, gone = min(a, b), max(a, b)
                        q.merge(keep, gone)
                j += 1
            i += 1
        tatoms = sorted({q.rep[t] for t in T})
    if len(tatoms) <= 1:
        return CutContainmentSet(frozenset(), [frozenset(S)], "atoms", q, q0)
    cut_pairs = set()
    if len(tatoms) <= exact_limit:
        first, rest = tatoms[0], tatoms[1:]
        for r in range(0, len(rest)):
            for extra in itertools.combinations(rest, r):
                A = (first,) + extra
                B = tuple(x for x in rest if x not in extra)
                val, side = capped_flow(q.adj, A, B, c + 1)
                if val > c:
                    continue
                for x in side:
                    for y in q.adj[x]:
                        if y not in side:
                            cut_pairs.add((x, y) if x < y else (y, x))
        method = "exact"
    else:
        cut_pairs = {(a, b) for a in q.adj for b in q.adj[a] if a < b}
        method = "atoms"
    # regions: components of the quotient without the cut pairs
    uf = UnionFind(q.members)
    for a in q.adj:
        for b in q.adj[a]:
            if a < b and (a, b) not in cut_pairs:
                uf.union(a, b)
    reg: dict = {}
    for a, mem in q.members.items():
        reg.setdefault(uf.find(a), []).extend(mem)
    regions = sorted((frozenset(r) for r in reg.values()), key=min)
    rid = {}
    for i, r in enumerate(regions):
        for v in r:
            rid[v] = i
    # every crossing edge has an endpoint outside the largest region
    big = max(range(len(regions)), key=lambda i: len(regions[i]))
    cc = set()
    for i, r in enumerate(regions):
        if i == big:
            continue
        for v in r:
            for w, eid in g.nbrs(v).items():
                if w in S and rid[v] != rid[w]:
                    cc.add(eid)
    return CutContainmentSet(frozenset(cc), regions, method, q, q0)


def fallback_containment(g, vertices=None) -> CutContainmentSet:
    """CC = every edge; regions are singletons."""
    S = set(g.vertices() if vertices is None else vertices)
    cc = {eid for v in S for w, eid in g.nbrs(v).items() if w in S}
    return CutContainmentSet(frozenset(cc), [frozenset([v]) for v in sorted(S)], "fallback")


@dataclass
class ContainmentViolation:
    side: frozenset
    other: frozenset
    value_g: int
    value_restricted: int


def validate_containment(g, T, c, CC, bipartitions=None, vertices=None):
    """True, or the first terminal bipartition whose small minimum cut is
    not realizable inside CC. Flows come from the oracle module."""
    S = set(g.vertices() if vertices is None else vertices)
    T = sorted(set(T) & S)
    sub = Multigraph(sorted(S))
    raised = Multigraph(sorted(S))
    CC = set(CC)
    for v in S:
        for w, eid in g.nbrs(v).items():
            if w in S and v < w:
                e = g.edge_by_id(eid)
                sub.add_edge(v, w, e.mult)
                raised.add_edge(v, w, e.mult if eid in CC else max(e.mult, c + 1))
    if bipartitions is None:
        if len(T) > VALIDATE_TERMINAL_LIMIT:
            raise TooManyTerminals(f"{len(T)} terminals exceed {VALIDATE_TERMINAL_LIMIT}")
        if len(T) < 2:
            return True
        bipartitions = []
        first, rest = T[0], T[1:]
        for r in range(len(rest)):
            for extra in itertools.combinations(rest, r):
                A = (first,) + extra
                bipartitions.append((A, tuple(x for x in rest if x not in extra)))
    for A, B in bipartitions:
        a = oracle.steiner_min_cut(sub, A, B, c + 1)
        if a <= c:
            b = oracle.steiner_min_cut(raised, A, B, c + 1)
            if a != b:
                return ContainmentViolation(frozenset(A), frozenset(B), a, b)
    return True


# ------------------------------------------------------------ forests

def spanning_forest(g, S, cc, seed=()):
    """Edge ids of a spanning forest of g[S] - cc. Seed edges that are still
    valid are kept first, so a forest survives small changes mostly intact.
    Only vertices outside the largest seeded tree are scanned for more edges."""
    uf = UnionFind(S)
    out = set()
    E = g.edge_by_id
    for eid in seed:
        e = E(eid)
        if e is None or eid in cc or e.u not in S or e.v not in S:
            continue
        if uf.union(e.u, e.v):
            out.add(eid)
    if len(out) >= len(S) - 1:
        return out
    if out:
        find = uf.find
        root = {v: find(v) for v in S}
        size: dict = {}
        for r in root.values():
            size[r] = size.get(r, 0) + 1
        big = max(size, key=lambda r: (size[r], -r))
        scan = sorted(v for v, r in root.items() if r != big)
    else:
        scan = sorted(S)
    for v in scan:
        for w, eid in g.nbrs(v).items():
            if w in S and eid not in cc and eid not in out:
                if uf.union(v, w):
                    out.add(eid)
    return out


@njit(cache=True)
def _uf_find(parent, x):
    r = x
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nxt = parent[x]
        parent[x] = r
        x = nxt
    return r


@njit(cache=True)
def _forest_kernel(n, off, nb, seed, blocked):
    """CSR entries of a spanning forest of the unblocked entries, seed
    entries first, then the rest in vertex order."""
    parent = np.arange(n)
    take = np.zeros(len(nb), np.bool_)
    for rnd in range(2):
        for i in range(n):
            for p in range(off[i], off[i + 1]):
                if blocked[p] or (rnd == 0 and not seed[p]):
                    continue
                a = _uf_find(parent, i)
                b = _uf_find(parent, nb[p])
                if a != b:
                    if b < a:
                        a, b = b, a
                    parent[b] = a
                    take[p] = True
    return take


@njit(cache=True)
def _contract_kernel(n, tu, tv, K):
    """Contract_K of a forest on 0..n-1 given by edges (tu, tv). Returns the
    branch mask and the compressed paths (concatenated, with offsets); every
    path runs from its smaller to its larger end."""
    m = len(tu)
    src = np.concatenate((tu, tv))
    dst = np.concatenate((tv, tu))
    order = np.argsort(src * n + dst, kind="mergesort")
    inv = np.empty(2 * m, np.int64)
    for i in range(2 * m):
        inv[order[i]] = i
    nbr = dst[order]
    twin = np.empty(2 * m, np.int64)
    for i in range(2 * m):
        e = order[i]
        twin[i] = inv[e + m] if e < m else inv[e - m]
    off = np.zeros(n + 1, np.int64)
    for i in range(2 * m):
        off[src[order[i]] + 1] += 1
    for i in range(n):
        off[i + 1] += off[i]
    deg = np.diff(off)
    alive = np.ones(n, np.bool_)
    stack = np.empty(n, np.int64)
    top = 0
    for v in range(n):
        if deg[v] <= 1 and not K[v]:
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        if not alive[v]:
            continue
        alive[v] = False
        for p in range(off[v], off[v + 1]):
            w = nbr[p]
            if alive[w]:
                deg[w] -= 1
                if deg[w] <= 1 and not K[w]:
                    stack[top] = w
                    top += 1
    branch = np.zeros(n, np.bool_)
    for v in range(n):
        if alive[v] and (K[v] or deg[v] >= 3):
            branch[v] = True
    used = np.zeros(2 * m, np.bool_)
    buf = np.empty(2 * m + n + 1, np.int64)
    poff = [0]
    pos = 0
    for b in range(n):
        if not branch[b]:
            continue
        for p0 in range(off[b], off[b + 1]):
            if used[p0] or not alive[nbr[p0]]:
                continue
            start = pos
            buf[pos] = b
            pos += 1
            p = p0
            while True:
                used[p] = True
                used[twin[p]] = True
                cur = nbr[p]
                buf[pos] = cur
                pos += 1
                if branch[cur]:
                    break
                prev_entry = twin[p]
                for q in range(off[cur], off[cur + 1]):
                    if q != prev_entry and alive[nbr[q]]:
                        p = q
                        break
            if buf[start] > buf[pos - 1]:
                buf[start:pos] = buf[start:pos][::-1].copy()
            poff.append(pos)
    return branch, buf[:pos], np.array(poff, np.int64)


def forest_from_local(loc, cc, seed=()):
    """spanning_forest on an array view: (edge ids, CSR entry mask)."""
    blocked = np.isin(loc.eid, np.fromiter(cc, np.int64, len(cc))) if cc else np.zeros(len(loc.eid), bool)
    sd = np.isin(loc.eid, np.fromiter(seed, np.int64, len(seed))) if seed else np.zeros(len(loc.eid), bool)
    take = _forest_kernel(loc.n, loc.off, loc.nb, sd, blocked)
    return set(loc.eid[take].tolist()), take


def _contract_local(loc, take, K):
    rows = np.repeat(np.arange(loc.n), np.diff(loc.off))
    km = np.zeros(loc.n, bool)
    idx = loc.idx
    for v in K:
        km[idx[v]] = True
    branch, buf, poff = _contract_kernel(loc.n, rows[take], loc.nb[take], km)
    va = np.asarray(loc.verts)
    flat = va[buf].tolist()
    pl = poff.tolist()
    edges = []
    for i in range(len(pl) - 1):
        path = flat[pl[i]:pl[i + 1]]
        edges.append((path[0], path[-1], path))
    return set(va[branch].tolist()), edges


def _forest_adj(g, S, forest):
    adj = {v: set() for v in S}
    E = g.edge_by_id
    for eid in forest:
        e = E(eid)
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    return adj


# ------------------------------------------------------------ sparsifiers

@dataclass
class TerminalSparsifier:
    graph: Multigraph
    provenance: dict                # sparsifier vertex -> vertex of g (identity)
    gamma_paths: dict = field(default_factory=dict)   # gamma edge id -> forest path


class GammaIds:
    """Negative ids for contracted-forest edges, unique within a hierarchy."""

    def __init__(self, start=-1):
        self._next = start

    @classmethod
    def below(cls, g):
        """An allocator whose ids cannot clash with edge ids of g."""
        return cls(min(0, min(g.edge_ids(), default=0)) - 1)

    def __call__(self):
        x = self._next
        self._next -= 1
        return x


def _copied_origin(e):
    return GAMMA if e.origin == GAMMA else CHAIN


def _piece(g, P, T_P, cc, forest, gamma, new_id, reuse=None, fast=None):
    """Sparsifier contribution of one cluster.

    Returns (vertices, {pair: (id, mult, origin)}, {gamma id: path}). A
    containment edge whose pair also carries a contracted-forest edge is
    folded into it (multiplicity gamma + mult), keeping one triple per pair.
    fast = (array view of g[P], forest entry mask) runs the contraction on arrays.
    """
    E = g.edge_by_id
    K = set(T_P)
    for eid in cc:
        e = E(eid)
        K.add(e.u)
        K.add(e.v)
    if fast is not None:
        branch, cedges = _contract_local(fast[0], fast[1], K)
    else:
        branch, cedges = _contract_adj(_forest_adj(g, P, forest), K)
    contrib = {}
    for eid in cc:
        e = E(eid)
        contrib[_pair(e)] = (eid, e.mult, _copied_origin(e))
    paths = {}
    for a, b, path in sorted(cedges, key=lambda t: (t[0], t[1])):
        x = reuse.pop((a, b), None) if reuse else None
        if x is None:
            x = new_id()
        old = contrib.get((a, b))
        contrib[(a, b)] = (x, gamma + (old[1] if old else 0), GAMMA)
        paths[x] = path
    return frozenset(branch), contrib, paths


def _cluster_cc(g, P, CC):
    return {eid for v in P for w, eid in g.nbrs(v).items() if w in P and v < w and eid in CC}


def _cluster_forest(g, P, F):
    E = g.edge_by_id
    return {eid for eid in F if (e := E(eid)) is not None and e.u in P and e.v in P}


def build_sparsifier_cluster(g, T, CC, F, c, gamma, vertices=None, ids=None) -> TerminalSparsifier:
    """Sparsifier of g[vertices] for terminals T: the containment edges plus
    the gamma-weighted contraction of F w.r.t. T and End(CC)."""
    if gamma <= c:
        raise ParameterViolation(f"gamma={gamma} must exceed c={c}")
    S = set(g.vertices() if vertices is None else vertices)
    cc = _cluster_cc(g, S, set(CC))
    F = spanning_forest(g, S, cc) if F is None else _cluster_forest(g, S, F)
    verts, contrib, paths = _piece(g, S, set(T) & S, cc, F, gamma, ids or GammaIds.below(g))
    return TerminalSparsifier(_assemble_graph(verts, contrib), {v: v for v in verts}, paths)


def _assemble_graph(verts, contrib):
    h = Multigraph(sorted(verts))
    for (a, b), (x, mult, org) in sorted(contrib.items(), key=lambda t: t[1][0]):
        h.add_edge(a, b, mult, x, org)
    return h


def build_sparsifier_partition(g, part, CC, F, c, gamma, ids=None) -> TerminalSparsifier:
    """Replace every cluster of `part` by its sparsifier; intercluster edges
    are kept with their ids. CC holds the intracluster containment edges
    (intercluster edges in it are ignored)."""
    if gamma <= c:
        raise ParameterViolation(f"gamma={gamma} must exceed c={c}")
    ids = ids or GammaIds.below(g)
    cof = part.cluster_of
    CC = set(CC)
    verts = set()
    contrib = {}
    paths = {}
    for cid, P in sorted(part, key=lambda t: min(t[1])):
        T_P = {v for v in P if any(cof[w] != cid for w in g.neighbors(v))}
        cc = _cluster_cc(g, P, CC)
        FP = spanning_forest(g, P, cc) if F is None else _cluster_forest(g, P, F)
        vs, ct, ps = _piece(g, P, T_P, cc, FP, gamma, ids)
        verts |= vs
        contrib.update(ct)
        paths.update(ps)
    for e in g.edges():
        if cof[e.u] != cof[e.v]:
            contrib[_pair(e)] = (e.id, e.mult, _copied_origin(e))
    return TerminalSparsifier(_assemble_graph(verts, contrib), {v: v for v in verts}, paths)


def _pair(e):
    return (e.u, e.v) if e.u < e.v else (e.v, e.u)


# ------------------------------------------------------------ one level

INTER = -1      # owner tag of intercluster edges in the sparsifier


@dataclass
class ClusterData:
    vertices: frozenset
    terminals: frozenset
    cc: frozenset                   # intracluster containment edge ids
    forest: frozenset               # forest edge ids
    piece: frozenset                # sparsifier vertices contributed
    contrib: dict                   # pair -> (id, mult, origin) in the sparsifier
    paths: dict                     # gamma id -> forest path
    cert: object = None
    method: str = ""
    atoms: object = field(default=None, repr=False, compare=False)
    base: object = field(default=None, repr=False, compare=False)


class OneLevelECDS:
    """(G, P, CC, F) together with the sparsifier they define.

    `grade` is the connectivity parameter the containment sets are valid
    for; `open_batch` is set once an update batch has started, after which
    further ops extend that batch at the same grade.
    """

    def __init__(self, g, grade, phi, gamma, ids=None, exact_limit=EXACT_TERMINAL_LIMIT):
        if gamma <= grade:
            raise ParameterViolation(f"gamma={gamma} must exceed c'={grade}")
        if not 0 < phi < 1:
            raise ParameterViolation("phi must lie in (0, 1)")
        self.g = g
        self.grade = grade
        self.phi = phi
        self.gamma = gamma
        self.ids = ids or GammaIds()
        self.exact_limit = exact_limit
        self.part = Partition()
        self.cd: dict[int, ClusterData] = {}
        self.tcount: dict[int, int] = {}
        self.H = Multigraph()
        self.hown: dict[int, int] = {}       # sparsifier edge id -> cluster id or INTER
        self.forced = False                  # single cluster without a certificate
        self.open_batch = False

    # -- queries
    @property
    def terminals(self) -> set:
        return {v for v, k in self.tcount.items() if k > 0}

    def cluster_terminals(self, cid) -> frozenset:
        return self.cd[cid].terminals

    @property
    def CC(self) -> set:
        cof = self.part.cluster_of
        out = {e.id for e in self.g.edges() if cof[e.u] != cof[e.v]}
        for d in self.cd.values():
            out |= d.cc
        return out

    @property
    def F(self) -> set:
        out = set()
        for d in self.cd.values():
            out |= d.forest
        return out

    @property
    def sparsifier(self) -> Multigraph:
        return self.H

    def _term_count(self, v):
        cof = self.part.cluster_of
        cv = cof[v]
        return sum(1 for w in self.g.neighbors(v) if cof[w] != cv)

    def _make_cluster(self, P, T_P, seed=(), cert=None, reuse=None, base=None):
        g = self.g
        loc = getattr(cert, "local", None)
        cont = build_containment(g, T_P, self.grade, P, self.exact_limit, loc=loc, base=base)
        if loc is not None:
            forest, take = forest_from_local(loc, cont.cc, seed)
            fast = (loc, take)
        else:
            forest = spanning_forest(g, P, cont.cc, seed)
            fast = None
        verts, contrib, paths = _piece(g, P, T_P, cont.cc, forest, self.gamma, self.ids, reuse, fast)
        return ClusterData(frozenset(P), frozenset(T_P), cont.cc, frozenset(forest),
                           verts, contrib, paths, cert, cont.method, cont.atoms, cont.base)

    def dump(self) -> str:
        """Sparsifier dump: "v id origin_gvertex" lines, then
        "e id u v mult origin" lines."""
        lines = [f"v {v} {v}" for v in sorted(self.H.vertices())]
        for e in sorted(self.H.edges(), key=lambda e: e.id):
            lines.append(f"e {e.id} {e.u} {e.v} {e.mult} {e.origin}")
        return "\n".join(lines) + "\n"

    def check(self):
        """Recompute the sparsifier from (G, P, CC, F) and compare; raises
        InternalInconsistency on a difference."""
        ts = build_sparsifier_partition(self.g, self.part, self.CC, self.F, self.grade, self.gamma)
        if ts.graph.canonical() != self.H.canonical():
            raise InternalInconsistency("sparsifier drifted from its definition")


def ec_init_steps(g, grade, phi, gamma, ids=None, force_single=False,
                  exact_limit=EXACT_TERMINAL_LIMIT):
    """Generator form of ec_init: yields None between units of work and
    returns the structure."""
    ds = OneLevelECDS(g, grade, phi, gamma, ids, exact_limit)
    if force_single:
        found = [(frozenset(g.vertices()), None)] if g.n else []
        ds.forced = True
    else:
        found = yield from decompose_steps(g, phi)
    found.sort(key=lambda t: min(t[0]))
    new = [(ds.part.add(C), cert) for C, cert in found]
    for v in g.vertices():
        ds.tcount[v] = ds._term_count(v)
    H = Multigraph()
    for cid, cert in new:
        P = ds.part.members[cid]
        T_P = frozenset(v for v in P if ds.tcount[v] > 0)
        d = ds._make_cluster(P, T_P, cert=cert)
        ds.cd[cid] = d
        for v in d.piece:
            H.add_vertex(v)
        yield None
    cof = ds.part.cluster_of
    rows = []
    for cid, d in ds.cd.items():
        rows.extend((x, pr, m, o, cid) for pr, (x, m, o) in d.contrib.items())
    for e in g.edges():
        if cof[e.u] != cof[e.v]:
            rows.append((e.id, _pair(e), e.mult, _copied_origin(e), INTER))
    rows.sort()
    for x, (a, b), m, o, own in rows:
        H.add_edge(a, b, m, x, o)
        ds.hown[x] = own
    ds.H = H
    return ds


def ec_init(g, grade, phi, gamma, ids=None, force_single=False,
            exact_limit=EXACT_TERMINAL_LIMIT) -> OneLevelECDS:
    return _run(ec_init_steps(g, grade, phi, gamma, ids, force_single, exact_limit))


@dataclass
class ECUpdateResult:
    seq: list                       # ops turning the old sparsifier into the new one
    S: set                          # vertices whose terminal status changed
    removed: dict                   # cid -> ClusterData of clusters that went away
    added: list                     # ids of the clusters that replaced them
    moved: set = field(default_factory=set)     # vertices whose cluster changed


def _regroup(g, R, phi, hint=None, near=(), loc=None):
    """Certify R as a phi-expander, or decompose it locally. loc, when
    given, is the array view of g[R]."""
    cert = _certify_local(_Local(g, R) if loc is None else loc, phi, hint, near)
    if cert is not None:
        return [(frozenset(R), cert)]
    pieces = _run(decompose_steps(g, phi, R))
    return sorted(pieces, key=lambda t: min(t[0]))


def ec_update(ds: OneLevelECDS, seq, grade=None, phi=None) -> ECUpdateResult:
    """Apply seq to ds.g and repair (P, CC, F, sparsifier) locally.

    An update inside a cluster splits one endpoint off as a singleton
    (deleted vertices leave too); the rest of the cluster is re-certified
    at `phi` and decomposed locally if that fails. Clusters whose vertex
    set or terminal set changed get fresh containment sets at `grade`; all
    other clusters are kept verbatim.
    """
    if grade is None:
        grade = ds.grade
    if phi is None:
        phi = ds.phi
    if not (grade == ds.grade and ds.open_batch) and grade * (grade + 2) > ds.grade:
        raise ParameterViolation(
            f"a grade-{ds.grade} structure cannot take a batch at grade {grade}")
    if ds.forced:
        raise RebuildRequired("a forced single-cluster level is rebuilt, not updated")
    ds.grade, ds.phi, ds.open_batch = grade, phi, True
    if not seq:
        return ECUpdateResult([], set(), {}, [])
    g, part = ds.g, ds.part
    cof = part.cluster_of
    X: dict[int, set] = {}
    touched: set = set()
    born: set = set()
    dead: set = set()
    for op in seq:
        apply_update(g, op)
        k = op.kind
        if k == "ie" or k == "de":
            u, w = op.u, op.v
            touched.add(u)
            touched.add(w)
            cu = cof.get(u)
            if cu is not None and cu == cof.get(w) and u not in born and w not in born:
                xs = X.setdefault(cu, set())
                if u not in xs and w not in xs:
                    xs.add(min(u, w))
        elif k == "iv":
            born.add(op.u)
            touched.add(op.u)
        else:
            v = op.u
            touched.add(v)
            if v in born:
                born.discard(v)
            else:
                dead.add(v)
                X.setdefault(cof[v], set()).add(v)
    removed: dict[int, ClusterData] = {}
    pending = []                    # (vertices, forest seed, cert)
    moved = set(born)
    for cid in sorted(X):
        d = ds.cd.pop(cid)
        part.remove(cid)
        removed[cid] = d
        Xc = X[cid]
        moved |= Xc
        for v in sorted(Xc - dead):
            pending.append((frozenset([v]), (), None))
        R = d.vertices - Xc
        if R:
            hint = d.cert.vec if d.cert is not None else None
            near = {w for x in Xc if g.has_vertex(x) for w in g.neighbors(x)} | (touched & R)
            # g[P] only changed at edges touching Xc, so g[R] is the old view minus Xc
            old = getattr(d.cert, "local", None)
            pieces = _regroup(g, R, phi, hint, near, None if old is None else old.without(Xc))
            if len(pieces) > 1:
                moved |= R
            pending.extend((C, d.forest, cert) for C, cert in pieces)
    for v in sorted(born):
        if g.has_vertex(v):
            pending.append((frozenset([v]), (), None))
    new = [(part.add(P), seed, cert) for P, seed, cert in pending]
    # terminal status
    W = set(touched) | moved
    for v in moved:
        if g.has_vertex(v):
            W.update(g.neighbors(v))
    S = set()
    for v in W:
        was = ds.tcount.get(v, 0) > 0 and v not in born
        if g.has_vertex(v):
            k = ds._term_count(v)
            ds.tcount[v] = k
            if (k > 0) != was:
                S.add(v)
        else:
            ds.tcount.pop(v, None)
            if was:
                S.add(v)
    fresh = {cid for cid, _, _ in new}
    stale = set()
    for v in S:
        if g.has_vertex(v):
            cid = cof[v]
            if cid not in fresh:
                stale.add(cid)
    bases = {}
    for cid in sorted(stale):
        d = ds.cd.pop(cid)
        part.remove(cid)
        removed[cid] = d
        nid = part.add(d.vertices)
        new.append((nid, d.forest, d.cert))
        # same induced graph, so the terminal-free atoms still hold
        bases[nid] = d.base
    reuse = {}
    for d in removed.values():
        for pr, (x, _, o) in d.contrib.items():
            if o == GAMMA and x in d.paths:
                reuse[pr] = x
    added = []
    for cid, seed, cert in new:
        P = part.members[cid]
        T_P = frozenset(v for v in P if ds.tcount.get(v, 0) > 0)
        ds.cd[cid] = ds._make_cluster(P, T_P, seed, cert, reuse, bases.get(cid))
        added.append(cid)
    # intercluster edges sit at terminals, old or new, or at touched vertices
    region = set(touched)
    for d in removed.values():
        region |= d.terminals
    for cid in added:
        region |= ds.cd[cid].terminals
    ops = _diff(ds, removed, added, region)
    return ECUpdateResult(ops, S, removed, added, moved)


def _diff(ds, removed, added, region):
    """Update ds.H for the replaced clusters and the intercluster edges at
    `region`; return the ops applied, in the order edge deletions, vertex
    deletions, vertex insertions, edge insertions."""
    g, H, cof, hown = ds.g, ds.H, ds.part.cluster_of, ds.hown
    old: dict = {}
    old_v = set()
    for d in removed.values():
        old.update(d.contrib)
        old_v |= d.piece
    for v in region:
        if v in H:
            for w, x in H.nbrs(v).items():
                if hown[x] == INTER:
                    a, b = (v, w) if v < w else (w, v)
                    e = H.edge_by_id(x)
                    old[(a, b)] = (x, e.mult, e.origin)
    new: dict = {}
    new_own: dict = {}
    new_v = set()
    for cid in added:
        d = ds.cd[cid]
        new.update(d.contrib)
        for t in d.contrib.values():
            new_own[t[0]] = cid
        new_v |= d.piece
    for v in region:
        if g.has_vertex(v):
            cv = cof[v]
            for w, eid in g.nbrs(v).items():
                if cof[w] != cv:
                    e = g.edge_by_id(eid)
                    new[_pair(e)] = (eid, e.mult, _copied_origin(e))
                    new_own[eid] = INTER
    ops = []
    for pr in sorted(old):
        t = old[pr]
        if new.get(pr) != t:
            ops.append(del_edge(*pr))
            del hown[t[0]]
    for v in sorted(old_v - new_v):
        ops.append(del_vertex(v))
    for v in sorted(new_v - old_v):
        ops.append(ins_vertex(v))
    for pr in sorted(new):
        t = new[pr]
        if old.get(pr) != t:
            ops.append(ins_edge(pr[0], pr[1], t[1], t[0], t[2]))
    for op in ops:
        apply_update(H, op)
    for x, own in new_own.items():
        hown[x] = own
    return ops
