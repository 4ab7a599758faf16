"""Auxiliary graph with special terminals, the local-cut enumerator and
the queue of candidate local cuts.

Every cluster P gets a special terminal t_P (a negative vertex id) joined
by unit edges to the terminals of P. A local cut of P is a connected
U inside P_* = P + t_P with small volume and boundary, all terminals of
P_* on one side and a real vertex on each side.

Enumeration runs on a quotient of G_*[P_*]: t_P and all terminals form
one node, and vertices that no cut of size <= c can separate (heavy edges,
or capped flow above c) are merged. Every local cut is a union of these
nodes, so the search space shrinks without losing any answer.
"""
from __future__ import annotations

import heapq
import json

import numpy as np

from .flow import build_quotient, refine
from .graph import BASE, Multigraph


def special_id(cid: int) -> int:
    return -1 - cid


class AuxGraph:
    """G_* as a view: the base graph by reference plus the special
    terminals and their edges."""

    def __init__(self, g, part):
        self.g = g
        self.part = part
        self.terms: dict[int, frozenset] = {}      # cid -> terminals of P

    def tp(self, cid) -> int:
        return special_id(cid)

    def cluster_of(self, v):
        if v < 0:
            cid = -1 - v
            return cid if cid in self.terms else None
        return self.part.cluster_of.get(v)

    def members(self, cid) -> frozenset:
        """P_* as a vertex set."""
        return self.part.members[cid] | {special_id(cid)}

    def view(self, cid) -> Multigraph:
        """G_*[P_*] as a standalone multigraph."""
        P = self.part.members[cid]
        g = self.g
        h = Multigraph(sorted(P))
        for v in P:
            for w, eid in g.nbrs(v).items():
                if v < w and w in P:
                    e = g.edge_by_id(eid)
                    h.add_edge(v, w, e.mult, eid, e.origin)
        t = special_id(cid)
        h.add_vertex(t)
        for v in sorted(self.terms[cid]):
            h.add_edge(t, v, 1)
        return h

    @property
    def graph(self) -> Multigraph:
        """The whole auxiliary graph, materialized."""
        h = self.g.copy()
        for cid in sorted(self.terms):
            t = special_id(cid)
            h.add_vertex(t)
            for v in sorted(self.terms[cid]):
                h.add_edge(t, v, 1, origin=BASE)
        return h


def _terminals(g, part, cid):
    cof = part.cluster_of
    return frozenset(v for v in part.members[cid] if any(cof[w] != cid for w in g.neighbors(v)))


def build_aux(g, part, terminals=None) -> AuxGraph:
    """terminals: optional cid -> terminal set (computed when omitted)."""
    aux = AuxGraph(g, part)
    for cid in part.members:
        aux.terms[cid] = frozenset(terminals[cid]) if terminals is not None else _terminals(g, part, cid)
    return aux


def update_aux(aux: AuxGraph, g2, part2, touched_clusters, terminals=None) -> AuxGraph:
    """Refresh the special terminals of the touched clusters (old ids that
    are gone are dropped, new ones are added)."""
    aux.g = g2
    aux.part = part2
    for cid in touched_clusters:
        if cid in part2.members:
            aux.terms[cid] = (frozenset(terminals[cid]) if terminals is not None
                              else _terminals(g2, part2, cid))
        else:
            aux.terms.pop(cid, None)
    return aux


# ------------------------------------------------------------ enumeration

class ClusterQuotient:
    """Quotient of G_*[P_*] for threshold c, with node volumes measured in
    G_*[P_*]. `group` is the node holding t_P and all terminals."""

    __slots__ = ("q", "vol", "group", "tp", "real")

    def __init__(self, aux: AuxGraph, cid: int, c: int, base=None, loc=None):
        """base: optional quotient of G[P] at a threshold >= c; its atoms
        are atoms at c as well, so the work starts from a copy of it.
        loc: optional array view of G[P], used for the volumes."""
        P = aux.part.members[cid]
        T = aux.terms[cid]
        g = aux.g
        if base is None:
            q = build_quotient(g, P, c, flow_tests=False, extra_unions=[sorted(T)] if len(T) > 1 else ())
        else:
            q = base.copy()
            reps = sorted({q.rep[t] for t in T})
            for r in reps[1:]:
                q.merge(q.rep[reps[0]], q.rep[r])
        tp = special_id(cid)
        if T:
            grp = q.rep[min(T)]
            q.rep[tp] = grp
            q.members[grp].append(tp)
        else:
            grp = tp
            q.rep[tp] = tp
            q.members[tp] = [tp]
            q.adj[tp] = {}
        refine(q, c)
        grp = q.rep[tp]
        vol = {a: 0 for a in q.members}
        if loc is not None and loc.n == len(P):
            lab = np.fromiter(map(q.rep.__getitem__, loc.verts), np.int64, loc.n)
            ua, inv = np.unique(lab, return_inverse=True)
            for a, d in zip(ua.tolist(), np.bincount(inv, weights=loc.deg).astype(np.int64).tolist()):
                vol[a] += d
        else:
            for v in P:
                d = 0
                for w, m in g.wnbrs(v).items():
                    if w in P:
                        d += m
                vol[q.rep[v]] += d
        # unit edges between t_P and each terminal, counted at both ends
        vol[grp] += 2 * len(T)
        self.q = q
        self.vol = vol
        self.group = grp
        self.tp = tp
        self.real = {a: any(x >= 0 for x in mem) for a, mem in q.members.items()}


def _edge(a, b):
    return (a, b) if a < b else (b, a)


def _enumerate_nodes(cq: ClusterQuotient, s, alpha3: int, c: int, skip=frozenset()):
    """All node sets U with s in U, connected, vol <= alpha3, boundary <= c
    and a real vertex on each side. Nodes in `skip` never enter U.

    Recursion per cut enumeration: a DFS from s in the quotient minus F
    stopping once the visited volume exceeds alpha3; a completed DFS is a
    candidate; then every DFS tree edge that fits in the remaining budget
    is removed in turn.
    """
    adj = cq.q.adj
    vol = cq.vol
    real = cq.real
    total_real = sum(1 for a in adj if real[a])
    out = set()
    seen = set()
    if vol[s] > alpha3 or s in skip:
        return out

    def rec(F, budget):
        reach = {s}
        tot = vol[s]
        stack = [s]
        tree = []
        stopped = False
        while stack and not stopped:
            x = stack.pop()
            for y, w in adj[x].items():
                if y in reach:
                    continue
                if F and _edge(x, y) in F:
                    continue
                if y in skip:
                    continue
                reach.add(y)
                tree.append((x, y, w))
                tot += vol[y]
                if tot > alpha3:
                    stopped = True
                    break
                stack.append(y)
        if not stopped:
            for a, b in F:
                if a not in reach and b not in reach:
                    return
            cut = 0
            for a in reach:
                for b, w in adj[a].items():
                    if b not in reach:
                        cut += w
            if cut <= c and any(real[a] for a in reach):
                if sum(1 for a in reach if real[a]) < total_real:
                    out.add(frozenset(reach))
        for x, y, w in tree:
            if w <= budget:
                F2 = F | {_edge(x, y)}
                if F2 not in seen:
                    seen.add(F2)
                    rec(F2, budget - w)

    seen.add(frozenset())
    rec(frozenset(), c)
    return out


def _expand(cq: ClusterQuotient, nodes) -> frozenset:
    mem = cq.q.members
    return frozenset(x for a in nodes for x in mem[a])


def enumerate_cuts(aux: AuxGraph, v, alpha: int, c: int, cq: ClusterQuotient | None = None) -> list:
    """Every U with v in U inside one P_*, G_*[U] connected, and (U, P_* - U)
    a (3 alpha, c)-local cut of G_*[P_*] with a real vertex on each side.
    Sets are returned as sorted vertex tuples, in sorted order."""
    cid = aux.cluster_of(v)
    if cid is None:
        return []
    if cq is None:
        cq = ClusterQuotient(aux, cid, c)
    s = cq.q.rep[v]
    found = _enumerate_nodes(cq, s, 3 * alpha, c)
    return sorted(tuple(sorted(_expand(cq, U))) for U in found)


def enumerate_cluster(aux: AuxGraph, cid, alpha: int, c: int, cq: ClusterQuotient | None = None) -> list:
    """All local cuts of one cluster as (cut_size, vertex frozenset)."""
    if cq is None:
        cq = ClusterQuotient(aux, cid, c)
    adj = cq.q.adj
    out = []
    done: set = set()
    for s in sorted(adj, key=lambda a: (a < 0, a)):
        for U in _enumerate_nodes(cq, s, 3 * alpha, c, skip=frozenset(done)):
            out.append((_node_cut(cq, U), _expand(cq, U)))
        done.add(s)
    return out


def _node_cut(cq, U):
    adj = cq.q.adj
    return sum(w for a in U for b, w in adj[a].items() if b not in U)


# ------------------------------------------------------------ the queue

class LocalCutQueue:
    """Min-queue of local cuts keyed by (cut_size, sorted real vertices,
    has special terminal). Entries are stored by their real vertex set plus
    a flag for t_P, so they survive cluster id changes."""

    def __init__(self):
        self.size: dict[tuple, int] = {}          # key -> cut size
        self.by_vertex: dict[int, set] = {}
        self.by_cluster: dict[int, set] = {}      # cid -> keys holding t_P
        self._heap: list = []

    @staticmethod
    def key_of(U) -> tuple:
        real = tuple(sorted(x for x in U if x >= 0))
        return (real, any(x < 0 for x in U))

    def __len__(self):
        return len(self.size)

    def __contains__(self, U):
        return self.key_of(U) in self.size

    def insert(self, U, cut_size, cid=None):
        key = self.key_of(U)
        if key in self.size:
            return
        self.size[key] = cut_size
        for x in key[0]:
            self.by_vertex.setdefault(x, set()).add(key)
        if key[1]:
            self.by_cluster.setdefault(cid, set()).add(key)
        heapq.heappush(self._heap, (cut_size, key[0], key[1]))

    def _drop(self, key):
        if self.size.pop(key, None) is None:
            return
        for x in key[0]:
            s = self.by_vertex.get(x)
            if s is not None:
                s.discard(key)
                if not s:
                    del self.by_vertex[x]

    def remove_vertex(self, v):
        for key in list(self.by_vertex.get(v, ())):
            self._drop(key)

    def remove_cluster_special(self, cid):
        """Drop every entry that holds t_P of cluster cid."""
        for key in self.by_cluster.pop(cid, ()):
            self._drop(key)

    def min(self):
        """(cut_size, real vertex tuple, has_tp) or None."""
        h = self._heap
        while h:
            sz, real, tp = h[0]
            if self.size.get((real, tp)) == sz:
                return h[0]
            heapq.heappop(h)
        return None

    def entries(self) -> set:
        return {(sz, real, tp) for (real, tp), sz in self.size.items()}

    def compact(self):
        self._heap = [(sz, r, t) for (r, t), sz in self.size.items()]
        heapq.heapify(self._heap)
        for cid in list(self.by_cluster):
            self.by_cluster[cid] = {k for k in self.by_cluster[cid] if k in self.size}

    def dump(self, cluster_of) -> str:
        """JSON lines {cluster, cut_size, U} in priority order; U lists the
        special terminal id when the entry holds it."""
        lines = []
        for sz, real, tp in sorted(self.entries()):
            cid = cluster_of(real[0]) if real else None
            U = list(real) + ([special_id(cid)] if tp and cid is not None else [])
            lines.append(json.dumps({"cluster": cid, "cut_size": sz, "U": sorted(U)}))
        return "\n".join(lines) + ("\n" if lines else "")


def queue_insert(q: LocalCutQueue, U, cut_size, cid=None):
    q.insert(U, cut_size, cid)


def queue_remove_vertex(q: LocalCutQueue, v):
    q.remove_vertex(v)


def queue_min(q: LocalCutQueue):
    return q.min()
