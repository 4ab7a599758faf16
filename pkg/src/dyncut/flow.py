"""Small-cut helpers shared by the containment builder and the local-cut
enumerator: capped max-flow on dict graphs and the "atom" refinement.

An atom is a vertex group that no cut of size <= k can split. Atoms are
grown by union-find over edges of multiplicity > k and over pairs whose
capped max-flow exceeds k, so every union is justified by a proof.
"""
from __future__ import annotations

import heapq
from collections import deque

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse.csgraph import connected_components

FAST_Q = 400        # quotients with more atoms refine through the array kernel


class UnionFind:
    __slots__ = ("p",)

    def __init__(self, items=()):
        self.p = {x: x for x in items}

    def add(self, x):
        if x not in self.p:
            self.p[x] = x

    def find(self, x):
        p = self.p
        r = x
        while p[r] != r:
            r = p[r]
        while p[x] != r:
            p[x], x = r, p[x]
        return r

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # smaller id becomes the root, which keeps results reproducible
        if rb < ra:
            ra, rb = rb, ra
        self.p[rb] = ra
        return True


def capped_flow(adj, sources, sinks, cap):
    """Max-flow value between node sets, stopped once it reaches `cap`.

    adj maps node -> {nbr: capacity} (symmetric). Returns (value, side) where
    side is the set reached from the sources in the final residual graph; it
    is the minimal minimum cut side whenever value < cap.
    """
    sources = set(sources)
    sinks = set(sinks)
    flow: dict = {}
    value = 0
    while value < cap:
        par = {s: None for s in sources}
        dq = deque(sources)
        hit = None
        while dq and hit is None:
            x = dq.popleft()
            fx = flow.get(x)
            for y, c in adj[x].items():
                if y in par:
                    continue
                r = c - (fx.get(y, 0) if fx else 0)
                if r > 0:
                    par[y] = x
                    if y in sinks:
                        hit = y
                        break
                    dq.append(y)
        if hit is None:
            return value, set(par)
        path = []
        y = hit
        while par[y] is not None:
            x = par[y]
            path.append((x, y))
            y = x
        push = cap - value
        for x, y in path:
            r = adj[x][y] - flow.get(x, {}).get(y, 0)
            if r < push:
                push = r
        for x, y in path:
            flow.setdefault(x, {})
            flow.setdefault(y, {})
            flow[x][y] = flow[x].get(y, 0) + push
            flow[y][x] = flow[y].get(x, 0) - push
        value += push
    return value, None


def induced_adj(g, S):
    """{v: {w: mult}} restricted to S."""
    out = {}
    for v in S:
        out[v] = {w: m for w, m in g.wnbrs(v).items() if w in S}
    return out


class Quotient:
    """Graph on atoms. `rep` maps vertex -> atom representative, `members`
    atom -> list of vertices, `adj` atom -> {atom: summed multiplicity}."""

    __slots__ = ("rep", "members", "adj")

    def __init__(self, rep, members, adj):
        self.rep = rep
        self.members = members
        self.adj = adj

    def copy(self) -> "Quotient":
        return Quotient(dict(self.rep), {a: list(m) for a, m in self.members.items()},
                        {a: dict(nb) for a, nb in self.adj.items()})

    def merge(self, a, b):
        """Merge atom b into atom a (both representatives)."""
        if a == b:
            return a
        adj = self.adj
        for x, w in adj.pop(b).items():
            if x == a:
                del adj[a][b]
                continue
            del adj[x][b]
            adj[a][x] = adj[a].get(x, 0) + w
            adj[x][a] = adj[x].get(a, 0) + w
        mb = self.members.pop(b)
        for v in mb:
            self.rep[v] = a
        self.members[a].extend(mb)
        return a


def _heavy_quotient(loc, k):
    """Heavy-edge components of an array view (verts sorted, CSR off/nb/wt)
    as a Quotient, each labelled by its smallest vertex."""
    n = loc.n
    heavy = loc.wt > k
    rows = np.repeat(np.arange(n), np.diff(loc.off))
    hm = sp.csr_matrix((np.ones(int(heavy.sum())), (rows[heavy], loc.nb[heavy])), shape=(n, n))
    ncomp, lab = connected_components(hm, directed=False)
    first = np.full(ncomp, n)
    np.minimum.at(first, lab, np.arange(n))
    verts = loc.verts
    va = np.asarray(verts)
    lab_rep = va[first]
    rep = dict(zip(verts, lab_rep[lab].tolist()))
    order = np.argsort(lab, kind="stable")
    bounds = np.searchsorted(lab[order], np.arange(ncomp + 1))
    members = {}
    for c in np.argsort(first).tolist():
        members[int(lab_rep[c])] = va[order[bounds[c]:bounds[c + 1]]].tolist()
    adj = {a: {} for a in members}
    a, b = lab[rows], lab[loc.nb]
    x = a != b
    if x.any():
        key = a[x].astype(np.int64) * ncomp + b[x]
        uk, inv = np.unique(key, return_inverse=True)
        tot = np.bincount(inv, weights=loc.wt[x]).astype(np.int64)
        ra = lab_rep[uk // ncomp].tolist()
        rb = lab_rep[uk % ncomp].tolist()
        for p, q, m in zip(ra, rb, tot.tolist()):
            adj[p][q] = m
    return Quotient(rep, members, adj)


def build_quotient(g, S, k, flow_tests=True, extra_unions=(), loc=None):
    """Atoms of g[S] for threshold k, returned as a Quotient.

    extra_unions lists vertex groups already known to be atomic. loc is an
    optional array view of g[S]; the heavy-edge step then runs on arrays.
    """
    if loc is not None and not extra_unions:
        q = _heavy_quotient(loc, k)
        if flow_tests:
            refine(q, k)
        return q
    S = S if isinstance(S, (set, frozenset)) else set(S)
    W = g.wnbrs
    # components over heavy edges, each labelled by its smallest vertex
    rep: dict = {}
    for s0 in sorted(S):
        if s0 in rep:
            continue
        rep[s0] = s0
        stack = [s0]
        while stack:
            x = stack.pop()
            for y, m in W(x).items():
                if m > k and y not in rep and y in S:
                    rep[y] = s0
                    stack.append(y)
    if extra_unions:
        uf = UnionFind(set(rep.values()))
        for grp in extra_unions:
            grp = [rep[x] for x in grp if x in S]
            for x in grp[1:]:
                uf.union(grp[0], x)
        rep = {v: uf.find(r) for v, r in rep.items()}
    members: dict = {}
    for v in sorted(S):
        members.setdefault(rep[v], []).append(v)
    adj = {a: {} for a in members}
    for v in S:
        a = rep[v]
        adj_a = adj[a]
        for w, m in W(v).items():
            if v < w:
                b = rep.get(w)
                if b is not None and a != b:
                    adj_a[b] = adj_a.get(b, 0) + m
                    adj[b][a] = adj[b].get(a, 0) + m
    q = Quotient(rep, members, adj)
    if flow_tests:
        refine(q, k)
    return q


def ma_labels(adj):
    """Scan adj in maximum-adjacency order and label every edge with the
    attachment of its later endpoint right after the edge is counted. The
    endpoints of an edge labelled q are at least q-connected."""
    r = {}
    done = set()
    out = []
    for root in sorted(adj):
        if root in done:
            continue
        heap = [(0, root)]
        r[root] = 0
        while heap:
            _, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            for y, w in adj[x].items():
                if y in done:
                    continue
                ry = r.get(y, 0) + w
                r[y] = ry
                out.append((x, y, ry))
                heapq.heappush(heap, (-ry, y))
    return out


def contract_certain(q: Quotient, k: int):
    """Merge the endpoints of every edge whose maximum-adjacency label
    exceeds k, repeating until a pass merges nothing."""
    while len(q.adj) > 1:
        sure = [(x, y) for x, y, lab in ma_labels(q.adj) if lab > k]
        if not sure:
            break
        rep = q.rep
        for x, y in sure:
            # labels refer to representatives of this pass; follow merges
            a, b = rep[x], rep[y]
            if a != b:
                keep, gone = (a, b) if a < b else (b, a)
                q.merge(keep, gone)
    return q


@njit(cache=True)
def _root(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _pair_flow_kernel(n, off, nb, cap, twin, pa, pb, k):
    """For every pair (pa[i], pb[i]), in order, decide whether the capped
    max-flow exceeds k, skipping pairs already joined by earlier successes.
    Returns the success mask."""
    flow = np.zeros(len(nb), np.int64)
    touched = np.empty(2 * (k + 1) * n + 2, np.int64)
    stamp = np.zeros(n, np.int64)
    par = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    parent = np.arange(n)
    wdeg = np.zeros(n, np.int64)
    for x in range(n):
        for p in range(off[x], off[x + 1]):
            wdeg[x] += cap[p]
    ok = np.zeros(len(pa), np.bool_)
    tick = 0
    for i in range(len(pa)):
        s, t = pa[i], pb[i]
        if _root(parent, s) == _root(parent, t) or wdeg[s] <= k or wdeg[t] <= k:
            continue
        nt = 0
        value = 0
        while value <= k:
            tick += 1
            stamp[s] = tick
            par[s] = -1
            head, tail = 0, 1
            queue[0] = s
            hit = False
            while head < tail and not hit:
                x = queue[head]
                head += 1
                for p in range(off[x], off[x + 1]):
                    y = nb[p]
                    if stamp[y] == tick or cap[p] - flow[p] <= 0:
                        continue
                    stamp[y] = tick
                    par[y] = p
                    if y == t:
                        hit = True
                        break
                    queue[tail] = y
                    tail += 1
            if not hit:
                break
            push = k + 1 - value
            y = t
            while y != s:
                p = par[y]
                r = cap[p] - flow[p]
                if r < push:
                    push = r
                y = nb[twin[p]]
            y = t
            while y != s:
                p = par[y]
                flow[p] += push
                flow[twin[p]] -= push
                touched[nt] = p
                touched[nt + 1] = twin[p]
                nt += 2
                y = nb[twin[p]]
            value += push
        for j in range(nt):
            flow[touched[j]] = 0
        if value > k:
            ok[i] = True
            a, b = _root(parent, s), _root(parent, t)
            parent[max(a, b)] = min(a, b)
    return ok


def _refine_arrays(q: Quotient, k: int):
    """refine on a CSR snapshot. Contracting a pair joined by more than k
    edge-disjoint paths changes no cut of size <= k, so testing the pairs
    adjacent now, on the graph as it is now, merges the same atoms."""
    adj = q.adj
    nodes = sorted(adj)
    idx = {a: i for i, a in enumerate(nodes)}
    n = len(nodes)
    off = np.zeros(n + 1, np.int64)
    nbl, capl = [], []
    for i, a in enumerate(nodes):
        row = sorted((idx[b], m) for b, m in adj[a].items())
        off[i + 1] = off[i] + len(row)
        nbl.extend(j for j, _ in row)
        capl.extend(m for _, m in row)
    nb = np.asarray(nbl, np.int64)
    cap = np.asarray(capl, np.int64)
    rows = np.repeat(np.arange(n), np.diff(off))
    # entry of (j, i) for entry (i, j): rows sorted by (row, col) on both sides
    key = rows * n + nb
    twin = np.searchsorted(key, nb * n + rows)
    m = rows < nb
    ok = _pair_flow_kernel(n, off, nb, cap, twin, rows[m], nb[m], k)
    for i, j in zip(rows[m][ok].tolist(), nb[m][ok].tolist()):
        ra, rb = q.rep[nodes[i]], q.rep[nodes[j]]
        if ra != rb:
            q.merge(min(ra, rb), max(ra, rb))
    return q


def refine(q: Quotient, k: int, candidates=None):
    """Merge adjacent atoms whose capped max-flow exceeds k. Each pair is
    tested once, in the current (already merged) quotient."""
    contract_certain(q, k)
    if candidates is None and len(q.adj) > FAST_Q:
        return _refine_arrays(q, k)
    adj = q.adj
    wdeg = {a: sum(nb.values()) for a, nb in adj.items()}
    pairs = candidates
    if pairs is None:
        pairs = sorted((a, b) for a in adj for b in adj[a] if a < b)
    for a, b in pairs:
        ra = q.rep[a]
        rb = q.rep[b]
        if ra == rb or rb not in adj[ra]:
            continue
        if wdeg[ra] <= k or wdeg[rb] <= k:
            continue
        val, _ = capped_flow(adj, (ra,), (rb,), k + 1)
        if val > k:
            w_ab = adj[ra][rb]
            keep, gone = (ra, rb) if ra < rb else (rb, ra)
            dk, dg = wdeg.pop(keep), wdeg.pop(gone)
            q.merge(keep, gone)
            wdeg[keep] = dk + dg - 2 * w_ab
    return q

