"""Ground-truth oracles.

Nothing here imports the engine modules: the adjacency walks, flows and
cut searches below are written separately so that agreement with the
engine means something.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import TooLarge

INF = math.inf
EXHAUSTIVE_MAX_N = 20
LOCAL_CUT_MAX_VOL = 40


@dataclass
class OracleResult:
    min_cut_size: float
    witness: list = field(default_factory=list)   # [(u, v, mult)]
    side: frozenset = frozenset()
    method: str = "exhaustive"


def _arrays(g):
    verts = sorted(g.vertices())
    idx = {v: i for i, v in enumerate(verts)}
    eu, ev, ew = [], [], []
    for e in g.edges():
        eu.append(idx[e.u])
        ev.append(idx[e.v])
        ew.append(e.mult)
    return (verts, idx, np.asarray(eu, np.int64), np.asarray(ev, np.int64),
            np.asarray(ew, np.int64))


@njit(cache=True)
def _csr(n, eu, ev, ew):
    deg = np.zeros(n + 1, np.int64)
    for i in range(eu.shape[0]):
        deg[eu[i] + 1] += 1
        deg[ev[i] + 1] += 1
    for i in range(n):
        deg[i + 1] += deg[i]
    nb = np.empty(2 * eu.shape[0], np.int64)
    wt = np.empty(2 * eu.shape[0], np.int64)
    pos = deg[:n].copy()
    for i in range(eu.shape[0]):
        a, b = eu[i], ev[i]
        nb[pos[a]] = b
        wt[pos[a]] = ew[i]
        pos[a] += 1
        nb[pos[b]] = a
        wt[pos[b]] = ew[i]
        pos[b] += 1
    return deg, nb, wt


@njit(cache=True)
def _gray_min_cut(n, eu, ev, ew):
    # vertex 0 stays on side 0; Gray code walks all sides of the others
    off, nb, wt = _csr(n, eu, ev, ew)
    # sign[x] = +1 / -1 for the two sides; flipping v changes the cut by
    # sign[v] * sum of w * sign[nbr]
    sign = np.ones(n, np.int64)
    cut = 0
    best = -1
    best_code = 0
    total = 1 << (n - 1)
    for k in range(1, total):
        b = 0
        while not (k >> b) & 1:
            b += 1
        v = b + 1
        acc = 0
        for p in range(off[v], off[v + 1]):
            acc += wt[p] * sign[nb[p]]
        cut += sign[v] * acc
        sign[v] = -sign[v]
        if best < 0 or cut < best:
            best = cut
            best_code = k ^ (k >> 1)
    return best, best_code


@njit(cache=True)
def _sw_min_cut(n, eu, ev, ew):
    """Stoer-Wagner with a lazy binary heap and contracted edge lists."""
    m2 = 2 * eu.shape[0]
    to = np.empty(m2, np.int64)
    w = np.empty(m2, np.int64)
    nxt = np.full(m2, -1, np.int64)
    head = np.full(n, -1, np.int64)
    tail = np.full(n, -1, np.int64)
    for i in range(eu.shape[0]):
        for s in range(2):
            slot = 2 * i + s
            a = eu[i] if s == 0 else ev[i]
            b = ev[i] if s == 0 else eu[i]
            to[slot] = b
            w[slot] = ew[i]
            if head[a] < 0:
                head[a] = slot
            else:
                nxt[tail[a]] = slot
            tail[a] = slot
    rep = np.arange(n)
    mem_next = np.full(n, -1, np.int64)
    mem_tail = np.arange(n)
    alive = np.ones(n, np.bool_)
    key = np.zeros(n, np.int64)
    in_a = np.zeros(n, np.bool_)
    hk = np.empty(m2 + n + 1, np.int64)
    hv = np.empty(m2 + n + 1, np.int64)
    best = -1
    best_side = np.zeros(n, np.bool_)
    n_alive = n

    def find(x):
        r = x
        while rep[r] != r:
            r = rep[r]
        while rep[x] != r:
            y = rep[x]
            rep[x] = r
            x = y
        return r

    while n_alive > 1:
        start = -1
        for v in range(n):
            if alive[v]:
                key[v] = 0
                in_a[v] = False
                if start < 0:
                    start = v
        hs = 0
        hk[0] = 0
        hv[0] = start
        hs = 1
        prev = -1
        last = -1
        added = 0
        cut_of_phase = 0
        while added < n_alive:
            # pop max
            if hs == 0:
                # disconnected remainder: pick any alive vertex not in A
                x = -1
                for v in range(n):
                    if alive[v] and not in_a[v]:
                        x = v
                        break
                kx = 0
            else:
                kx = hk[0]
                x = hv[0]
                hs -= 1
                if hs > 0:
                    hk[0] = hk[hs]
                    hv[0] = hv[hs]
                    i = 0
                    while True:
                        l = 2 * i + 1
                        if l >= hs:
                            break
                        r = l + 1
                        c = l
                        if r < hs and hk[r] > hk[l]:
                            c = r
                        if hk[c] > hk[i]:
                            hk[i], hk[c] = hk[c], hk[i]
                            hv[i], hv[c] = hv[c], hv[i]
                            i = c
                        else:
                            break
                if in_a[x] or kx != key[x]:
                    continue
            in_a[x] = True
            added += 1
            prev = last
            last = x
            cut_of_phase = key[x]
            # scan, dropping slots that became internal
            p = head[x]
            pp = -1
            while p >= 0:
                y = find(to[p])
                q = nxt[p]
                if y == x:
                    if pp < 0:
                        head[x] = q
                    else:
                        nxt[pp] = q
                    if tail[x] == p:
                        tail[x] = pp
                    p = q
                    continue
                to[p] = y
                if not in_a[y]:
                    key[y] += w[p]
                    j = hs
                    hk[j] = key[y]
                    hv[j] = y
                    hs += 1
                    while j > 0:
                        par = (j - 1) // 2
                        if hk[par] < hk[j]:
                            hk[par], hk[j] = hk[j], hk[par]
                            hv[par], hv[j] = hv[j], hv[par]
                            j = par
                        else:
                            break
                pp = p
                p = q
        if best < 0 or cut_of_phase < best:
            best = cut_of_phase
            best_side[:] = False
            z = last
            while z >= 0:
                best_side[z] = True
                z = mem_next[z]
        # merge last into prev
        s, t = prev, last
        rep[t] = s
        alive[t] = False
        n_alive -= 1
        if head[t] >= 0:
            if head[s] < 0:
                head[s] = head[t]
            else:
                nxt[tail[s]] = head[t]
            tail[s] = tail[t]
        mem_next[mem_tail[s]] = t
        mem_tail[s] = mem_tail[t]
    return best, best_side


def _components(g):
    seen = {}
    k = 0
    for s in sorted(g.vertices()):
        if s in seen:
            continue
        seen[s] = k
        dq = deque([s])
        while dq:
            x = dq.popleft()
            for y in g.nbrs(x):
                if y not in seen:
                    seen[y] = k
                    dq.append(y)
        k += 1
    return k, seen


def _witness(g, side):
    out = []
    for e in g.edges():
        if (e.u in side) != (e.v in side):
            out.append((min(e.u, e.v), max(e.u, e.v), e.mult))
    return sorted(out)


def brute_min_cut(g, method: str | None = None) -> OracleResult:
    """Global min cut of a multigraph. Exhaustive for n <= 20 unless
    method='stoer-wagner' is forced. A graph with < 2 vertices has no cut
    (size infinity); a disconnected one has a 0-cut."""
    n = g.n
    if n < 2:
        return OracleResult(INF, [], frozenset(), "exhaustive")
    ncomp, lab = _components(g)
    if ncomp > 1:
        side = frozenset(v for v, k in lab.items() if k == lab[min(lab)])
        if len(side) * 2 > n:
            side = frozenset(g.vertices()) - side
        return OracleResult(0, [], side, "components")
    verts, idx, eu, ev, ew = _arrays(g)
    if method is None:
        method = "exhaustive" if n <= EXHAUSTIVE_MAX_N else "stoer-wagner"
    if method == "exhaustive":
        if n > EXHAUSTIVE_MAX_N + 4:
            raise TooLarge(f"exhaustive search refused for n={n}")
        best, code = _gray_min_cut(n, eu, ev, ew)
        side = frozenset(verts[i + 1] for i in range(n - 1) if (code >> i) & 1)
    else:
        best, mask = _sw_min_cut(n, eu, ev, ew)
        side = frozenset(verts[i] for i in range(n) if mask[i])
    if len(side) * 2 > n:
        side = frozenset(verts) - side
    res = OracleResult(int(best), _witness(g, side), side, method)
    assert sum(t[2] for t in res.witness) == res.min_cut_size
    return res


def stoer_wagner_size(g) -> int | float:
    """Size-only Stoer-Wagner run (used as the from-scratch baseline)."""
    if g.n < 2:
        return INF
    verts, idx, eu, ev, ew = _arrays(g)
    best, _ = _sw_min_cut(g.n, eu, ev, ew)
    return int(best)


def steiner_min_cut(g, A, B, cap: int) -> int:
    """min(cap, max-flow between vertex sets A and B), each edge capacity
    clipped to cap. Augmenting paths by BFS on an explicit residual map."""
    A, B = set(A), set(B)
    if not A or not B or A & B:
        raise ValueError("A and B must be disjoint and nonempty")
    src, snk = ("s",), ("t",)
    res: dict = {}

    def node(v):
        if v in A:
            return src
        if v in B:
            return snk
        return v

    for e in g.edges():
        a, b = node(e.u), node(e.v)
        if a == b:
            continue
        k = min(e.mult, cap)
        res.setdefault(a, {})
        res.setdefault(b, {})
        res[a][b] = res[a].get(b, 0) + k
        res[b][a] = res[b].get(a, 0) + k
    if src not in res or snk not in res:
        return 0
    flow = 0
    while flow < cap:
        par = {src: None}
        dq = deque([src])
        while dq and snk not in par:
            x = dq.popleft()
            for y, r in res[x].items():
                if r > 0 and y not in par:
                    par[y] = x
                    dq.append(y)
        if snk not in par:
            break
        path = []
        y = snk
        while par[y] is not None:
            path.append((par[y], y))
            y = par[y]
        push = min(min(res[x][y] for x, y in path), cap - flow)
        for x, y in path:
            res[x][y] -= push
            res[y][x] += push
        flow += push
    return flow


def steiner_min_cut_side(g, A, B) -> frozenset | None:
    """Vertex side (containing A) of a min A|B cut, via exhaustive search.
    For small graphs only."""
    rest = sorted(set(g.vertices()) - set(A) - set(B))
    if len(rest) > 18:
        raise TooLarge("too many free vertices for exhaustive side search")
    best, side = None, None
    for mask in range(1 << len(rest)):
        S = set(A) | {rest[i] for i in range(len(rest)) if (mask >> i) & 1}
        w = sum(e.mult for e in g.edges() if (e.u in S) != (e.v in S))
        if best is None or w < best:
            best, side = w, frozenset(S)
    return side


def brute_local_cuts(view, terminals, alpha: int, c: int, real=None) -> set[frozenset]:
    """Every connected U of the cluster view with vol(U) <= 3*alpha,
    |boundary(U)| <= c, all terminals on one side, and at least one real
    vertex on each side.

    `view` is the cluster-induced auxiliary multigraph, `terminals` its
    terminal set (the special terminal included) and `real` the vertices
    that are not special terminals (default: every non-terminal-id vertex
    >= 0).
    """
    vol_total = sum(view.degree(v) for v in view.vertices())
    if vol_total > 2 * LOCAL_CUT_MAX_VOL:
        raise TooLarge(f"cluster volume {vol_total // 2} exceeds {LOCAL_CUT_MAX_VOL}")
    verts = sorted(view.vertices())
    if real is None:
        real = {v for v in verts if v >= 0}
    real = set(real)
    T = set(terminals)
    adj = {v: {w: view.mult(v, w) for w in view.neighbors(v)} for v in verts}
    deg = {v: sum(adj[v].values()) for v in verts}
    out = set()
    allv = set(verts)

    def check(U):
        if sum(deg[x] for x in U) > 3 * alpha:
            return
        cut = sum(m for x in U for y, m in adj[x].items() if y not in U)
        if cut > c:
            return
        if T and not (T <= U or not (T & U)):
            return
        if not (U & real) or not ((allv - U) & real):
            return
        out.add(frozenset(U))

    # connected sets through binary include/exclude branching on the
    # current extension frontier; each set ends at exactly one leaf
    def rec(U, vol, ext, X):
        if vol > 3 * alpha:
            return
        if not ext:
            check(U)
            return
        x = min(ext)
        rest = ext - {x}
        U2 = U | {x}
        rec(U2, vol + deg[x], rest | {y for y in adj[x] if y not in U2 and y not in X}, X)
        rec(U, vol, rest, X | {x})

    for s in verts:
        X = {v for v in verts if v < s}
        rec({s}, deg[s], {y for y in adj[s] if y not in X}, X)
    return out


def brute_conductance(g) -> float | None:
    """Exact conductance by full bipartition enumeration (None for n < 2)."""
    verts = sorted(g.vertices())
    n = len(verts)
    if n < 2:
        return None
    if n > 22:
        raise TooLarge("conductance enumeration refused")
    idx = {v: i for i, v in enumerate(verts)}
    deg = np.array([g.degree(v) for v in verts], np.int64)
    ed = [(idx[e.u], idx[e.v], e.mult) for e in g.edges()]
    # bit i of mask puts vertex i on the S side; the last vertex stays out
    masks = np.arange(1, 1 << (n - 1), dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n - 1)) & 1
    vs = bits @ deg[:n - 1]
    vo = int(deg.sum()) - vs
    bits = np.concatenate([bits, np.zeros((len(masks), 1), np.int64)], axis=1)
    cut = np.zeros(len(masks), np.int64)
    for a, b, m in ed:
        cut += m * (bits[:, a] ^ bits[:, b])
    d = np.minimum(vs, vo)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(cut == 0, 0.0, np.where(d == 0, np.inf, cut / np.maximum(d, 1)))
    return float(r.min())


def disconnects(g, cutset) -> bool:
    """True iff removing the listed pairs leaves g with >= 2 components."""
    drop = {(min(t[0], t[1]), max(t[0], t[1])) for t in cutset}
    verts = list(g.vertices())
    if len(verts) < 2:
        return False
    s = verts[0]
    seen = {s}
    stack = [s]
    while stack:
        x = stack.pop()
        for y in g.nbrs(x):
            if y not in seen and (min(x, y), max(x, y)) not in drop:
                seen.add(y)
                stack.append(y)
    return len(seen) < len(verts)
