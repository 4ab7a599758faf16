"""Conductance, expander decomposition and expander pruning.

Certification works in two regimes. Clusters with at most EXHAUSTIVE_N
vertices get their exact conductance by a Gray-code walk over all
bipartitions. Larger clusters are certified through the second eigenvalue
of the normalized Laplacian (Cheeger: conductance >= lambda_2 / 2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components
from numba import njit

from .errors import InfeasibleParameters, TooManyDeletions

EXHAUSTIVE_N = 18
DENSE_EIG_N = 400
POWER_ITERS = 200
SPECTRAL_MARGIN = 1e-7
WARM_DEPTH = (6, 16)
LARGE_N = 400           # clusters above this keep their array view for reuse
WARM_RESID = 5e-3


class _Undefined:
    """Conductance of a single-vertex graph."""

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()


class Partition:
    """Disjoint cover of a vertex set by clusters with stable integer ids."""

    def __init__(self, clusters=()):
        self.members: dict[int, frozenset] = {}
        self.cluster_of: dict[int, int] = {}
        self._next = 0
        for c in clusters:
            self.add(c)

    def add(self, vertices) -> int:
        vs = frozenset(vertices)
        if not vs:
            raise ValueError("empty cluster")
        cid = self._next
        self._next += 1
        self.members[cid] = vs
        for v in vs:
            if v in self.cluster_of:
                raise ValueError(f"vertex {v} already clustered")
            self.cluster_of[v] = cid
        return cid

    def remove(self, cid) -> frozenset:
        vs = self.members.pop(cid)
        for v in vs:
            del self.cluster_of[v]
        return vs

    @property
    def clusters(self) -> list[frozenset]:
        return sorted(self.members.values(), key=min)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members.items())

    def copy(self) -> "Partition":
        p = Partition()
        p.members = dict(self.members)
        p.cluster_of = dict(self.cluster_of)
        p._next = self._next
        return p

    def serialize(self) -> str:
        return "".join(f"{i}: {' '.join(map(str, sorted(c)))}\n" for i, c in enumerate(self.clusters))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        p = cls()
        for ln in text.splitlines():
            if ln.strip():
                _, rest = ln.split(":", 1)
                p.add(int(x) for x in rest.split())
        return p


@dataclass
class ClusterCert:
    lower: float            # certified conductance lower bound (inf for singletons)
    method: str             # exhaustive | spectral | singleton
    # (sorted vertex ids, second eigenvector) of a spectral certificate; a warm
    # start when a subset of the cluster is certified again
    vec: tuple | None = field(default=None, repr=False, compare=False)
    # array view of g[cluster] at certification time (large clusters only)
    local: object = field(default=None, repr=False, compare=False)


@dataclass
class DecompositionCertificate:
    per_cluster: list = field(default_factory=list)   # [(sorted vertex tuple, ClusterCert)]
    intercluster: int = 0
    m: int = 0


@dataclass
class Violation:
    reason: str
    cluster: tuple | None = None
    witness: frozenset | None = None


@dataclass
class PruneResult:
    pruned: frozenset
    vol: int
    boundary: int
    remaining_lower: float
    method: str
    fallback: bool = False


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _exhaustive_ratio(n, off, nb, wt, deg):
    # vertex 0 pinned outside S; returns best (cut, den, code) by exact ratio
    total = 0
    for i in range(n):
        total += deg[i]
    side = np.zeros(n, np.int8)
    cut = 0
    vol = 0
    bc = -1
    bd = 1
    bcode = 0
    for k in range(1, 1 << (n - 1)):
        b = 0
        while not (k >> b) & 1:
            b += 1
        v = b + 1
        sv = side[v]
        for p in range(off[v], off[v + 1]):
            if side[nb[p]] == sv:
                cut += wt[p]
            else:
                cut -= wt[p]
        if sv == 0:
            vol += deg[v]
        else:
            vol -= deg[v]
        side[v] = 1 - sv
        d = vol if vol < total - vol else total - vol
        if d <= 0:
            continue
        if bc < 0 or cut * bd < bc * d:
            bc = cut
            bd = d
            bcode = k ^ (k >> 1)
    return bc, bd, bcode


class _Local:
    """Array view of g[S] with vertices in sorted order (CSR: off, nb, wt,
    and the edge id of every entry in eid)."""

    __slots__ = ("verts", "idx", "off", "nb", "wt", "eid", "deg", "n")

    def __init__(self, g, S):
        verts = sorted(S)
        idx = {v: i for i, v in enumerate(verts)}
        n = len(verts)
        off = np.zeros(n + 1, np.int64)
        nbl = []
        wtl = []
        eidl = []
        for i, v in enumerate(verts):
            cnt = 0
            ids = g.nbrs(v)
            for w, m in g.wnbrs(v).items():
                j = idx.get(w)
                if j is not None:
                    nbl.append(j)
                    wtl.append(m)
                    eidl.append(ids[w])
                    cnt += 1
            off[i + 1] = off[i] + cnt
        self.verts = verts
        self.idx = idx
        self.n = n
        self.off = off
        self.nb = np.asarray(nbl, np.int64)
        self.wt = np.asarray(wtl, np.int64)
        self.eid = np.asarray(eidl, np.int64)
        deg = np.zeros(n, np.int64)
        if n:
            np.add.at(deg, np.repeat(np.arange(n), np.diff(off)), self.wt)
        self.deg = deg

    @classmethod
    def _raw(cls, verts, off, nb, wt, eid):
        loc = cls.__new__(cls)
        loc.verts = verts
        loc.idx = {v: i for i, v in enumerate(verts)}
        loc.n = len(verts)
        loc.off = off
        loc.nb = nb
        loc.wt = wt
        loc.eid = eid
        loc.deg = np.bincount(np.repeat(np.arange(loc.n), np.diff(off)), weights=wt,
                              minlength=loc.n).astype(np.int64)
        return loc

    def without(self, drop) -> "_Local":
        """View of the induced subgraph on verts - drop."""
        keep = np.ones(self.n, bool)
        for v in drop:
            i = self.idx.get(v)
            if i is not None:
                keep[i] = False
        new = np.cumsum(keep) - 1
        rows = np.repeat(np.arange(self.n), np.diff(self.off))
        m = keep[rows] & keep[self.nb]
        cnt = np.bincount(new[rows[m]], minlength=int(keep.sum()))
        off = np.zeros(len(cnt) + 1, np.int64)
        np.cumsum(cnt, out=off[1:])
        verts = [v for v, k in zip(self.verts, keep.tolist()) if k]
        return _Local._raw(verts, off, new[self.nb[m]], self.wt[m], self.eid[m])

    def connected(self) -> bool:
        if self.n <= 1:
            return True
        return connected_components(self.matrix(), directed=False)[0] == 1

    def components(self) -> list[list[int]]:
        lab = -np.ones(self.n, np.int64)
        out = []
        off, nb = self.off, self.nb
        for s in range(self.n):
            if lab[s] >= 0:
                continue
            lab[s] = len(out)
            comp = [s]
            stack = [s]
            while stack:
                x = stack.pop()
                for p in range(off[x], off[x + 1]):
                    y = nb[p]
                    if lab[y] < 0:
                        lab[y] = len(out)
                        comp.append(y)
                        stack.append(y)
            out.append(comp)
        return out

    def matrix(self):
        return sp.csr_matrix((self.wt.astype(float), self.nb, self.off), shape=(self.n, self.n))

    def cut_ratio(self, mask: np.ndarray) -> tuple[int, int]:
        rows = np.repeat(np.arange(self.n), np.diff(self.off))
        cross = mask[rows] != mask[self.nb]
        cut = int(self.wt[cross].sum()) // 2
        vs = int(self.deg[mask].sum())
        return cut, min(vs, int(self.deg.sum()) - vs)


def _exact(loc: _Local):
    bc, bd, code = _exhaustive_ratio(loc.n, loc.off, loc.nb, loc.wt, loc.deg)
    mask = np.zeros(loc.n, bool)
    for i in range(loc.n - 1):
        if (code >> i) & 1:
            mask[i + 1] = True
    return Fraction(int(bc), int(bd)), mask


def _normalized(loc: _Local):
    A = loc.matrix()
    dinv = 1.0 / np.sqrt(loc.deg.astype(float))
    D = sp.diags(dinv)
    return (D @ A @ D).tocsr(), dinv


def _dense_normalized(loc: _Local):
    n = loc.n
    A = np.zeros((n, n))
    A[np.repeat(np.arange(n), np.diff(loc.off)), loc.nb] = loc.wt
    dinv = 1.0 / np.sqrt(loc.deg.astype(float))
    return A * dinv[:, None] * dinv[None, :]


def _residual_bound(N, x, top):
    x = x - top * (top @ x)
    x /= np.linalg.norm(x)
    y = N @ x
    mu = float(x @ y)
    return mu, float(np.linalg.norm(y - mu * x)), x


def _krylov_top(N, X, top, depth):
    """Top Ritz vector of N on the block Krylov space of X (top deflated)."""
    basis = []
    cur = X
    for _ in range(depth):
        cur = cur - np.outer(top, top @ cur)
        basis.append(cur)
        cur = N @ cur
        cur /= np.maximum(np.linalg.norm(cur, axis=0), 1e-300)
    Q, r = np.linalg.qr(np.concatenate(basis, axis=1))
    keep = np.abs(np.diag(r)) > 1e-10 * max(1.0, float(np.abs(r).max()))
    Q = Q[:, keep]
    if Q.shape[1] == 0:
        return None
    Q -= np.outer(top, top @ Q)
    Q, _ = np.linalg.qr(Q)
    vals, vecs = np.linalg.eigh(Q.T @ (N @ Q))
    return Q @ vecs[:, -1]


def _lambda2_lower(loc: _Local, hint=None, near=(), need=0.0):
    """A lower estimate of lambda_2 of the normalized Laplacian, and the
    eigenvector behind it (None for the dense path).

    With a hint (vertex ids, vector of an overlapping earlier cluster) a
    small deflated block-Krylov Rayleigh-Ritz step is tried first. The block
    also holds the indicator of `near` (where edges went away, so where a
    new sparse cut would sit). Its answer is used once it clears `need`."""
    if loc.n <= DENSE_EIG_N:
        ev = np.linalg.eigvalsh(_dense_normalized(loc))
        mu2 = ev[-2]
        return max(0.0, 1.0 - mu2 - SPECTRAL_MARGIN), None
    N, dinv = _normalized(loc)
    sq = np.sqrt(loc.deg.astype(float))
    top = sq / np.linalg.norm(sq)
    if hint is not None:
        hv, hx = hint
        verts = np.asarray(loc.verts)
        pos = np.searchsorted(hv, verts)
        pos[pos >= len(hv)] = 0
        block = [np.where(hv[pos] == verts, hx[pos], 0.0)]
        ind = np.zeros(loc.n)
        for v in near:
            i = loc.idx.get(v)
            if i is not None:
                ind[i] = sq[i]
        if ind.any():
            block.append(ind)
        X = np.stack(block, axis=1)
        for depth in WARM_DEPTH:
            x = _krylov_top(N, X, top, depth)
            if x is None:
                break
            mu2, resid, x = _residual_bound(N, x, top)
            lam = 1.0 - mu2 - resid - SPECTRAL_MARGIN
            if lam >= need and resid < WARM_RESID:
                return max(0.0, lam), x
            block[0] = x
            X = np.stack(block, axis=1)
    v0 = np.cos(np.arange(loc.n) * 0.7071) + 1.0
    vals, vecs = spla.eigsh(N, k=2, which="LA", v0=v0, tol=1e-9, maxiter=20000)
    order = np.argsort(vals)
    mu2, resid, x = _residual_bound(N, vecs[:, order[0]], top)
    return max(0.0, 1.0 - mu2 - resid - SPECTRAL_MARGIN), x


def _sweep(loc: _Local, use_eigsh=False):
    """Best prefix cut of the (approximate) Fiedler ordering."""
    n = loc.n
    sq = np.sqrt(loc.deg.astype(float))
    if n <= DENSE_EIG_N:
        # small enough for the exact Fiedler vector
        dinv = 1.0 / sq
        if n > 2:
            _, vecs = np.linalg.eigh(_dense_normalized(loc))
            x = vecs[:, -2]
        else:
            x = np.arange(n, dtype=float)
    elif use_eigsh:
        N, dinv = _normalized(loc)
        vals, vecs = spla.eigsh(N, k=2, which="LA", v0=sq + 0.1, tol=1e-8, maxiter=20000)
        x = vecs[:, int(np.argmin(vals))]
    else:
        # lazy walk power iteration with the top eigenvector projected out
        N, dinv = _normalized(loc)
        top = sq / np.linalg.norm(sq)
        x = ((np.arange(n) * 7919) % 1009) / 1009.0 - 0.5
        x -= top * (top @ x)
        for _ in range(POWER_ITERS):
            x = 0.5 * (x + N @ x)
            x -= top * (top @ x)
            nrm = np.linalg.norm(x)
            if nrm == 0:
                break
            x /= nrm
    y = x * dinv
    order = np.lexsort((np.arange(n), y))
    # incremental prefix sweep
    inS = np.zeros(n, bool)
    total = int(loc.deg.sum())
    cut = 0
    vol = 0
    best = None
    best_k = 0
    off, nb, wt = loc.off, loc.nb, loc.wt
    for k in range(n - 1):
        v = order[k]
        for p in range(off[v], off[v + 1]):
            if inS[nb[p]]:
                cut -= wt[p]
            else:
                cut += wt[p]
        inS[v] = True
        vol += loc.deg[v]
        d = min(vol, total - vol)
        if d <= 0:
            continue
        r = Fraction(int(cut), int(d))
        if best is None or r < best:
            best, best_k = r, k + 1
    mask = np.zeros(n, bool)
    mask[order[:best_k]] = True
    return best, mask


# ---------------------------------------------------------------- API

def conductance_report(g, S=None):
    """(lower, upper, witness_side, method) for g[S] (S defaults to all).

    Exact (lower == upper) for small graphs; otherwise a Cheeger lower bound
    and the sweep cut as the upper witness.
    """
    loc = _Local(g, g.vertices() if S is None else S)
    if loc.n <= 1:
        return UNDEFINED, UNDEFINED, frozenset(), "singleton"
    if not loc.connected():
        comp = loc.components()[0]
        return Fraction(0), Fraction(0), frozenset(loc.verts[i] for i in comp), "disconnected"
    if loc.n <= EXHAUSTIVE_N:
        r, mask = _exact(loc)
        return r, r, frozenset(loc.verts[i] for i in np.flatnonzero(mask)), "exhaustive"
    lo = _lambda2_lower(loc)[0] / 2.0
    up, mask = _sweep(loc)
    return lo, up, frozenset(loc.verts[i] for i in np.flatnonzero(mask)), "spectral"


def conductance(g, S=None):
    """Exact conductance for n <= EXHAUSTIVE_N (a Fraction), a certified
    lower bound otherwise (a float). 0 for disconnected graphs, UNDEFINED
    for a single vertex."""
    return conductance_report(g, S)[0]


def certify(g, S, phi) -> ClusterCert | None:
    """Certificate that g[S] has conductance >= phi, or None."""
    loc = _Local(g, S)
    return _certify_local(loc, phi)


def _certify_local(loc, phi, hint=None, near=()):
    if loc.n <= 1:
        return ClusterCert(math.inf, "singleton")
    if not loc.connected():
        return None
    if loc.n <= EXHAUSTIVE_N:
        r, _ = _exact(loc)
        return ClusterCert(float(r), "exhaustive") if r >= phi else None
    lam, x = _lambda2_lower(loc, hint, near, 2.0 * phi)
    if lam / 2.0 < phi:
        return None
    vec = None if x is None else (np.asarray(loc.verts), x)
    return ClusterCert(lam / 2.0, "spectral", vec, loc if loc.n > LARGE_N else None)


def _split(loc, phi):
    """A cut of loc to recurse on: (mask, ratio). Prefers sparse cuts."""
    if not loc.connected():
        comps = loc.components()
        mask = np.zeros(loc.n, bool)
        mask[comps[0]] = True
        return mask, Fraction(0)
    if loc.n <= EXHAUSTIVE_N:
        r, mask = _exact(loc)
        return mask, r
    r, mask = _sweep(loc)
    if r >= phi and loc.n > DENSE_EIG_N:
        r2, mask2 = _sweep(loc, use_eigsh=True)
        if r2 < r:
            r, mask = r2, mask2
    return mask, r


def decompose_steps(g, phi, vertices=None):
    """Generator form of the decomposition: yields None between units of
    work and finally returns [(cluster, ClusterCert)] in discovery order."""
    verts = sorted(g.vertices() if vertices is None else vertices)
    allowed = set(verts)
    # connected components first
    seen = set()
    work = []
    for s in verts:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.nbrs(x):
                if y in allowed and y not in seen:
                    seen.add(y)
                    comp.append(y)
                    stack.append(y)
        work.append(comp)
    done = []
    while work:
        S = work.pop()
        loc = _Local(g, S)
        cert = _certify_local(loc, phi)
        if cert is not None:
            done.append((frozenset(S), cert))
        else:
            mask, _ = _split(loc, phi)
            a = [loc.verts[i] for i in np.flatnonzero(mask)]
            b = [loc.verts[i] for i in np.flatnonzero(~mask)]
            work.append(b)
            work.append(a)
        yield None
    return done


def _run(gen):
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value


def expander_decompose(g, phi, eps=0.5, strict=True, vertices=None):
    """(Partition, DecompositionCertificate) with every cluster certified as a
    phi-expander. With strict=True an intercluster count above eps*m raises
    InfeasibleParameters."""
    if not 0 < phi < 1:
        raise ValueError("phi must lie in (0, 1)")
    found = _run(decompose_steps(g, phi, vertices))
    found.sort(key=lambda t: min(t[0]))
    part = Partition(c for c, _ in found)
    cof = part.cluster_of
    inter = sum(1 for e in g.edges() if e.u in cof and e.v in cof and cof[e.u] != cof[e.v])
    cert = DecompositionCertificate([(tuple(sorted(c)), k) for c, k in found], inter, g.num_pairs)
    if strict and inter > eps * g.num_pairs:
        raise InfeasibleParameters(
            f"intercluster edges {inter} exceed eps*m = {eps * g.num_pairs:g}", achieved=inter)
    return part, cert


def verify_decomposition(g, part, phi, eps):
    """DecompositionCertificate if every cluster is a phi-expander and the
    intercluster pair count is at most eps*m, else a Violation."""
    cof = part.cluster_of
    for v in g.vertices():
        if v not in cof:
            return Violation(f"vertex {v} not covered")
    per = []
    for C in part.clusters:
        lo, up, wit, method = conductance_report(g, C)
        if method == "singleton":
            per.append((tuple(sorted(C)), ClusterCert(math.inf, "singleton")))
            continue
        if lo < phi:
            if method in ("exhaustive", "disconnected") or up < phi:
                return Violation(f"cluster conductance {up} < {phi}", tuple(sorted(C)), wit)
            return Violation(f"cluster not certifiable at {phi} (bound {lo:.4g})", tuple(sorted(C)), wit)
        per.append((tuple(sorted(C)), ClusterCert(float(lo), method)))
    inter = sum(1 for e in g.edges() if cof[e.u] != cof[e.v])
    if inter > eps * g.num_pairs:
        return Violation(f"intercluster edges {inter} > eps*m = {eps * g.num_pairs:g}")
    return DecompositionCertificate(per, inter, g.num_pairs)


def expander_prune(g, phi, D, target=None, check_budget=True, vertices=None) -> PruneResult:
    """Trim a set P so that (g - D)[V - P] is certified at `target`
    (default phi/6). Volumes and boundaries of P are measured in g.

    Greedy: while the remainder is not certified, move the smaller-volume
    side of its sparsest cut found into P. If the bounds vol(P) <= 8k/phi
    and |boundary(P)| <= 4k cannot be kept, the whole vertex set is
    returned as pruned (fallback=True).
    """
    V = frozenset(g.vertices() if vertices is None else vertices)
    D = [(min(t[0], t[1]), max(t[0], t[1])) for t in D]
    k = len(D)
    m = sum(g.degree(v) for v in V) // 2 if vertices is None else None
    if m is None:
        m = sum(e.mult for e in g.edges() if e.u in V and e.v in V)
    if check_budget and k > phi * m / 10:
        raise TooManyDeletions(f"k={k} exceeds phi*m/10={phi * m / 10:g}")
    if target is None:
        target = phi / 6
    h = g.copy()
    for u, v in D:
        if h.edge(u, v) is not None:
            h.remove_edge(u, v)

    def measure(P):
        vol = sum(g.degree(v) for v in P)
        bd = sum(g.mult(v, w) for v in P for w in g.neighbors(v) if w in V and w not in P)
        return vol, bd

    P: set = set()
    R = set(V)
    while True:
        loc = _Local(h, R)
        cert = _certify_local(loc, target)
        if cert is not None:
            vol, bd = measure(P)
            return PruneResult(frozenset(P), vol, bd, cert.lower, cert.method)
        mask, r = _split(loc, target)
        if r >= target and loc.n > EXHAUSTIVE_N:
            break
        a = [loc.verts[i] for i in np.flatnonzero(mask)]
        b = [loc.verts[i] for i in np.flatnonzero(~mask)]
        va = sum(g.degree(v) for v in a)
        vb = sum(g.degree(v) for v in b)
        small = a if (va, len(a)) <= (vb, len(b)) else b
        P.update(small)
        R.difference_update(small)
        vol, bd = measure(P)
        if vol > 8 * k / phi or bd > 4 * k:
            break
    vol, bd = measure(V)
    return PruneResult(V, vol, bd, math.inf, "fallback", True)
