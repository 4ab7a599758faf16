"""Multigraph model, update operations and the text formats used by the CLI."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from .errors import ParseError, PreconditionViolated, UnknownVertex

BASE = "base"
CHAIN = "containment-chain"
GAMMA = "forest-gamma"
ORIGINS = (BASE, CHAIN, GAMMA)


class Edge(NamedTuple):
    id: int
    u: int
    v: int
    mult: int
    origin: str = BASE

    def other(self, x):
        return self.v if x == self.u else self.u

    def pair(self):
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


@dataclass(frozen=True)
class UpdateOp:
    """One update. kind is 'ie', 'de', 'iv' or 'dv'.

    eid/origin are only set by the sparsifier layer, where an inserted edge
    must keep the identity it had one level down.
    """

    kind: str
    u: int
    v: int | None = None
    mult: int = 1
    eid: int | None = None
    origin: str | None = None

    def __str__(self):
        if self.kind == "ie":
            return f"ie {self.u} {self.v} {self.mult}"
        if self.kind == "de":
            return f"de {self.u} {self.v}"
        return f"{self.kind} {self.u}"

    @property
    def is_edge_op(self):
        return self.kind in ("ie", "de")


def ins_edge(u, v, mult=1, eid=None, origin=None):
    return UpdateOp("ie", u, v, mult, eid, origin)


def del_edge(u, v):
    return UpdateOp("de", u, v)


def ins_vertex(v):
    return UpdateOp("iv", v)


def del_vertex(v):
    return UpdateOp("dv", v)


def reverse_op(g: "Multigraph", op: UpdateOp) -> UpdateOp:
    """The op undoing `op`, computed against the graph before `op` runs."""
    if op.kind == "ie":
        return del_edge(op.u, op.v)
    if op.kind == "de":
        e = g.edge(op.u, op.v)
        if e is None:
            raise PreconditionViolated(op, "edge absent")
        return ins_edge(op.u, op.v, e.mult)
    if op.kind == "iv":
        return del_vertex(op.u)
    return ins_vertex(op.u)


class Multigraph:
    """Undirected multigraph with one triple per vertex pair and no self-loops.

    Multiplicities are positive integers. Every edge carries an id that is
    never reused inside one graph, plus an origin tag.
    """

    __slots__ = ("_adj", "_w", "_edges", "_deg", "_m", "_next_eid")

    def __init__(self, vertices: Iterable[int] = (), triples: Iterable = ()):
        self._adj: dict[int, dict[int, int]] = {}
        self._w: dict[int, dict[int, int]] = {}      # neighbor -> multiplicity
        self._edges: dict[int, Edge] = {}
        self._deg: dict[int, int] = {}
        self._m = 0
        self._next_eid = 0
        for v in vertices:
            self.add_vertex(v)
        for t in triples:
            u, v, a = t[:3]
            for x in (u, v):
                if x not in self._adj:
                    self.add_vertex(x)
            self.add_edge(u, v, a)

    # counters
    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def m(self) -> int:
        return self._m

    @property
    def num_pairs(self) -> int:
        return len(self._edges)

    @property
    def next_eid(self) -> int:
        return self._next_eid

    def vertices(self):
        return self._adj.keys()

    def has_vertex(self, v) -> bool:
        return v in self._adj

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __len__(self):
        return len(self._adj)

    def degree(self, v) -> int:
        try:
            return self._deg[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def nbrs(self, v) -> dict[int, int]:
        """Neighbor -> edge id map of v (do not mutate)."""
        try:
            return self._adj[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def wnbrs(self, v) -> dict[int, int]:
        """Neighbor -> multiplicity map of v (do not mutate)."""
        try:
            return self._w[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def neighbors(self, v):
        return self.nbrs(v).keys()

    def incident(self, v) -> Iterator[Edge]:
        E = self._edges
        for eid in self.nbrs(v).values():
            yield E[eid]

    def edge(self, u, v) -> Edge | None:
        a = self._adj.get(u)
        if a is None:
            return None
        eid = a.get(v)
        return None if eid is None else self._edges[eid]

    def mult(self, u, v) -> int:
        e = self.edge(u, v)
        return 0 if e is None else e.mult

    def edge_by_id(self, eid) -> Edge | None:
        return self._edges.get(eid)

    def edges(self):
        return self._edges.values()

    def edge_ids(self):
        return self._edges.keys()

    def triples(self) -> list[tuple[int, int, int]]:
        return sorted((e.pair() + (e.mult,)) for e in self._edges.values())

    # mutation
    def add_vertex(self, v):
        if v in self._adj:
            raise PreconditionViolated(ins_vertex(v), "vertex already present")
        self._adj[v] = {}
        self._w[v] = {}
        self._deg[v] = 0

    def remove_vertex(self, v):
        if v not in self._adj:
            raise UnknownVertex(v)
        if self._adj[v]:
            raise PreconditionViolated(del_vertex(v), "vertex is not isolated")
        del self._adj[v]
        del self._w[v]
        del self._deg[v]

    def add_edge(self, u, v, mult=1, eid=None, origin=BASE) -> Edge:
        if u == v:
            raise PreconditionViolated(ins_edge(u, v, mult), "self-loop")
        if mult < 1:
            raise PreconditionViolated(ins_edge(u, v, mult), "multiplicity must be positive")
        au = self._adj.get(u)
        if au is None:
            raise UnknownVertex(u)
        av = self._adj.get(v)
        if av is None:
            raise UnknownVertex(v)
        if v in au:
            raise PreconditionViolated(ins_edge(u, v, mult), "pair already joined")
        if eid is None:
            eid = self._next_eid
        elif eid in self._edges:
            raise PreconditionViolated(ins_edge(u, v, mult), f"edge id {eid} in use")
        if eid >= self._next_eid:
            self._next_eid = eid + 1
        e = Edge(eid, u, v, mult, origin or BASE)
        self._edges[eid] = e
        au[v] = eid
        av[u] = eid
        self._w[u][v] = mult
        self._w[v][u] = mult
        self._deg[u] += mult
        self._deg[v] += mult
        self._m += mult
        return e

    def remove_edge(self, u, v) -> Edge:
        au = self._adj.get(u)
        if au is None:
            raise UnknownVertex(u)
        if v not in self._adj:
            raise UnknownVertex(v)
        eid = au.get(v)
        if eid is None:
            raise PreconditionViolated(del_edge(u, v), "edge absent")
        e = self._edges.pop(eid)
        del au[v]
        del self._adj[v][u]
        del self._w[u][v]
        del self._w[v][u]
        self._deg[u] -= e.mult
        self._deg[v] -= e.mult
        self._m -= e.mult
        return e

    def copy(self) -> "Multigraph":
        h = Multigraph.__new__(Multigraph)
        h._adj = {v: dict(a) for v, a in self._adj.items()}
        h._w = {v: dict(a) for v, a in self._w.items()}
        h._edges = dict(self._edges)
        h._deg = dict(self._deg)
        h._m = self._m
        h._next_eid = self._next_eid
        return h

    def canonical(self) -> str:
        """Id-free text form: sorted vertices then sorted triples."""
        vs = " ".join(map(str, sorted(self._adj)))
        es = "\n".join(f"{u} {v} {a}" for u, v, a in self.triples())
        return f"{vs}\n{es}"

    def __repr__(self):
        return f"Multigraph(n={self.n}, pairs={self.num_pairs}, m={self.m})"


def apply_update(g: Multigraph, op: UpdateOp) -> Multigraph:
    """Apply op to g in place and return g."""
    k = op.kind
    if k == "ie":
        if not g.has_vertex(op.u) or not g.has_vertex(op.v):
            raise PreconditionViolated(op, "endpoint missing")
        g.add_edge(op.u, op.v, op.mult, op.eid, op.origin or BASE)
    elif k == "de":
        if not g.has_vertex(op.u) or not g.has_vertex(op.v):
            raise PreconditionViolated(op, "endpoint missing")
        g.remove_edge(op.u, op.v)
    elif k == "iv":
        g.add_vertex(op.u)
    elif k == "dv":
        if not g.has_vertex(op.u):
            raise PreconditionViolated(op, "vertex absent")
        g.remove_vertex(op.u)
    else:
        raise PreconditionViolated(op, f"unknown op kind {k!r}")
    return g


def apply_seq(g: Multigraph, seq: Iterable[UpdateOp]) -> Multigraph:
    for op in seq:
        apply_update(g, op)
    return g


def _check(g, S):
    for v in S:
        if v not in g:
            raise UnknownVertex(v)


def volume(g: Multigraph, S) -> int:
    _check(g, S)
    return sum(g.degree(v) for v in S)


def boundary(g: Multigraph, S) -> list[Edge]:
    S = S if isinstance(S, (set, frozenset)) else set(S)
    _check(g, S)
    out = []
    for v in S:
        for w, eid in g.nbrs(v).items():
            if w not in S:
                out.append(g.edge_by_id(eid))
    return out


def cut_weight(g: Multigraph, S) -> int:
    return sum(e.mult for e in boundary(g, S))


def induced(g: Multigraph, S) -> Multigraph:
    S = S if isinstance(S, (set, frozenset)) else set(S)
    _check(g, S)
    h = Multigraph(sorted(S))
    for v in S:
        for w, eid in g.nbrs(v).items():
            if w in S and v < w:
                e = g.edge_by_id(eid)
                h.add_edge(e.u, e.v, e.mult, e.id, e.origin)
    h._next_eid = max(h._next_eid, g.next_eid)
    return h


def intercluster_edges(g: Multigraph, partition) -> list[Edge]:
    """Edges whose endpoints lie in different clusters."""
    cof = partition.cluster_of
    for v in g.vertices():
        if v not in cof:
            raise UnknownVertex(v)
    return [e for e in g.edges() if cof[e.u] != cof[e.v]]


def components(g: Multigraph, within=None) -> list[list[int]]:
    """Connected components (optionally of the subgraph induced by `within`)."""
    verts = sorted(g.vertices() if within is None else within)
    allowed = None if within is None else set(within)
    seen = set()
    out = []
    for s in verts:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.nbrs(x):
                if y not in seen and (allowed is None or y in allowed):
                    seen.add(y)
                    comp.append(y)
                    stack.append(y)
        out.append(comp)
    return out


# text formats

def parse_graph(text: str) -> Multigraph:
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError(1, "empty graph file")
    i0, head = lines[0]
    parts = head.split()
    if len(parts) != 2:
        raise ParseError(i0, "header must be 'n m_lines'")
    try:
        n, m_lines = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(i0, "header must hold two integers") from None
    if n < 0 or m_lines < 0:
        raise ParseError(i0, "negative count")
    body = lines[1:]
    if len(body) != m_lines:
        raise ParseError(i0, f"expected {m_lines} edge lines, found {len(body)}")
    g = Multigraph(range(n))
    for i, ln in body:
        p = ln.split()
        if len(p) != 3:
            raise ParseError(i, "edge line must be 'u v multiplicity'")
        try:
            u, v, a = int(p[0]), int(p[1]), int(p[2])
        except ValueError:
            raise ParseError(i, "non-integer field") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(i, "vertex out of range")
        if u == v:
            raise ParseError(i, "self-loop")
        if a < 1:
            raise ParseError(i, "multiplicity must be positive")
        if g.edge(u, v) is not None:
            raise ParseError(i, "duplicate pair")
        g.add_edge(u, v, a)
    return g


def format_graph(g: Multigraph) -> str:
    """Write g in the graph file format. Vertex ids must be 0..n-1."""
    vs = sorted(g.vertices())
    if vs != list(range(len(vs))):
        raise ValueError("graph file format needs vertex ids 0..n-1")
    tr = g.triples()
    out = [f"{len(vs)} {len(tr)}"]
    out += [f"{u} {v} {a}" for u, v, a in tr]
    return "\n".join(out) + "\n"


QUERY = UpdateOp("q", -1)


def parse_stream(text: str) -> list[UpdateOp]:
    """Parse an update stream; 'q' lines become the QUERY marker."""
    ops = []
    for i, raw in enumerate(text.splitlines(), 1):
        ln = raw.strip()
        if not ln or ln.startswith("#"):
            continue
        p = ln.split()
        try:
            k = p[0]
            if k == "ie" and len(p) == 4:
                op = ins_edge(int(p[1]), int(p[2]), int(p[3]))
                if op.mult < 1:
                    raise ParseError(i, "multiplicity must be positive")
                if op.u == op.v:
                    raise ParseError(i, "self-loop")
            elif k == "de" and len(p) == 3:
                op = del_edge(int(p[1]), int(p[2]))
            elif k in ("iv", "dv") and len(p) == 2:
                op = UpdateOp(k, int(p[1]))
            elif k == "q" and len(p) == 1:
                op = QUERY
            else:
                raise ParseError(i, f"malformed op {ln!r}")
        except ValueError:
            raise ParseError(i, f"non-integer field in {ln!r}") from None
        ops.append(op)
    return ops


def format_stream(ops: Iterable[UpdateOp]) -> str:
    return "".join(("q" if op.kind == "q" else str(op)) + "\n" for op in ops)
