"""Degree reduction from a simple graph to a multigraph with at most three
distinct neighbors per vertex, and the map back for cut-sets.

Every simple edge (u, w) becomes two gadget vertices v[u,w], v[w,u] joined by
a unit "cross" edge. The gadget vertices of u sit on a chain
v[u,u] - v[u,w1] - v[u,w2] - ... whose edges have multiplicity c+1, so no cut
of size <= c ever crosses a chain.
"""
from __future__ import annotations

from .errors import NonLiftableEdge, PreconditionViolated, UnknownVertex
from .graph import Multigraph, UpdateOp, apply_update, del_edge, del_vertex, ins_edge, ins_vertex


class SimpleMirror:
    """Bookkeeping that ties a simple graph to its reduced multigraph."""

    def __init__(self, c: int):
        if c < 1:
            raise ValueError("c must be positive")
        self.c = c
        self.adj: dict[int, set[int]] = {}
        self.order: dict[int, list[int]] = {}   # w_{u,0..deg}, with w_{u,0} = u
        self.gid: dict[tuple[int, int], int] = {}
        self.owner: dict[int, tuple[int, int]] = {}
        self._next = 0

    def _fresh(self, key):
        x = self._next
        self._next += 1
        self.gid[key] = x
        self.owner[x] = key
        return x

    def vertex(self, u, w=None) -> int:
        """Gadget vertex v[u,w]; v[u,u] when w is omitted."""
        return self.gid[(u, u if w is None else w)]

    def simple_edges(self):
        return sorted((u, w) for u in self.adj for w in self.adj[u] if u < w)

    def is_cross(self, a, b) -> bool:
        ka, kb = self.owner.get(a), self.owner.get(b)
        return ka is not None and kb is not None and ka == (kb[1], kb[0]) and ka[0] != ka[1]


def degree_reduce(simple, c: int, vertices=None) -> tuple[Multigraph, SimpleMirror]:
    """Build the reduced multigraph of a simple graph.

    `simple` is an iterable of (u, w) pairs (a third field is ignored);
    `vertices` lists extra isolated simple vertices.
    """
    mir = SimpleMirror(c)
    g = Multigraph()
    verts = set(vertices or ())
    pairs = []
    for t in simple:
        u, w = t[0], t[1]
        if u == w:
            raise PreconditionViolated(ins_edge(u, w), "self-loop in simple graph")
        verts.update((u, w))
        pairs.append((u, w))
    for u in sorted(verts):
        mir.adj[u] = set()
        mir.order[u] = [u]
        g.add_vertex(mir._fresh((u, u)))
    for u, w in pairs:
        for op in reduce_update(mir, ins_edge(u, w)):
            apply_update(g, op)
    return g, mir


def reduce_update(mir: SimpleMirror, op: UpdateOp) -> list[UpdateOp]:
    """Translate one simple-graph op into multigraph ops and update the mirror."""
    c1 = mir.c + 1
    if op.kind == "iv":
        if op.u in mir.adj:
            raise PreconditionViolated(op, "vertex already present")
        mir.adj[op.u] = set()
        mir.order[op.u] = [op.u]
        return [ins_vertex(mir._fresh((op.u, op.u)))]
    if op.kind == "dv":
        if op.u not in mir.adj:
            raise PreconditionViolated(op, "vertex absent")
        if mir.adj[op.u]:
            raise PreconditionViolated(op, "vertex is not isolated")
        x = mir.gid.pop((op.u, op.u))
        del mir.owner[x]
        del mir.adj[op.u]
        del mir.order[op.u]
        return [del_vertex(x)]
    u, w = op.u, op.v
    if u not in mir.adj or w not in mir.adj:
        raise PreconditionViolated(op, "endpoint missing")
    if op.kind == "ie":
        if u == w:
            raise PreconditionViolated(op, "self-loop")
        if w in mir.adj[u]:
            raise PreconditionViolated(op, "pair already joined")
        u_last = mir.order[u][-1]
        w_last = mir.order[w][-1]
        a = mir._fresh((u, w))
        b = mir._fresh((w, u))
        seq = [
            ins_vertex(a),
            ins_vertex(b),
            ins_edge(a, b, 1),
            ins_edge(a, mir.gid[(u, u_last)], c1),
            ins_edge(b, mir.gid[(w, w_last)], c1),
        ]
        mir.adj[u].add(w)
        mir.adj[w].add(u)
        mir.order[u].append(w)
        mir.order[w].append(u)
        return seq
    if op.kind == "de":
        if w not in mir.adj[u]:
            raise PreconditionViolated(op, "edge absent")
        a = mir.gid[(u, w)]
        b = mir.gid[(w, u)]
        ou, ow = mir.order[u], mir.order[w]
        iu, iw = ou.index(w), ow.index(u)
        u1 = mir.gid[(u, ou[iu - 1])]
        u2 = mir.gid[(u, ou[iu + 1])] if iu + 1 < len(ou) else None
        w1 = mir.gid[(w, ow[iw - 1])]
        w2 = mir.gid[(w, ow[iw + 1])] if iw + 1 < len(ow) else None
        seq = [del_edge(a, b), del_edge(a, u1)]
        if u2 is not None:
            seq.append(del_edge(a, u2))
        seq.append(del_edge(b, w1))
        if w2 is not None:
            seq.append(del_edge(b, w2))
        if w2 is not None:
            seq.append(ins_edge(w1, w2, c1))
        if u2 is not None:
            seq.append(ins_edge(u1, u2, c1))
        seq += [del_vertex(a), del_vertex(b)]
        for key in ((u, w), (w, u)):
            del mir.owner[mir.gid.pop(key)]
        mir.adj[u].discard(w)
        mir.adj[w].discard(u)
        del ou[iu]
        del ow[iw]
        return seq
    raise PreconditionViolated(op, f"unknown op kind {op.kind!r}")


def lift_cutset(mir: SimpleMirror, cutset) -> set[tuple[int, int]]:
    """Map a cut-set of the reduced graph (edges or (a, b, mult) triples) to
    simple-graph edges (u, w) with u < w."""
    out = set()
    for e in cutset:
        a, b, mult = e[1:4] if hasattr(e, "origin") else e[:3]
        if a not in mir.owner:
            raise UnknownVertex(a)
        if b not in mir.owner:
            raise UnknownVertex(b)
        if mult != 1 or not mir.is_cross(a, b):
            raise NonLiftableEdge(f"edge ({a}, {b}, {mult}) is a chain edge")
        u, w = mir.owner[a]
        out.add((u, w) if u < w else (w, u))
    return out
