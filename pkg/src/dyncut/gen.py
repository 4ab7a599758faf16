"""Deterministic stream generators.

Every generator returns (initial graph, ops, sizes) where sizes is the
true minimum cut size after each op when the generator knows it (None
otherwise, or for entries above c).
"""
from __future__ import annotations

import random

from .graph import Multigraph, UpdateOp, del_edge, ins_edge

KINDS = ("random-toggle", "planted-cut", "churn-burst")


def _pair(u, v):
    return (u, v) if u < v else (v, u)


def random_toggle(n: int, ops: int, seed: int, density: float = 3.0, max_mult: int = 2):
    """Random graph with about density*n/2 pairs; each op toggles a random
    pair (delete if present, else insert with multiplicity 1..max_mult)."""
    rng = random.Random(seed)
    g = Multigraph(range(n))
    target = int(density * n / 2)
    while n >= 2 and g.num_pairs < min(target, n * (n - 1) // 2):
        u, v = rng.sample(range(n), 2)
        if g.edge(u, v) is None:
            g.add_edge(u, v, rng.randint(1, max_mult))
    present = {_pair(e.u, e.v) for e in g.edges()}
    out = []
    for _ in range(ops if n >= 2 else 0):
        p = _pair(*rng.sample(range(n), 2))
        if p in present:
            out.append(del_edge(*p))
            present.discard(p)
        else:
            out.append(ins_edge(p[0], p[1], rng.randint(1, max_mult)))
            present.add(p)
    return g, out, [None] * len(out)


class _Chords:
    """Chord pairs of one half with O(1) random removal."""

    def __init__(self, side):
        self.side = side
        self.pos = {v: i for i, v in enumerate(side)}
        self.items: list = []
        self.index: dict = {}

    def on_cycle(self, p):
        d = abs(self.pos[p[0]] - self.pos[p[1]])
        return d == 1 or d == len(self.side) - 1

    def add(self, p):
        self.index[p] = len(self.items)
        self.items.append(p)

    def pop_random(self, rng):
        i = rng.randrange(len(self.items))
        p = self.items[i]
        last = self.items.pop()
        if last != p:
            self.items[i] = last
            self.index[last] = i
        del self.index[p]
        return p

    def fresh(self, rng):
        while True:
            p = _pair(*rng.sample(self.side, 2))
            if p not in self.index and not self.on_cycle(p):
                return p


def planted_cut(n: int, ops: int, seed: int, c: int = 2, chords: float = 1.0):
    """Two halves, each held together by a cycle of multiplicity c+1 that is
    never touched, plus random unit chords. Between the halves sit k unit
    edges with 1 <= k <= c. Ops toggle chords and add or drop crossing edges.

    Any cut inside a half crosses its cycle twice (weight 2c+2 > c), so the
    minimum cut is exactly k."""
    if n < 8:
        raise ValueError("planted-cut needs n >= 8")
    rng = random.Random(seed)
    h = n // 2
    halves = (list(range(h)), list(range(h, n)))
    g = Multigraph(range(n))
    ch = []
    for side in halves:
        for i, u in enumerate(side):
            g.add_edge(u, side[(i + 1) % len(side)], c + 1)
        cs = _Chords(side)
        for _ in range(int(chords * len(side))):
            p = cs.fresh(rng)
            g.add_edge(p[0], p[1], 1)
            cs.add(p)
        ch.append(cs)
    cross: list = []
    k0 = rng.randint(1, c)
    while len(cross) < k0:
        p = (rng.choice(halves[0]), rng.choice(halves[1]))
        if p not in cross:
            g.add_edge(p[0], p[1], 1)
            cross.append(p)
    out, sizes = [], []
    for _ in range(ops):
        if rng.random() < 0.1:
            k = len(cross)
            if k < c and (k == 1 or rng.random() < 0.5):
                while True:
                    p = (rng.choice(halves[0]), rng.choice(halves[1]))
                    if p not in cross:
                        break
                out.append(ins_edge(p[0], p[1], 1))
                cross.append(p)
            else:
                p = cross.pop(rng.randrange(k))
                out.append(del_edge(*p))
        else:
            cs = ch[rng.randrange(2)]
            if cs.items and rng.random() < 0.5:
                out.append(del_edge(*cs.pop_random(rng)))
            else:
                p = cs.fresh(rng)
                out.append(ins_edge(p[0], p[1], 1))
                cs.add(p)
        sizes.append(len(cross))
    return g, out, sizes


def churn_burst(n: int, ops: int, seed: int, burst: int = 20):
    """Bursts of vertex churn: a burst inserts fresh vertices wired into the
    graph, the next one strips and deletes them again."""
    rng = random.Random(seed)
    g, _, _ = random_toggle(n, 0, seed, density=4.0)
    out = []
    live: list = []
    nxt = n
    adj: dict = {}
    while len(out) < ops:
        if not live:
            for _ in range(max(1, burst // 4)):
                v = nxt
                nxt += 1
                out.append(UpdateOp("iv", v))
                live.append(v)
                adj[v] = set()
                for u in rng.sample(range(n), min(2, n)):
                    out.append(ins_edge(u, v, rng.randint(1, 2)))
                    adj[v].add(u)
        else:
            v = live.pop()
            for u in sorted(adj.pop(v)):
                out.append(del_edge(u, v))
            out.append(UpdateOp("dv", v))
    out = out[:ops]
    return g, out, [None] * len(out)


def generate(kind: str, n: int, ops: int, seed: int, c: int = 2):
    if kind == "random-toggle":
        return random_toggle(n, ops, seed)
    if kind == "planted-cut":
        return planted_cut(n, ops, seed, c)
    if kind == "churn-burst":
        return churn_burst(n, ops, seed)
    raise ValueError(f"unknown generator {kind!r}; expected one of {', '.join(KINDS)}")
