"""Acceptance suite: nine criteria, each reported as one PASS/FAIL line.

Every check compares the engine route with an independent oracle route.
The long runs (criteria 1/8 share one replay, criterion 9 is the 10^4 scale
benchmark) dominate the wall clock.
"""
import itertools
import math
import random
import statistics
import time
from collections import Counter

import pytest

from conftest import ACCEPTANCE, rand_graph, toggles
from dyncut.degree import degree_reduce, lift_cutset
from dyncut.expander import Partition, expander_prune
from dyncut.flow import UnionFind
from dyncut.gen import planted_cut
from dyncut.graph import Multigraph, apply_update, induced, UpdateOp
from dyncut.hierarchy import rebuild_queue
from dyncut.localcuts import build_aux, enumerate_cluster, enumerate_cuts, special_id
from dyncut.oracle import (brute_conductance, brute_local_cuts, steiner_min_cut,
                           stoer_wagner_size)
from dyncut.pool import DynamicMinCut
from dyncut.sparsify import (build_containment, build_sparsifier_cluster, contract, ec_init,
                             fallback_containment, validate_containment)
from dyncut.verify import verify_stream


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE.append(line)
    return ok


# ------------------------------------------------------------ 1 and 8

C1_STREAMS = 200
C1_OPS = 500
C1_W = 12
C8_MAX_N = 30


@pytest.fixture(scope="module")
def replay():
    """Replay every criterion-1 stream once; on the small instances compare
    each level's live queue with a rebuild after every closed batch."""
    t0 = time.time()
    out = dict(streams=0, checks=0, mismatches=[], lam_checks=0, lam_bad=[])
    for s in range(C1_STREAMS):
        rng = random.Random(90000 + s)
        n = rng.randint(10, 60)
        c = rng.randint(1, 3)
        g = rand_graph(rng, n, rng.uniform(1.5, 4) / n * 2)
        stream = toggles(rng, g, C1_OPS)

        def on_record(rec, eng, s=s, n=n):
            if n > C8_MAX_N or rec.op_index == 0 or rec.op_index % C1_W:
                return
            for li, lvl in enumerate(eng.pool.current().levels):
                out["lam_checks"] += 1
                if rebuild_queue(lvl).entries() != lvl.lam.entries():
                    out["lam_bad"].append((s, rec.op_index, li))

        rep = verify_stream(g, stream, c, 1, C1_W, on_record=on_record)
        out["streams"] += 1
        out["checks"] += rep.checks
        out["mismatches"] += [(s, r.op_index, r.detail) for r in rep.mismatches]
    out["seconds"] = time.time() - t0
    return out


def test_criterion_1_oracle_equivalence(replay):
    bad = replay["mismatches"]
    ok = replay["streams"] == C1_STREAMS and not bad
    report(1, ok, f"{replay['streams']} streams, {replay['checks']} checks, {len(bad)} mismatches, "
                  f"{replay['seconds']:.0f}s")
    assert ok, bad[:5]


def test_criterion_8_queue_matches_rebuild(replay):
    bad = replay["lam_bad"]
    ok = replay["lam_checks"] > 0 and not bad
    report(8, ok, f"{replay['lam_checks']} level checks after closed batches, {len(bad)} differ")
    assert ok, bad[:5]


# ------------------------------------------------------------ 2

def _random_cluster(rng):
    n = rng.randint(1, 10)
    g = Multigraph(range(n + 4))
    m = 0
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.35 and m < 14:
                w = rng.randint(1, 3)
                g.add_edge(u, v, w)
                m += w
    # outside singletons; which cluster vertices they touch picks the terminals
    for x in range(n, n + 4):
        for u in rng.sample(range(n), min(n, rng.randint(0, 2))):
            g.add_edge(u, x, 1)
    return g, Partition([set(range(n))] + [{x} for x in range(n, n + 4)])


def test_criterion_2_local_cut_enumeration():
    rng = random.Random(2)
    cases = agree = nonempty = 0
    while cases < 1000:
        g, part = _random_cluster(rng)
        aux = build_aux(g, part)
        cid = part.cluster_of[0]
        view = aux.view(cid)
        if sum(view.degree(v) for v in view.vertices()) > 80:
            continue
        cases += 1
        c = rng.randint(1, 3)
        phi = rng.choice([0.5, 0.25, 0.1])
        alpha = math.ceil(c / phi) + rng.randint(0, 3)
        T = set(aux.terms[cid]) | {special_id(cid)}
        expect = brute_local_cuts(view, T, alpha, c)
        per_vertex = set()
        for v in sorted(aux.members(cid)):
            per_vertex |= {frozenset(U) for U in enumerate_cuts(aux, v, alpha, c)}
        whole = {U for _, U in enumerate_cluster(aux, cid, alpha, c)}
        agree += per_vertex == expect and whole == expect
        nonempty += bool(expect)
    ok = agree == cases
    report(2, ok, f"{agree}/{cases} clusters agree ({nonempty} with cuts)")
    assert ok


# ------------------------------------------------------------ 3

def _bipartitions(T):
    T = sorted(T)
    first, rest = T[0], T[1:]
    for r in range(len(rest)):
        for extra in itertools.combinations(rest, r):
            yield (first,) + extra, tuple(x for x in rest if x not in extra)


def _sparsifier_ok(g, H, T, c):
    for a, b in itertools.combinations(sorted(T), 2):
        if min(c, steiner_min_cut(g, [a], [b], c + 1)) != min(c, steiner_min_cut(H, [a], [b], c + 1)):
            return False
    if len(T) < 2:
        return True
    for A, B in _bipartitions(T):
        x = steiner_min_cut(g, A, B, c + 1)
        if x <= c and steiner_min_cut(H, A, B, c + 1) > x:
            return False
    return True


def test_criterion_3_sparsifier_preservation():
    rng = random.Random(3)
    cases = good = layered = 0
    while cases < 500:
        n = rng.randint(2, 25)
        c = rng.randint(1, 3)
        g = rand_graph(rng, n, rng.uniform(2.0, 6.0) / n, 3)
        if rng.random() < 0.5:
            T = set(rng.sample(range(n), rng.randint(0, min(8, n))))
            cont = build_containment(g, T, c)
            H = build_sparsifier_cluster(g, T, cont.cc, None, c, c + 1).graph
        else:
            # whole one-level structure over an expander decomposition
            ds = ec_init(g, c, rng.choice([0.1, 0.2, 0.3]), c + 1)
            T, H = ds.terminals, ds.H
            if len(T) > 8:
                continue
            layered += 1
        cases += 1
        good += _sparsifier_ok(g, H, T, c)
    ok = good == cases
    report(3, ok, f"{good}/{cases} instances preserve terminal cuts ({layered} via the one-level structure)")
    assert ok


# ------------------------------------------------------------ 4

def test_criterion_4_containment_validity():
    rng = random.Random(4)
    good = fb_good = 0
    cases = 500
    for _ in range(cases):
        n = rng.randint(2, 20)
        c = rng.randint(1, 3)
        g = rand_graph(rng, n, rng.uniform(1.5, 6.0) / n, 3)
        T = rng.sample(range(n), rng.randint(0, min(10, n)))
        good += validate_containment(g, T, c, build_containment(g, T, c).cc) is True
        fb_good += validate_containment(g, T, c, fallback_containment(g).cc) is True
    ok = good == cases and fb_good == cases
    report(4, ok, f"{good}/{cases} built, {fb_good}/{cases} fallback valid")
    assert ok


# ------------------------------------------------------------ 5

def _contraction_ok(n, edges, K):
    cf = contract(edges, K, vertices=range(n))
    fuf = UnionFind(range(n))
    for u, v in edges:
        fuf.union(u, v)
    fset = {(min(u, v), max(u, v)) for u, v in edges}
    if not set(K) <= cf.vertices or not cf.vertices <= set(range(n)):
        return False
    cuf = UnionFind(range(n))
    inner_seen = set()
    for a, b, path in cf.edges:
        if path[0] != a or path[-1] != b or len(set(path)) != len(path):
            return False
        for x, y in zip(path, path[1:]):
            if (min(x, y), max(x, y)) not in fset:
                return False
        inner = set(path[1:-1])
        if inner & cf.vertices or inner & inner_seen:
            return False
        inner_seen |= inner
        cuf.union(a, b)
    # at most 2|K| contracted vertices per original tree
    per_tree_k = Counter(fuf.find(v) for v in K)
    per_tree_v = Counter(fuf.find(v) for v in cf.vertices)
    if any(cnt > 2 * per_tree_k[t] for t, cnt in per_tree_v.items()):
        return False
    # K-connectivity preserved in both directions
    return all((fuf.find(a) == fuf.find(b)) == (cuf.find(a) == cuf.find(b))
               for a, b in itertools.combinations(sorted(K), 2))


def test_criterion_5_contraction_bound():
    rng = random.Random(5)
    cases = 500
    good = 0
    for _ in range(cases):
        n = rng.randint(1, 60)
        edges = []
        for v in range(1, n):
            if rng.random() < 0.9:
                edges.append((rng.randrange(v), v))
        K = set(rng.sample(range(n), rng.randint(0, n)))
        good += _contraction_ok(n, edges, K)
    ok = good == cases
    report(5, ok, f"{good}/{cases} forests within 2|K| per tree with K-connectivity kept")
    assert ok


# ------------------------------------------------------------ 6

def _prune_case(rng):
    """(g, phi, D) in budget, g a certified phi-expander; None to retry."""
    n = rng.randint(6, 18)
    if rng.random() < 0.5:
        # a small pocket hanging off a dense core by a few unit edges; D cuts it off
        s = rng.randint(1, 3)
        g = Multigraph(range(n))
        core = range(s, n)
        for u, v in itertools.combinations(core, 2):
            if rng.random() < 0.8:
                g.add_edge(u, v, rng.randint(2, 3))
        for u, v in itertools.combinations(range(s), 2):
            g.add_edge(u, v, 2)
        D = []
        for u in range(s):
            for v in rng.sample(list(core), rng.randint(1, 2)):
                g.add_edge(u, v, 1)
                D.append((u, v))
        phi = rng.uniform(0.05, 0.2)
    else:
        g = rand_graph(rng, n, rng.uniform(0.4, 0.9), 3)
        phi = rng.uniform(0.1, 0.4)
        kmax = int(phi * g.m / 10)
        if kmax < 1:
            return None
        es = [e.pair() for e in g.edges()]
        x = rng.randrange(n)
        near = [p for p in es if x in p]
        rng.shuffle(near)
        D = (near + [p for p in es if x not in p])[:rng.randint(1, kmax)]
    if len(D) > phi * g.m / 10:
        return None
    cond = brute_conductance(g)
    if cond is None or cond < phi:
        return None
    return g, phi, D


def test_criterion_6_pruning_contract():
    rng = random.Random(6)
    cases = good = pruned = 0
    while cases < 400:
        case = _prune_case(rng)
        if case is None:
            continue
        g, phi, D = case
        cases += 1
        k = len(D)
        res = expander_prune(g, phi, D)
        h = g.copy()
        for u, v in D:
            h.remove_edge(u, v)
        R = set(g.vertices()) - res.pruned
        # bounds recomputed here rather than read from the result
        vol = sum(g.degree(v) for v in res.pruned)
        bd = sum(g.mult(v, w) for v in res.pruned for w in g.neighbors(v) if w not in res.pruned)
        rest = brute_conductance(induced(h, R)) if len(R) > 1 else math.inf
        good += (not res.fallback and vol <= 8 * k / phi and bd <= 4 * k and rest >= phi / 6)
        pruned += bool(res.pruned)
    ok = good == cases
    report(6, ok, f"{good}/{cases} in-budget cases meet the bounds ({pruned} nonempty prunes)")
    assert ok


# ------------------------------------------------------------ 7

def _small_cut_sizes(n, edges, c):
    """{frozenset side: size} over bipartitions with size <= c; the side is
    the one avoiding vertex n-1."""
    out = {}
    for mask in range(1, 1 << (n - 1)):
        size = sum(m for u, v, m in edges if ((mask >> u) ^ (mask >> v)) & 1)
        if size <= c:
            out[frozenset(i for i in range(n) if (mask >> i) & 1)] = size
    return out


def _reduction_ok(n, simple, c):
    red, mir = degree_reduce(simple, c, range(n))
    # no cut of size <= c separates the ends of an edge heavier than c, so
    # contracting those edges keeps exactly the small cuts
    uf = UnionFind(red.vertices())
    for u, v, m in red.triples():
        if m > c:
            uf.union(u, v)
    group_of_simple = {}
    for x in red.vertices():
        u = mir.owner[x][0]
        r = uf.find(x)
        if group_of_simple.setdefault(u, r) != r:
            return False
    if len(set(group_of_simple.values())) != n:
        return False
    back = {r: u for u, r in group_of_simple.items()}
    light = [(back[uf.find(a)], back[uf.find(b)], m) for a, b, m in red.triples() if m <= c]
    want = _small_cut_sizes(n, [(u, w, 1) for u, w in simple], c)
    got = _small_cut_sizes(n, light, c)
    if want != got or Counter(want.values()) != Counter(got.values()):
        return False
    # lifted cut-sets are exactly the simple crossing edges
    for side in got:
        red_side = {x for x in red.vertices() if mir.owner[x][0] in side}
        cut = [(a, b, m) for a, b, m in red.triples() if (a in red_side) != (b in red_side)]
        crossing = {(min(u, w), max(u, w)) for u, w in simple if (u in side) != (w in side)}
        if lift_cutset(mir, cut) != crossing:
            return False
    return True


def test_criterion_7_degree_reduction_bijection():
    rng = random.Random(7)
    cases = 200
    good = 0
    for _ in range(cases):
        n = rng.randint(2, 10)
        c = rng.randint(1, 3)
        p = rng.uniform(0.1, 0.7)
        simple = [(u, w) for u, w in itertools.combinations(range(n), 2) if rng.random() < p]
        good += _reduction_ok(n, simple, c)
    ok = good == cases
    report(7, ok, f"{good}/{cases} graphs with matching small-cut multisets")
    assert ok


# ------------------------------------------------------------ 9

C9_N = 10_000
C9_OPS = 10_000
C9_W = 300
C9_BASELINE_EVERY = 500


def test_criterion_9_relative_performance():
    g, ops, sizes = planted_cut(C9_N, C9_OPS, 7, c=2)
    ref = g.copy()
    t0 = time.time()
    eng = DynamicMinCut(g.copy(), 2, xi=1, w=C9_W)
    init = time.time() - t0
    eng_t, base_t = [], []
    wrong = 0
    for i, op in enumerate(ops):
        s = time.perf_counter()
        eng.update(op)
        ans = eng.query()
        eng_t.append(time.perf_counter() - s)
        apply_update(ref, UpdateOp(op.kind, op.u, op.v, op.mult))
        wrong += ans.size != sizes[i]
        if i % C9_BASELINE_EVERY == 0:
            s = time.perf_counter()
            base = stoer_wagner_size(ref)
            base_t.append(time.perf_counter() - s)
            wrong += base != sizes[i]
    em, bm = statistics.median(eng_t), statistics.median(base_t)
    ratio = bm / em
    ok = ratio >= 5 and wrong == 0
    report(9, ok, f"engine median {em * 1e3:.1f} ms, Stoer-Wagner median {bm * 1e3:.0f} ms, "
                  f"ratio {ratio:.0f}x, {wrong} wrong answers, init {init:.1f}s, "
                  f"total {time.time() - t0:.0f}s")
    assert ok
