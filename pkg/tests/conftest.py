import random

import pytest
from hypothesis import HealthCheck, settings

from dyncut.graph import Multigraph, del_edge, ins_edge

settings.register_profile("dyncut", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dyncut")


def rand_graph(rng, n, p, max_mult=2):
    g = Multigraph(range(n))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                g.add_edge(u, v, rng.randint(1, max_mult))
    return g


def toggles(rng, g, k, max_mult=2):
    """k ops that each flip one random vertex pair."""
    pairs = {e.pair() for e in g.edges()}
    verts = sorted(g.vertices())
    out = []
    for _ in range(k):
        u, v = sorted(rng.sample(verts, 2))
        if (u, v) in pairs:
            out.append(del_edge(u, v))
            pairs.discard((u, v))
        else:
            out.append(ins_edge(u, v, rng.randint(1, max_mult)))
            pairs.add((u, v))
    return out


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(12345)
