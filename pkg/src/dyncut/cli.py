"""Command-line front end: run, verify, gen, bench.

Exit codes: 0 ok, 1 verification mismatch, 2 parse, config or input error.
Settings come from defaults, then an optional flat key=value config file,
then command flags. DYNCUT_LOG sets the log level (default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
import time
from dataclasses import dataclass, fields

from .errors import (ConfigError, NonLiftableEdge, ParseError, PreconditionViolated, SizeCapExceeded,
                     UnknownVertex)
from .gen import KINDS, generate
from .graph import Multigraph, UpdateOp, apply_update, format_graph, format_stream, parse_graph, parse_stream
from .hierarchy import DEFAULT_K_PHI, DEFAULT_MAX_LEVELS, DEFAULT_PHI_FLOOR
from .oracle import EXHAUSTIVE_MAX_N, stoer_wagner_size
from .pool import DynamicMinCut
from .verify import cutset_problem, verify_stream

log = logging.getLogger("dyncut")


@dataclass
class Config:
    c: int = 2
    xi: int = 1
    w: int = 12
    max_levels: int = DEFAULT_MAX_LEVELS
    k_phi: float = DEFAULT_K_PHI
    phi_floor: float = DEFAULT_PHI_FLOOR
    exhaustive_n: int = EXHAUSTIVE_MAX_N      # oracle: exhaustive up to this many vertices
    verify_cap: int = 2000                    # verify refuses larger graphs
    seed: int = 0                             # the engine is deterministic; kept for reproducible tooling
    format: str = "json"
    simple: bool = False
    q_only: bool = False
    baseline_every: int = 1
    check_cutsets: bool = False

    def validate(self) -> "Config":
        if self.c < 1:
            raise ConfigError("c must be >= 1")
        if self.xi < 1:
            raise ConfigError("xi must be >= 1")
        if self.w < 2 * 6 ** self.xi:
            raise ConfigError(f"w={self.w} is below 2*6^xi={2 * 6 ** self.xi}")
        if self.max_levels < 1:
            raise ConfigError("max_levels must be >= 1")
        if self.k_phi <= 0:
            raise ConfigError("k_phi must be positive")
        if not 0 < self.phi_floor < 0.5:
            raise ConfigError("phi_floor must lie in (0, 0.5)")
        if not 2 <= self.exhaustive_n <= EXHAUSTIVE_MAX_N + 4:
            raise ConfigError(f"exhaustive_n must lie in [2, {EXHAUSTIVE_MAX_N + 4}]")
        if self.verify_cap < 2:
            raise ConfigError("verify_cap must be >= 2")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.baseline_every < 1:
            raise ConfigError("baseline_every must be >= 1")
        return self

    def engine_kw(self) -> dict:
        return {"max_levels": self.max_levels, "k_phi": self.k_phi, "phi_floor": self.phi_floor}


_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(key, raw):
    kind = _TYPES[key]
    try:
        if kind == "bool":
            low = str(raw).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return str(raw).strip()
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment line."""
    out = {}
    for i, raw in enumerate(text.splitlines(), 1):
        ln = raw.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise ConfigError(f"config line {i}: expected key=value")
        key, val = (x.strip() for x in ln.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"config line {i}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def build_config(args) -> Config:
    vals = {}
    if getattr(args, "config", None):
        vals.update(parse_config(_read(args.config)))
    for key in _TYPES:
        v = getattr(args, key, None)
        if v is not None:
            vals[key] = v
    return Config(**vals).validate()


def _read(path) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    g = parse_graph(_read(args.graph))
    stream = parse_stream(_read(args.stream))
    return g, stream


def _engine(g, cfg: Config) -> DynamicMinCut:
    return DynamicMinCut(g.copy(), cfg.c, cfg.xi, cfg.w, simple=cfg.simple, **cfg.engine_kw())


def _op_text(op: UpdateOp) -> str:
    return "q" if op.kind == "q" else str(op)


class _Out:
    """Writes to a file or stdout."""

    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        else:
            self.fh.flush()


# ------------------------------------------------------------ commands

def cmd_run(args) -> int:
    cfg = build_config(args)
    g, stream = _load(args)
    ref = g.copy() if cfg.check_cutsets else None
    eng = _engine(g, cfg)
    with _Out(args.out) as fh:
        wr = None
        if cfg.format == "csv":
            wr = csv.writer(fh)
            wr.writerow(["op_index", "op", "answer_size", "cutset", "elapsed_ns"])
        for i, op in enumerate(stream, 1):
            t0 = time.perf_counter_ns()
            eng.update(op)
            emit = op.kind == "q" or not cfg.q_only
            ans = eng.query() if emit else None
            dt = time.perf_counter_ns() - t0
            if ref is not None and op.kind != "q":
                apply_update(ref, UpdateOp(op.kind, op.u, op.v, op.mult))
            if not emit:
                continue
            if ref is not None and ans.size is not None:
                why = cutset_problem(ref, ans.cutset, ans.size)
                if why:
                    log.error("op %d: %s", i, why)
                    return 1
            cut = [list(t) for t in ans.cutset] if ans.size is not None else []
            if wr is not None:
                wr.writerow([i, _op_text(op), "" if ans.size is None else ans.size,
                             ";".join(f"{u}-{v}-{m}" for u, v, m in cut), dt])
            else:
                fh.write(json.dumps({"op_index": i, "op": _op_text(op), "answer_size": ans.size,
                                     "cutset": cut, "elapsed_ns": dt}) + "\n")
    return 0


def cmd_verify(args) -> int:
    cfg = build_config(args)
    g, stream = _load(args)
    rep = verify_stream(g, stream, cfg.c, cfg.xi, cfg.w, simple=cfg.simple,
                        exhaustive_n=cfg.exhaustive_n, cap=cfg.verify_cap, **cfg.engine_kw())
    with _Out(args.report) as fh:
        fh.write(rep.jsonl())
    bad = rep.mismatches
    for r in bad[:10]:
        log.error("op %d: %s", r.op_index, r.detail)
    print(f"{rep.checks} checks, {len(bad)} mismatches", file=sys.stderr)
    return 0 if not bad else 1


def cmd_gen(args) -> int:
    if args.n < 0 or args.ops < 0:
        raise ConfigError("n and ops must be >= 0")
    try:
        g, ops, sizes = generate(args.kind, args.n, args.ops, args.seed, args.c)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    head = f"# gen {args.kind} n={args.n} ops={args.ops} seed={args.seed} c={args.c}\n"
    files = {
        ".graph": format_graph(g),
        ".stream": head + format_stream(ops),
        ".sizes": "".join(f"{i} {'-' if s is None else s}\n" for i, s in enumerate(sizes, 1)),
    }
    for ext, text in files.items():
        with open(args.prefix + ext, "w") as fh:
            fh.write(text)
    return 0


def _baseline_size(g: Multigraph):
    t0 = time.perf_counter_ns()
    s = stoer_wagner_size(g)
    return time.perf_counter_ns() - t0, s


def cmd_bench(args) -> int:
    cfg = build_config(args)
    g, stream = _load(args)
    ref = g.copy()
    eng = None if args.baseline_only else _engine(g, cfg)
    eng_ns, base_ns = [], []
    with _Out(args.out) as fh:
        wr = csv.writer(fh)
        wr.writerow(["op_index", "engine_ns", "baseline_ns", "answer_size"])
        k = 0
        for i, op in enumerate(stream, 1):
            if op.kind == "q":
                continue
            apply_update(ref, UpdateOp(op.kind, op.u, op.v, op.mult))
            row_e, size = "", ""
            if eng is not None:
                t0 = time.perf_counter_ns()
                eng.update(op)
                ans = eng.query()
                dt = time.perf_counter_ns() - t0
                eng_ns.append(dt)
                row_e = dt
                size = "" if ans.size is None else ans.size
            row_b = ""
            if k % cfg.baseline_every == 0:
                dt, s = _baseline_size(ref)
                base_ns.append(dt)
                row_b = dt
                if eng is None and s <= cfg.c:
                    size = int(s)
            k += 1
            wr.writerow([i, row_e, row_b, size])
    if eng_ns and base_ns:
        em, bm = statistics.median(eng_ns), statistics.median(base_ns)
        print(f"engine median {em / 1e6:.3f} ms, baseline median {bm / 1e6:.3f} ms, "
              f"ratio {bm / max(em, 1):.1f}", file=sys.stderr)
    return 0


# ------------------------------------------------------------ parser

def _common(p, with_files=True):
    if with_files:
        p.add_argument("graph", help="graph file")
        p.add_argument("stream", help="update stream file")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--c", type=int, help="cut threshold (answers above it are null)")
    p.add_argument("--xi", type=int, help="batches per instance")
    p.add_argument("--w", type=int, help="ops per batch (>= 2*6^xi)")
    p.add_argument("--simple", action="store_const", const=True,
                   help="input is simple; degree-reduce it and lift answers back")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-levels", dest="max_levels", type=int)
    p.add_argument("--k-phi", dest="k_phi", type=float)
    p.add_argument("--phi-floor", dest="phi_floor", type=float)
    p.add_argument("--exhaustive-n", dest="exhaustive_n", type=int,
                   help="oracle is exhaustive up to this many vertices")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dyncut", description="Fully dynamic minimum c-cut engine.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="answer after every op (or at q markers)")
    _common(p)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--q-only", dest="q_only", action="store_const", const=True,
                   help="answer only at q markers")
    p.add_argument("--check-cutsets", dest="check_cutsets", action="store_const", const=True,
                   help="check every cut-set against a copy of the graph")
    p.add_argument("-o", "--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="compare every answer with the oracle")
    _common(p)
    p.add_argument("--cap", dest="verify_cap", type=int, help="largest graph accepted")
    p.add_argument("--report", help="JSON-lines report file (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write PREFIX.graph, PREFIX.stream and PREFIX.sizes")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("n", type=int)
    p.add_argument("ops", type=int)
    p.add_argument("prefix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=int, default=2, help="largest planted cut (planted-cut only)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="per-op latency against a from-scratch Stoer-Wagner baseline")
    _common(p)
    p.add_argument("--baseline-every", dest="baseline_every", type=int,
                   help="run the baseline every k-th op (default every op)")
    p.add_argument("--baseline-only", action="store_true", help="leave the engine column empty")
    p.add_argument("-o", "--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("DYNCUT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError, SizeCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PreconditionViolated, UnknownVertex, NonLiftableEdge) as exc:
        # the stream does not fit the graph (deleting a missing edge and the like)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
