"""Experiment harness: build/repair campaigns, oracle checks, CSV output.

Each trial generates a graph, runs the requested algorithm, verifies the
result against the centralized oracle, and emits one CSV row.  Repair
trials start from the oracle forest and push a seeded stream of topology
changes through the impromptu repairs, re-checking the forest after every
event; their `messages` column is the total over the stream and
`event_messages` the per-event mean, which is what the normalized columns
use.  Normalized columns:

    norm_nlg2   messages / (n * lg^2 n / lglg n)
    norm_nlg    messages / (n * lg n)
    norm_m      messages / m
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .algorithms import (apply_update, build_mst, build_st, UpdateEvent)
from .generators import generate
from .graphs import Graph
from .oracles import is_spanning_forest, kruskal
from .runtime import SimConfig

CSV_COLUMNS = ["algorithm", "n", "m", "seed", "messages", "bits", "rounds",
               "success", "oracle_match", "event_messages",
               "norm_nlg2", "norm_nlg", "norm_m"]


@dataclass
class ExperimentSpec:
    algorithm: str                       # build-mst|build-st|repair-mst|repair-st
    n_list: List[int] = field(default_factory=lambda: [64])
    m_expr: str = "4*n"
    u_expr: str = "n**3"
    trials: int = 3
    seed: int = 0
    c: int = 2
    mode: str = "sync"
    delay: str = "uniform:4"
    model: str = "random-tree-plus"
    fast_forward: bool = True
    events: int = 50
    trace: bool = False


def eval_size_expr(expr: str, n: int) -> int:
    """Evaluate an m/u expression in terms of n, e.g. '4*n' or 'n^1.5'."""
    text = expr.replace("^", "**")
    try:
        val = eval(text, {"__builtins__": {}},
                   {"n": n, "log": math.log, "log2": math.log2,
                    "sqrt": math.sqrt, "ceil": math.ceil,
                    "floor": math.floor, "min": min, "max": max})
    except Exception as exc:
        raise ValueError(f"bad size expression {expr!r}: {exc}") from None
    out = int(val)
    if out < 1:
        raise ValueError(f"size expression {expr!r} gave {out} at n={n}")
    return out


def _norms(messages: float, n: int, m: int) -> Dict[str, float]:
    lg = math.log2(max(2, n))
    lglg = math.log2(max(2.0, lg))
    return {
        "norm_nlg2": round(messages / (n * lg * lg / lglg), 4),
        "norm_nlg": round(messages / (n * lg), 4),
        "norm_m": round(messages / max(1, m), 4),
    }


def _build_trial(spec: ExperimentSpec, n: int, m: int, u: int, seed: int,
                 trace_sink) -> Dict:
    g = generate(spec.model, n, m, u, seed)
    cfg = SimConfig(seed=seed, mode="sync", c=spec.c, trace=spec.trace)
    if spec.algorithm == "build-mst":
        g2, rep = build_mst(g, cfg, fast_forward=spec.fast_forward)
        match = g2.marks == kruskal(g).forest
    else:
        g2, rep = build_st(g, cfg, fast_forward=spec.fast_forward)
        match = is_spanning_forest(g2)
    if spec.trace and trace_sink is not None:
        trace_sink.extend(rep.outcome.get("trace", []))
    success = bool(rep.outcome.get("complete")) and "timeout" not in rep.outcome
    row = {"algorithm": spec.algorithm, "n": n, "m": g.m, "seed": seed,
           "messages": rep.messages, "bits": rep.bits, "rounds": rep.rounds,
           "success": int(success), "oracle_match": int(match),
           "event_messages": ""}
    row.update(_norms(rep.messages, n, g.m))
    return row


def _pick_event(rng: random.Random, g: Graph, variant: str, u: int
                ) -> Optional[UpdateEvent]:
    edges = sorted(g.edges)
    nodes = g.nodes
    n = len(nodes)
    kinds = ["delete", "insert"] if variant == "st" else \
        ["delete", "delete", "insert", "insert", "weight"]
    for _ in range(64):
        kind = rng.choice(kinds)
        if kind == "delete":
            if not edges:
                continue
            a, b = edges[rng.randrange(len(edges))]
            return UpdateEvent("delete", a, b)
        if kind == "insert":
            if g.m >= n * (n - 1) // 2:
                continue
            for _ in range(128):
                a = nodes[rng.randrange(n)]
                b = nodes[rng.randrange(n)]
                if a == b:
                    continue
                if (min(a, b), max(a, b)) in g.edges:
                    continue
                return UpdateEvent("insert", a, b, rng.randint(1, u))
            continue
        if not edges:
            continue
        a, b = edges[rng.randrange(len(edges))]
        return UpdateEvent("weight", a, b, rng.randint(1, u))
    return None


def _repair_trial(spec: ExperimentSpec, n: int, m: int, u: int, seed: int,
                  trace_sink) -> Dict:
    variant = "mst" if spec.algorithm == "repair-mst" else "st"
    g = generate(spec.model, n, m, u, seed)
    g = g.with_marks(kruskal(g).forest)
    rng = random.Random(seed ^ 0x5EED)
    cfg = SimConfig(seed=seed, mode=spec.mode, c=spec.c, delay=spec.delay,
                    trace=spec.trace)
    total_msgs = total_bits = rounds = 0
    ok = True
    done = 0
    for i in range(spec.events):
        ev = _pick_event(rng, g, variant, u)
        if ev is None:
            break
        g, rep = apply_update(g, ev, variant, cfg)
        done += 1
        total_msgs += rep.messages
        total_bits += rep.bits
        rounds = max(rounds, rep.rounds)
        if spec.trace and trace_sink is not None:
            trace_sink.extend(rep.outcome.get("trace", []))
        if variant == "mst":
            ok = ok and g.marks == kruskal(g).forest
        else:
            ok = ok and is_spanning_forest(g)
        if not ok:
            break
    mean = total_msgs / max(1, done)
    row = {"algorithm": spec.algorithm, "n": n, "m": g.m, "seed": seed,
           "messages": total_msgs, "bits": total_bits, "rounds": rounds,
           "success": int(done > 0), "oracle_match": int(ok),
           "event_messages": round(mean, 2)}
    row.update(_norms(mean, n, g.m))
    return row


def run_experiment(spec: ExperimentSpec, trace_sink: Optional[list] = None
                   ) -> List[Dict]:
    rows = []
    for n in spec.n_list:
        m = eval_size_expr(spec.m_expr, n)
        u = eval_size_expr(spec.u_expr, n)
        for t in range(spec.trials):
            seed = spec.seed * 1_000_003 + t * 7919 + n
            if spec.algorithm.startswith("build"):
                rows.append(_build_trial(spec, n, m, u, seed, trace_sink))
            else:
                rows.append(_repair_trial(spec, n, m, u, seed, trace_sink))
    return rows


def write_csv(rows: List[Dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
