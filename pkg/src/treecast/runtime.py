"""Discrete-event runtime for synchronous / asynchronous message passing.

Synchronous mode: a global round counter; every message sent during round t is
delivered in round t+1; per-node timers let protocols wake at barrier rounds,
and the clock jumps over empty rounds, so a run's cost is proportional to its
traffic, not its round span.  Asynchronous mode: each message is delivered
eventually, chosen by a delay policy (uniform random in [1, D], or an
adversarial LIFO policy that always delivers the most recently sent eligible
message), with FIFO order preserved per directed edge.

Every send is charged its encoded bit length from the protocol's fixed layout
table and checked against the per-message width cap W_max; sending over a
non-edge or oversize is a hard failure.  Counters (messages, bits, rounds) and
per-node RNG streams are derived deterministically from the master seed, so a
run is replayable byte-for-byte.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Tuple

from .graphs import Graph, canonical, edge_number, augmented_weight

INF = float("inf")


class RuntimeError_(Exception):
    pass


class TopologyError(RuntimeError_):
    """Message addressed over a non-existent edge."""


class OversizeError(RuntimeError_):
    """Message exceeds the W_max bit budget."""


class ScheduleError(RuntimeError_):
    pass


@dataclass
class SimConfig:
    """Run parameters shared by all protocols.

    c is the correctness exponent (failure probability targets n^-c),
    c_msg scales the per-message bit cap, q_inv is the inverse of the
    odd-hash detection bound (1/8), n_known lets nodes run with an upper
    bound on n instead of the exact count.
    """
    seed: int = 0
    mode: str = "sync"              # "sync" | "async"
    c: int = 2
    c_msg: int = 4
    c_mem: int = 16
    q_inv: int = 8
    fixed_prime: bool = True
    fanout: Optional[int] = None    # TestOut sub-range count, default = word
    n_known: Optional[int] = None
    delay: str = "uniform:4"        # async policy: "uniform:D" | "lifo"
    round_limit: Optional[int] = None
    trace: bool = False


@dataclass
class RunReport:
    messages: int
    bits: int
    rounds: int
    outcome: Dict[str, Any]
    seed: int


@dataclass(frozen=True)
class Message:
    """API/trace-level view of one delivery."""
    src: int
    dst: int
    kind: str
    payload: Tuple
    bits: int


def node_stream(master_seed: int, node_id: int) -> random.Random:
    """Per-node RNG stream, independent of delivery order."""
    digest = hashlib.sha256(f"{master_seed}:{node_id}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class NodeRuntime:
    """One simulated node: local view plus transient protocol state."""

    __slots__ = ("id", "nbrs", "marked", "rng", "st",
                 "edge_info", "aug_by", "en_set", "asleep")

    def __init__(self, nid: int, nbrs: Dict[int, int], rng: random.Random):
        self.id = nid
        self.nbrs = nbrs            # neighbor id -> raw weight
        self.marked: set = set()    # neighbor ids this endpoint has marked
        self.rng = rng
        self.st: Dict[str, Any] = {}
        self.asleep = False         # fragment known maximal; skips barriers
        self.edge_info: List[Tuple[int, int, int]] = []  # (nbr, en, aug)
        self.aug_by: Dict[int, int] = {}
        self.en_set: set = set()

    def tree_nbrs(self) -> List[int]:
        return sorted(self.marked)


def state_bits(node: NodeRuntime, word: int) -> int:
    """Rough bit count of a node's protocol state (driver = O(1) words)."""

    def sz(v) -> int:
        if isinstance(v, bool):
            return 1
        if isinstance(v, int):
            return max(1, v.bit_length())
        if isinstance(v, (tuple, list, set, frozenset)):
            return sum(sz(x) for x in v) + len(v)
        if v is None:
            return 1
        return 8 * word
    return sum(sz(v) for v in node.st.values())


class Simulation:
    """One protocol execution over a graph with an initial mark state."""

    def __init__(self, graph: Graph, protocol, config: Optional[SimConfig] = None,
                 marks=None):
        self.graph = graph
        self.config = config or SimConfig()
        self.protocol = protocol
        self.clock = 0
        self.msg_count = 0
        self.bit_count = 0
        self.sends = 0
        self.deliveries = 0
        self.outcome: Dict[str, Any] = {}
        self.trace: List[str] = []
        self._seq = 0
        self._timers: List[Tuple[int, int, int, str, Any]] = []
        self._next: List[Tuple] = []      # sync: deliveries for round clock+1
        self.aborted = False

        seed = self.config.seed
        self.nodes: Dict[int, NodeRuntime] = {}
        for v in graph.nodes:
            node = NodeRuntime(v, graph.adj[v], node_stream(seed, v))
            for nb in sorted(graph.adj[v]):
                en = graph.edge_number_of(v, nb)
                aug = augmented_weight(graph.adj[v][nb], en, graph.en_bits)
                node.edge_info.append((nb, en, aug))
                node.aug_by[nb] = aug
                node.en_set.add(en)
            self.nodes[v] = node
        mk = graph.marks if marks is None else frozenset(
            canonical(a, b) for a, b in marks)
        for a, b in mk:
            self.nodes[a].marked.add(b)
            self.nodes[b].marked.add(a)

        # message layout: W_max over the full transmitted value domain
        self.word = max(1, (graph.n + graph.max_aug_bound()).bit_length())
        self.w_max = self.config.c_msg * self.word
        self.kind_bits: Dict[int, int] = {}
        self.kind_names: Dict[int, str] = {}
        prep = getattr(protocol, "prepare", None)
        if prep is not None:
            prep(self)
        self.handlers = protocol.handlers
        self.timer_handlers = getattr(protocol, "timer_handlers", {})

    # -- wiring ---------------------------------------------------------------

    def register_kind(self, kind: int, name: str, bits: int) -> None:
        if bits > self.w_max:
            raise OversizeError(f"{name} layout {bits}b exceeds W_max {self.w_max}b")
        self.kind_bits[kind] = bits
        self.kind_names[kind] = name

    def send(self, src: int, dst: int, kind: int, payload: Tuple = (),
             bits: Optional[int] = None) -> None:
        if dst not in self.nodes[src].nbrs:
            raise TopologyError(f"{src} -> {dst} is not an edge")
        if bits is None:
            bits = self.kind_bits[kind]
        if bits > self.w_max:
            raise OversizeError(
                f"{self.kind_names.get(kind, kind)} {bits}b > W_max {self.w_max}b")
        self.msg_count += 1
        self.sends += 1
        self.bit_count += bits
        self._next.append((dst, src, kind, payload, bits))

    def schedule_timer(self, rnd: int, node_id: int, tag: str, data=None) -> None:
        if rnd < self.clock:
            raise ScheduleError(f"timer for past round {rnd} at clock {self.clock}")
        self._seq += 1
        heapq.heappush(self._timers, (rnd, self._seq, node_id, tag, data))

    # -- invariant checks -----------------------------------------------------

    def check_properly_marked(self) -> None:
        for v, node in self.nodes.items():
            for nb in node.marked:
                if v not in self.nodes[nb].marked:
                    raise RuntimeError_(f"mark on {v}-{nb} is one-sided")

    def final_marks(self) -> FrozenSet[Tuple[int, int]]:
        self.check_properly_marked()
        return frozenset(canonical(v, nb)
                         for v, node in self.nodes.items()
                         for nb in node.marked if v < nb)

    def check_quiescent(self) -> None:
        if self.aborted:
            return
        if self.sends != self.deliveries:
            raise RuntimeError_(
                f"exactly-once violated: {self.sends} sends, "
                f"{self.deliveries} deliveries")

    def check_states_empty(self) -> None:
        for node in self.nodes.values():
            if node.st:
                raise RuntimeError_(
                    f"node {node.id} retains state {sorted(node.st)}")

    # -- execution ------------------------------------------------------------

    def run(self, until: Optional[int] = None) -> None:
        if self.config.mode == "sync":
            self._run_sync(until)
        else:
            self._run_async()

    def start(self) -> None:
        self.protocol.start(self)

    def _dispatch(self, batch: List[Tuple]) -> None:
        handlers = self.handlers
        nodes = self.nodes
        trace = self.trace if self.config.trace else None
        for dst, src, kind, payload, bits in batch:
            self.deliveries += 1
            if trace is not None:
                trace.append(
                    f"{self.clock} {src} {dst} {self.kind_names.get(kind, kind)} {bits}")
            handlers[kind](self, nodes[dst], src, payload)

    def _run_sync(self, until: Optional[int] = None) -> None:
        limit = self.config.round_limit
        if limit is None:
            limit = 10_000 * max(1, self.graph.n)
        timers = self._timers
        while True:
            # pending messages are always due exactly one round after the
            # round they were sent in, so a non-empty queue pins the next
            # active round to clock+1; otherwise jump to the next timer.
            nxt = INF
            if self._next:
                nxt = self.clock + 1
            if timers and timers[0][0] < nxt:
                nxt = timers[0][0]
            if nxt is INF or (until is not None and nxt > until):
                return
            if nxt > limit:
                self.outcome["timeout"] = True
                self.aborted = True
                return
            self.clock = nxt
            batch, self._next = self._next, []
            while timers and timers[0][0] == nxt:
                _, _, nid, tag, data = heapq.heappop(timers)
                self.timer_handlers[tag](self, self.nodes[nid], data)
            if batch:
                self._dispatch(batch)

    def _run_async(self) -> None:
        if self._timers:
            raise ScheduleError("timers are not supported in async mode")
        policy = self.config.delay
        drng = node_stream(self.config.seed, -1)
        limit = self.config.round_limit
        if limit is None:
            limit = 10_000 * max(1, self.graph.n)
        if policy.startswith("uniform"):
            dmax = int(policy.split(":")[1]) if ":" in policy else 4
            self._run_async_uniform(dmax, drng, limit)
        elif policy == "lifo":
            self._run_async_lifo(limit)
        else:
            raise ScheduleError(f"unknown delay policy {policy!r}")

    def _run_async_uniform(self, dmax: int, drng: random.Random,
                           limit: int) -> None:
        # heap of (time, seq, dst, src, kind, payload, bits); per-edge FIFO
        # enforced by clamping each edge's delivery times to be nondecreasing.
        heap: List[Tuple] = []
        last: Dict[Tuple[int, int], int] = {}
        seq = 0
        while True:
            for dst, src, kind, payload, bits in self._next:
                t = self.clock + drng.randint(1, dmax)
                key = (src, dst)
                prev = last.get(key, 0)
                if t < prev:
                    t = prev
                last[key] = t
                seq += 1
                heapq.heappush(heap, (t, seq, dst, src, kind, payload, bits))
            self._next = []
            if not heap:
                return
            t, _, dst, src, kind, payload, bits = heapq.heappop(heap)
            if t > limit:
                self.outcome["timeout"] = True
                self.aborted = True
                return
            self.clock = max(self.clock, t)
            self._dispatch([(dst, src, kind, payload, bits)])

    def _run_async_lifo(self, limit: int) -> None:
        # per directed edge a FIFO queue; among queue heads always deliver
        # the one sent most recently (max send seq).
        from collections import deque
        queues: Dict[Tuple[int, int], Any] = {}
        ready: List[Tuple[int, Tuple[int, int]]] = []
        seq = 0
        steps = 0
        while True:
            for dst, src, kind, payload, bits in self._next:
                key = (src, dst)
                q = queues.get(key)
                if q is None:
                    q = queues[key] = deque()
                seq += 1
                q.append((seq, dst, src, kind, payload, bits))
                if len(q) == 1:
                    heapq.heappush(ready, (-seq, key))
            self._next = []
            if not ready:
                return
            _, key = heapq.heappop(ready)
            q = queues[key]
            _, dst, src, kind, payload, bits = q.popleft()
            if q:
                heapq.heappush(ready, (-q[0][0], key))
            steps += 1
            if steps > limit:
                self.outcome["timeout"] = True
                self.aborted = True
                return
            self.clock = steps
            self._dispatch([(dst, src, kind, payload, bits)])

    def report(self) -> RunReport:
        self.check_quiescent()
        out = dict(self.outcome)
        if self.config.trace:
            out["trace"] = list(self.trace)
        return RunReport(messages=self.msg_count, bits=self.bit_count,
                         rounds=max(0, self.clock), outcome=out,
                         seed=self.config.seed)


def run_synchronous(graph: Graph, protocol, config: Optional[SimConfig] = None,
                    marks=None) -> RunReport:
    config = config or SimConfig()
    if config.mode != "sync":
        config = SimConfig(**{**config.__dict__, "mode": "sync"})
    sim = Simulation(graph, protocol, config, marks)
    sim.start()
    sim.run()
    return sim.report()


def run_asynchronous(graph: Graph, protocol, config: Optional[SimConfig] = None,
                     marks=None) -> RunReport:
    config = config or SimConfig(mode="async")
    if config.mode != "async":
        config = SimConfig(**{**config.__dict__, "mode": "async"})
    sim = Simulation(graph, protocol, config, marks)
    sim.start()
    sim.run()
    return sim.report()
