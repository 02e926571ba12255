"""Agents on a graph: partitioning, distribution, and BSP stepping.

Agents live on an arbitrary (by default undirected) graph and are assigned
to worker ranks by a partitioner.  Each rank owns its agents plus shadow
copies of non-owned neighbors (the halo).  A step runs in bulk-synchronous
rounds: every owned agent's next state is a pure function of its own and
its neighbors' previous-round states, then halos are refreshed via
serialized messages.  Because updates never see in-round state, the global
result is byte-identical for any worker count.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

from .checkpoint import decode_object_into, encode_object
from .descriptor import TypeDescriptor
from .errors import (
    AgentUpdateError,
    EmptyGraph,
    FrameworkError,
    InvalidWorkerCount,
    MissingWeight,
    RankCountMismatch,
)
from .runtime import Runtime, pack_message, unpack_message

# update(agent_id, state, neighbors) -> new state; neighbors are
# (id, previous-round state) pairs sorted by id.
UpdateFn = Callable[[int, Any, list[tuple[int, Any]]], Any]


class AgentGraph:
    """Agents keyed by unsigned id with (optionally directed) adjacency."""

    def __init__(self, directed: bool = False):
        self.directed = directed
        self.agents: dict[int, Any] = {}
        self._adj: dict[int, set[int]] = {}

    def add_agent(self, agent_id: int, state: Any = None) -> None:
        self.agents[agent_id] = state
        self._adj.setdefault(agent_id, set())

    def add_edge(self, u: int, v: int) -> None:
        for node in (u, v):
            if node not in self.agents:
                self.add_agent(node)
        self._adj[u].add(v)
        if not self.directed:
            self._adj[v].add(u)

    def neighbors(self, agent_id: int) -> list[int]:
        return sorted(self._adj[agent_id])

    def degree(self, agent_id: int) -> int:
        return len(self._adj[agent_id])

    def ids(self) -> list[int]:
        return sorted(self.agents)

    def __len__(self) -> int:
        return len(self.agents)

    @staticmethod
    def parse(text: str, directed: bool = False) -> "AgentGraph":
        """Parse the edge-list format: "u v" per line, "u" alone for an
        isolated agent, "#" comments."""
        g = AgentGraph(directed=directed)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                g.add_agent(int(parts[0]))
            elif len(parts) == 2:
                g.add_edge(int(parts[0]), int(parts[1]))
            else:
                raise ValueError(f"line {lineno}: expected 'u v' or 'u', got {raw!r}")
        return g

    @staticmethod
    def load(path: Path | str, directed: bool = False) -> "AgentGraph":
        return AgentGraph.parse(Path(path).read_text(encoding="utf-8"), directed)


def random_graph(n: int, edge_prob: float, seed: int,
                 init: Callable[[int], Any] | None = None) -> AgentGraph:
    """Deterministic Erdős–Rényi graph on ids 0..n-1."""
    rng = random.Random(seed)
    g = AgentGraph()
    for i in range(n):
        g.add_agent(i, init(i) if init else None)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                g.add_edge(u, v)
    return g


@dataclass
class Partition:
    """Total assignment of agents to ranks 0..n_ranks-1."""

    assignment: dict[int, int]
    n_ranks: int

    def validate(self, graph: AgentGraph | None = None) -> None:
        if graph is not None and set(self.assignment) != set(graph.agents):
            raise FrameworkError("partition does not cover the graph's agents")
        for aid, rank in self.assignment.items():
            if not 0 <= rank < self.n_ranks:
                raise FrameworkError(f"agent {aid} assigned to invalid rank {rank}")

    def owned(self, rank: int) -> list[int]:
        return sorted(a for a, r in self.assignment.items() if r == rank)

    def loads(self) -> list[int]:
        counts = [0] * self.n_ranks
        for rank in self.assignment.values():
            counts[rank] += 1
        return counts


ROUND_ROBIN = "round_robin"
GREEDY_BFS = "greedy_bfs"


def partition(g: AgentGraph, n: int, method: str = ROUND_ROBIN) -> Partition:
    """Assign every agent to a rank; max load is at most ceil(|V|/n).

    round_robin: the i-th smallest id goes to rank i mod n.
    greedy_bfs: BFS from the smallest unassigned id fills the current rank
    up to ceil(|V|/n) agents before starting the next; disconnected
    remainders reseed from the smallest unassigned id.
    """
    if len(g) == 0:
        raise EmptyGraph("cannot partition an empty graph")
    if n < 1:
        raise InvalidWorkerCount(f"need at least one rank, got {n}")
    ids = g.ids()
    if method == ROUND_ROBIN:
        return Partition({aid: i % n for i, aid in enumerate(ids)}, n)
    if method != GREEDY_BFS:
        raise ValueError(f"unknown partition method {method!r}")

    cap = math.ceil(len(ids) / n)
    assignment: dict[int, int] = {}
    remaining = set(ids)
    rank = 0
    count = 0
    queue: list[int] = []
    head = 0
    while remaining:
        if head >= len(queue):
            queue, head = [min(remaining)], 0
        aid = queue[head]
        head += 1
        if aid not in remaining:
            continue
        remaining.discard(aid)
        assignment[aid] = rank
        count += 1
        if count == cap:
            rank += 1
            count = 0
        for nb in g.neighbors(aid):
            if nb in remaining:
                queue.append(nb)
    return Partition(assignment, n)


def rebalance(g: AgentGraph, p: Partition, weights: dict[int, float]) -> Partition:
    """Greedy boundary migration: repeatedly move the smallest-id boundary
    agent off the heaviest rank to its lightest adjacent rank while that
    strictly reduces the maximum rank weight."""
    for aid in p.assignment:
        if aid not in weights:
            raise MissingWeight(f"no weight for agent {aid}")
        if weights[aid] <= 0:
            raise MissingWeight(f"agent {aid} weight must be positive")

    assignment = dict(p.assignment)
    rank_weight = [0.0] * p.n_ranks
    for aid, rank in assignment.items():
        rank_weight[rank] += weights[aid]

    while True:
        current_max = max(rank_weight)
        heavy = rank_weight.index(current_max)
        move: tuple[int, int] | None = None
        for aid in sorted(a for a, r in assignment.items() if r == heavy):
            adjacent = {assignment[nb] for nb in g.neighbors(aid)} - {heavy}
            if not adjacent:
                continue
            target = min(adjacent, key=lambda r: (rank_weight[r], r))
            candidates = [rank_weight[r] for r in range(p.n_ranks) if r not in (heavy, target)]
            candidates += [rank_weight[heavy] - weights[aid], rank_weight[target] + weights[aid]]
            if max(candidates) < current_max:
                move = (aid, target)
                break
        if move is None:
            break
        aid, target = move
        rank_weight[heavy] -= weights[aid]
        rank_weight[target] += weights[aid]
        assignment[aid] = target
    return Partition(assignment, p.n_ranks)


# --- BSP execution -----------------------------------------------------------

def _pack_records(records: Iterable[tuple[int, bytes]]) -> bytes:
    items = list(records)
    out = bytearray(struct.pack("<Q", len(items)))
    for aid, blob in items:
        out += struct.pack("<QQ", aid, len(blob))
        out += blob
    return bytes(out)


def _unpack_records(data: bytes) -> list[tuple[int, bytes]]:
    (count,) = struct.unpack_from("<Q", data, 0)
    offset = 8
    records = []
    for _ in range(count):
        aid, blen = struct.unpack_from("<QQ", data, offset)
        offset += 16
        records.append((aid, data[offset:offset + blen]))
        offset += blen
    return records


@dataclass
class Shard:
    """One rank's slice of the graph: owned agents, shadows, halo plan."""

    rank: int
    owned: dict[int, Any] = field(default_factory=dict)
    shadows: dict[int, Any] = field(default_factory=dict)
    adjacency: dict[int, list[int]] = field(default_factory=dict)
    exports: dict[int, list[int]] = field(default_factory=dict)  # rank -> owned ids

    def neighbor_state(self, agent_id: int) -> Any:
        if agent_id in self.owned:
            return self.owned[agent_id]
        return self.shadows[agent_id]


class BspEngine:
    """Coordinates distribution, stepping, and halo exchange from rank 0."""

    def __init__(self, graph: AgentGraph, part: Partition, runtime: Runtime,
                 update_fn: UpdateFn, agent_type: TypeDescriptor,
                 agent_factory: Callable[[], Any]):
        if part.n_ranks != runtime.n_workers:
            raise RankCountMismatch(
                f"partition has {part.n_ranks} ranks, runtime has {runtime.n_workers}")
        part.validate(graph)
        self.graph = graph
        self.part = part
        self.runtime = runtime
        self.update_fn = update_fn
        self.agent_type = agent_type
        self.agent_factory = agent_factory
        self._distributed = False

    # -- codec --------------------------------------------------------------

    def _encode(self, state: Any) -> bytes:
        return encode_object(self.agent_type, state)

    def _decode(self, blob: bytes) -> Any:
        return decode_object_into(self.agent_type, self.agent_factory(), blob)

    # -- distribution ---------------------------------------------------------

    def distribute(self) -> None:
        """Install each rank's shard: owned copies plus halo shadows."""
        assign = self.part.assignment
        for w in self.runtime.workers:
            shard = Shard(w.rank)
            for aid in self.part.owned(w.rank):
                shard.owned[aid] = self._decode(self._encode(self.graph.agents[aid]))
                shard.adjacency[aid] = self.graph.neighbors(aid)
            for aid, nbs in shard.adjacency.items():
                for nb in nbs:
                    owner = assign[nb]
                    if owner != w.rank:
                        shard.shadows[nb] = None  # filled by the first sync
            w.shard = shard
            self._install_handlers(w)
        # Export plan is consumer-driven: whoever shadows an agent gets it
        # from the owner at every sync (correct for directed graphs too).
        exports: dict[int, dict[int, set[int]]] = {w.rank: {} for w in self.runtime.workers}
        for w in self.runtime.workers:
            for aid in w.shard.shadows:
                exports[assign[aid]].setdefault(w.rank, set()).add(aid)
        for w in self.runtime.workers:
            w.shard.exports = {rank: sorted(ids)
                               for rank, ids in sorted(exports[w.rank].items())}
        self._distributed = True
        self.sync_halos()

    def _install_handlers(self, worker: Any) -> None:
        shard: Shard = worker.shard

        def compute(_body: bytes) -> bytes:
            next_states: dict[int, Any] = {}
            for aid in sorted(shard.owned):
                neighbors = [(nb, shard.neighbor_state(nb)) for nb in shard.adjacency[aid]]
                try:
                    next_states[aid] = self.update_fn(aid, shard.owned[aid], neighbors)
                except FrameworkError:
                    raise
                except Exception as exc:
                    raise AgentUpdateError(worker.rank, aid, exc) from exc
            shard.owned = next_states
            return pack_message("ok")

        def export(body: bytes) -> bytes:
            (target,) = struct.unpack("<I", body)
            ids = shard.exports.get(target, [])
            return pack_message("halo", _pack_records(
                (aid, self._encode(shard.owned[aid])) for aid in ids))

        def halo(body: bytes) -> bytes:
            for aid, blob in _unpack_records(body):
                shard.shadows[aid] = self._decode(blob)
            return pack_message("ok")

        def gather(_body: bytes) -> bytes:
            return pack_message("agents", _pack_records(
                (aid, self._encode(shard.owned[aid])) for aid in sorted(shard.owned)))

        def scatter(body: bytes) -> bytes:
            for aid, blob in _unpack_records(body):
                shard.owned[aid] = self._decode(blob)
            return pack_message("ok")

        worker.handlers.update({
            "bsp.compute": compute,
            "bsp.export": export,
            "bsp.halo": halo,
            "bsp.gather": gather,
            "bsp.scatter": scatter,
        })

    def _require_distributed(self) -> None:
        if not self._distributed:
            raise FrameworkError("distribute() has not been called")

    # -- stepping -----------------------------------------------------------

    def step(self, rounds: int = 1) -> None:
        self._require_distributed()
        for _ in range(rounds):
            # Compute phase: every rank advances its owned agents using only
            # previous-round state (shadows for remote neighbors).
            for w in self.runtime.workers:
                self.runtime.send(w.rank, pack_message("bsp.compute"))
            # Barrier is implicit: all computes completed before any sync.
            self.sync_halos()

    def sync_halos(self) -> None:
        """Refresh every shadow copy from its owner's current state."""
        self._require_distributed()
        for src in self.runtime.workers:
            shard: Shard = src.shard
            for target_rank in shard.exports:
                replies = self.runtime.send(
                    src.rank, pack_message("bsp.export", struct.pack("<I", target_rank)))
                _, records = unpack_message(replies[-1])
                self.runtime.send(target_rank, pack_message("bsp.halo", records))

    # -- global state access (rank-0 coordination) ----------------------------

    def gather(self) -> list[tuple[int, Any]]:
        """All agent states in global id order, decoded from owner messages."""
        self._require_distributed()
        collected: dict[int, Any] = {}
        for w in self.runtime.workers:
            replies = self.runtime.send(w.rank, pack_message("bsp.gather"))
            _, records = unpack_message(replies[-1])
            for aid, blob in _unpack_records(records):
                collected[aid] = self._decode(blob)
        return sorted(collected.items())

    def scatter(self, states: list[Any]) -> None:
        """Replace all agent states (given in global id order) and resync."""
        self._require_distributed()
        ids = self.graph.ids()
        if len(states) != len(ids):
            raise FrameworkError(
                f"scatter got {len(states)} states for {len(ids)} agents")
        by_rank: dict[int, list[tuple[int, bytes]]] = {}
        for aid, state in zip(ids, states):
            rank = self.part.assignment[aid]
            by_rank.setdefault(rank, []).append((aid, self._encode(state)))
        for rank, records in sorted(by_rank.items()):
            self.runtime.send(rank, pack_message("bsp.scatter", _pack_records(records)))
        self.sync_halos()


def distribute(g: AgentGraph, p: Partition, runtime: Runtime,
               update_fn: UpdateFn, agent_type: TypeDescriptor,
               agent_factory: Callable[[], Any]) -> BspEngine:
    """Build an engine and distribute shards in one call."""
    engine = BspEngine(g, p, runtime, update_fn, agent_type, agent_factory)
    engine.distribute()
    return engine


def step_bsp(engine: BspEngine, rounds: int) -> None:
    engine.step(rounds)
