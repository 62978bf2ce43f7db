"""Simulated wired network between control modules.

A directed graph of modules with per-tick mailboxes. Delivery is same-tick
(wire latency is folded into the controllers' lumped delay) and ordered
lexicographically by (dst, src) for reproducibility. Every envelope is
retained in a log so tests can audit that no module ever talks to a
non-neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable


class TopologyError(ValueError):
    """Invalid graph operation: duplicate node, missing arc, disconnection."""


@dataclass(frozen=True)
class Envelope:
    src: str
    dst: str
    payload_tag: str   # "down_channel" | "consensus" | "enable"
    payload: Any
    tick: int


class Topology:
    """Directed communication graph; arc (i, j) means i receives from j."""

    def __init__(self):
        self.nodes: set[str] = set()
        self.arcs: set[tuple[str, str]] = set()

    def neighbors_of(self, node: str) -> set[str]:
        """Modules that send information to ``node`` (its in-neighbors)."""
        return {j for (i, j) in self.arcs if i == node}

    def receivers_from(self, node: str) -> set[str]:
        return {i for (i, j) in self.arcs if j == node}

    def has_arc(self, dst: str, src: str) -> bool:
        return (dst, src) in self.arcs

    def validate_connected(self) -> None:
        """Reject graphs where some node cannot reach some other (undirected)."""
        if not self.nodes:
            return
        undirected: dict[str, set[str]] = {n: set() for n in self.nodes}
        for i, j in self.arcs:
            undirected[i].add(j)
            undirected[j].add(i)
        start = next(iter(sorted(self.nodes)))
        seen = {start}
        frontier = [start]
        while frontier:
            n = frontier.pop()
            for m in undirected[n]:
                if m not in seen:
                    seen.add(m)
                    frontier.append(m)
        if seen != self.nodes:
            missing = sorted(self.nodes - seen)
            raise TopologyError(f"graph not connected; unreachable: {missing}")


def register_module(topology: Topology, module_id: str, neighbors: Iterable[str]) -> Topology:
    """Add a module and bidirectional arcs to already-registered neighbors."""
    if module_id in topology.nodes:
        raise TopologyError(f"duplicate module id: {module_id}")
    neighbors = list(neighbors)
    for n in neighbors:
        if n == module_id:
            raise TopologyError("self-arcs are not allowed")
        if n not in topology.nodes:
            raise TopologyError(f"unknown neighbor: {n}")
    topology.nodes.add(module_id)
    for n in neighbors:
        topology.arcs.add((module_id, n))
        topology.arcs.add((n, module_id))
    topology.validate_connected()
    return topology


def chain_topology(module_ids: Iterable[str]) -> Topology:
    """Bidirectional chain in the given order (the mechanical interconnection)."""
    ids = list(module_ids)
    topo = Topology()
    for k, mid in enumerate(ids):
        register_module(topo, mid, [ids[k - 1]] if k > 0 else [])
    return topo


class MessageBus:
    """Per-tick mailbox delivery over a fixed topology."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self._pending: list[Envelope] = []
        self.log: list[Envelope] = []

    def send(self, src: str, dst: str, payload_tag: str, payload: Any, tick: int) -> None:
        if not self.topology.has_arc(dst, src):
            raise TopologyError(f"no arc from {src} to {dst}")
        env = Envelope(src=src, dst=dst, payload_tag=payload_tag, payload=payload, tick=tick)
        self._pending.append(env)

    def deliver(self, tick: int) -> list[Envelope]:
        """Deliver everything queued for this tick, (dst, src)-lexicographic."""
        out = sorted(
            (e for e in self._pending if e.tick == tick),
            key=lambda e: (e.dst, e.src),
        )
        self._pending = [e for e in self._pending if e.tick != tick]
        self.log.extend(out)
        return out

    def dump_log(self) -> list[str]:
        """One line per delivered envelope: tick, src, dst, tag, value."""
        return [
            f"{e.tick}\t{e.src}\t{e.dst}\t{e.payload_tag}\t{e.payload!r}" for e in self.log
        ]
