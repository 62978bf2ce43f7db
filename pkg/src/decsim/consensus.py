"""Max-consensus arbitration of the single enabled module.

At every slot boundary the modules each hold a nonnegative weight (the
error on their controlled variable) and agree on the maximum by repeatedly
replacing their value with the max over themselves and their in-neighbors.
On a connected graph this reaches the global max within graph-diameter
iterations; each module then enables itself iff its initial weight equals
the agreed value. A deterministic tie-break pass (same protocol run on
static priorities) restores uniqueness when weights collide numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .netsim import MessageBus

TIE_TOLERANCE = 1e-12


class ConsensusError(RuntimeError):
    """Protocol failed to converge (indicates a disconnected graph)."""


@dataclass(frozen=True)
class TieBreakRule:
    """Total order over module ids; the earlier module wins exact ties."""

    ordering: tuple[str, ...] = ("ankle", "knee", "hip")

    def rank(self, module_id: str) -> int:
        return self.ordering.index(module_id)


@dataclass
class ConsensusRound:
    """Record of one arbitration round."""

    k: int                                   # slot index
    w0: dict[str, float]                     # initial weights
    iterates: dict[str, list[float]]         # per-module value sequence over kappa
    kappa_bar: int                           # iterations to convergence
    winner: str
    y: dict[str, int]


def _exchange(
    values: dict[str, float],
    neighbors: dict[str, set[str]],
    bus: MessageBus | None,
    tick: int,
    agg=max,
) -> dict[str, float]:
    """One synchronous neighbor exchange; each node aggregates itself + in-neighbors."""
    if bus is not None:
        for i, nbrs in neighbors.items():
            for j in nbrs:
                # j's value travels to i over the arc (i, j)
                bus.send(j, i, "consensus", values[j], tick)
        received: dict[str, list[float]] = {i: [] for i in neighbors}
        for env in bus.deliver(tick):
            if env.payload_tag == "consensus":
                received[env.dst].append(env.payload)
        return {i: agg([values[i]] + received[i]) for i in neighbors}
    return {i: agg([values[i]] + [values[j] for j in neighbors[i]]) for i in neighbors}


def consensus_iterate(
    values: dict[str, float],
    neighbors: dict[str, set[str]],
    bus: MessageBus | None = None,
    tick: int = 0,
) -> dict[str, float]:
    """One synchronous max-consensus iteration."""
    for v in values.values():
        if not (math.isfinite(v) and v >= 0):
            raise ValueError("weights must be finite and >= 0")
    return _exchange(values, neighbors, bus, tick)


def run_round(
    k: int,
    weights: dict[str, float],
    neighbors: dict[str, set[str]],
    tie_break: TieBreakRule = TieBreakRule(),
    tol: float = TIE_TOLERANCE,
    bus: MessageBus | None = None,
    tick: int = 0,
) -> ConsensusRound:
    """Run one full arbitration round and elect exactly one module."""
    if k < 1:
        raise ValueError("rounds run for slot indices k >= 1")
    modules = sorted(weights)
    values = dict(weights)
    iterates = {i: [values[i]] for i in modules}
    kappa = 0
    while len({values[i] for i in modules}) > 1:
        if kappa >= len(modules):
            raise ConsensusError("no convergence within |M| iterations")
        values = consensus_iterate(values, neighbors, bus=bus, tick=tick)
        kappa += 1
        for i in modules:
            iterates[i].append(values[i])
    w_star = values[modules[0]]

    # Tie-break pass: candidates advertise a static priority, the highest
    # priority propagates by the same protocol, and its owner wins.
    n = len(modules)
    prio = {
        i: float(n - tie_break.rank(i)) if abs(weights[i] - w_star) <= tol else 0.0
        for i in modules
    }
    pvals = dict(prio)
    for _ in range(n):
        pvals = _exchange(pvals, neighbors, bus, tick)
    p_star = pvals[modules[0]]
    winner = None
    y = {}
    for i in modules:
        y[i] = 1 if (prio[i] != 0.0 and prio[i] == p_star) else 0
        if y[i] == 1:
            winner = i
    if winner is None or sum(y.values()) != 1:
        raise ConsensusError(f"arbitration did not elect exactly one module: {y}")
    return ConsensusRound(
        k=k, w0=dict(weights), iterates=iterates, kappa_bar=kappa, winner=winner, y=y
    )


def arbitration_schedule(t: float, T_e: float) -> int:
    """Slot index k with t in (k*T_e, (k+1)*T_e]; t = 0 maps to slot 0."""
    if t < 0 or T_e <= 0:
        raise ValueError("need t >= 0 and T_e > 0")
    return max(0, math.ceil(t / T_e) - 1)


def initial_enabling(module_ids=("ankle", "knee", "hip")) -> dict[str, int]:
    """All modules start enabled; the first arbitration runs at t = T_e."""
    return {m: 1 for m in module_ids}
