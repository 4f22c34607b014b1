"""Matching protocols for the coordinator model.

* ``greedy``: sites extend one matching in turn, relayed by the
  coordinator; the result is maximal.
* ``twostep``: alpha-approximation. Step 1 fetches part of the largest
  local maximum matching, step 2 runs the greedy chain over a random
  ``8 * alpha`` fraction of the sites.
* ``luby``: distributed Luby with per-round random edge priorities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .graph import BipartiteGraph, Edge, EdgePartition, Matching, greedy_maximal_matching, maximum_matching_of_edges
from .simulator import PRIORITY_BITS, Kind, Network, ProtocolRun, ProtocolSpec, Reply, run_protocol

GREEDY_ALPHA_THRESHOLD = 1 / 8


# --------------------------------------------------------------------------
# sequential greedy
# --------------------------------------------------------------------------


class _LocalSite:
    """Site state shared by the greedy and two-step protocols."""

    def __init__(self, edges: list[Edge], edge_bits: int, fetch_limit: int = 0, size_bits: int = 0):
        self.edges = edges
        self.edge_bits = edge_bits
        self.fetch_limit = fetch_limit
        self.size_bits = size_bits
        self._local_max: Optional[Matching] = None

    def local_max(self) -> Matching:
        if self._local_max is None:
            self._local_max = maximum_matching_of_edges(self.edges)
        return self._local_max

    def handle(self, kind: Kind, data) -> Reply:
        if kind is Kind.MATCHING:
            extended = greedy_maximal_matching(self.edges, Matching(data))
            return Reply(Kind.MATCHING, extended.edges, len(extended) * self.edge_bits, variable=True)
        if kind is Kind.SIZE_REQUEST:
            return Reply(Kind.SIZE, len(self.local_max()), self.size_bits)
        if kind is Kind.FETCH:
            edges = self.local_max().edges[: self.fetch_limit]
            return Reply(Kind.EDGES, edges, len(edges) * self.edge_bits, variable=True)
        raise ValueError(f"unexpected message kind {kind!r}")


def _greedy_chain(net: Network, order: Sequence[int]) -> Matching:
    """Relay a growing matching through the sites in ``order``, one round each."""
    current: tuple[Edge, ...] = ()
    for site in order:
        net.begin_round()
        reply = net.exchange(int(site), Kind.MATCHING, current, net.matching_bits(current), variable=True)
        current = reply.data
    return Matching(current)


def _execute_greedy(net: Network, partition: EdgePartition, params: dict):
    net.attach([_LocalSite(edges, net.edge_bits) for edges in partition.all_site_edges()])
    return _greedy_chain(net, range(partition.k)), {}


# --------------------------------------------------------------------------
# two-step alpha-approximation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoStepParams:
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha <= 0.5:
            raise ValueError(f"alpha={self.alpha} must lie in (0, 1/2]")

    @property
    def delegates_to_greedy(self) -> bool:
        return self.alpha > GREEDY_ALPHA_THRESHOLD

    @property
    def q(self) -> float:
        """Site sampling probability; only meaningful when alpha <= 1/8."""
        return 8 * self.alpha

    def fetch_limit(self, n: int) -> int:
        return math.ceil(self.alpha * n)


def _execute_two_step(net: Network, partition: EdgePartition, params: dict):
    if "alpha" not in params:
        raise ValueError("twostep requires alpha")
    cfg = TwoStepParams(float(params["alpha"]))
    if cfg.delegates_to_greedy:
        matching, stats = _execute_greedy(net, partition, {})
        return matching, {"delegated": True, **stats}

    k = partition.k
    limit = cfg.fetch_limit(net.n)
    net.attach([_LocalSite(edges, net.edge_bits, limit, net.count_bits) for edges in partition.all_site_edges()])

    # step 1: collect local maximum matching sizes, fetch from the best site
    net.begin_round()
    sizes = [net.exchange(i, Kind.SIZE_REQUEST).data for i in range(k)]
    best = max(range(k), key=lambda i: (sizes[i], -i))
    step1 = Matching()
    if sizes[best] > 0:
        net.begin_round()
        step1 = Matching(net.exchange(best, Kind.FETCH).data)
    step1_bits = net.ledger.payload_bits

    # step 2: greedy chain over independently sampled sites
    selected = np.flatnonzero(net.coordinator_rng.random(k) < cfg.q).tolist()
    step2 = _greedy_chain(net, selected)
    step2_bits = net.ledger.payload_bits - step1_bits

    output = step1 if len(step1) > len(step2) else step2
    stats = {
        "delegated": False,
        "local_sizes": sizes,
        "best_site": best,
        "selected": selected,
        "step1_size": len(step1),
        "step2_size": len(step2),
        "step1_bits": step1_bits,
        "step2_bits": step2_bits,
    }
    return output, stats


# --------------------------------------------------------------------------
# distributed Luby
# --------------------------------------------------------------------------


class LubyPriority(NamedTuple):
    """Total order on edges: random 64-bit key, ties broken by edge id."""

    key: int
    tiebreak: Edge


PriorityFn = Callable[[int, Edge], int]


def priority_winners(prioritized: Sequence[tuple[Edge, int]]) -> list[tuple[Edge, int]]:
    """Edges whose priority beats every other given edge sharing an endpoint."""
    best_left: dict[int, LubyPriority] = {}
    best_right: dict[int, LubyPriority] = {}
    for e, key in prioritized:
        pr = LubyPriority(key, e)
        u, v = e
        if u not in best_left or pr > best_left[u]:
            best_left[u] = pr
        if v not in best_right or pr > best_right[v]:
            best_right[v] = pr
    return [(e, key) for e, key in prioritized if best_left[e[0]].tiebreak == e and best_right[e[1]].tiebreak == e]


class _LubySite:
    def __init__(self, edges: list[Edge], rng: np.random.Generator, edge_bits: int, priority_fn: Optional[PriorityFn]):
        self.edges = list(edges)
        self.rng = rng
        self.edge_bits = edge_bits
        self.priority_fn = priority_fn
        self.iteration = 0
        self.last_priorities: list[tuple[Edge, int]] = []

    def _draw(self) -> list[int]:
        if self.priority_fn is not None:
            return [int(self.priority_fn(self.iteration, e)) for e in self.edges]
        return self.rng.integers(0, 2**PRIORITY_BITS, size=len(self.edges), dtype=np.uint64).tolist()

    def handle(self, kind: Kind, data) -> Reply:
        if data:
            lefts = {u for u, _ in data}
            rights = {v for _, v in data}
            self.edges = [e for e in self.edges if e[0] not in lefts and e[1] not in rights]
        if not self.edges:
            self.last_priorities = []
            return Reply(Kind.DONE, None, 1)
        self.iteration += 1
        self.last_priorities = list(zip(self.edges, self._draw()))
        winners = priority_winners(self.last_priorities)
        return Reply(Kind.WINNERS, winners, len(winners) * (self.edge_bits + PRIORITY_BITS), variable=True)


def _execute_luby(net: Network, partition: EdgePartition, params: dict):
    priority_fn = params.get("priority_fn")
    sites = [_LubySite(edges, net.site_rng(i), net.edge_bits, priority_fn) for i, edges in enumerate(partition.all_site_edges())]
    net.attach(sites)
    matched: list[Edge] = []
    update: tuple[Edge, ...] = ()
    active = list(range(partition.k))
    history = []
    while active:
        net.begin_round()
        kind = Kind.UPDATE if history else Kind.START
        pooled: list[tuple[Edge, int]] = []
        surviving: list[tuple[Edge, int]] = []
        still_active = []
        for i in active:
            reply = net.exchange(i, kind, update, net.matching_bits(update), variable=True)
            if reply.kind is Kind.DONE:
                continue
            still_active.append(i)
            pooled.extend(reply.data)
            surviving.extend(sites[i].last_priorities)
        active = still_active
        if not pooled:
            break
        chosen = [e for e, _ in priority_winners(pooled)]
        matched.extend(chosen)
        update = tuple(chosen)
        history.append({"surviving": surviving, "pooled": pooled, "chosen": chosen})
    return Matching(matched), {"iterations": len(history), "history": history}


# --------------------------------------------------------------------------
# registry and convenience wrappers
# --------------------------------------------------------------------------

GREEDY = ProtocolSpec("greedy", _execute_greedy)
TWOSTEP = ProtocolSpec("twostep", _execute_two_step, params=("alpha",))
LUBY = ProtocolSpec("luby", _execute_luby, params=("priority_fn",))

PROTOCOLS = {p.name: p for p in (GREEDY, TWOSTEP, LUBY)}


def get_protocol(name: str) -> ProtocolSpec:
    try:
        return PROTOCOLS[name]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}") from None


def sequential_greedy(graph: BipartiteGraph, partition: EdgePartition, seed: int = 0) -> ProtocolRun:
    return run_protocol(GREEDY, graph, partition, {}, seed)


def two_step(graph: BipartiteGraph, partition: EdgePartition, alpha: float, seed: int = 0) -> ProtocolRun:
    return run_protocol(TWOSTEP, graph, partition, {"alpha": alpha}, seed)


def luby_distributed(graph: BipartiteGraph, partition: EdgePartition, seed: int = 0, priority_fn: Optional[PriorityFn] = None) -> ProtocolRun:
    params = {} if priority_fn is None else {"priority_fn": priority_fn}
    return run_protocol(LUBY, graph, partition, params, seed)
