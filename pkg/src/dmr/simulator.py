"""Coordinator-model execution engine with exact bit accounting.

The network is a star: the coordinator talks to site ``i`` over channel
``i`` and sites never talk to each other. Every interaction is an
*exchange*: one downlink message to a site, whose handler produces exactly
one uplink reply. A *round* is a batch of exchanges opened by
``Network.begin_round``.

Framing: each message carries a header of ``ceil(log2 k)`` site bits plus
a 4-bit kind tag, and variable-length payloads (edge lists) additionally
carry a ``ceil(log2(n + 1))``-bit length prefix. The ledger keeps payload
and header bits apart.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Protocol as TypingProtocol

import numpy as np

from .graph import BipartiteGraph, Edge, EdgePartition, Matching, Side, VertexId, is_matching
from .seeding import stream

KIND_BITS = 4
PRIORITY_BITS = 64


class Direction(enum.Enum):
    UP = "up"  # site -> coordinator
    DOWN = "down"  # coordinator -> site


class Kind(enum.IntEnum):
    START = 0
    MATCHING = 1
    SIZE_REQUEST = 2
    SIZE = 3
    FETCH = 4
    EDGES = 5
    WINNERS = 6
    DONE = 7
    UPDATE = 8


assert len(Kind) <= 2**KIND_BITS


def vertex_bits(n_side: int) -> int:
    """``ceil(log2(max(n_side, 2)))``."""
    return (max(n_side, 2) - 1).bit_length()


def count_bits(n: int) -> int:
    """Bits for an integer in ``[0, n]``: ``ceil(log2(n + 1))``."""
    return max(n, 1).bit_length()


def encode_vertex(vertex: VertexId, n_side: int) -> int:
    if not 0 <= vertex.index < n_side:
        raise ValueError(f"vertex {vertex} out of range for side of size {n_side}")
    return vertex_bits(n_side)


def edge_bits(graph: BipartiteGraph) -> int:
    return vertex_bits(graph.n_left) + vertex_bits(graph.n_right)


def encode_edge(edge: Edge, graph: BipartiteGraph) -> int:
    if edge not in graph.edge_set():
        raise ValueError(f"edge {edge} not in graph")
    u, v = edge
    return encode_vertex(VertexId(Side.LEFT, u), graph.n_left) + encode_vertex(VertexId(Side.RIGHT, v), graph.n_right)


@dataclass(frozen=True)
class Message:
    direction: Direction
    site: int
    round: int
    payload_bits: int
    kind: Kind
    header_bits: int = 0

    def __post_init__(self):
        if self.payload_bits < 0 or self.header_bits < 0:
            raise ValueError("bit counts must be non-negative")

    def line(self) -> str:
        return f"{self.round} {self.direction.value} {self.site} {self.kind.name} {self.payload_bits}"


@dataclass
class CostLedger:
    k: int
    uplink_bits: list[int] = field(default_factory=list)
    downlink_bits: list[int] = field(default_factory=list)
    uplink_messages: list[int] = field(default_factory=list)
    downlink_messages: list[int] = field(default_factory=list)
    header_bits: int = 0
    rounds: int = 0

    def __post_init__(self):
        for name in ("uplink_bits", "downlink_bits", "uplink_messages", "downlink_messages"):
            if not getattr(self, name):
                setattr(self, name, [0] * self.k)

    def record(self, msg: Message) -> None:
        if msg.direction is Direction.UP:
            self.uplink_bits[msg.site] += msg.payload_bits
            self.uplink_messages[msg.site] += 1
        else:
            self.downlink_bits[msg.site] += msg.payload_bits
            self.downlink_messages[msg.site] += 1
        self.header_bits += msg.header_bits

    @property
    def payload_bits(self) -> int:
        return sum(self.uplink_bits) + sum(self.downlink_bits)

    @property
    def total_bits(self) -> int:
        return self.payload_bits + self.header_bits

    @property
    def messages(self) -> int:
        return sum(self.uplink_messages) + sum(self.downlink_messages)

    def channel_payload(self, site: int) -> int:
        return self.uplink_bits[site] + self.downlink_bits[site]

    def consistent_with(self, transcript: list[Message]) -> bool:
        fresh = CostLedger(self.k)
        for msg in transcript:
            fresh.record(msg)
        rounds_ok = self.rounds >= max((m.round for m in transcript), default=0)
        return (
            fresh.uplink_bits == self.uplink_bits
            and fresh.downlink_bits == self.downlink_bits
            and fresh.uplink_messages == self.uplink_messages
            and fresh.downlink_messages == self.downlink_messages
            and fresh.header_bits == self.header_bits
            and rounds_ok
        )


@dataclass(frozen=True)
class Reply:
    """A site's answer to one downlink message."""

    kind: Kind
    data: Any
    payload_bits: int
    variable: bool = False


class Site(TypingProtocol):
    def handle(self, kind: Kind, data: Any) -> Reply: ...


class Network:
    """Star network for one protocol run.

    Randomness: the coordinator draws from stream ``(seed, 0)`` and site
    ``i`` from ``(seed, 1, i)``, so every party has private coins and a run
    replays exactly from its seed.
    """

    def __init__(self, graph: BipartiteGraph, k: int, seed: int):
        self.graph = graph
        self.k = k
        self.seed = seed
        self.n = graph.n
        self.edge_bits = edge_bits(graph)
        self.count_bits = count_bits(graph.n)
        self.site_id_bits = (k - 1).bit_length()
        self.coordinator_rng = stream(seed, 0)
        self.ledger = CostLedger(k)
        self.transcript: list[Message] = []
        self.sites: list[Site] = []

    def site_rng(self, site: int) -> np.random.Generator:
        return stream(self.seed, 1, site)

    def attach(self, sites: list[Site]) -> None:
        if len(sites) != self.k:
            raise ValueError(f"expected {self.k} sites, got {len(sites)}")
        self.sites = list(sites)

    def begin_round(self) -> int:
        self.ledger.rounds += 1
        return self.ledger.rounds

    def _header(self, variable: bool) -> int:
        return self.site_id_bits + KIND_BITS + (self.count_bits if variable else 0)

    def _post(self, direction: Direction, site: int, kind: Kind, payload_bits: int, variable: bool) -> None:
        if self.ledger.rounds == 0:
            raise RuntimeError("begin_round() must be called before sending")
        msg = Message(direction, site, self.ledger.rounds, int(payload_bits), kind, self._header(variable))
        self.transcript.append(msg)
        self.ledger.record(msg)

    def exchange(self, site: int, kind: Kind, data: Any = None, payload_bits: int = 0, variable: bool = False) -> Reply:
        """Send one message to ``site`` and return its single reply."""
        if not 0 <= site < self.k:
            raise ValueError(f"site {site} out of range")
        self._post(Direction.DOWN, site, kind, payload_bits, variable)
        reply = self.sites[site].handle(kind, data)
        self._post(Direction.UP, site, reply.kind, reply.payload_bits, reply.variable)
        return reply

    def matching_bits(self, edges) -> int:
        return len(edges) * self.edge_bits


@dataclass
class ProtocolRun:
    protocol: str
    output: Matching
    ledger: CostLedger
    transcript: list[Message]
    seed: int
    stats: dict = field(default_factory=dict)

    def transcript_lines(self) -> Iterator[str]:
        for msg in self.transcript:
            yield msg.line()

    def dump_transcript(self) -> str:
        return "".join(line + "\n" for line in self.transcript_lines())


@dataclass(frozen=True)
class ProtocolSpec:
    """A named protocol: ``execute(net, partition, params)`` returns ``(matching, stats)``."""

    name: str
    execute: Callable[[Network, EdgePartition, dict], tuple[Matching, dict]]
    params: tuple[str, ...] = ()


def run_protocol(protocol: ProtocolSpec, graph: BipartiteGraph, partition: EdgePartition, params: dict | None = None, seed: int = 0) -> ProtocolRun:
    """Execute ``protocol`` on ``(graph, partition)`` and check the outcome.

    Raises:
        ValueError: if the partition does not belong to ``graph`` or a
            protocol parameter is invalid.
        RuntimeError: if the protocol returns a non-matching or the ledger
            disagrees with the transcript.
    """
    if partition.graph != graph:
        raise ValueError("partition does not cover this graph")
    params = dict(params or {})
    unknown = set(params) - set(protocol.params)
    if unknown:
        raise ValueError(f"unknown parameters for {protocol.name}: {sorted(unknown)}")
    net = Network(graph, partition.k, seed)
    output, stats = protocol.execute(net, partition, params)
    if not is_matching(graph, output.edges):
        raise RuntimeError(f"{protocol.name} produced an invalid matching")
    if not net.ledger.consistent_with(net.transcript):
        raise RuntimeError("ledger disagrees with transcript")
    return ProtocolRun(protocol.name, output, net.ledger, net.transcript, seed, stats)
