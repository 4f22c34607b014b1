"""Reading and writing the ``DMR v1`` instance text format.

::

    DMR v1
    n <n_left> <n_right>
    k <k>
    m <edge_count>
    e <left> <right> <site>      (m lines)

Tokens are whitespace separated. Anything after ``#`` on a line is a
comment. Hard instances carry one extra comment line,
``# hard alpha=<a> p=<p> r=<r> seed=<seed>``, which is enough to rebuild
the hidden ``Y`` matrix.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import TextIO

from .graph import BipartiteGraph, EdgePartition

MAGIC = "DMR v1"


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class HardHeader:
    alpha: float
    p: float
    r: int
    seed: int

    def format(self) -> str:
        return f"# hard alpha={self.alpha!r} p={self.p!r} r={self.r} seed={self.seed}"


def write_instance(stream: TextIO, partition: EdgePartition, hard: HardHeader | None = None) -> None:
    g = partition.graph
    stream.write(MAGIC + "\n")
    if hard is not None:
        stream.write(hard.format() + "\n")
    stream.write(f"n {g.n_left} {g.n_right}\n")
    stream.write(f"k {partition.k}\n")
    stream.write(f"m {g.m}\n")
    for (u, v), s in zip(g.edges, partition.assignment):
        stream.write(f"e {u} {v} {s}\n")


def dumps(partition: EdgePartition, hard: HardHeader | None = None) -> str:
    buf = io.StringIO()
    write_instance(buf, partition, hard)
    return buf.getvalue()


def save(path: str | os.PathLike, partition: EdgePartition, hard: HardHeader | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        write_instance(fh, partition, hard)


def _parse_hard(comment: str) -> HardHeader | None:
    parts = comment.split()
    if not parts or parts[0] != "hard":
        return None
    fields = {}
    for tok in parts[1:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ParseError(f"malformed hard header token {tok!r}")
        fields[key] = value
    try:
        return HardHeader(float(fields["alpha"]), float(fields["p"]), int(fields["r"]), int(fields["seed"]))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"malformed hard header: {comment!r}") from exc


def read_instance(stream: TextIO) -> tuple[EdgePartition, HardHeader | None]:
    """Parse an instance; returns the partition and the hard header if present."""
    hard = None
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(stream, 1):
        body, _, comment = raw.partition("#")
        if comment:
            found = _parse_hard(comment.strip())
            if found is not None:
                hard = found
        tokens = body.split()
        if tokens:
            rows.append((lineno, tokens))

    if not rows or rows[0][1] != MAGIC.split():
        raise ParseError(f"missing '{MAGIC}' magic line")

    def header(idx: int, tag: str, count: int) -> list[int]:
        if idx >= len(rows):
            raise ParseError(f"missing '{tag}' line")
        lineno, tokens = rows[idx]
        if tokens[0] != tag or len(tokens) != count + 1:
            raise ParseError(f"line {lineno}: expected '{tag}' with {count} values")
        try:
            return [int(t) for t in tokens[1:]]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer value") from exc

    n_left, n_right = header(1, "n", 2)
    (k,) = header(2, "k", 1)
    (m,) = header(3, "m", 1)
    body = rows[4:]
    if len(body) != m:
        raise ParseError(f"declared {m} edges, found {len(body)} edge lines")
    edges, sites = [], []
    for lineno, tokens in body:
        if tokens[0] != "e" or len(tokens) != 4:
            raise ParseError(f"line {lineno}: expected 'e <left> <right> <site>'")
        try:
            u, v, s = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer value") from exc
        edges.append((u, v))
        sites.append(s)
    try:
        graph = BipartiteGraph(n_left, n_right, tuple(edges))
        partition = EdgePartition(graph, k, tuple(sites))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return partition, hard


def loads(text: str) -> tuple[EdgePartition, HardHeader | None]:
    return read_instance(io.StringIO(text))


def load(path: str | os.PathLike) -> tuple[EdgePartition, HardHeader | None]:
    with open(path) as fh:
        return read_instance(fh)
