"""Input distributions for AND / DISJ and the hard matching distribution.

Conventions: ``tau(q)`` is the Bernoulli law that yields 0 with
probability ``q`` and 1 otherwise. Bit arrays are ``int8``.

Single-coordinate law ``nu(p)``: draw ``w ~ tau(p)``; if ``w == 0`` then
``a ~ tau(1/2)`` and ``b = 0``, else ``a = 0`` and ``b ~ tau(p)``. The law
``mu(p)`` is ``nu(p)`` followed by a fresh ``a ~ tau(1/2)``. The ``k``-fold
laws ``nu_k`` / ``mu_k`` are products of ``nu``, with ``mu_k`` resetting one
uniformly chosen coordinate of ``a``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import BipartiteGraph, Edge, EdgePartition, maximum_matching
from .seeding import as_generator, stream

BIT = np.int8


# --------------------------------------------------------------------------
# samplers
# --------------------------------------------------------------------------


def _check_prob(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")


def _check_p(p: float) -> None:
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p={p} must lie in (0, 1/2]")


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError(f"k={k} must be >= 1")


def tau(p: float, size, rng) -> np.ndarray:
    """Array of ``tau(p)`` draws (0 with probability ``p``)."""
    _check_prob(p)
    return (as_generator(rng).random(size) >= p).astype(BIT)


def sample_tau(p: float, rng) -> int:
    _check_prob(p)
    return int(as_generator(rng).random() >= p)


def nu_arrays(p: float, size, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised ``nu(p)``: returns ``(a, b, w)`` arrays of shape ``size``."""
    _check_p(p)
    rng = as_generator(rng)
    w = tau(p, size, rng)
    a_coin = tau(0.5, size, rng)
    b_coin = tau(p, size, rng)
    a = np.where(w == 0, a_coin, 0).astype(BIT)
    b = np.where(w == 1, b_coin, 0).astype(BIT)
    return a, b, w


def reset_one_coordinate(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Reset one uniform coordinate of each length-k vector in ``a`` to tau(1/2)."""
    k = a.shape[-1]
    d = rng.integers(0, k, size=a.shape[:-1])
    fresh = tau(0.5, a.shape[:-1], rng)
    np.put_along_axis(a, d[..., None], fresh[..., None], axis=-1)
    return d


@dataclass(frozen=True)
class AndSample:
    a: int
    b: int
    w: int
    d_reset: Optional[int] = None


@dataclass(frozen=True)
class DisjInput:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    d: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.x)


def sample_nu(p: float, rng) -> AndSample:
    a, b, w = nu_arrays(p, 1, rng)
    return AndSample(int(a[0]), int(b[0]), int(w[0]))


def sample_mu(p: float, rng) -> AndSample:
    rng = as_generator(rng)
    a, b, w = nu_arrays(p, 1, rng)
    return AndSample(int(tau(0.5, 1, rng)[0]), int(b[0]), int(w[0]), d_reset=0)


def disj_eval(x, y) -> int:
    """OR of coordinatewise ANDs: 1 iff some coordinate has x_l = y_l = 1."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return int(np.any((x == 1) & (y == 1)))


def nu_k_arrays(k: int, p: float, n_samples: int, rng):
    """``n_samples`` draws of ``nu_k``: arrays of shape ``(n_samples, k)``."""
    _check_k(k)
    return nu_arrays(p, (n_samples, k), rng)


def mu_k_arrays(k: int, p: float, n_samples: int, rng):
    """``n_samples`` draws of ``mu_k``; returns ``(a, b, w, d)``."""
    _check_k(k)
    rng = as_generator(rng)
    a, b, w = nu_arrays(p, (n_samples, k), rng)
    d = reset_one_coordinate(a, rng)
    return a, b, w, d


def sample_nu_k(k: int, p: float, rng) -> DisjInput:
    a, b, w = nu_k_arrays(k, p, 1, rng)
    return DisjInput(a[0], b[0], w[0])


def sample_mu_k(k: int, p: float, rng) -> DisjInput:
    a, b, w, d = mu_k_arrays(k, p, 1, rng)
    return DisjInput(a[0], b[0], w[0], int(d[0]))


def b_marginal(k: int, p: float, size, rng) -> np.ndarray:
    """Bob's marginal under ``mu_k``; shape ``(*size, k)``.

    The reset only touches ``a``, so this is the ``nu`` construction's ``b``.
    """
    _check_k(k)
    shape = (size, k) if isinstance(size, int) else (*size, k)
    return nu_arrays(p, shape, rng)[1]


def conditional_a(y, p: float, rng, return_reset: bool = False):
    """Draw ``a ~ mu_k(a | b = y)`` for every length-k vector along the last axis.

    By Bayes under ``nu``: ``Pr[w_l = 0 | b_l = 0] = 1 / (2 - p)`` and
    ``b_l = 1`` forces ``w_l = 1``. Given ``w_l = 0``, ``a_l ~ tau(1/2)``,
    otherwise ``a_l = 0``. One uniform coordinate is then reset; with
    ``return_reset`` its index array is returned alongside ``a``.
    """
    _check_p(p)
    rng = as_generator(rng)
    y = np.asarray(y, dtype=BIT)
    w_zero = rng.random(y.shape) < 1.0 / (2.0 - p)
    coin = tau(0.5, y.shape, rng)
    a = np.where((y == 0) & w_zero, coin, 0).astype(BIT)
    d = reset_one_coordinate(a, rng)
    return (a, d) if return_reset else a


def sample_mu_k_conditional_a(y, p: float, rng) -> np.ndarray:
    return conditional_a(np.asarray(y, dtype=BIT), p, rng)


def nu_k_a_given_w(w, rng) -> np.ndarray:
    """Alice's half of ``nu_k`` given the auxiliary vector ``w``."""
    w = np.asarray(w, dtype=BIT)
    coin = tau(0.5, w.shape, rng)
    return np.where(w == 0, coin, 0).astype(BIT)


def nu_k_b_given_w(w, p: float, rng) -> np.ndarray:
    """Bob's half of ``nu_k`` given the auxiliary vector ``w``."""
    _check_p(p)
    w = np.asarray(w, dtype=BIT)
    coin = tau(p, w.shape, rng)
    return np.where(w == 1, coin, 0).astype(BIT)


# --------------------------------------------------------------------------
# exact probability tables (test oracles)
# --------------------------------------------------------------------------


def nu_pmf(p: float) -> dict[tuple[int, int], float]:
    return {(0, 0): p * (3 - 2 * p) / 2, (0, 1): (1 - p) ** 2, (1, 0): p / 2, (1, 1): 0.0}


def mu_pmf(p: float) -> dict[tuple[int, int], float]:
    b0 = p * (2 - p)
    return {(0, 0): b0 / 2, (1, 0): b0 / 2, (0, 1): (1 - b0) / 2, (1, 1): (1 - b0) / 2}


def delta(p: float) -> float:
    """``Pr[(a, b) = (1, 1)]`` under ``mu(p)``."""
    return (1 - p) ** 2 / 2


def mu_k_pmf(k: int, p: float) -> dict[tuple[tuple[int, ...], tuple[int, ...]], float]:
    """Exact joint law of ``(a, b)`` under ``mu_k`` by enumeration."""
    nu = nu_pmf(p)
    b_law = {0: p * (2 - p), 1: 1 - p * (2 - p)}
    out = {}
    for a in itertools.product((0, 1), repeat=k):
        for b in itertools.product((0, 1), repeat=k):
            total = 0.0
            for d in range(k):
                prob = 0.5 * b_law[b[d]]
                for l in range(k):
                    if l != d:
                        prob *= nu[(a[l], b[l])]
                total += prob / k
            out[(a, b)] = total
    return out


# --------------------------------------------------------------------------
# hard instances
# --------------------------------------------------------------------------


@dataclass
class HardInstance:
    """Bit tensors of the hard matching distribution.

    ``X[j, i, l] == 1`` means left vertex ``(j, i)`` is adjacent to right
    vertex ``(j, l)``. ``Y[j, l]`` is the hidden bit labelling right vertex
    ``(j, l)``; it is not part of the graph.
    """

    n: int
    k: int
    alpha: float
    X: np.ndarray
    Y: np.ndarray
    seed: Optional[int] = None
    r: int = field(init=False)
    p: float = field(init=False)

    def __post_init__(self):
        if self.n % (2 * self.k):
            raise ValueError(f"n={self.n} is not a multiple of 2k={2 * self.k}")
        self.r = self.n // (2 * self.k)
        self.p = self.alpha / 20
        self.X = np.asarray(self.X, dtype=BIT)
        self.Y = np.asarray(self.Y, dtype=BIT)
        if self.X.shape != (self.r, self.k, self.k) or self.Y.shape != (self.r, self.k):
            raise ValueError(f"tensor shapes {self.X.shape}, {self.Y.shape} do not match r={self.r}, k={self.k}")

    def intersections(self) -> np.ndarray:
        """Per-row count of coordinates with X = Y = 1; shape ``(r, k)``."""
        return ((self.X == 1) & (self.Y[:, None, :] == 1)).sum(axis=2)


def validate_hard_params(n: int, k: int, alpha: float) -> None:
    if k < 2:
        raise ValueError(f"k={k} must be >= 2")
    if not 0 < alpha <= 0.5:
        raise ValueError(f"alpha={alpha} must lie in (0, 1/2]")
    if n <= 0 or n % 2:
        raise ValueError(f"n={n} must be a positive even number")
    if (n // 2) % k:
        raise ValueError(f"k={k} does not divide n/2={n // 2}")


def build_hard_instance(n: int, k: int, alpha: float, seed: int) -> HardInstance:
    """Sample the hard distribution with ``r = n / (2k)`` independent blocks.

    Block ``j`` draws from the stream ``(seed, j)``: first ``Y^j`` from
    Bob's marginal, then the ``k`` rows ``X^{j, i}`` i.i.d. from
    ``mu_k(a | Y^j)``. ``p`` is fixed to ``alpha / 20``.
    """
    validate_hard_params(n, k, alpha)
    r = n // (2 * k)
    p = alpha / 20
    X = np.empty((r, k, k), dtype=BIT)
    Y = np.empty((r, k), dtype=BIT)
    for j in range(r):
        rng = stream(seed, j)
        Y[j] = b_marginal(k, p, (), rng)
        X[j] = conditional_a(np.broadcast_to(Y[j], (k, k)), p, rng)
    return HardInstance(n, k, alpha, X, Y, seed=seed)


def left_id(k: int, j: int, i: int) -> int:
    return j * k + i


def right_id(k: int, j: int, l: int) -> int:
    return j * k + l


def instance_to_graph(inst: HardInstance) -> tuple[BipartiteGraph, EdgePartition]:
    """Graph on ``n/2 + n/2`` vertices; every edge of row ``(j, i)`` goes to site ``i``."""
    k = inst.k
    js, is_, ls = np.nonzero(inst.X)
    edges = tuple(zip((js * k + is_).tolist(), (js * k + ls).tolist()))
    graph = BipartiteGraph(inst.n // 2, inst.n // 2, edges)
    return graph, EdgePartition(graph, k, tuple(is_.tolist()))


@dataclass(frozen=True)
class EdgeClassification:
    U0: frozenset[int]
    U1: frozenset[int]
    V0: frozenset[int]
    V1: frozenset[int]
    important_edges: frozenset[Edge]
    noisy_edges: frozenset[Edge]
    important_coordinate: dict = field(default_factory=dict)


def classify_edges(inst: HardInstance) -> EdgeClassification:
    """Split vertices by DISJ(row, Y) and by Y bit, and edges into important / noisy."""
    k = inst.k
    hits = inst.intersections()
    U1 = {left_id(k, j, i) for j, i in zip(*np.nonzero(hits))}
    U0 = set(range(inst.n // 2)) - U1
    V0 = {right_id(k, j, l) for j, l in zip(*np.nonzero(inst.Y == 0))}
    V1 = set(range(inst.n // 2)) - V0
    important, noisy = set(), set()
    coord = {}
    for j, i, l in zip(*np.nonzero(inst.X)):
        e = (left_id(k, j, i), right_id(k, j, l))
        if inst.Y[j, l] == 0:
            noisy.add(e)
        else:
            important.add(e)
            coord[e[0]] = int(l)
    return EdgeClassification(
        frozenset(U0), frozenset(U1), frozenset(V0), frozenset(V1), frozenset(important), frozenset(noisy), coord
    )


def expected_v0(inst: HardInstance) -> float:
    return inst.p * (2 - inst.p) * inst.n / 2


def v0_size(inst: HardInstance) -> int:
    return int((inst.Y == 0).sum())


def v0_lemma_holds(inst: HardInstance) -> bool:
    return v0_size(inst) <= 2 * inst.p * inst.n


def v0_lemma_regime(inst: HardInstance) -> bool:
    return inst.p ** 2 * inst.n >= 3


def opt_size(inst: HardInstance) -> int:
    """Maximum matching size, computed block by block (blocks share no vertex)."""
    total = 0
    for j in range(inst.r):
        js, ls = np.nonzero(inst.X[j])
        block = BipartiteGraph(inst.k, inst.k, tuple(zip(js.tolist(), ls.tolist())))
        total += len(maximum_matching(block))
    return total


def opt_lemma_holds(inst: HardInstance, opt: int | None = None) -> bool:
    if opt is None:
        opt = opt_size(inst)
    return 5 * opt >= inst.n


def opt_lemma_regime(inst: HardInstance) -> bool:
    return inst.k >= 64 and inst.r >= 16

