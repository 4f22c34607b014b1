"""Embedding a DISJ instance into a hard matching instance, and back.

Alice holds ``a``, Bob holds ``b``. Public coins pick a site ``I`` and a
block ``J``; Alice's row ``X^{J,I}`` is ``a`` and Bob's ``Y^J`` is ``b``.
All other rows and blocks are filled so that, when ``(a, b) ~ mu_k``, the
resulting tensor has exactly the hard-instance law. Alice only ever
touches site ``I``'s input, so a matching protocol run on the instance
can be split into an Alice/Bob conversation over channel ``I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import (
    BIT,
    HardInstance,
    conditional_a,
    disj_eval,
    instance_to_graph,
    left_id,
    mu_k_arrays,
    nu_k_a_given_w,
    nu_k_b_given_w,
    reset_one_coordinate,
    right_id,
    tau,
    validate_hard_params,
)
from .protocols import get_protocol
from .seeding import derive_seed, stream
from .simulator import ProtocolRun, ProtocolSpec, run_protocol


@dataclass
class ReductionContext:
    """Coins of one reduction: public indices ``I``, ``J`` and per-block ``W^j``."""

    k: int
    r: int
    alpha: float
    I: int
    J: int
    public_seed: int
    alice_seed: int
    bob_seed: int
    W_blocks: dict[int, np.ndarray] = field(default_factory=dict)
    W_AB: Optional[np.ndarray] = None

    @property
    def p(self) -> float:
        return self.alpha / 20

    @classmethod
    def sample(cls, k: int, r: int, alpha: float, public_seed: int, alice_seed: int, bob_seed: int, W_AB=None) -> "ReductionContext":
        rng = stream(public_seed)
        I = int(rng.integers(k))
        J = int(rng.integers(r))
        p = alpha / 20
        W = {j: tau(p, k, rng) for j in range(r) if j != J}
        return cls(k, r, alpha, I, J, public_seed, alice_seed, bob_seed, W, W_AB)


def alice_rows(a: np.ndarray, ctx: ReductionContext) -> np.ndarray:
    """Site ``I``'s input ``X^{., I}``: a function of ``a``, public coins and Alice's coins only."""
    rows = np.empty((ctx.r, ctx.k), dtype=BIT)
    for j in range(ctx.r):
        if j == ctx.J:
            rows[j] = a
            continue
        rng = stream(ctx.alice_seed, j)
        x = nu_k_a_given_w(ctx.W_blocks[j], rng)
        reset_one_coordinate(x, rng)
        rows[j] = x
    return rows


def bob_part(b: np.ndarray, ctx: ReductionContext) -> tuple[np.ndarray, np.ndarray]:
    """``Y`` and the rows of all sites other than ``I``, shape ``(r, k-1, k)``."""
    k, p = ctx.k, ctx.p
    Y = np.empty((ctx.r, k), dtype=BIT)
    others = np.empty((ctx.r, k - 1, k), dtype=BIT)
    for j in range(ctx.r):
        rng = stream(ctx.bob_seed, j)
        Y[j] = b if j == ctx.J else nu_k_b_given_w(ctx.W_blocks[j], p, rng)
        # mu_k(a | Y^j) already includes the single coordinate reset
        others[j] = conditional_a(np.broadcast_to(Y[j], (k - 1, k)), p, rng)
    return Y, others


def reduce_inputs(a, b, n: int, k: int, ctx: ReductionContext) -> HardInstance:
    """Build the hard instance embedding ``(a, b)`` at row ``(J, I)``.

    Raises:
        ValueError: on shape or divisibility violations, or if ``(a, b)``
            intersects in more than one coordinate (outside the support of
            ``mu_k``).
    """
    a = np.asarray(a, dtype=BIT)
    b = np.asarray(b, dtype=BIT)
    if a.shape != (k,) or b.shape != (k,):
        raise ValueError(f"inputs must have length k={k}")
    validate_hard_params(n, k, ctx.alpha)
    if ctx.k != k or ctx.r != n // (2 * k):
        raise ValueError("reduction context does not match (n, k)")
    if int(((a == 1) & (b == 1)).sum()) > 1:
        raise ValueError("(a, b) intersects in more than one coordinate")

    X = np.empty((ctx.r, k, k), dtype=BIT)
    Y, others = bob_part(b, ctx)
    X[:, ctx.I, :] = alice_rows(a, ctx)
    rest = [i for i in range(k) if i != ctx.I]
    X[:, rest, :] = others
    return HardInstance(n, k, ctx.alpha, X, Y)


@dataclass
class ProtocolPOutcome:
    answer: int
    run: ProtocolRun
    ctx: ReductionContext
    instance: HardInstance

    @property
    def alice_bob_bits(self) -> int:
        return alice_bob_cost(self.run, self.ctx.I)


def reduction_seeds(seed: int) -> tuple[int, int, int, int]:
    """``(public, alice, bob, protocol)`` seeds derived from one master seed."""
    return tuple(derive_seed(seed, role) for role in ("public", "alice", "bob", "protocol"))


def run_protocol_p(a, b, n: int, k: int, alpha: float, dmr: ProtocolSpec | str, seed: int, dmr_params: dict | None = None) -> ProtocolPOutcome:
    """Answer DISJ(a, b) by running ``dmr`` on the embedded matching instance.

    Bob answers 1 iff the output matching contains an edge from the
    embedded left vertex ``(J, I)`` to some ``(J, l)`` with ``b_l = 1``.
    """
    if isinstance(dmr, str):
        dmr = get_protocol(dmr)
    if dmr_params is None:
        dmr_params = {"alpha": alpha} if "alpha" in dmr.params else {}
    b = np.asarray(b, dtype=BIT)
    public, alice, bob, proto_seed = reduction_seeds(seed)
    ctx = ReductionContext.sample(k, n // (2 * k), alpha, public, alice, bob)
    inst = reduce_inputs(a, b, n, k, ctx)
    graph, partition = instance_to_graph(inst)
    run = run_protocol(dmr, graph, partition, dmr_params, proto_seed)
    u = left_id(k, ctx.J, ctx.I)
    answer = 0
    for eu, ev in run.output.edges:
        if eu == u:
            l = ev - right_id(k, ctx.J, 0)
            answer = int(0 <= l < k and b[l] == 1)
            break
    return ProtocolPOutcome(answer, run, ctx, inst)


def protocol_p(a, b, n: int, k: int, alpha: float, dmr: ProtocolSpec | str, seed: int, dmr_params: dict | None = None) -> int:
    return run_protocol_p(a, b, n, k, alpha, dmr, seed, dmr_params).answer


def alice_bob_cost(run: ProtocolRun, I: int) -> int:
    """Payload bits crossing site ``I``'s channel, i.e. between Alice and Bob."""
    return run.ledger.channel_payload(I)


@dataclass
class ReductionSummary:
    n: int
    k: int
    alpha: float
    protocol: str
    trials: int = 0
    disj1: int = 0
    hits: int = 0
    disj0: int = 0
    false_positives: int = 0

    @property
    def threshold(self) -> float:
        return self.alpha / 10

    @property
    def hit_rate(self) -> float:
        return self.hits / self.disj1 if self.disj1 else float("nan")

    @property
    def sigma(self) -> float:
        t = self.threshold
        return (t * (1 - t) / self.disj1) ** 0.5 if self.disj1 else float("nan")

    @property
    def hit_rate_ok(self) -> bool:
        return self.disj1 > 0 and self.hit_rate >= self.threshold - 3 * self.sigma

    @property
    def one_sided_ok(self) -> bool:
        return self.false_positives == 0


def run_reduction_trials(
    n: int,
    k: int,
    alpha: float,
    trials: int,
    seed: int,
    protocol: str = "twostep",
    condition: Optional[int] = None,
    max_draws: Optional[int] = None,
) -> ReductionSummary:
    """Repeat the matching-based DISJ decision on fresh ``(a, b) ~ mu_k`` draws.

    With ``condition=None`` every draw counts as a trial. With
    ``condition`` in ``{0, 1}`` draws are rejected until ``trials`` of them
    have ``disj_eval(a, b) == condition``, which samples ``mu_k``
    conditioned on the DISJ value.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    validate_hard_params(n, k, alpha)
    spec = get_protocol(protocol)
    summary = ReductionSummary(n, k, alpha, protocol)
    p = alpha / 20
    draw = 0
    limit = max_draws if max_draws is not None else 100 * trials
    while summary.trials < trials:
        if draw >= limit:
            raise RuntimeError(f"gave up after {draw} draws")
        a, b, _, _ = mu_k_arrays(k, p, 1, stream(seed, draw))
        a, b = a[0], b[0]
        trial_seed = derive_seed(seed, "trial", draw)
        draw += 1
        truth = disj_eval(a, b)
        if condition is not None and truth != condition:
            continue
        answer = protocol_p(a, b, n, k, alpha, spec, trial_seed)
        summary.trials += 1
        if truth:
            summary.disj1 += 1
            summary.hits += answer
        else:
            summary.disj0 += 1
            summary.false_positives += answer
    return summary
