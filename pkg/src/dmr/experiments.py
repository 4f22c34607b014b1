"""Experiment sweeps, result rows, and hard-instance verification."""

from __future__ import annotations

import csv
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Iterable, Optional, TextIO

import numpy as np

from .distributions import (
    HardInstance,
    build_hard_instance,
    classify_edges,
    instance_to_graph,
    opt_lemma_holds,
    opt_lemma_regime,
    opt_size,
    v0_lemma_holds,
    v0_lemma_regime,
    v0_size,
    validate_hard_params,
)
from .graph import BipartiteGraph, EdgePartition, maximum_matching
from .instance_io import HardHeader
from .protocols import PROTOCOLS, get_protocol
from .seeding import derive_seed, stream
from .simulator import ProtocolRun, run_protocol

INSTANCE_TYPES = ("hard", "random")


def random_instance(n: int, k: int, density: float, seed: int) -> EdgePartition:
    """Each of the ``(n/2) * (n/2)`` potential edges present independently.

    Left vertex ``u`` belongs to site ``u % k``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= density <= 1:
        raise ValueError(f"density={density} outside [0, 1]")
    n_left, n_right = n // 2, n - n // 2
    mask = stream(seed).random((n_left, n_right)) < density
    us, vs = np.nonzero(mask)
    graph = BipartiteGraph(n_left, n_right, tuple(zip(us.tolist(), vs.tolist())))
    return EdgePartition.round_robin(graph, k)


def hard_partition(n: int, k: int, alpha: float, seed: int) -> tuple[EdgePartition, HardInstance]:
    inst = build_hard_instance(n, k, alpha, seed)
    _, partition = instance_to_graph(inst)
    return partition, inst


def hard_header(inst: HardInstance) -> HardHeader:
    return HardHeader(inst.alpha, inst.p, inst.r, inst.seed)


# --------------------------------------------------------------------------
# result rows
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    trial: int
    protocol: str
    n: int
    k: int
    alpha: Optional[float]
    seed: int
    opt: int
    matching_size: int
    ratio: float
    payload_bits: int
    total_bits: int
    rounds: int
    messages: int

    def csv_values(self) -> dict[str, str]:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                out[f.name] = ""
            elif f.name == "ratio":
                out[f.name] = f"{value:.6f}"
            else:
                out[f.name] = str(value)
        return out


ROW_FIELDS = [f.name for f in fields(ResultRow)]


def result_row(run: ProtocolRun, graph: BipartiteGraph, k: int, alpha: Optional[float], trial: int, seed: int) -> ResultRow:
    opt = len(maximum_matching(graph))
    size = len(run.output)
    ratio = size / opt if opt else 1.0
    return ResultRow(
        trial=trial,
        protocol=run.protocol,
        n=graph.n,
        k=k,
        alpha=alpha,
        seed=seed,
        opt=opt,
        matching_size=size,
        ratio=ratio,
        payload_bits=run.ledger.payload_bits,
        total_bits=run.ledger.total_bits,
        rounds=run.ledger.rounds,
        messages=run.ledger.messages,
    )


def protocol_params(protocol: str, alpha: Optional[float]) -> dict:
    spec = get_protocol(protocol)
    if "alpha" in spec.params:
        if alpha is None:
            raise ValueError(f"{protocol} requires --alpha")
        return {"alpha": alpha}
    return {}


def write_rows(stream_: TextIO, rows: Iterable[ResultRow]) -> None:
    writer = csv.DictWriter(stream_, fieldnames=ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.csv_values())


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    ns: tuple[int, ...]
    ks: tuple[int, ...]
    alphas: tuple[float, ...]
    trials: int = 1
    seed: int = 0
    out: Optional[str] = None
    instance: str = "hard"
    density: float = 0.01

    def __post_init__(self):
        get_protocol(self.protocol)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.instance not in INSTANCE_TYPES:
            raise ValueError(f"instance type must be one of {INSTANCE_TYPES}")
        if not (self.ns and self.ks and self.alphas):
            raise ValueError("ns, ks and alphas must be non-empty")

    def cells(self) -> list[tuple[int, int, float]]:
        return [(n, k, a) for n in self.ns for k in self.ks for a in self.alphas]

    def feasible(self, n: int, k: int, alpha: float) -> Optional[str]:
        """Reason the cell cannot run, or None."""
        try:
            if self.instance == "hard":
                validate_hard_params(n, k, alpha)
            if self.protocol == "twostep" and not 0 < alpha <= 0.5:
                raise ValueError(f"alpha={alpha} must lie in (0, 1/2]")
        except ValueError as exc:
            return str(exc)
        return None


def cell_seed(master: int, n: int, k: int, alpha: float, trial: int) -> int:
    return derive_seed(master, n, k, alpha, trial)


def run_cell_trial(cfg: ExperimentConfig, n: int, k: int, alpha: float, trial: int) -> tuple[ResultRow, dict]:
    seed = cell_seed(cfg.seed, n, k, alpha, trial)
    if cfg.instance == "hard":
        partition, _ = hard_partition(n, k, alpha, seed)
    else:
        partition = random_instance(n, k, cfg.density, seed)
    graph = partition.graph
    run = run_protocol(PROTOCOLS[cfg.protocol], graph, partition, protocol_params(cfg.protocol, alpha), derive_seed(seed, "run"))
    extra = {key: run.stats[key] for key in ("step1_bits", "step2_bits", "iterations") if key in run.stats}
    return result_row(run, graph, k, alpha, trial, seed), extra


def _run_job(job):
    return run_cell_trial(*job)


def worker_count() -> int:
    value = os.environ.get("DMR_THREADS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> tuple[list[ResultRow], list[dict], list[str]]:
    """All (cell, trial) rows in deterministic order, their extras, and skip notices."""
    skipped, jobs = [], []
    for n, k, alpha in cfg.cells():
        reason = cfg.feasible(n, k, alpha)
        if reason:
            skipped.append(f"skipping n={n} k={k} alpha={alpha}: {reason}")
            continue
        jobs.extend((cfg, n, k, alpha, t) for t in range(cfg.trials))
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_job(job) for job in jobs]
    rows = [r for r, _ in results]
    extras = [e for _, e in results]
    return rows, extras, skipped


def cost_model(n: int, k: int, alpha: float) -> float:
    """``(alpha^2 k n + alpha n + k) * ceil(log2 n)``."""
    return (alpha**2 * k * n + alpha * n + k) * math.ceil(math.log2(n))


@dataclass(frozen=True)
class CellSummary:
    protocol: str
    n: int
    k: int
    alpha: Optional[float]
    trials: int
    mean_payload: float
    median_payload: float
    mean_total: float
    mean_ratio: float
    min_ratio: float
    mean_rounds: float


def summarize(rows: list[ResultRow]) -> list[CellSummary]:
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.protocol, row.n, row.k, row.alpha), []).append(row)
    out = []
    for (protocol, n, k, alpha), cell in groups.items():
        payload = [r.payload_bits for r in cell]
        ratios = [r.ratio for r in cell]
        out.append(
            CellSummary(
                protocol,
                n,
                k,
                alpha,
                len(cell),
                statistics.fmean(payload),
                statistics.median(payload),
                statistics.fmean(r.total_bits for r in cell),
                statistics.fmean(ratios),
                min(ratios),
                statistics.fmean(r.rounds for r in cell),
            )
        )
    return out


@dataclass(frozen=True)
class CostFit:
    C: float
    max_deviation: float
    ratios: tuple[float, ...]


def fit_constant(measured: list[float], model: list[float]) -> CostFit:
    """Constant ``C`` minimising the worst relative deviation of ``measured`` from ``C * model``.

    With per-cell ratios ``rho = measured / model`` the minimax choice is
    the midrange of ``rho``, giving deviation ``(max - min) / (max + min)``.
    """
    if not measured or len(measured) != len(model):
        raise ValueError("need equally many measurements and model values")
    rho = tuple(m / f for m, f in zip(measured, model))
    lo, hi = min(rho), max(rho)
    C = (lo + hi) / 2
    return CostFit(C, (hi - lo) / (hi + lo) if hi + lo else 0.0, rho)


def fit_twostep(summaries: list[CellSummary]) -> CostFit:
    cells = [s for s in summaries if s.protocol == "twostep"]
    return fit_constant([s.mean_payload for s in cells], [cost_model(s.n, s.k, s.alpha) for s in cells])


# --------------------------------------------------------------------------
# verification of instance files
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: Optional[bool]  # None = skipped
    detail: str = ""
    fatal: bool = True

    def line(self) -> str:
        status = "SKIP" if self.passed is None else ("PASS" if self.passed else ("FAIL" if self.fatal else "WARN"))
        return f"{status:4} {self.name}" + (f": {self.detail}" if self.detail else "")


def verify_instance(partition: EdgePartition, hard: Optional[HardHeader]) -> list[Check]:
    """Structural and lemma checks for an instance file.

    Hard instances are compared against the instance regenerated from the
    header's seed, which also supplies the hidden ``Y`` labels.
    """
    graph = partition.graph
    checks = [
        Check(
            "partition disjoint",
            len(partition.assignment) == graph.m == len(graph.edge_set()),
            f"{graph.m} edges over {partition.k} sites",
        )
    ]
    if hard is None:
        checks.append(Check("hard-instance checks", None, "no hard header; lemma checks skipped"))
        return checks

    n, k = graph.n, partition.k
    try:
        validate_hard_params(n, k, hard.alpha)
        if graph.n_left != graph.n_right:
            raise ValueError("hard instances have equal sides")
    except ValueError as exc:
        checks.append(Check("hard parameters", False, str(exc)))
        return checks
    ref = build_hard_instance(n, k, hard.alpha, hard.seed)
    checks.append(Check("header consistent", ref.r == hard.r and math.isclose(ref.p, hard.p), f"r={hard.r} p={hard.p}"))

    X = np.zeros_like(ref.X)
    cross_block = wrong_site = 0
    for (u, v), s in zip(graph.edges, partition.assignment):
        j, i = divmod(u, k)
        jv, l = divmod(v, k)
        if jv != j:
            cross_block += 1
            continue
        if s != i:
            wrong_site += 1
        X[j, i, l] = 1
    checks.append(Check("blocks disconnected", cross_block == 0, f"{cross_block} cross-block edges"))
    checks.append(Check("left-vertex partition", wrong_site == 0, f"{wrong_site} edges on the wrong site"))

    file_inst = HardInstance(n, k, hard.alpha, X, ref.Y)
    over = int((file_inst.intersections() > 1).sum())
    checks.append(Check("at most one intersection per row", over == 0, f"{over} rows violate"))

    cls = classify_edges(ref)
    bad = sum(1 for u, v in graph.edges if u in cls.U0 and v in cls.V1)
    checks.append(Check("no U0-V1 edges", bad == 0, f"{bad} offending edges"))
    checks.append(Check("edges reproduce from seed", bool(np.array_equal(X, ref.X)) and cross_block == 0))

    v0 = v0_size(ref)
    in_regime = v0_lemma_regime(ref)
    checks.append(
        Check(
            "|V0| <= 2pn",
            v0_lemma_holds(ref),
            f"|V0|={v0} bound={2 * ref.p * n:.1f}" + ("" if in_regime else " (outside lemma regime p^2 n >= 3)"),
            fatal=in_regime,
        )
    )
    opt = opt_size(file_inst)
    in_regime = opt_lemma_regime(ref)
    checks.append(
        Check(
            "OPT >= n/5",
            opt_lemma_holds(file_inst, opt),
            f"OPT={opt} bound={n / 5:.1f}" + ("" if in_regime else " (outside lemma regime k >= 64, r >= 16)"),
            fatal=in_regime,
        )
    )
    return checks


def checks_failed(checks: list[Check]) -> bool:
    return any(c.passed is False and c.fatal for c in checks)
