import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import partitioned_graphs
from oracles import luby_global_winners

from dmr.graph import BipartiteGraph, EdgePartition, is_maximal, maximum_matching
from dmr.protocols import (
    PROTOCOLS,
    TwoStepParams,
    get_protocol,
    luby_distributed,
    priority_winners,
    sequential_greedy,
    two_step,
)
from dmr.simulator import PRIORITY_BITS, Kind, edge_bits


def table_priorities(table):
    """priority_fn that looks up ``(iteration, edge)`` and defaults to 0."""
    return lambda it, e: table.get((it, e), table.get(e, 0))


class TestRegistry:
    def test_names(self):
        assert set(PROTOCOLS) == {"greedy", "twostep", "luby"}
        assert get_protocol("luby").name == "luby"
        with pytest.raises(ValueError):
            get_protocol("nope")


class TestGreedy:
    def test_two_site_example(self):
        g = BipartiteGraph(2, 2, ((0, 0), (1, 0), (1, 1)))
        run = sequential_greedy(g, EdgePartition(g, 2, (0, 1, 1)))
        assert run.output.as_set() == {(0, 0), (1, 1)}
        assert run.ledger.rounds == 2

    def test_single_site(self):
        g = BipartiteGraph(3, 3, ((0, 0), (1, 1), (2, 2)))
        run = sequential_greedy(g, EdgePartition(g, 1, (0, 0, 0)))
        assert run.ledger.rounds == 1 and len(run.output) == 3

    @settings(max_examples=200, deadline=None)
    @given(partitioned_graphs())
    def test_maximal_and_within_budget(self, part):
        run = sequential_greedy(part.graph, part)
        assert is_maximal(part.graph, run.output)
        assert run.ledger.rounds == part.k
        n = max(part.graph.n, 2)
        assert run.ledger.payload_bits <= 2 * part.k * n * math.ceil(math.log2(n))


class TestTwoStep:
    def test_params(self):
        cfg = TwoStepParams(1 / 16)
        assert cfg.q == 0.5 and not cfg.delegates_to_greedy
        assert cfg.fetch_limit(100) == 7
        assert TwoStepParams(0.2).delegates_to_greedy
        for bad in (0.0, 0.6):
            with pytest.raises(ValueError):
                TwoStepParams(bad)

    @settings(max_examples=60, deadline=None)
    @given(partitioned_graphs())
    def test_large_alpha_is_greedy(self, part):
        a = two_step(part.graph, part, 0.5, seed=4)
        b = sequential_greedy(part.graph, part, seed=4)
        assert a.dump_transcript() == b.dump_transcript()
        assert a.output == b.output and a.stats["delegated"]

    def test_step1_fetches_best_site(self):
        # site 1 holds a perfect matching on 16 + 16 vertices, site 0 a single edge
        edges = [(0, 0)] + [(i, i) for i in range(1, 16)] + [(0, 15)]
        g = BipartiteGraph(16, 16, tuple(edges))
        part = EdgePartition(g, 3, (0,) + (1,) * 15 + (2,))
        run = two_step(g, part, 1 / 16, seed=0)
        assert run.stats["local_sizes"] == [1, 15, 1]
        assert run.stats["best_site"] == 1
        assert run.stats["step1_size"] == math.ceil(32 / 16)
        assert len(run.output) == max(run.stats["step1_size"], run.stats["step2_size"])

    def test_tie_breaks_to_lowest_site(self):
        g = BipartiteGraph(2, 2, ((0, 0), (1, 1)))
        run = two_step(g, EdgePartition(g, 2, (1, 0)), 1 / 16)
        assert run.stats["best_site"] == 0

    def test_empty_graph_skips_fetch(self):
        g = BipartiteGraph(3, 3)
        run = two_step(g, EdgePartition(g, 2, ()), 1 / 16)
        assert len(run.output) == 0
        assert all(m.kind in (Kind.SIZE_REQUEST, Kind.SIZE, Kind.MATCHING) for m in run.transcript)

    @settings(max_examples=100, deadline=None)
    @given(partitioned_graphs(), st.sampled_from([1 / 32, 1 / 16, 1 / 8]), st.integers(0, 1000))
    def test_output_is_larger_step(self, part, alpha, seed):
        run = two_step(part.graph, part, alpha, seed=seed)
        s = run.stats
        assert len(run.output) == max(s["step1_size"], s["step2_size"])
        assert s["step1_size"] <= math.ceil(alpha * part.graph.n)
        assert s["step1_bits"] + s["step2_bits"] == run.ledger.payload_bits
        assert set(s["selected"]) <= set(range(part.k))


class TestLuby:
    def test_single_edge(self):
        g = BipartiteGraph(1, 1, ((0, 0),))
        run = luby_distributed(g, EdgePartition(g, 1, (0,)))
        assert run.stats["iterations"] == 1 and run.ledger.rounds == 2
        assert run.output.as_set() == {(0, 0)}

    def test_pinned_path_middle_wins(self, path3):
        part = EdgePartition(path3, 1, (0, 0, 0))
        run = luby_distributed(path3, part, priority_fn=table_priorities({(1, 0): 3, (0, 0): 1, (1, 1): 2}))
        assert run.output.as_set() == {(1, 0)}
        assert run.stats["iterations"] == 1

    def test_pinned_path_ends_win(self, path3):
        part = EdgePartition(path3, 1, (0, 0, 0))
        run = luby_distributed(path3, part, priority_fn=table_priorities({(0, 0): 3, (1, 1): 2, (1, 0): 1}))
        assert run.output.as_set() == {(0, 0), (1, 1)}

    def test_pooled_selection_superset(self, path3):
        # e=(0,0) at site 0, f=(1,0), g=(1,1) at site 1, priorities g > f > e
        part = EdgePartition(path3, 2, (0, 1, 1))
        run = luby_distributed(path3, part, priority_fn=table_priorities({(1, 1): 3, (1, 0): 2, (0, 0): 1}))
        first = run.stats["history"][0]
        assert luby_global_winners(first["surviving"]) == {(1, 1)}
        assert set(first["chosen"]) == {(0, 0), (1, 1)}

    def test_priority_winners_tiebreak(self):
        out = priority_winners([((0, 0), 5), ((0, 1), 5)])
        assert [e for e, _ in out] == [(0, 1)]

    @settings(max_examples=150, deadline=None)
    @given(partitioned_graphs(), st.integers(0, 10_000))
    def test_maximal_and_rounds(self, part, seed):
        run = luby_distributed(part.graph, part, seed=seed)
        assert is_maximal(part.graph, run.output)
        assert run.ledger.rounds == run.stats["iterations"] + 1
        for it in run.stats["history"]:
            chosen = set(it["chosen"])
            assert chosen >= luby_global_winners(it["surviving"])
            assert chosen == {e for e, _ in priority_winners(it["pooled"])}

    @settings(max_examples=100, deadline=None)
    @given(partitioned_graphs(), st.integers(0, 10_000))
    def test_exact_cost(self, part, seed):
        run = luby_distributed(part.graph, part, seed=seed)
        ebits = edge_bits(part.graph)
        hist = run.stats["history"]
        winners_bits = sum(len(h["pooled"]) for h in hist) * (ebits + PRIORITY_BITS)
        assert sum(run.ledger.uplink_bits) == winners_bits + part.k  # each site says DONE once
        # every downlink after the first round carries the previous M'
        downs = [m for m in run.transcript if m.kind is Kind.UPDATE]
        sizes = {i + 2: len(h["chosen"]) * ebits for i, h in enumerate(hist)}
        assert all(m.payload_bits == sizes[m.round] for m in downs)

    def test_matches_maximum_on_perfect_matching(self):
        g = BipartiteGraph(50, 50, tuple((i, i) for i in range(50)))
        run = luby_distributed(g, EdgePartition.round_robin(g, 4))
        assert len(run.output) == len(maximum_matching(g)) == 50
        assert run.stats["iterations"] == 1
