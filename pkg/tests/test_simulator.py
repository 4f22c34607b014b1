import pytest
from hypothesis import given, settings

from conftest import partitioned_graphs

from dmr.graph import BipartiteGraph, EdgePartition, Matching, Side, VertexId
from dmr.protocols import GREEDY, LUBY, TWOSTEP
from dmr.simulator import (
    KIND_BITS,
    CostLedger,
    Direction,
    Kind,
    Message,
    Network,
    ProtocolSpec,
    Reply,
    count_bits,
    edge_bits,
    encode_edge,
    encode_vertex,
    run_protocol,
    vertex_bits,
)


def hand_instance():
    g = BipartiteGraph(4, 4, ((0, 0), (1, 1), (1, 0), (2, 2), (3, 3)))
    return g, EdgePartition(g, 2, (0, 0, 1, 1, 1))


class TestEncoding:
    @pytest.mark.parametrize("n_side,bits", [(16, 4), (1, 1), (2, 1), (3, 2), (1000, 10), (1024, 10), (1025, 11)])
    def test_vertex_bits(self, n_side, bits):
        assert vertex_bits(n_side) == bits

    def test_edge_bits(self):
        g = BipartiteGraph(16, 16, ((0, 0),))
        assert edge_bits(g) == 8
        assert encode_edge((0, 0), g) == 8

    def test_count_bits(self):
        assert [count_bits(n) for n in (0, 1, 2, 7, 8)] == [1, 1, 2, 3, 4]

    def test_encode_rejects(self):
        g = BipartiteGraph(2, 2, ((0, 0),))
        with pytest.raises(ValueError):
            encode_edge((1, 1), g)
        with pytest.raises(ValueError):
            encode_vertex(VertexId(Side.LEFT, 5), 2)

    def test_negative_bits_rejected(self):
        with pytest.raises(ValueError):
            Message(Direction.UP, 0, 1, -1, Kind.DONE)


class TestHandCount:
    def test_greedy_costs(self):
        g, part = hand_instance()
        run = run_protocol(GREEDY, g, part)
        # edges need 2 + 2 bits; payloads: 0 down, 8 up, 8 down, 16 up
        assert [m.payload_bits for m in run.transcript] == [0, 8, 8, 16]
        assert run.ledger.payload_bits == 32
        # header: 1 site bit + 4 kind bits + 4-bit length prefix
        assert run.ledger.header_bits == 4 * (1 + KIND_BITS + 4)
        assert run.ledger.total_bits == 68
        assert run.ledger.rounds == 2
        assert run.ledger.messages == 4
        assert run.output.as_set() == {(0, 0), (1, 1), (2, 2), (3, 3)}
        assert run.ledger.channel_payload(0) == 8 and run.ledger.channel_payload(1) == 24

    def test_transcript_lines(self):
        g, part = hand_instance()
        run = run_protocol(GREEDY, g, part)
        assert run.dump_transcript().splitlines() == [
            "1 down 0 MATCHING 0",
            "1 up 0 MATCHING 8",
            "2 down 1 MATCHING 8",
            "2 up 1 MATCHING 16",
        ]


class TestLedger:
    def test_record_and_consistency(self):
        led = CostLedger(2)
        msgs = [Message(Direction.DOWN, 0, 1, 5, Kind.START, 3), Message(Direction.UP, 1, 1, 7, Kind.DONE, 2)]
        for m in msgs:
            led.record(m)
        led.rounds = 1
        assert led.payload_bits == 12 and led.total_bits == 17 and led.messages == 2
        assert led.consistent_with(msgs)
        assert not led.consistent_with(msgs[:1])

    @settings(max_examples=60, deadline=None)
    @given(partitioned_graphs())
    def test_every_protocol_consistent(self, part):
        for proto, params in ((GREEDY, {}), (TWOSTEP, {"alpha": 0.05}), (LUBY, {})):
            run = run_protocol(proto, part.graph, part, params, seed=3)
            assert run.ledger.consistent_with(run.transcript)
            assert run.ledger.messages == len(run.transcript)
            # star topology: every downlink is answered on the same channel
            for down, up in zip(run.transcript[::2], run.transcript[1::2]):
                assert down.direction is Direction.DOWN and up.direction is Direction.UP
                assert down.site == up.site and down.round == up.round
                assert 0 <= down.site < part.k


class TestDeterminism:
    @settings(max_examples=40, deadline=None)
    @given(partitioned_graphs())
    def test_same_seed_same_transcript(self, part):
        for proto, params in ((TWOSTEP, {"alpha": 0.05}), (LUBY, {})):
            a = run_protocol(proto, part.graph, part, params, seed=11)
            b = run_protocol(proto, part.graph, part, params, seed=11)
            assert a.dump_transcript() == b.dump_transcript()
            assert a.output.edges == b.output.edges


class TestRunProtocolErrors:
    def test_foreign_partition(self, path3):
        other = BipartiteGraph(2, 2, ((0, 0),))
        with pytest.raises(ValueError):
            run_protocol(GREEDY, other, EdgePartition(path3, 1, (0, 0, 0)))

    def test_unknown_param(self, path3):
        with pytest.raises(ValueError):
            run_protocol(GREEDY, path3, EdgePartition(path3, 1, (0, 0, 0)), {"alpha": 0.1})

    def test_invalid_output(self, path3):
        bad = ProtocolSpec("bad", lambda net, part, params: (Matching([(0, 1)]), {}))
        with pytest.raises(RuntimeError):
            run_protocol(bad, path3, EdgePartition(path3, 1, (0, 0, 0)))

    def test_send_before_round(self, path3):
        class Echo:
            def handle(self, kind, data):
                return Reply(Kind.DONE, None, 1)

        net = Network(path3, 1, 0)
        net.attach([Echo()])
        with pytest.raises(RuntimeError):
            net.exchange(0, Kind.START)
        net.begin_round()
        assert net.exchange(0, Kind.START).kind is Kind.DONE
        with pytest.raises(ValueError):
            net.exchange(1, Kind.START)

    def test_attach_wrong_count(self, path3):
        with pytest.raises(ValueError):
            Network(path3, 2, 0).attach([])
