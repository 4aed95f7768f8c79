import random

import pytest

from shbuf import (
    ArrivalSequence,
    CompleteSharing,
    DynamicThresholds,
    FollowLqd,
    LongestQueueDrop,
    PacketId,
    SwitchConfig,
    SwitchState,
    Verdict,
    drain_order,
    load_sequence,
    run_simulation,
    save_outcomes,
    save_sequence,
)
from shbuf.core import PolicyError, Simulation
from shbuf.policies import Decision
from shbuf.workloads import single_burst

from conftest import random_sequence


def test_config_validation():
    with pytest.raises(ValueError):
        SwitchConfig(0, 4)
    with pytest.raises(ValueError):
        SwitchConfig(4, 0)
    # degenerate buffer smaller than the port count must still simulate
    cfg = SwitchConfig(4, 2)
    seq = ArrivalSequence([[0, 1, 2, 3]])
    result = run_simulation(cfg, seq, CompleteSharing())
    assert result.transmitted_count == 2
    assert result.dropped_count == 2


def test_empty_sequence_any_policy():
    cfg = SwitchConfig(2, 4)
    for policy in (CompleteSharing(), LongestQueueDrop(), FollowLqd()):
        result = run_simulation(cfg, ArrivalSequence([]), policy)
        assert result.transmitted_count == 0
        assert result.dropped_count == 0
        assert result.outcomes == []


def test_single_packet_complete_sharing():
    cfg = SwitchConfig(2, 4)
    result = run_simulation(cfg, ArrivalSequence([[0]]), CompleteSharing())
    assert result.transmitted_count == 1
    assert result.dropped_count == 0


def test_full_buffer_burst_is_absorbed_by_lqd():
    # a burst of exactly the buffer size into an empty buffer loses nothing
    cfg = SwitchConfig(4, 16)
    result = run_simulation(cfg, single_burst(cfg, 16), LongestQueueDrop())
    assert result.transmitted_count == 16
    assert result.dropped_count == 0


def test_sequence_validation_rejects_bad_input():
    cfg = SwitchConfig(2, 4)
    with pytest.raises(ValueError):
        run_simulation(cfg, ArrivalSequence([[0, 1, 0]]), CompleteSharing())
    with pytest.raises(ValueError):
        run_simulation(cfg, ArrivalSequence([[2]]), CompleteSharing())


def _state_with(lengths):
    state = SwitchState(len(lengths))
    for port, length in enumerate(lengths):
        for i in range(length):
            state.push(port, PacketId(0, port * 100 + i))
    return state


def test_drain_order_examples():
    state = _state_with([3, 0, 1, 0])
    drained = drain_order(state)
    assert len(drained) == 2
    assert state.queue_len == [2, 0, 0, 0]

    assert drain_order(_state_with([0, 0, 0, 0])) == []

    state = _state_with([1, 1, 1, 1])
    assert len(drain_order(state)) == 4
    assert state.occupancy == 0


def test_drain_order_takes_heads_in_port_order():
    state = SwitchState(2)
    state.push(0, PacketId(0, 0))
    state.push(0, PacketId(0, 1))
    state.push(1, PacketId(0, 2))
    assert drain_order(state) == [PacketId(0, 0), PacketId(0, 2)]


def test_occupancy_bound_after_every_event(small_config):
    rng = random.Random(7)
    for policy in (CompleteSharing(), LongestQueueDrop(), FollowLqd(), DynamicThresholds()):
        seq = random_sequence(rng, small_config.num_ports, 80, 0.8)
        sim = Simulation(small_config, policy)
        for slot_index, row in enumerate(seq.slots):
            for pos, port in enumerate(row):
                sim.arrive(PacketId(slot_index, pos), port)
                assert 0 <= sim.state.occupancy <= small_config.buffer_size
                assert sim.state.occupancy == sum(sim.state.queue_len)
            sim.depart_phase()
            assert sim.state.occupancy == sum(sim.state.queue_len)
        while sim.state.occupancy:
            sim.depart_phase()


def test_conservation_and_outcome_totality(small_config):
    rng = random.Random(11)
    for policy in (CompleteSharing(), LongestQueueDrop(), FollowLqd()):
        seq = random_sequence(rng, small_config.num_ports, 60, 0.7)
        result = run_simulation(small_config, seq, policy)
        assert result.transmitted_count + result.dropped_count == seq.total_packets
        assert len(result.outcomes) == seq.total_packets
        assert len({o.packet for o in result.outcomes}) == seq.total_packets


def test_drop_tail_policies_never_push_out(small_config):
    rng = random.Random(13)
    for policy in (CompleteSharing(), DynamicThresholds(), FollowLqd()):
        seq = random_sequence(rng, small_config.num_ports, 60, 0.9)
        result = run_simulation(small_config, seq, policy)
        assert all(o.verdict is not Verdict.PUSHED_OUT for o in result.outcomes)


def test_work_conservation(small_config):
    # each departure phase transmits exactly the number of non-empty queues
    rng = random.Random(17)
    seq = random_sequence(rng, small_config.num_ports, 50, 0.8)
    sim = Simulation(small_config, LongestQueueDrop())
    for slot_index, row in enumerate(seq.slots):
        for pos, port in enumerate(row):
            sim.arrive(PacketId(slot_index, pos), port)
        nonempty = sum(1 for q in sim.state.queue_len if q)
        before = sim.transmitted
        sim.depart_phase()
        assert sim.transmitted - before == nonempty


def test_identical_runs_are_byte_identical(small_config, tmp_path):
    rng1, rng2 = random.Random(23), random.Random(23)
    seq1 = random_sequence(rng1, small_config.num_ports, 80, 0.6)
    seq2 = random_sequence(rng2, small_config.num_ports, 80, 0.6)
    paths = []
    for i, seq in enumerate((seq1, seq2)):
        result = run_simulation(small_config, seq, LongestQueueDrop())
        path = tmp_path / f"run{i}.csv"
        save_outcomes(path, result)
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]


def test_occupancy_series_tracks_arrival_phase():
    cfg = SwitchConfig(4, 16)
    result = run_simulation(cfg, single_burst(cfg, 16), LongestQueueDrop())
    # 4 arrivals per slot, one departure per slot while the queue is backed up
    assert result.occupancy_series[:4] == [4, 7, 10, 13]
    assert result.peak_occupancy == 13


def test_sequence_file_round_trip(tmp_path):
    seq = ArrivalSequence([[0, 1], [], [3, 0, 2]])
    path = tmp_path / "trace.csv"
    save_sequence(path, seq, comment="spec: kind=test")
    text = path.read_text()
    assert text.startswith("# spec: kind=test\nslot,port\n")
    loaded = load_sequence(path)
    assert loaded.slots == seq.slots


def test_sequence_file_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("slot,port\n1,0\n0,0\n")
    with pytest.raises(ValueError, match="sorted"):
        load_sequence(path)
    path.write_text("slot,port\n0,x\n")
    with pytest.raises(ValueError, match="non-integer"):
        load_sequence(path)
    path.write_text("0,0\n")
    with pytest.raises(ValueError, match="header"):
        load_sequence(path)


def test_outcomes_csv_schema(tmp_path):
    cfg = SwitchConfig(2, 2)
    result = run_simulation(cfg, ArrivalSequence([[0, 0], [0, 1]]), LongestQueueDrop())
    path = tmp_path / "out.csv"
    save_outcomes(path, result)
    lines = path.read_text().splitlines()
    assert lines[0] == "packet_slot,packet_pos,port,verdict"
    assert len(lines) == 1 + 4


class _OverflowPolicy:
    name = "broken"

    def reset(self, config):
        pass

    def on_arrival(self, port, packet, state):
        return Decision(True)

    def on_departure(self, port, state):
        pass


class _BadPushout:
    name = "broken_pushout"

    def reset(self, config):
        pass

    def on_arrival(self, port, packet, state):
        return Decision(True, pushout_victim=port)

    def on_departure(self, port, state):
        pass


def test_simulator_rejects_illegal_decisions():
    cfg = SwitchConfig(2, 1)
    with pytest.raises(PolicyError, match="overflow"):
        run_simulation(cfg, ArrivalSequence([[0, 1]]), _OverflowPolicy())
    with pytest.raises(PolicyError, match="push-out"):
        run_simulation(cfg, ArrivalSequence([[0]]), _BadPushout())
