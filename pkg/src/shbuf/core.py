"""Discrete-time model of a shared-buffer switch.

Time advances in unit slots. Each slot has an arrival phase, in which up to
``num_ports`` unit-size packets arrive and the active policy accepts or
rejects each one in order, followed by a departure phase, in which every
non-empty queue transmits exactly one packet (ports processed in ascending
index order). After the last slot of the arrival sequence the simulator keeps
running departure-only slots until the buffer is empty, so every accepted
packet is eventually transmitted and throughput comparisons are exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Deque, Iterator, NamedTuple, Optional

if TYPE_CHECKING:
    from .policies import Policy

__all__ = [
    "SwitchConfig",
    "PacketId",
    "ArrivalSequence",
    "SwitchState",
    "Verdict",
    "PacketOutcome",
    "RunResult",
    "PolicyError",
    "Simulation",
    "run_simulation",
    "drain_order",
    "save_sequence",
    "load_sequence",
    "save_outcomes",
]


@dataclass(frozen=True)
class SwitchConfig:
    """Switch dimensions: ``num_ports`` output queues sharing ``buffer_size`` packet slots."""

    num_ports: int
    buffer_size: int

    def __post_init__(self) -> None:
        if self.num_ports < 1:
            raise ValueError(f"num_ports must be >= 1, got {self.num_ports}")
        if self.buffer_size < 1:
            raise ValueError(f"buffer_size must be >= 1, got {self.buffer_size}")


class PacketId(NamedTuple):
    """Identity of one arrival. Lexicographic order equals arrival order."""

    slot: int
    pos: int


@dataclass
class ArrivalSequence:
    """Per-slot arrivals; each slot lists destination ports in processing order."""

    slots: list[list[int]]

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    @property
    def total_packets(self) -> int:
        return sum(len(row) for row in self.slots)

    def packets(self) -> Iterator[tuple[PacketId, int]]:
        """Yield ``(packet, port)`` pairs in arrival order."""
        for slot_index, row in enumerate(self.slots):
            for pos, port in enumerate(row):
                yield PacketId(slot_index, pos), port

    def validate(self, config: SwitchConfig) -> None:
        """Raise ValueError if any slot exceeds the aggregate cap or names a bad port."""
        n = config.num_ports
        for slot_index, row in enumerate(self.slots):
            if len(row) > n:
                raise ValueError(
                    f"slot {slot_index} carries {len(row)} arrivals; at most {n} allowed"
                )
            for port in row:
                if not 0 <= port < n:
                    raise ValueError(f"slot {slot_index}: port {port} out of range [0, {n})")


class Verdict(Enum):
    """Final fate of one packet."""

    TRANSMITTED = "transmitted"
    DROPPED_ON_ARRIVAL = "dropped_on_arrival"
    PUSHED_OUT = "pushed_out"


@dataclass(frozen=True)
class PacketOutcome:
    packet: PacketId
    port: int
    verdict: Verdict


@dataclass
class RunResult:
    """Everything observable from one simulation run."""

    transmitted_count: int
    dropped_count: int
    outcomes: list[PacketOutcome]
    occupancy_series: list[int]

    @property
    def peak_occupancy(self) -> int:
        return max(self.occupancy_series, default=0)

    def verdicts(self) -> dict[PacketId, Verdict]:
        return {outcome.packet: outcome.verdict for outcome in self.outcomes}


class PolicyError(RuntimeError):
    """A policy returned a decision that cannot be applied to the current state."""


class SwitchState(object):
    """Queue lengths, total occupancy, and per-port FIFO contents."""

    __slots__ = ("queue_len", "occupancy", "queues")

    def __init__(self, num_ports: int) -> None:
        self.queue_len: list[int] = [0] * num_ports
        self.occupancy: int = 0
        self.queues: list[Deque[PacketId]] = [deque() for _ in range(num_ports)]

    def push(self, port: int, packet: PacketId) -> None:
        self.queues[port].append(packet)
        self.queue_len[port] += 1
        self.occupancy += 1

    def pop_head(self, port: int) -> PacketId:
        packet = self.queues[port].popleft()
        self.queue_len[port] -= 1
        self.occupancy -= 1
        return packet

    def pop_tail(self, port: int) -> PacketId:
        packet = self.queues[port].pop()
        self.queue_len[port] -= 1
        self.occupancy -= 1
        return packet


class Simulation:
    """Stepwise driver: feeds arrival and departure events to one policy.

    ``run_simulation`` wraps this in the usual slot loop; verification code
    that needs to interleave several instances event by event drives it
    directly. With ``record_verdicts=False`` only the counters are kept,
    which is noticeably faster on large sweeps.
    """

    __slots__ = ("config", "policy", "state", "transmitted", "dropped", "verdicts", "_record", "_buffer")

    def __init__(self, config: SwitchConfig, policy: "Policy", record_verdicts: bool = True) -> None:
        self.config = config
        self.policy = policy
        policy.reset(config)
        self.state = SwitchState(config.num_ports)
        self.transmitted = 0
        self.dropped = 0
        self.verdicts: dict[PacketId, tuple[int, Verdict]] = {}
        self._record = record_verdicts
        self._buffer = config.buffer_size

    def arrive(self, packet: PacketId, port: int) -> None:
        """Process one arrival: ask the policy, then apply its decision."""
        decision = self.policy.on_arrival(port, packet, self.state)
        state = self.state
        if decision.accept:
            victim_port = decision.pushout_victim
            if victim_port is not None:
                if state.occupancy != self._buffer:
                    raise PolicyError("push-out is only legal when the buffer is full")
                if not state.queue_len[victim_port]:
                    raise PolicyError(f"push-out victim queue {victim_port} is empty")
                victim = state.pop_tail(victim_port)
                self.dropped += 1
                if self._record:
                    self.verdicts[victim] = (victim_port, Verdict.PUSHED_OUT)
            elif state.occupancy >= self._buffer:
                raise PolicyError("accept would overflow the buffer")
            state.push(port, packet)
        else:
            self.dropped += 1
            if self._record:
                self.verdicts[packet] = (port, Verdict.DROPPED_ON_ARRIVAL)

    def depart_port(self, port: int) -> None:
        """One port's share of the departure phase: drain one packet, then notify the policy."""
        state = self.state
        if state.queue_len[port]:
            packet = state.pop_head(port)
            self.transmitted += 1
            if self._record:
                self.verdicts[packet] = (port, Verdict.TRANSMITTED)
        self.policy.on_departure(port, state)

    def depart_phase(self) -> None:
        for port in range(self.config.num_ports):
            self.depart_port(port)


def drain_order(state: SwitchState) -> list[PacketId]:
    """Apply one departure phase to ``state``: head packet of every non-empty
    queue leaves, ports in ascending index order. Returns the drained packets."""
    drained = []
    for port in range(len(state.queue_len)):
        if state.queue_len[port]:
            drained.append(state.pop_head(port))
    return drained


def run_simulation(config: SwitchConfig, sequence: ArrivalSequence, policy: "Policy") -> RunResult:
    """Drive ``policy`` over ``sequence`` and return the complete run record.

    The sequence is validated before any state is touched. After the last
    slot, departure-only slots continue until the buffer is empty.
    """
    sequence.validate(config)
    sim = Simulation(config, policy)
    occupancy_series: list[int] = []
    for slot_index, row in enumerate(sequence.slots):
        for pos, port in enumerate(row):
            sim.arrive(PacketId(slot_index, pos), port)
        occupancy_series.append(sim.state.occupancy)
        sim.depart_phase()
    while sim.state.occupancy:
        occupancy_series.append(sim.state.occupancy)
        sim.depart_phase()

    outcomes = []
    for packet, port in sequence.packets():
        recorded_port, verdict = sim.verdicts[packet]
        outcomes.append(PacketOutcome(packet, recorded_port, verdict))
    total = sequence.total_packets
    if sim.transmitted + sim.dropped != total:
        raise AssertionError(
            f"conservation violated: {sim.transmitted} + {sim.dropped} != {total}"
        )
    return RunResult(sim.transmitted, sim.dropped, outcomes, occupancy_series)


# --- trace and result files -------------------------------------------------
#
# Arrival traces are line-oriented text: optional '#' comment lines, a
# 'slot,port' header, then one 'slot,port' row per packet, sorted by slot
# with within-slot order equal to row order. Slots mentioned by no row are
# empty (arrival-free); trailing empty slots are not representable.

_SEQUENCE_HEADER = "slot,port"


def save_sequence(path, sequence: ArrivalSequence, comment: Optional[str] = None) -> None:
    lines = []
    if comment is not None:
        lines.append(f"# {comment}")
    lines.append(_SEQUENCE_HEADER)
    for packet, port in sequence.packets():
        lines.append(f"{packet.slot},{port}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_sequence(path) -> ArrivalSequence:
    rows: list[tuple[int, int]] = []
    with open(path) as fh:
        header_seen = False
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line != _SEQUENCE_HEADER:
                    raise ValueError(f"{path}: expected header {_SEQUENCE_HEADER!r}, got {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected 'slot,port', got {line!r}")
            try:
                slot, port = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{line_no}: non-integer field in {line!r}") from None
            if slot < 0 or port < 0:
                raise ValueError(f"{path}:{line_no}: negative field in {line!r}")
            if rows and slot < rows[-1][0]:
                raise ValueError(f"{path}:{line_no}: rows not sorted by slot")
            rows.append((slot, port))
    if not header_seen:
        raise ValueError(f"{path}: missing {_SEQUENCE_HEADER!r} header")
    num_slots = rows[-1][0] + 1 if rows else 0
    slots: list[list[int]] = [[] for _ in range(num_slots)]
    for slot, port in rows:
        slots[slot].append(port)
    return ArrivalSequence(slots)


def save_outcomes(path, result: RunResult) -> None:
    lines = ["packet_slot,packet_pos,port,verdict"]
    for outcome in result.outcomes:
        lines.append(
            f"{outcome.packet.slot},{outcome.packet.pos},{outcome.port},{outcome.verdict.value}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
