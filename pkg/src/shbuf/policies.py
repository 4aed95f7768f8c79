"""Buffer-sharing policies.

Five policies over the shared-buffer model:

* ``CompleteSharing``     -- accept whenever the buffer has room.
* ``DynamicThresholds``   -- accept while the queue is below ``alpha * (B - Q)``.
* ``LongestQueueDrop``    -- push-out: a full buffer evicts the tail of the
                             longest queue to admit the newcomer.
* ``FollowLqd``           -- drop-tail: per-port thresholds replay the queue
                             lengths of a shadow LongestQueueDrop instance fed
                             the same arrivals; accept while queue < threshold.
* ``Credence``            -- FollowLqd plus (a) an unconditional accept while
                             the longest queue is below ``B / N`` and (b) a
                             drop-prediction oracle consulted when the
                             thresholds would permit the packet.

Policies never touch queue contents directly; they return a ``Decision`` and
the simulator applies it. All tie-breaking (longest queue, largest threshold)
is toward the lowest port index so that runs are exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Protocol, Union

from .core import PacketId, SwitchConfig, SwitchState
from .oracles import (
    FeatureTracker,
    Oracle,
    PredictionLabel,
    PredictionUnavailable,
)

__all__ = [
    "Decision",
    "ACCEPT",
    "DROP",
    "Policy",
    "CompleteSharing",
    "DynamicThresholds",
    "LongestQueueDrop",
    "ThresholdState",
    "FollowLqd",
    "Credence",
]


@dataclass(frozen=True)
class Decision:
    """Outcome of one arrival decision.

    ``pushout_victim`` names the queue whose tail packet must be evicted to
    make room; it is only legal for preemptive policies on a full buffer.
    """

    accept: bool
    pushout_victim: Optional[int] = None


ACCEPT = Decision(True)
DROP = Decision(False)


class Policy(Protocol):
    """Contract shared by every buffer-sharing policy."""

    name: str

    def reset(self, config: SwitchConfig) -> None:
        """Forget all run state and bind to a switch configuration."""

    def on_arrival(self, port: int, packet: PacketId, state: SwitchState) -> Decision:
        """Decide the fate of a packet arriving at ``port``."""

    def on_departure(self, port: int, state: SwitchState) -> None:
        """Observe the departure phase visiting ``port`` (after its drain)."""


class CompleteSharing:
    """Accept if and only if the buffer is not full."""

    name = "complete_sharing"

    def reset(self, config: SwitchConfig) -> None:
        self._buffer = config.buffer_size

    def on_arrival(self, port: int, packet: PacketId, state: SwitchState) -> Decision:
        return ACCEPT if state.occupancy < self._buffer else DROP

    def on_departure(self, port: int, state: SwitchState) -> None:
        pass


class DynamicThresholds:
    """Accept while the arriving queue is below ``alpha`` times the free space.

    The comparison ``q < alpha * (B - Q)`` is evaluated in exact rational
    arithmetic; ``alpha`` may be given as a ``Fraction`` or a ``p/q`` string.
    """

    name = "dynamic_thresholds"

    def __init__(self, alpha: Union[Fraction, str, int] = Fraction(1, 2)) -> None:
        self.alpha = Fraction(alpha)
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def reset(self, config: SwitchConfig) -> None:
        self._buffer = config.buffer_size

    def on_arrival(self, port: int, packet: PacketId, state: SwitchState) -> Decision:
        free = self._buffer - state.occupancy
        if free <= 0:
            return DROP
        # cross-multiplied: q * denominator < numerator * free
        if state.queue_len[port] * self.alpha.denominator < self.alpha.numerator * free:
            return ACCEPT
        return DROP

    def on_departure(self, port: int, state: SwitchState) -> None:
        pass


class LongestQueueDrop:
    """Preemptive policy: a full buffer evicts from the longest queue.

    While the buffer has room every packet is accepted. On a full buffer the
    longest queue (ties toward the lowest port index) gives up its most
    recently queued packet to admit the newcomer; if that queue is the
    arriving one, evicting the newcomer itself is a plain drop.
    """

    name = "lqd"

    def reset(self, config: SwitchConfig) -> None:
        self._buffer = config.buffer_size

    def on_arrival(self, port: int, packet: PacketId, state: SwitchState) -> Decision:
        if state.occupancy < self._buffer:
            return ACCEPT
        lengths = state.queue_len
        longest = lengths.index(max(lengths))
        if longest == port:
            return DROP
        return Decision(True, longest)

    def on_departure(self, port: int, state: SwitchState) -> None:
        pass


class ThresholdState:
    """Per-port thresholds that replay LongestQueueDrop queue lengths.

    ``on_arrival`` mirrors how an LQD instance fed the same arrivals would
    change its queue-length vector: grow the arriving entry, stealing one
    unit from the largest entry when the vector already sums to the buffer
    size. ``on_departure`` mirrors the per-port drain. The mirrored
    instance's accept decisions never matter here, only its lengths.
    """

    __slots__ = ("thresholds", "total", "_buffer")

    def __init__(self, num_ports: int, buffer_size: int) -> None:
        self.thresholds: list[int] = [0] * num_ports
        self.total = 0
        self._buffer = buffer_size

    def on_arrival(self, port: int) -> None:
        thresholds = self.thresholds
        if self.total == self._buffer:
            largest = thresholds.index(max(thresholds))
            # no-op when the arriving port already holds the largest
            # threshold, mirroring a push-out of the newcomer itself
            thresholds[largest] -= 1
            thresholds[port] += 1
        else:
            thresholds[port] += 1
            self.total += 1

    def on_departure(self, port: int) -> None:
        if self.thresholds[port] > 0:
            self.thresholds[port] -= 1
            self.total -= 1


class FollowLqd:
    """Drop-tail policy accepting while the queue is under its mirrored threshold."""

    name = "follow_lqd"

    def reset(self, config: SwitchConfig) -> None:
        self._buffer = config.buffer_size
        self.thresholds = ThresholdState(config.num_ports, config.buffer_size)

    def on_arrival(self, port: int, packet: PacketId, state: SwitchState) -> Decision:
        mirror = self.thresholds
        mirror.on_arrival(port)
        if state.queue_len[port] < mirror.thresholds[port] and state.occupancy < self._buffer:
            return ACCEPT
        return DROP

    def on_departure(self, port: int, state: SwitchState) -> None:
        self.thresholds.on_departure(port)


class Credence:
    """FollowLqd with a robustness safeguard and a drop-prediction oracle.

    Arrival handling, in order:

    1. update the mirrored threshold for the arriving port;
    2. safeguard: if the longest queue is strictly below ``B / N`` (checked
       as ``longest * N < B`` in integers), accept unconditionally;
    3. if the queue is under its threshold and the buffer has room, ask the
       oracle and follow its verdict;
    4. otherwise drop without consulting the oracle.

    An oracle that raises ``PredictionUnavailable`` falls back to a fixed
    decision (accept by default, which degrades toward CompleteSharing
    rather than toward starvation).

    With ``record_predictions=True`` the oracle is additionally queried for
    every arrival, including ones decided by the safeguard or the threshold,
    and the labels are collected in ``prediction_log``. Oracles are pure, so
    the extra queries cannot change any decision.
    """

    name = "credence"

    def __init__(
        self,
        oracle: Oracle,
        fallback_accept: bool = True,
        record_predictions: bool = False,
        feature_window: int = 16,
    ) -> None:
        self.oracle = oracle
        self.fallback_accept = fallback_accept
        self.record_predictions = record_predictions
        self.feature_window = feature_window
        self.prediction_log: dict[PacketId, PredictionLabel] = {}

    def reset(self, config: SwitchConfig) -> None:
        self._ports = config.num_ports
        self._buffer = config.buffer_size
        self.thresholds = ThresholdState(config.num_ports, config.buffer_size)
        self.features = FeatureTracker(config.num_ports, self.feature_window)
        self.prediction_log = {}

    def _predict(self, packet: PacketId, features) -> PredictionLabel:
        try:
            label = self.oracle.predict(packet, features)
        except PredictionUnavailable:
            label = PredictionLabel.NEGATIVE if self.fallback_accept else PredictionLabel.POSITIVE
        if self.record_predictions:
            self.prediction_log[packet] = label
        return label

    def on_arrival(self, port: int, packet: PacketId, state: SwitchState) -> Decision:
        features = self.features.on_arrival(port, state)
        mirror = self.thresholds
        mirror.on_arrival(port)
        lengths = state.queue_len
        if max(lengths) * self._ports < self._buffer:
            if self.record_predictions:
                self._predict(packet, features)
            return ACCEPT
        if lengths[port] < mirror.thresholds[port] and state.occupancy < self._buffer:
            label = self._predict(packet, features)
            return DROP if label is PredictionLabel.POSITIVE else ACCEPT
        if self.record_predictions:
            self._predict(packet, features)
        return DROP

    def on_departure(self, port: int, state: SwitchState) -> None:
        self.thresholds.on_departure(port)
