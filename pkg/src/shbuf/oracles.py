"""Drop-prediction oracles.

An oracle forecasts, for each arriving packet, whether a push-out
LongestQueueDrop instance serving the same arrival sequence would eventually
drop it (label ``POSITIVE``) or transmit it (label ``NEGATIVE``); push-outs
count as drops. Oracles are pure: predicting never mutates simulation state,
and two queries for the same packet and features return the same label.
"""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Mapping, NamedTuple, Protocol

from .core import PacketId, RunResult, Verdict

if TYPE_CHECKING:
    from .core import SwitchState
    from .learner import ForestModel

__all__ = [
    "PredictionLabel",
    "PredictionUnavailable",
    "FeatureVector",
    "FeatureTracker",
    "Oracle",
    "ConstantOracle",
    "PerfectOracle",
    "FlipOracle",
    "ForestOracle",
    "ground_truth_from_run",
]


class PredictionLabel(Enum):
    """Binary forecast: POSITIVE means "this packet will be dropped"."""

    POSITIVE = "drop"
    NEGATIVE = "accept"

    def inverted(self) -> "PredictionLabel":
        return PredictionLabel.NEGATIVE if self is PredictionLabel.POSITIVE else PredictionLabel.POSITIVE


class PredictionUnavailable(RuntimeError):
    """Raised by an oracle that cannot produce a label right now."""


class FeatureVector(NamedTuple):
    """Switch statistics visible to a predictor at one arrival.

    Sampled before the accept/drop decision: the arriving port's queue
    length, the total buffer occupancy, and exponentially weighted moving
    averages of both.
    """

    queue_len: int
    queue_len_avg: float
    occupancy: int
    occupancy_avg: float


class FeatureTracker:
    """Maintains the moving averages behind ``FeatureVector``.

    Averages fold in the observed value at every arrival with weight
    ``2 / (window + 1)``; ``window`` is measured in slots and stands in for
    one round-trip time of the modelled network.
    """

    def __init__(self, num_ports: int, window: int = 16) -> None:
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.window = window
        self._weight = 2.0 / (window + 1)
        self._queue_avg = [0.0] * num_ports
        self._occupancy_avg = 0.0

    def on_arrival(self, port: int, state: "SwitchState") -> FeatureVector:
        """Fold the pre-decision state into the averages and return the features."""
        weight = self._weight
        queue_len = state.queue_len[port]
        occupancy = state.occupancy
        queue_avg = self._queue_avg[port] + weight * (queue_len - self._queue_avg[port])
        self._queue_avg[port] = queue_avg
        self._occupancy_avg += weight * (occupancy - self._occupancy_avg)
        return FeatureVector(queue_len, queue_avg, occupancy, self._occupancy_avg)


class Oracle(Protocol):
    def predict(self, packet: PacketId, features: FeatureVector) -> PredictionLabel:
        """Label one arriving packet."""


class ConstantOracle:
    """Always returns the same label; the degenerate ends of the error spectrum."""

    def __init__(self, label: PredictionLabel) -> None:
        self.label = label

    def predict(self, packet: PacketId, features: FeatureVector) -> PredictionLabel:
        return self.label


def ground_truth_from_run(result: RunResult) -> dict[PacketId, bool]:
    """Map every packet of a finished run to True when it was dropped or pushed out."""
    return {
        outcome.packet: outcome.verdict is not Verdict.TRANSMITTED
        for outcome in result.outcomes
    }


class PerfectOracle:
    """Replays recorded per-packet outcomes, usually from a LongestQueueDrop run."""

    def __init__(self, truth: Mapping[PacketId, bool]) -> None:
        self.truth = truth

    @classmethod
    def from_run(cls, result: RunResult) -> "PerfectOracle":
        return cls(ground_truth_from_run(result))

    def predict(self, packet: PacketId, features: FeatureVector) -> PredictionLabel:
        try:
            dropped = self.truth[packet]
        except KeyError:
            raise ValueError(
                f"packet {packet} is not covered by the ground-truth trace; "
                "trace and arrival sequence do not match"
            ) from None
        return PredictionLabel.POSITIVE if dropped else PredictionLabel.NEGATIVE


_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    # splitmix64 finalizer; avalanches every input bit across the output
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return x ^ (x >> 31)


class FlipOracle:
    """Inverts a base oracle's label with probability ``p``, per packet.

    The coin for each packet is a pure function of ``(seed, packet)``, so the
    set of flipped packets does not depend on query order or on how often a
    packet is queried, and sweeps over ``p`` stay comparable across policies.
    """

    def __init__(self, base: Oracle, p: float, seed: int) -> None:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"flip probability must be in [0, 1], got {p}")
        self.base = base
        self.p = p
        self.seed = seed

    def _unit(self, packet: PacketId) -> float:
        x = _mix64(self.seed & _MASK64)
        x = _mix64(x ^ (packet.slot * 0x9E3779B97F4A7C15 & _MASK64))
        x = _mix64(x ^ (packet.pos * 0xC2B2AE3D27D4EB4F & _MASK64))
        return x / 2.0**64

    def predict(self, packet: PacketId, features: FeatureVector) -> PredictionLabel:
        label = self.base.predict(packet, features)
        if self._unit(packet) < self.p:
            return label.inverted()
        return label


class ForestOracle:
    """Labels packets with a trained decision-tree ensemble over the features."""

    def __init__(self, model: "ForestModel") -> None:
        self.model = model

    def predict(self, packet: PacketId, features: FeatureVector) -> PredictionLabel:
        return self.model.predict_label(features)
