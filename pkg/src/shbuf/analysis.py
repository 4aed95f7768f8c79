"""Prediction-error and competitive-ratio measurement.

Provides the error ratio relating push-out LongestQueueDrop throughput to
FollowLqd throughput on the prediction-reduced sequence, its closed-form
upper bound from the confusion counts, an exact brute-force offline optimum
for tiny instances, flip-probability sweeps, and an event-by-event check that
threshold-following policies really do replay LQD queue lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .core import (
    ArrivalSequence,
    PacketId,
    RunResult,
    Simulation,
    SwitchConfig,
    run_simulation,
)
from .learner import ConfusionCounts
from .oracles import (
    ConstantOracle,
    Oracle,
    PredictionLabel,
    ground_truth_from_run,
)
from .policies import (
    CompleteSharing,
    Credence,
    DynamicThresholds,
    FollowLqd,
    LongestQueueDrop,
    Policy,
)
from .workloads import poisson_bursts

__all__ = [
    "ErrorReport",
    "CompetitiveEstimate",
    "SweepRow",
    "InstanceTooLarge",
    "throughput",
    "simulate_with_prediction_log",
    "compute_eta",
    "eta_upper_bound",
    "brute_force_opt",
    "competitive_estimate",
    "competitive_sweep",
    "find_threshold_divergence",
    "write_sweep_rows",
    "write_error_report",
    "LQD_COMPETITIVE_RATIO",
]

# push-out LQD's known worst-case throughput gap versus a clairvoyant
# schedule; treated as an exact literature constant
LQD_COMPETITIVE_RATIO = Fraction(1707, 1000)


class InstanceTooLarge(RuntimeError):
    """The exhaustive search refuses instances beyond its packet cap."""


def throughput(config: SwitchConfig, sequence: ArrivalSequence, policy: Policy) -> int:
    """Transmitted-packet count for one policy on one sequence (no per-packet records)."""
    sequence.validate(config)
    sim = Simulation(config, policy, record_verdicts=False)
    for slot_index, row in enumerate(sequence.slots):
        for pos, port in enumerate(row):
            sim.arrive(PacketId(slot_index, pos), port)
        sim.depart_phase()
    while sim.state.occupancy:
        sim.depart_phase()
    return sim.transmitted


def simulate_with_prediction_log(
    config: SwitchConfig,
    sequence: ArrivalSequence,
    oracle: Oracle,
    fallback_accept: bool = True,
    feature_window: int = 16,
) -> tuple[RunResult, dict[PacketId, PredictionLabel]]:
    """Run Credence while recording the oracle's label for every packet.

    The oracle is queried even for packets whose fate the safeguard or the
    thresholds decided, so the log covers the whole sequence and can feed
    the error ratio directly.
    """
    policy = Credence(
        oracle,
        fallback_accept=fallback_accept,
        record_predictions=True,
        feature_window=feature_window,
    )
    result = run_simulation(config, sequence, policy)
    return result, policy.prediction_log


@dataclass(frozen=True)
class ErrorReport:
    """Error ratio, its closed-form bound, and the ingredients behind both."""

    eta: float
    eta_bound: float
    confusion: ConfusionCounts
    lqd_transmitted: int
    reduced_transmitted: int


def compute_eta(
    config: SwitchConfig,
    sequence: ArrivalSequence,
    predictions: Mapping[PacketId, PredictionLabel],
    truth: Mapping[PacketId, bool],
) -> ErrorReport:
    """Measure prediction error as LQD(sequence) / FollowLqd(reduced sequence).

    The reduced sequence deletes every packet with a POSITIVE prediction
    (true or false) while preserving slot timing and the within-slot order of
    the survivors. Corner cases: 0/0 is reported as 1 (a drop-free sequence,
    where every policy here coincides) and x/0 as +inf.
    """
    confusion, reduced = _classify_and_reduce(sequence, predictions, truth)
    lqd_tx = throughput(config, sequence, LongestQueueDrop())
    reduced_tx = throughput(config, reduced, FollowLqd())
    if reduced_tx > 0:
        eta = lqd_tx / reduced_tx
    elif lqd_tx == 0:
        eta = 1.0
    else:
        eta = math.inf
    return ErrorReport(eta, eta_upper_bound(confusion, config.num_ports), confusion, lqd_tx, reduced_tx)


def _classify_and_reduce(
    sequence: ArrivalSequence,
    predictions: Mapping[PacketId, PredictionLabel],
    truth: Mapping[PacketId, bool],
) -> tuple[ConfusionCounts, ArrivalSequence]:
    tp = fp = tn = fn = 0
    reduced_slots: list[list[int]] = []
    for slot_index, row in enumerate(sequence.slots):
        survivors: list[int] = []
        for pos, port in enumerate(row):
            packet = PacketId(slot_index, pos)
            try:
                label = predictions[packet]
                dropped = truth[packet]
            except KeyError:
                raise ValueError(
                    f"packet {packet} missing from predictions or ground truth; "
                    "coverage must be total"
                ) from None
            if label is PredictionLabel.POSITIVE:
                if dropped:
                    tp += 1
                else:
                    fp += 1
            else:
                survivors.append(port)
                if dropped:
                    fn += 1
                else:
                    tn += 1
        reduced_slots.append(survivors)
    return ConfusionCounts(tp, fp, tn, fn), ArrivalSequence(reduced_slots)


def eta_upper_bound(confusion: ConfusionCounts, num_ports: int) -> float:
    """Closed-form ceiling on the error ratio from confusion counts alone.

    Evaluates ``(tn + fp) / (tn - min((N - 1) * fn, tn))`` with +inf where
    the denominator is not positive. False negatives are the expensive
    mistakes: each can cost up to ``N`` extra drops.
    """
    if num_ports < 1:
        raise ValueError(f"num_ports must be >= 1, got {num_ports}")
    numerator = confusion.tn + confusion.fp
    denominator = confusion.tn - min((num_ports - 1) * confusion.fn, confusion.tn)
    if denominator <= 0:
        return math.inf
    return numerator / denominator


# --- exact offline optimum ------------------------------------------------------


def brute_force_opt(config: SwitchConfig, sequence: ArrivalSequence, cap: int = 20) -> int:
    """Exact clairvoyant throughput over all accept/drop decision vectors.

    Only drop-tail vectors are searched: any push-out schedule transmits the
    same set of packets as the drop-tail twin that rejects, on arrival,
    exactly the packets it would later evict. Branch-and-bound with the bound
    ``transmitted + buffered + remaining arrivals``; instances above ``cap``
    packets are refused.
    """
    sequence.validate(config)
    total = sequence.total_packets
    if total > cap:
        raise InstanceTooLarge(
            f"instance has {total} packets; the exhaustive search caps at {cap}"
        )

    slots = sequence.slots
    num_slots = len(slots)
    n = config.num_ports
    buffer_size = config.buffer_size

    # greedy lower bounds to seed pruning; both are feasible drop-tail vectors
    best = max(
        throughput(config, sequence, CompleteSharing()),
        throughput(config, sequence, LongestQueueDrop()),
    )
    queue = [0] * n

    def search(slot_index: int, pos: int, transmitted: int, occupancy: int, remaining: int) -> None:
        nonlocal best
        if transmitted + occupancy + remaining <= best:
            return
        if slot_index == num_slots:
            best = transmitted + occupancy
            return
        row = slots[slot_index]
        if pos == len(row):
            # departure phase, then fast-forward over arrival-free slots
            saved = queue[:]
            next_slot = slot_index
            while True:
                drained = 0
                for port in range(n):
                    if queue[port]:
                        queue[port] -= 1
                        drained += 1
                transmitted += drained
                occupancy -= drained
                next_slot += 1
                if next_slot == num_slots or slots[next_slot]:
                    break
                if occupancy == 0:
                    while next_slot < num_slots and not slots[next_slot]:
                        next_slot += 1
                    break
            search(next_slot, 0, transmitted, occupancy, remaining)
            queue[:] = saved
            return
        port = row[pos]
        if occupancy < buffer_size:
            queue[port] += 1
            search(slot_index, pos + 1, transmitted, occupancy + 1, remaining - 1)
            queue[port] -= 1
        search(slot_index, pos + 1, transmitted, occupancy, remaining - 1)

    search(0, 0, 0, 0, total)
    return best


@dataclass(frozen=True)
class CompetitiveEstimate:
    """Brute-forced optimum versus one policy on one sequence."""

    opt_throughput: int
    alg_throughput: int
    ratio: Union[Fraction, float]


def competitive_estimate(
    config: SwitchConfig, sequence: ArrivalSequence, policy: Policy, cap: int = 20
) -> CompetitiveEstimate:
    opt = brute_force_opt(config, sequence, cap)
    alg = throughput(config, sequence, policy)
    if alg > 0:
        ratio: Union[Fraction, float] = Fraction(opt, alg)
    elif opt == 0:
        ratio = Fraction(1)
    else:
        ratio = math.inf
    return CompetitiveEstimate(opt, alg, ratio)


# --- flip-probability sweep ------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    p: float
    seed: int
    lqd_throughput: int
    credence_throughput: int
    dt_throughput: int

    @property
    def ratio_credence(self) -> float:
        return _ratio(self.lqd_throughput, self.credence_throughput)

    @property
    def ratio_dt(self) -> float:
        return _ratio(self.lqd_throughput, self.dt_throughput)


def _ratio(reference: int, achieved: int) -> float:
    # 0/0 means an arrival-free run where every policy coincides
    if achieved > 0:
        return reference / achieved
    return 1.0 if reference == 0 else math.inf


def competitive_sweep(
    config: SwitchConfig,
    p_values: Sequence[float],
    seeds: Sequence[int],
    rate: float,
    horizon: int,
    dt_alpha: Union[Fraction, str] = Fraction(1, 2),
) -> list[SweepRow]:
    """Throughput of Credence under increasingly flipped predictions.

    For each seed, one burst workload is generated and served by
    LongestQueueDrop (whose outcomes double as the perfect predictions), by
    DynamicThresholds, and by Credence with the recorded predictions flipped
    at each probability in ``p_values``. Rows are ordered by (p, seed).
    """
    from .oracles import FlipOracle, PerfectOracle

    rows = []
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"flip probability must be in [0, 1], got {p}")
    per_seed: dict[int, tuple[ArrivalSequence, PerfectOracle, int, int]] = {}
    for seed in seeds:
        sequence = poisson_bursts(config, rate, horizon, seed)
        lqd_result = run_simulation(config, sequence, LongestQueueDrop())
        oracle = PerfectOracle(ground_truth_from_run(lqd_result))
        dt_tx = throughput(config, sequence, DynamicThresholds(dt_alpha))
        per_seed[seed] = (sequence, oracle, lqd_result.transmitted_count, dt_tx)
    for p in p_values:
        for seed in seeds:
            sequence, oracle, lqd_tx, dt_tx = per_seed[seed]
            flipped = FlipOracle(oracle, p, seed)
            credence_tx = throughput(config, sequence, Credence(flipped))
            rows.append(SweepRow(p, seed, lqd_tx, credence_tx, dt_tx))
    return rows


def write_sweep_rows(path, rows: Sequence[SweepRow]) -> None:
    lines = ["p,lqd_throughput,credence_throughput,dt_throughput,ratio_credence,ratio_dt,seed"]
    for row in rows:
        lines.append(
            f"{row.p!r},{row.lqd_throughput},{row.credence_throughput},{row.dt_throughput},"
            f"{row.ratio_credence:.6f},{row.ratio_dt:.6f},{row.seed}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_error_report(path, report: ErrorReport) -> None:
    c = report.confusion
    lines = [
        "eta,eta_bound,tp,fp,tn,fn,lqd_tx,flqd_reduced_tx",
        f"{report.eta!r},{report.eta_bound!r},{c.tp},{c.fp},{c.tn},{c.fn},"
        f"{report.lqd_transmitted},{report.reduced_transmitted}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# --- threshold mirror verification ------------------------------------------------


@dataclass(frozen=True)
class ThresholdDivergence:
    """First event at which a policy's thresholds stopped matching LQD queues."""

    policy_name: str
    event: str
    slot: int
    detail: Union[PacketId, int]
    thresholds: list[int]
    lqd_queue_len: list[int]


def find_threshold_divergence(
    config: SwitchConfig,
    sequence: ArrivalSequence,
    oracle: Optional[Oracle] = None,
) -> Optional[ThresholdDivergence]:
    """Drive FollowLqd, Credence, and a push-out LongestQueueDrop instance in
    lockstep over the same events and compare after every single event.

    Returns None when both policies' threshold vectors equal the LQD queue
    lengths throughout, otherwise a record of the first mismatch. The LQD
    instance here is the complete preemptive simulation, not the threshold
    arithmetic, so the comparison is a genuine two-route check.
    """
    sequence.validate(config)
    follow = FollowLqd()
    credence = Credence(oracle if oracle is not None else ConstantOracle(PredictionLabel.NEGATIVE))
    follow_sim = Simulation(config, follow, record_verdicts=False)
    credence_sim = Simulation(config, credence, record_verdicts=False)
    lqd_sim = Simulation(config, LongestQueueDrop(), record_verdicts=False)

    lqd_len = lqd_sim.state.queue_len
    num_ports = config.num_ports

    def mismatch(event: str, slot: int, detail) -> Optional[ThresholdDivergence]:
        if follow.thresholds.thresholds != lqd_len:
            return ThresholdDivergence(
                follow.name, event, slot, detail, list(follow.thresholds.thresholds), list(lqd_len)
            )
        if credence.thresholds.thresholds != lqd_len:
            return ThresholdDivergence(
                credence.name, event, slot, detail, list(credence.thresholds.thresholds), list(lqd_len)
            )
        return None

    slot_index = 0
    for slot_index, row in enumerate(sequence.slots):
        for pos, port in enumerate(row):
            packet = PacketId(slot_index, pos)
            follow_sim.arrive(packet, port)
            credence_sim.arrive(packet, port)
            lqd_sim.arrive(packet, port)
            found = mismatch("arrival", slot_index, packet)
            if found:
                return found
        for port in range(num_ports):
            follow_sim.depart_port(port)
            credence_sim.depart_port(port)
            lqd_sim.depart_port(port)
            found = mismatch("departure", slot_index, port)
            if found:
                return found
    while follow_sim.state.occupancy or credence_sim.state.occupancy or lqd_sim.state.occupancy:
        slot_index += 1
        for port in range(num_ports):
            follow_sim.depart_port(port)
            credence_sim.depart_port(port)
            lqd_sim.depart_port(port)
            found = mismatch("departure", slot_index, port)
            if found:
                return found
    return None
