import random

import pytest

from shbuf import ArrivalSequence, SwitchConfig


def random_sequence(rng: random.Random, num_ports: int, num_slots: int, load: float) -> ArrivalSequence:
    """Independent per-port arrivals, like workloads.uniform_random but inline-seeded."""
    slots = [
        [port for port in range(num_ports) if rng.random() < load]
        for _ in range(num_slots)
    ]
    return ArrivalSequence(slots)


def random_tiny_sequence(rng: random.Random, num_ports: int, max_packets: int = 12) -> ArrivalSequence:
    """A short sequence with at most ``max_packets`` packets, for brute-force checks."""
    slots = []
    total = 0
    for _ in range(rng.randint(1, 8)):
        count = min(rng.randint(0, num_ports), max_packets - total)
        slots.append([rng.randrange(num_ports) for _ in range(count)])
        total += count
        if total >= max_packets:
            break
    return ArrivalSequence(slots)


@pytest.fixture
def small_config() -> SwitchConfig:
    return SwitchConfig(num_ports=4, buffer_size=8)
