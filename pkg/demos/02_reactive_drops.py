"""Absorbing every burst can backfire.

Four simultaneous buffer-sized bursts monopolize the shared memory; right
after them, short bursts arrive on every other port. A policy that greedily
filled the buffer now has nothing left for the shorts and drops them at the
door. Push-out LQD quietly evicts a few of the hoarded packets instead,
keeps all the extra ports busy, and comes out ahead in total throughput.

Run:  python3 demos/02_reactive_drops.py
"""

from shbuf import (
    CompleteSharing,
    DynamicThresholds,
    FollowLqd,
    LongestQueueDrop,
    SwitchConfig,
    run_simulation,
)
from shbuf.workloads import multi_burst_then_shorts

config = SwitchConfig(num_ports=16, buffer_size=32)
sequence = multi_burst_then_shorts(config)

print(f"switch: {config.num_ports} ports, buffer {config.buffer_size}")
print(
    f"workload: 4 bursts of {config.buffer_size} to ports 0-3, then short bursts "
    f"to the other {config.num_ports - 4} ports ({sequence.total_packets} packets)\n"
)

print(f"{'policy':<20} {'transmitted':>11} {'dropped':>8}")
for policy in (CompleteSharing(), DynamicThresholds("1/2"), LongestQueueDrop(), FollowLqd()):
    result = run_simulation(config, sequence, policy)
    print(f"{policy.name:<20} {result.transmitted_count:>11} {result.dropped_count:>8}")

print(
    "\nLQD wins by evicting buffered big-burst packets to serve the shorts;"
    "\ndrop-tail policies cannot take an accept back."
)
