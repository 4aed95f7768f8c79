"""How much of a single large burst does each policy keep?

A burst exactly the size of the shared buffer arrives at one port of an
otherwise idle switch. A clairvoyant schedule accepts all of it: nothing
else competes for the buffer. Push-out LQD also keeps everything, and so
does the threshold follower, because the mirrored LQD queue length grows
ahead of the real queue. DynamicThresholds, by contrast, reserves space for
traffic that never shows up and drops a large part of the burst on the
floor.

Run:  python3 demos/01_burst_absorption.py
"""

from shbuf import (
    CompleteSharing,
    DynamicThresholds,
    FollowLqd,
    LongestQueueDrop,
    SwitchConfig,
    run_simulation,
)
from shbuf.analysis import brute_force_opt
from shbuf.workloads import single_burst

config = SwitchConfig(num_ports=4, buffer_size=16)
burst = single_burst(config, config.buffer_size)

print(f"switch: {config.num_ports} ports, buffer {config.buffer_size}")
print(f"workload: one burst of {burst.total_packets} packets to port 0\n")

print(f"{'policy':<20} {'transmitted':>11} {'dropped':>8} {'peak occupancy':>15}")
for policy in (CompleteSharing(), DynamicThresholds("1/2"), LongestQueueDrop(), FollowLqd()):
    result = run_simulation(config, burst, policy)
    print(
        f"{policy.name:<20} {result.transmitted_count:>11} "
        f"{result.dropped_count:>8} {result.peak_occupancy:>15}"
    )

opt = brute_force_opt(config, burst)
print(f"\nclairvoyant optimum: {opt} (the whole burst fits)")
