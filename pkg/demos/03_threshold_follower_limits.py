"""Where following LQD without predictions breaks down.

FollowLqd replays LQD's queue lengths as thresholds, but it cannot evict,
so an adversary can wedge it: grow one queue to the full buffer, then
alternate one-packet-per-port slots (which pull the thresholds away) with
refill slots (which push them back). Each such cycle hands a clairvoyant
schedule num_ports + 1 packets while FollowLqd only ever gets 2, so the
measured gap approaches (N + 1) / 2.

Run:  python3 demos/03_threshold_follower_limits.py
"""

from shbuf import FollowLqd, LongestQueueDrop, SwitchConfig
from shbuf.analysis import brute_force_opt, throughput
from shbuf.workloads import followlqd_adversary, followlqd_adversary_fill

config = SwitchConfig(num_ports=8, buffer_size=32)
n = config.num_ports
fill = followlqd_adversary_fill(config)
fill_tx = throughput(config, fill, FollowLqd())

print(f"switch: {n} ports, buffer {config.buffer_size}")
print(f"fill phase contributes {fill_tx} packets to every policy\n")

print(f"{'cycles':>6} {'FollowLqd/cycle':>16} {'optimum/cycle':>14} {'ratio':>7}")
for cycles in (1, 5, 20, 100, 200):
    total = throughput(config, followlqd_adversary(config, cycles), FollowLqd())
    per_cycle = (total - fill_tx) / cycles
    ratio = (n + 1) / per_cycle
    print(f"{cycles:>6} {per_cycle:>16.2f} {n + 1:>14} {ratio:>7.3f}")

print(f"\nthe gap approaches (N + 1) / 2 = {(n + 1) / 2}")

# on a small instance the exhaustive search confirms the per-cycle optimum
small = SwitchConfig(num_ports=4, buffer_size=8)
small_fill = followlqd_adversary_fill(small)
gain = brute_force_opt(small, followlqd_adversary(small, 1)) - brute_force_opt(small, small_fill)
print(
    f"\nexhaustive check at N={small.num_ports}, B={small.buffer_size}: "
    f"one cycle is worth exactly {gain} = N + 1 packets to the optimum"
)
print(f"push-out LQD also collects N + 1 per cycle: "
      f"{throughput(small, followlqd_adversary(small, 1), LongestQueueDrop()) - throughput(small, small_fill, LongestQueueDrop())}")
