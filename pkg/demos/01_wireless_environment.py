"""Walk through the simulated edge environment.

Places workers uniformly in a square region, finds the smallest
communication radius that keeps the disk graph connected, then samples
channel gains and shows how link rates and per-model transfer times fall
off with distance.
"""
import numpy as np

from adflsim.world import (ChannelModel, World, channel_gain,
                           min_connected_radius, transfer_time,
                           transmission_rate)

rng = np.random.default_rng(0)
n = 30
region = 100.0
positions = rng.uniform(0, region, (n, 2))

radius = min_connected_radius(positions)
print(f"{n} workers in a {region:.0f} m square")
print(f"smallest connecting radius: {radius:.2f} m")

channel = ChannelModel()  # -43 dB at 1 m, 1e-13 W noise, 1 MHz links
world = World(positions, np.full(n, 0.05), channel, model_cost_bits=1e6,
              comm_radius=radius, seed=0)
degrees = world.in_range.sum(axis=1)
print(f"neighbor count: min {degrees.min()}, mean {degrees.mean():.1f}, "
      f"max {degrees.max()}")

print("\nexpected link quality by distance (50 mW transmitter):")
print(f"{'dist (m)':>9} {'mean gain':>12} {'rate (Mbps)':>12} {'1e6-bit transfer':>17}")
for dist in (1, 5, 10, 25, 50, 100):
    gains = [channel_gain(dist, rng) for _ in range(2000)]
    rate = transmission_rate(float(np.mean(gains)), 0.05, channel)
    print(f"{dist:>9} {np.mean(gains):>12.3e} {rate / 1e6:>12.3f} "
          f"{transfer_time(1e6, rate):>16.3f}s")

print("\nfading makes per-round link times vary; round 1 vs round 2 on the")
print("same pair:")
t1 = world.transfer_matrix(1)
t2 = world.transfer_matrix(2)
i, j = 0, int(np.flatnonzero(world.in_range[0])[0])
print(f"  pair ({i}, {j}): {t1[i, j]:.3f} s then {t2[i, j]:.3f} s")
