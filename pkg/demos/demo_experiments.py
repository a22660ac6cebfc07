"""Desk-scale statistical experiments: crossings, exponents, energy density.

Run:  python3 demos/demo_experiments.py   (a couple of minutes)
"""

import math

from isinglab.experiments import (
    correlation_length,
    energy_density_estimate,
    massive_green_decay_rate,
    rsw_crossing,
    two_point_profile,
    wulff_ratio,
)
from isinglab.spin import BETA_C

print("crossing probabilities at the self-dual point (free boundaries):")
for n in (8, 16):
    r = rsw_crossing(n, samples=600, seed=1)
    print(f"  n={n:2d}: short-span p_hat = {r['p_hat']:.3f} "
          f"(long-span companion {r['long_p_hat']:.4f})")
sub = rsw_crossing(16, samples=400, seed=2, p=0.3)
print(f"  subcritical control (p=0.3): {sub['p_hat']:.4f}")
print()

print("energy density on the unit disk (prediction sqrt2/2 - delta/pi):")
r = energy_density_estimate(1 / 8, samples=150_000, seed=3)
print(f"  delta=1/8 : {r['mean']:.5f} +- {r['stderr']:.5f} "
      f"(prediction {r['prediction']:.5f})")
print()

print("two-point function on the 64-torus at criticality:")
prof = two_point_profile(64, [4, 8, 16], 4000, seed=4)
for d, v in prof.items():
    print(f"  distance {d:2d}: {v:.4f}   (power law ~ d^-1/4)")
print()

beta = 0.3
cl = correlation_length(beta, 1, 0)
print(f"correlation length at beta={beta}: tau(1,0) = {cl['tau']:.5f}")
print(f"  massive Green decay rate:        {massive_green_decay_rate(beta)['rate']:.5f}")
near = BETA_C - 1e-3
print(f"Wulff ratio at beta_c - 1e-3: tau/(beta_c-beta) = "
      f"{wulff_ratio(near, 1, 0):.4f} (limit 4)")
