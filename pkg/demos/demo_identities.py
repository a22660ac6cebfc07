"""Exact identities by enumeration: duality, expansions, loop weights.

Run:  python3 demos/demo_identities.py
"""

import math

import numpy as np

from isinglab.domains import Rectangle, build_domain
from isinglab.fk import p_self_dual
from isinglab.loops import FKDobrushinModel
from isinglab.spin import (
    BETA_C,
    SpinGraph,
    exact_partition,
    exact_two_point,
    ht_expansion,
    kw_duality_residual,
)

print("critical inverse temperature:", BETA_C)
print("self-dual edge parameter:    ", p_self_dual(2.0))
print()

# --- Kramers-Wannier duality: the plus-boundary partition function on G
# and the free one on the dual graph agree after the cosh/exp prefactors
for size in (2, 3):
    for beta in (0.3, BETA_C, 0.7):
        res = kw_duality_residual(SpinGraph.grid(size, size), beta)
        print(f"KW duality {size}x{size} grid, beta={beta:.4f}: residual {res:.2e}")
print()

# --- the high-temperature expansion resums the Boltzmann sum exactly
tri = SpinGraph(3, [(0, 1), (1, 2), (0, 2)])
beta = 0.45
t = math.tanh(beta)
print("triangle, beta=0.45:")
print("  2^3 cosh^3(b) (1 + tanh^3 b) =", 8 * math.cosh(beta) ** 3 * (1 + t ** 3))
print("  contour expansion            =", ht_expansion(tri, beta))
print("  Boltzmann sum                =", exact_partition(tri, beta))
print("  single-edge correlation = tanh(b):",
      exact_two_point(SpinGraph(2, [(0, 1)]), beta, 0, 1), "=", t)
print()

# --- loop representation: weights depend only on open edges and loops
dom = build_domain(Rectangle(2, 2), 1.0, "fk", "nw", "se")
model = FKDobrushinModel(dom, p_self_dual(2.0), 2.0)
print("2x2 Dobrushin domain at the self-dual point (x = 1):")
for row in model.all_states():
    lc = model.trace_loops(list(row))
    w = model.weight(list(row))
    print(f"  open={lc.n_open} loops={lc.n_loops} "
          f"weight/sqrt2^loops = {w / math.sqrt(2) ** lc.n_loops:.6f} "
          f"(euler count {model.euler_loop_count(list(row))})")
