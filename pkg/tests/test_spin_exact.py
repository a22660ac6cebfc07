import math

import numpy as np
import pytest

from isinglab.spin import (
    BETA_C,
    SpinGraph,
    dual_beta,
    exact_distribution,
    exact_partition,
    exact_two_point,
    ht_expansion,
    kw_duality_residual,
    lt_expansion_plus,
)


def test_duality_involution():
    for beta in (0.2, BETA_C, 0.9):
        assert abs(dual_beta(dual_beta(beta)) - beta) < 1e-12
    assert abs(dual_beta(BETA_C) - BETA_C) < 1e-12


def test_single_edge_partition():
    g = SpinGraph(2, [(0, 1)])
    # four configurations: 2 aligned (e^beta), 2 anti-aligned (e^-beta)
    assert abs(exact_partition(g, 1.0) - 4 * math.cosh(1.0)) < 1e-12


def test_single_vertex():
    g = SpinGraph(1, [])
    assert exact_partition(g, 1.0) == 2.0


def test_plus_bc_2x2():
    # all four vertices frozen +: single state, 4 edges
    g = SpinGraph.grid(2, 2, bc="plus")
    assert abs(exact_partition(g, 0.7) - math.exp(0.7 * 4)) < 1e-12


def test_transfer_matches_enumeration():
    for nx, ny in [(2, 2), (3, 2), (4, 3), (5, 4)]:
        g = SpinGraph.grid(nx, ny)
        z1 = exact_partition(g, BETA_C, method="enumerate")
        z2 = exact_partition(g, BETA_C, method="transfer")
        assert abs(z1 - z2) / z1 < 1e-12


def test_ht_single_edge_marked():
    g = SpinGraph(2, [(0, 1)])
    # E_G(a,b) = {the edge}, E_G = {empty}: correlation = tanh(beta)
    for beta in (0.3, 1.0):
        assert abs(ht_expansion(g, beta, marked=(0, 1)) - math.tanh(beta)) < 1e-14
        assert abs(exact_two_point(g, beta, 0, 1) - math.tanh(beta)) < 1e-12


def test_ht_single_edge_partition():
    g = SpinGraph(2, [(0, 1)])
    assert abs(ht_expansion(g, 1.0) - 4 * math.cosh(1.0)) < 1e-12


def test_ht_triangle():
    g = SpinGraph(3, [(0, 1), (1, 2), (0, 2)])
    beta = 0.45
    t = math.tanh(beta)
    expected = 2 ** 3 * math.cosh(beta) ** 3 * (1 + t ** 3)
    assert abs(ht_expansion(g, beta) - expected) < 1e-10
    assert abs(exact_partition(g, beta) - expected) / expected < 1e-12


@pytest.mark.parametrize("nedges_graph", [
    SpinGraph(2, [(0, 1)]),
    SpinGraph(3, [(0, 1), (1, 2)]),
    SpinGraph(3, [(0, 1), (1, 2), (0, 2)]),
    SpinGraph.grid(2, 2),
    SpinGraph.grid(2, 3),
    SpinGraph.grid(3, 3),
    SpinGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]),  # K4
])
def test_ht_vs_boltzmann_fixture_set(nedges_graph):
    g = nedges_graph
    assert len(g.edges) <= 12
    for beta in (0.3, BETA_C):
        z_ht = ht_expansion(g, beta)
        z = exact_partition(g, beta)
        assert abs(z_ht - z) / z < 1e-12
        # marked expansion against the Boltzmann two-point function
        a, b = 0, g.n - 1
        assert abs(ht_expansion(g, beta, marked=(a, b))
                   - exact_two_point(g, beta, a, b)) < 1e-12


def test_lt_expansion_plus():
    for nx, ny in [(2, 2), (3, 3)]:
        g = SpinGraph.grid(nx, ny)
        for beta in (0.3, 0.8):
            z_lt = lt_expansion_plus(g, beta)
            z = exact_partition(SpinGraph.grid(nx, ny, bc="plus"), beta)
            assert abs(z_lt - z) / z < 1e-12


def test_kw_duality():
    for nx, ny in [(2, 2), (3, 3)]:
        g = SpinGraph.grid(nx, ny)
        for beta in (0.3, BETA_C, 0.7):
            assert kw_duality_residual(g, beta) < 1e-10


def test_kw_duality_negative_control():
    # perturbing beta* must break the identity: evaluate both sides directly
    g = SpinGraph.grid(3, 3)
    beta = 0.4
    bstar = dual_beta(beta) + 0.01
    zplus = exact_partition(SpinGraph.grid(3, 3, bc="plus"), beta)
    gdual = SpinGraph.grid(2, 2)
    lhs = 2.0 ** gdual.n * math.cosh(bstar) ** len(gdual.edges) * zplus
    rhs = math.exp(beta * len(g.edges)) * exact_partition(gdual, bstar)
    assert abs(lhs - rhs) / rhs > 1e-3


def test_fkg_inequality_enumerated():
    # increasing indicator pairs on <= 4 spins: mu(A and B) >= mu(A) mu(B)
    g = SpinGraph.grid(2, 2)
    states, p = exact_distribution(g, 0.6)
    up = (states + 1) // 2
    events = [up[:, 0], up[:, 3], np.minimum(up[:, 1], up[:, 2]),
              np.maximum(up[:, 0], up[:, 1])]
    for A in events:
        for B in events:
            pa = float((A * p).sum())
            pb = float((B * p).sum())
            pab = float((A * B * p).sum())
            assert pab >= pa * pb - 1e-14


def test_bc_monotonicity_enumerated():
    # mu^-(A) <= mu^f(A) <= mu^+(A) for the increasing event {sigma_center = +}
    beta = 0.5
    vals = []
    for bc in ("minus", "free", "plus"):
        g = SpinGraph.grid(3, 3, bc=bc)
        states, p = exact_distribution(g, beta)
        center = 4  # (1,1) in a 3x3 grid with index i*ny+j
        vals.append(float(((states[:, center] + 1) // 2 * p).sum()))
    assert vals[0] <= vals[1] + 1e-14 <= vals[2] + 2e-14


def test_explicit_boundary_condition():
    # explicit dict bc: one corner pinned +, another -
    g = SpinGraph.grid(2, 2, bc={0: 1, 3: -1})
    z = exact_partition(g, 0.5)
    # direct sum over the two free spins
    import itertools
    total = 0.0
    for s1, s2 in itertools.product((-1, 1), repeat=2):
        spins = {0: 1, 3: -1, 1: s1, 2: s2}
        e = sum(spins[u] * spins[v] for u, v in g.edges)
        total += math.exp(0.5 * e)
    assert abs(z - total) < 1e-12
