import itertools
import math
import cmath

import numpy as np
import pytest

from isinglab.domains import Disk, Rectangle, build_domain
from isinglab.fk import p_self_dual
from isinglab.lattice import (
    line_of_edge,
    primal_edge_of_medial_vertex,
    project_on_line,
    MEDIAL_STEPS,
)
from isinglab.loops import ContourTracer, FKDobrushinModel
from isinglab.observables import (
    SQRT2,
    XC,
    SpinObservable,
    compass_edges,
    edge_key,
    edge_line_residual,
    fk_edge_observable_exact,
    fk_martingale_residual,
    fk_vertex_observable,
    local_relation_residual,
    mass_params,
    massive_residual,
    parafermionic_residual,
    spin_line_of_edge,
    spin_of_q,
    strip_decay_rate,
    vertex_field,
)

PSD = p_self_dual(2.0)


def fk_domain(nx=2, ny=3):
    return build_domain(Rectangle(nx, ny), 1.0, "fk", "nw", "se")


# ---------------------------------------------------------------------------
# critical FK observable

def test_terminal_edge_value():
    dom = fk_domain()
    m = FKDobrushinModel(dom, PSD)
    F = fk_edge_observable_exact(m)
    # the terminal edge: east into b_med, always on the path, winding zero
    term = edge_key(dom.b_med, (-1, 1))
    assert abs(F[term] - 1.0) < 1e-14


def test_edge_values_on_lines():
    for p in (PSD, 0.3):
        dom = fk_domain()
        F = fk_edge_observable_exact(FKDobrushinModel(dom, p))
        assert edge_line_residual(F) < 1e-12


def test_s_holomorphicity_critical():
    for nx, ny in [(2, 2), (2, 3), (3, 3)]:
        dom = fk_domain(nx, ny)
        m = FKDobrushinModel(dom, PSD)
        F = fk_edge_observable_exact(m)
        vf = vertex_field(m, F)
        worst = 0.0
        for v, val in vf.items():
            for s in MEDIAL_STEPS:
                w = (v[0] + s[0], v[1] + s[1])
                if w not in vf or w < v:
                    continue
                rep = line_of_edge(v, w)
                worst = max(worst, abs(project_on_line(rep, val)
                                       - project_on_line(rep, vf[w])))
        assert worst < 1e-12


def test_vertex_sum_rules():
    dom = fk_domain()
    m = FKDobrushinModel(dom, PSD)
    F = fk_edge_observable_exact(m)
    for v in dom.interior_medial_vertices():
        c = {k: F.get(e, 0j) for k, e in compass_edges(v).items()}
        # F(N) + F(S) = F(E) + F(W) at criticality
        assert abs(c["N"] + c["S"] - c["E"] - c["W"]) < 1e-12
        # projections of the vertex value reproduce the edge values
        val = fk_vertex_observable(F, v)
        for name, e in compass_edges(v).items():
            rep = line_of_edge(*e)
            assert abs(project_on_line(rep, val) - F.get(e, 0j)) < 1e-12


def test_all_zero_vertex():
    F = {}
    assert fk_vertex_observable(F, (1, 2)) == 0j


def test_boundary_edge_is_connection_probability():
    # |F(e)| at a free-arc edge equals the probability that the owner
    # vertex is connected to the wired arc
    dom = fk_domain(3, 3)
    m = FKDobrushinModel(dom, PSD)
    F = fk_edge_observable_exact(m)
    sts, probs = m.distribution()
    g = dom.graph
    free_interior = [v for v in dom.free_arc if v not in (dom.a_v, dom.b_v)]
    wired_ids = [g.index[w] for w in dom.wired_arc]
    checked = 0
    for u in free_interior:
        # medial vertices on the chain owned by u, bordering a free-side white
        for i, owner in enumerate(dom.chain_owner):
            if owner != u:
                continue
            mid = dom.chain_mids[i]
            for s in MEDIAL_STEPS:
                key = edge_key(mid, s)
                if key not in F:
                    continue
                prob = 0.0
                from isinglab.union_find import UnionFind
                for row, pr in zip(sts, probs):
                    uf = UnionFind(g.nv())
                    for (a, b) in dom.wired_edges:
                        uf.union(g.index[a], g.index[b])
                    for st, (a, b) in zip(row, dom.random_edges):
                        if st:
                            uf.union(g.index[a], g.index[b])
                    if uf.connected(g.index[u], wired_ids[0]):
                        prob += pr
                assert abs(abs(F[key]) - prob) < 1e-12
                checked += 1
    assert checked > 0


def test_massive_relation():
    dom = fk_domain(3, 3)
    for p in (0.3, 0.55):
        res = massive_residual(dom, p)
        assert res["relation"] < 1e-10
    # at the self-dual point alpha vanishes and the relation is critical
    alpha, mass = mass_params(PSD)
    assert abs(alpha) < 1e-14 and abs(mass - 1.0) < 1e-14


def test_massive_relation_negative_control():
    dom = fk_domain(3, 3)
    p = 0.3
    m = FKDobrushinModel(dom, p)
    F = fk_edge_observable_exact(m)
    alpha, _ = mass_params(p)
    good = local_relation_residual(F, dom.interior_medial_vertices(), alpha)
    bad = local_relation_residual(F, dom.interior_medial_vertices(), alpha + 0.1)
    assert good < 1e-10 and bad > 1e-3


def test_massive_laplacian():
    # needs interior vertices all of whose sqrt(2)-distance neighbors are
    # interior: a 4x4 block provides them
    dom = fk_domain(4, 4)
    for p in (0.3, PSD):
        res = massive_residual(dom, p)
        assert res["laplacian_sites"] > 0
        assert res["laplacian"] < 1e-10


def test_parafermionic():
    dom = fk_domain(2, 3)
    for q in (1.0, 2.0, 3.0):
        assert parafermionic_residual(dom, q) < 1e-10
    # q = 2 corresponds to spin 1/2
    assert abs(spin_of_q(2.0) - 0.5) < 1e-14
    # negative control: wrong spin breaks the relation
    assert parafermionic_residual(dom, 3.0, sigma=spin_of_q(3.0) + 0.1) > 1e-3


def test_strip_decay_rate():
    assert abs(strip_decay_rate(PSD)["xi"]) < 1e-12
    xs = np.linspace(0.1, PSD, 12)
    vals = [strip_decay_rate(p)["xi"] for p in xs]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v >= -1e-12 for v in vals)
    assert not strip_decay_rate(0.8)["physical"]


def test_strip_decay_rate_high_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    p = mp.mpf("0.5")
    num = mp.e ** (-1j * mp.pi / 4) * (1 - p) * mp.sqrt(2) + p
    den = mp.e ** (-1j * mp.pi / 4) * p + (1 - p) * mp.sqrt(2)
    alpha = mp.arg(num / den)
    f = lambda a: (1 + mp.cos(mp.pi / 4 - a)) * mp.cos(mp.pi / 4 - a)
    xi_hp = -mp.log(f(alpha) / f(-alpha))
    assert abs(strip_decay_rate(0.5)["xi"] - float(xi_hp)) < 1e-13


def test_fk_martingale():
    dom = fk_domain(2, 2)
    assert fk_martingale_residual(dom, PSD) < 1e-12
    dom23 = fk_domain(2, 3)
    assert fk_martingale_residual(dom23, PSD) < 1e-12


# ---------------------------------------------------------------------------
# spin observable

def spin_domain(nx=2, ny=2):
    return build_domain(Rectangle(nx, ny), 1.0, "spin", "nw", "se")


def test_spin_value_at_b():
    obs = SpinObservable(spin_domain())
    assert abs(obs.value(obs.domain.b_med) - 1.0) < 1e-14


def test_spin_error_at_a():
    obs = SpinObservable(spin_domain())
    with pytest.raises(ValueError):
        obs.value(obs.domain.a_med)


def brute_force_spin(dom, z, x_a):
    """Direct subset enumeration with parity filtering: the independent
    oracle for the cycle-basis evaluation."""
    g = dom.graph
    p, q = primal_edge_of_medial_vertex(z)
    inside = [v for v in (p, q) if v in g.vset]
    if len(inside) == 2:
        pool = [e for e in g.edges if set(e) != {p, q}]
        targets = [p, q]
    else:
        pool, targets = list(g.edges), inside
    total = 0j
    for tgt in targets:
        tracer = ContourTracer(dom.a_med, x_a, tgt, z)
        for r in range(len(pool) + 1):
            for combo in itertools.combinations(range(len(pool)), r):
                es = {pool[i] for i in combo}
                deg = {}
                for (u, v) in es:
                    deg[u] = deg.get(u, 0) + 1
                    deg[v] = deg.get(v, 0) + 1
                odd = {v for v, d in deg.items() if d % 2 == 1}
                want = {x_a, tgt} if x_a != tgt else set()
                if odd != want:
                    continue
                wq, _ = tracer.trace(es)
                total += cmath.exp(-1j * wq * math.pi / 4) * XC ** len(es)
    return total


def test_spin_matches_brute_force():
    dom = spin_domain()
    obs = SpinObservable(dom)
    den = brute_force_spin(dom, dom.b_med, obs.x_a)
    for z in [(1, 0), (0, 1), (1, 2), (2, 3), (0, -1)]:
        assert abs(obs.value(z) - brute_force_spin(dom, z, obs.x_a) / den) < 1e-12


def test_spin_s_holomorphic_twisted_lines():
    # the projection identity holds on every medial edge for the pi/8
    # twisted line family
    dom = build_domain(Rectangle(3, 2), 1.0, "spin", "nw", "se")
    obs = SpinObservable(dom)
    mv = set(dom.medial_vertices())
    mv.discard(dom.a_med)
    vals = {z: obs.value(z) for z in mv}
    worst = 0.0
    for z in mv:
        for s in MEDIAL_STEPS:
            w = (z[0] + s[0], z[1] + s[1])
            if w not in vals or w < z:
                continue
            rep = spin_line_of_edge(z, w)
            worst = max(worst, abs(project_on_line(rep, vals[z])
                                   - project_on_line(rep, vals[w])))
    assert worst < 1e-12


def test_spin_martingale():
    dom = spin_domain()
    obs = SpinObservable(dom)
    # z away from the start vertex (the decomposition is degenerate at
    # midpoints bordering it)
    for z in [(1, 0), (2, 3), (3, 2), (0, -1)]:
        assert obs.martingale_residual(z) < 1e-12
    with pytest.raises(ValueError, match="start vertex"):
        obs.martingale_residual((1, 2))
