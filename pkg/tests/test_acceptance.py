"""Acceptance suite: every criterion at its pinned tolerance, one printed
pass/fail line per criterion.

Criteria 1-8 are deterministic exact identities (fast); 9-15 are desk-scale
statistical experiments with stated tolerances and pinned seeds.  The
figures component is intentionally absent here: this suite must run
without it.
"""

import math
import cmath

import numpy as np
import pytest
from scipy import stats

from isinglab.domains import Disk, Rectangle, build_domain
from isinglab.fk import FKGraph, exact_fk_distribution, p_self_dual
from isinglab.harmonic import (
    Grid,
    check_s_holomorphic,
    discrete_laplacian,
    fk_observable_H,
    green_function,
    harmonic_measure,
    solve_dirichlet,
)
from isinglab.lattice import MEDIAL_STEPS, line_of_edge, project_on_line
from isinglab.loops import FKDobrushinModel
from isinglab.observables import (
    SpinObservable,
    edge_line_residual,
    fk_edge_observable_exact,
    fk_martingale_residual,
    local_relation_residual,
    mass_params,
    massive_laplacian_residual,
    parafermionic_residual,
    spin_of_q,
    vertex_field,
)
from isinglab.samplers import FKSampler, SpinSampler
from isinglab.spin import (
    BETA_C,
    SpinGraph,
    exact_distribution,
    exact_partition,
    exact_two_point,
    ht_expansion,
    kw_duality_residual,
)

PSD = p_self_dual(2.0)


def report(criterion, ok, detail):
    line = f"[criterion {criterion:>2}] {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# exact identities (criteria 1-8)

def test_criterion_01_kramers_wannier():
    worst = 0.0
    for size in (2, 3):
        for beta in (0.3, BETA_C, 0.7):
            worst = max(worst, kw_duality_residual(SpinGraph.grid(size, size), beta))
    report(1, worst < 1e-10, f"KW duality residual {worst:.2e} < 1e-10 "
           "(prefactor e^(beta*E(G)))")


def test_criterion_02_high_temperature_expansion():
    fixtures = [
        SpinGraph(2, [(0, 1)]),
        SpinGraph(3, [(0, 1), (1, 2)]),
        SpinGraph(3, [(0, 1), (1, 2), (0, 2)]),
        SpinGraph.grid(2, 2),
        SpinGraph.grid(2, 3),
        SpinGraph.grid(3, 3),
        SpinGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]),
    ]
    worst = 0.0
    for g in fixtures:
        assert len(g.edges) <= 12
        for beta in (0.3, BETA_C):
            z = exact_partition(g, beta)
            worst = max(worst, abs(ht_expansion(g, beta) - z) / z)
            worst = max(worst, abs(ht_expansion(g, beta, marked=(0, g.n - 1))
                                   - exact_two_point(g, beta, 0, g.n - 1)))
    single = SpinGraph(2, [(0, 1)])
    tanh_dev = max(abs(ht_expansion(single, b, marked=(0, 1)) - math.tanh(b))
                   for b in (0.3, 1.0))
    ok = worst < 1e-12 and tanh_dev < 1e-14
    report(2, ok, f"expansion vs Boltzmann {worst:.2e} < 1e-12; "
           f"single edge tanh dev {tanh_dev:.2e}")


def test_criterion_03_loop_weights_and_euler():
    dom = build_domain(Rectangle(2, 2), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD, 2.0)
    x = PSD / (math.sqrt(2) * (1 - PSD))
    ratios = []
    euler_ok = True
    for row in model.all_states():
        lc = model.trace_loops(list(row))
        ratios.append(model.weight(list(row))
                      / (x ** lc.n_open * math.sqrt(2) ** lc.n_loops))
        euler_ok &= lc.n_loops + 1 == model.euler_loop_count(list(row))
    dev = float(np.abs(np.array(ratios) / ratios[0] - 1.0).max())
    report(3, dev < 1e-12 and euler_ok,
           f"loop weight ratio dev {dev:.2e} < 1e-12; Euler identity "
           "(exploration path closure counted) on every configuration")


def test_criterion_04_s_holomorphicity_and_massive():
    worst_line = 0.0
    worst_gap = 0.0
    for nx, ny in ((2, 2), (2, 3)):
        dom = build_domain(Rectangle(nx, ny), 1.0, "fk", "nw", "se")
        model = FKDobrushinModel(dom, PSD)
        F = fk_edge_observable_exact(model)
        worst_line = max(worst_line, edge_line_residual(F))
        rep = check_s_holomorphic(vertex_field(model, F), tol=1e-12)
        worst_gap = max(worst_gap, rep["max_gap"])
    # off criticality: the local relation and the massive harmonicity (in
    # the killed-walk form F = cos(2a) * mean over sqrt(2)delta neighbors)
    p = 0.3
    dom3 = build_domain(Rectangle(3, 3), 1.0, "fk", "nw", "se")
    model3 = FKDobrushinModel(dom3, p)
    F3 = fk_edge_observable_exact(model3)
    alpha, _ = mass_params(p)
    rel = local_relation_residual(F3, dom3.interior_medial_vertices(), alpha)
    dom4 = build_domain(Rectangle(4, 4), 1.0, "fk", "nw", "se")
    model4 = FKDobrushinModel(dom4, p)
    lap, sites = massive_laplacian_residual(model4)
    ok = worst_line < 1e-12 and worst_gap < 1e-12 and rel < 1e-10 \
        and lap < 1e-10 and sites > 0
    report(4, ok, f"line residual {worst_line:.2e}, projection gap "
           f"{worst_gap:.2e} < 1e-12; off-critical relation {rel:.2e}, "
           f"massive harmonicity {lap:.2e} < 1e-10 over {sites} sites")


def test_criterion_05_parafermionic():
    dom = build_domain(Rectangle(2, 3), 1.0, "fk", "nw", "se")
    worst = max(parafermionic_residual(dom, q) for q in (1.0, 2.0, 3.0))
    control = parafermionic_residual(dom, 3.0, sigma=spin_of_q(3.0) + 0.1)
    ok = worst < 1e-10 and control > 1e-3
    report(5, ok, f"residual {worst:.2e} < 1e-10 for q in {{1,2,3}}; "
           f"perturbed-spin control {control:.2e} > 1e-3")


def test_criterion_06_martingales():
    dom = build_domain(Rectangle(2, 2), 1.0, "fk", "nw", "se")
    fk_res = fk_martingale_residual(dom, PSD)
    sdom = build_domain(Rectangle(2, 2), 1.0, "spin", "nw", "se")
    obs = SpinObservable(sdom)
    spin_res = max(obs.martingale_residual(z) for z in [(1, 0), (2, 3), (3, 2)])
    ok = fk_res < 1e-12 and spin_res < 1e-12
    report(6, ok, f"FK one-step branching {fk_res:.2e}; spin one-step "
           f"decomposition {spin_res:.2e}; both < 1e-12")


def test_criterion_07_h_field():
    dom = build_domain(Rectangle(2, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    H = fk_observable_H(model, tol=1e-9)
    wired_dev = max(abs(H[b] - 1.0) for b in dom.wired_arc)
    free_dev = max(abs(H[w]) for w in dom.dstar_ab)
    g = dom.graph
    lap_min = 0.0
    for b in g.interior_vertices():
        lap_min = min(lap_min, sum(H[w] - H[b] for w in g.adj[b]) / 4.0)
    sup_max = 0.0
    interior_whites = [w for w in dom.dual_interior
                       if all((w[0] + d[0], w[1] + d[1]) in set(dom.dual_interior)
                              for d in ((2, 0), (-2, 0), (0, 2), (0, -2)))]
    for w in interior_whites:
        nbrs = [(w[0] + d[0], w[1] + d[1]) for d in ((2, 0), (-2, 0), (0, 2), (0, -2))]
        sup_max = max(sup_max, sum(H[n] - H[w] for n in nbrs) / 4.0)
    ok = wired_dev < 1e-12 and free_dev < 1e-12 and lap_min > -1e-12 \
        and sup_max < 1e-12
    report(7, ok, f"path independence < 1e-9 (integrated); wired arc dev "
           f"{wired_dev:.2e}; free arc dev {free_dev:.2e}; min black "
           f"Laplacian {lap_min:.2e}; max white Laplacian {sup_max:.2e}")


def test_criterion_08_representation_formulas():
    g = Grid.box(6, 6)
    rng = np.random.default_rng(5)
    f = {v: 0.0 for v in g.vertices}
    for v in g.interior:
        f[v] = float(rng.normal())
    greens = {y: green_function(g, y) for y in g.interior}
    worst_riesz = 0.0
    for x in g.vertices:
        rec = sum(discrete_laplacian(g, f, y) * greens[y][x] for y in g.interior)
        worst_riesz = max(worst_riesz, abs(f[x] - rec))
    data = {v: float(rng.normal()) for v in g.boundary}
    h = solve_dirichlet(g, data)
    measures = {y: harmonic_measure(g, y) for y in g.boundary}
    worst_rep = 0.0
    for x in g.interior:
        rec = sum(data[y] * measures[y][x] for y in g.boundary)
        worst_rep = max(worst_rep, abs(h[x] - rec))
    g3 = Grid.box(3, 3)
    gy = green_function(g3, (1, 1))[(1, 1)]
    ok = worst_riesz < 1e-9 and worst_rep < 1e-9 and abs(gy + 1.0) < 1e-12
    report(8, ok, f"Riesz reconstruction {worst_riesz:.2e} < 1e-9; harmonic "
           f"measure representation {worst_rep:.2e} < 1e-9; G(y,y) = {gy:.12f}")


# ---------------------------------------------------------------------------
# statistical experiments (criteria 9-15)

def test_criterion_09_sampler_chi2():
    n = 1_000_000
    worst_ratio = 0.0

    def spin_case(g, beta, sampler, seed):
        nonlocal worst_ratio
        states, p = exact_distribution(g, beta)
        probs = np.zeros(1 << len(g.free))
        for row, pr in zip(states, p):
            code = sum(1 << k for k, v in enumerate(g.free) if row[v] > 0)
            probs[code] += pr
        s = SpinSampler(g, beta, sampler=sampler, seed=seed, thinning=4)
        counts = s.state_counts(n)
        mask = probs > 0
        chi2 = float(((counts[mask] - probs[mask] * n) ** 2
                      / (probs[mask] * n)).sum())
        crit = stats.chi2.ppf(0.99, int(mask.sum()) - 1)
        worst_ratio = max(worst_ratio, chi2 / crit)

    spin_case(SpinGraph.grid(2, 2), 0.5, "metropolis", 42)
    spin_case(SpinGraph.grid(2, 2), 0.5, "wolff", 43)
    spin_case(SpinGraph.grid(3, 3, bc="plus"), 0.5, "wolff", 44)
    g = FKGraph.grid(2, 2)
    sts, plist = exact_fk_distribution(g, PSD, 2.0)
    probs = np.zeros(16)
    for row, pr in zip(sts, plist):
        probs[int(sum(1 << k for k, b in enumerate(row) if b))] += pr
    fks = FKSampler(g, PSD, 2.0, seed=45)
    counts = fks.state_counts(n, thinning=6)
    chi2 = float(((counts - probs * n) ** 2 / (probs * n)).sum())
    crit = stats.chi2.ppf(0.99, 15)
    worst_ratio = max(worst_ratio, chi2 / crit)
    report(9, worst_ratio < 1.0, "chi-square at 99% for Metropolis, Wolff "
           f"and FK heat bath at 1e6 samples; worst chi2/crit {worst_ratio:.3f}")


def test_criterion_10_energy_density():
    from isinglab.experiments import energy_density_estimate
    results = []
    for k, delta in enumerate((0.125, 0.0625)):
        results.append(energy_density_estimate(delta, samples=1_000_000,
                                               seed=3 + k))
    r16 = results[1]
    pull = abs(r16["mean"] - r16["prediction"]) / r16["stderr"]
    deltas = np.array([r["delta"] for r in results])
    devs = np.array([r["mean"] - math.sqrt(2) / 2 for r in results])
    slope = float((deltas * devs).sum() / (deltas * deltas).sum())
    slope_rel = abs(slope + 1 / math.pi) * math.pi
    ok = pull < 3.0 and slope_rel < 0.2
    report(10, ok, f"delta=1/16 estimate {r16['mean']:.5f} vs "
           f"{r16['prediction']:.5f} (pull {pull:.2f} sigma < 3); slope "
           f"{slope:.4f} vs -1/pi within {100 * slope_rel:.1f}% < 20%")


def test_criterion_11_rsw():
    from isinglab.experiments import rsw_crossing
    phats = {}
    longs = {}
    for k, n in enumerate((8, 16, 32)):
        r = rsw_crossing(n, samples=2000, seed=2 + k)
        phats[n] = r["p_hat"]
        longs[n] = r["long_p_hat"]
    sub = rsw_crossing(32, samples=1000, seed=91, p=0.3)
    spread = max(phats.values()) - min(phats.values())
    in_band = all(0.05 <= p <= 0.95 for p in phats.values())
    ok = in_band and spread < 0.1 and sub["p_hat"] < 0.05
    report(11, ok, f"crossing p_hat {dict((n, round(p, 3)) for n, p in phats.items())} "
           f"in [0.05,0.95], spread {spread:.3f} < 0.1; subcritical "
           f"{sub['p_hat']:.4f} < 0.05 (long-way companion "
           f"{dict((n, round(p, 4)) for n, p in longs.items())})")


def test_criterion_12_critical_exponent():
    from isinglab.experiments import critical_exponent_fit
    r = critical_exponent_fit(L=128, n_meas=10_000, seed=7)
    ok = abs(r["eta"] - 0.25) < 0.05
    report(12, ok, f"eta_hat {r['eta']:.4f} within 0.25 +- 0.05 "
           f"(torus two-point over distances {r['distances']})")


def test_criterion_13_correlation_length():
    from isinglab.experiments import (correlation_length,
                                      massive_green_decay_rate, wulff_ratio)
    beta_near = BETA_C - 1e-3
    dev = 0.0
    for (x, y) in ((1, 0), (1, 1)):
        ratio = wulff_ratio(beta_near, x, y)
        dev = max(dev, abs(ratio - 4 * math.hypot(x, y)) / (4 * math.hypot(x, y)))
    tau = correlation_length(0.3, 1, 0)["tau"]
    rate = massive_green_decay_rate(0.3)["rate"]
    green_dev = abs(rate - tau) / tau
    ok = dev < 0.01 and green_dev < 0.05
    report(13, ok, f"Wulff ratio within {100 * dev:.3f}% < 1%; massive Green "
           f"decay {rate:.5f} vs tau {tau:.5f} within {100 * green_dev:.2f}% < 5%")


def test_criterion_14_loewner_kappa():
    from isinglab.experiments import loewner_kappa
    devs = {}
    rts = {}
    for model, target in (("fk", 16.0 / 3.0), ("spin", 3.0)):
        r = loewner_kappa(model, lattice_size=64, n_interfaces=200, seed=0)
        devs[model] = (r["kappa"], abs(r["kappa"] - target) / target)
        rts[model] = r["round_trip_error"]
    ok = all(d < 0.2 for _, d in devs.values()) and all(
        rt < 1e-3 for rt in rts.values())
    report(14, ok, f"kappa_hat fk {devs['fk'][0]:.3f} "
           f"({100 * devs['fk'][1]:.1f}% of 16/3), spin {devs['spin'][0]:.3f} "
           f"({100 * devs['spin'][1]:.1f}% of 3), both within 20%; zipper "
           f"round trip {max(rts.values()):.1e} < 1e-3")


def test_criterion_15_observable_scaling():
    from isinglab.experiments import fk_observable_convergence
    rows = fk_observable_convergence(deltas=(1 / 8, 1 / 16, 1 / 32),
                                     samples=200_000, seed=4)
    errs = [r["max_probe_error"] for r in rows]
    hs = [r["h_error"] for r in rows]
    noise = rows[-1]["mc_noise"]
    ok = errs[2] < errs[0] + 2 * noise and errs[2] < errs[1] + 2 * noise \
        and hs[2] < hs[0] + 2 * noise
    report(15, ok, f"probe errors {[round(e, 4) for e in errs]} decreasing "
           f"beyond noise {noise:.4f}; H errors {[round(h, 4) for h in hs]}")
