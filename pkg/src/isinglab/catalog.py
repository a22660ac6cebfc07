"""Experiment registry: every experiment the CLI can run, with a runner
writing one CSV and one JSON summary.

Runners return (summary, ok); ok = False means the run completed but an
acceptance threshold failed (CLI exit code 2).  Entries carry a topical
section tag pointing at the README section describing them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domains import Rectangle, build_domain
from .fk import p_self_dual
from .io import write_csv
from .spin import BETA_C, SpinGraph, kw_duality_residual

PSD = p_self_dual(2.0)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    tag: str
    runner: object
    defaults: dict


def _fk_domain(nx=2, ny=3):
    return build_domain(Rectangle(nx, ny), 1.0, "fk", "nw", "se")


# ---------------------------------------------------------------------------
# exact-identity runners

def run_kw_duality(config, out_dir):
    rows = []
    ok = True
    for size in config["sizes"]:
        for beta in config["betas"]:
            b = BETA_C if beta == "beta_c" else float(beta)
            res = kw_duality_residual(SpinGraph.grid(size, size), b)
            rows.append((size, b, res))
            ok &= res < config["tolerance"]
    write_csv(out_dir / "kw_duality.csv", ["size", "beta", "residual"], rows,
              [f"seed={config['seed']}"])
    return {"max_residual": max(r[2] for r in rows), "ok": ok}, ok


def run_ht_expansion(config, out_dir):
    from .spin import exact_partition, exact_two_point, ht_expansion
    fixtures = {
        "single_edge": SpinGraph(2, [(0, 1)]),
        "path3": SpinGraph(3, [(0, 1), (1, 2)]),
        "triangle": SpinGraph(3, [(0, 1), (1, 2), (0, 2)]),
        "grid22": SpinGraph.grid(2, 2),
        "grid23": SpinGraph.grid(2, 3),
        "grid33": SpinGraph.grid(3, 3),
        "k4": SpinGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]),
    }
    rows = []
    ok = True
    for name, g in fixtures.items():
        for beta in config["betas"]:
            b = BETA_C if beta == "beta_c" else float(beta)
            z_rel = abs(ht_expansion(g, b) - exact_partition(g, b)) / exact_partition(g, b)
            corr = abs(ht_expansion(g, b, marked=(0, g.n - 1))
                       - exact_two_point(g, b, 0, g.n - 1))
            rows.append((name, b, z_rel, corr))
            ok &= z_rel < config["tolerance"] and corr < config["tolerance"]
    write_csv(out_dir / "ht_expansion.csv",
              ["fixture", "beta", "partition_rel_err", "correlation_err"],
              rows, [f"seed={config['seed']}"])
    return {"max_partition_rel_err": max(r[2] for r in rows), "ok": ok}, ok


def run_loop_weights(config, out_dir):
    from .loops import FKDobrushinModel
    rows = []
    ok = True
    for nx, ny in ((2, 2), (2, 3)):
        dom = _fk_domain(nx, ny)
        model = FKDobrushinModel(dom, config["p"], config["q"])
        x = config["p"] / (math.sqrt(config["q"]) * (1 - config["p"]))
        ratios, euler_ok = [], True
        for row in model.all_states():
            lc = model.trace_loops(list(row))
            w = model.weight(list(row))
            ratios.append(w / (x ** lc.n_open
                               * math.sqrt(config["q"]) ** lc.n_loops))
            euler_ok &= lc.n_loops + 1 == model.euler_loop_count(list(row))
        dev = float(np.abs(np.array(ratios) / ratios[0] - 1.0).max())
        rows.append((f"{nx}x{ny}", dev, int(euler_ok)))
        ok &= dev < config["tolerance"] and euler_ok
    write_csv(out_dir / "loop_weights.csv",
              ["instance", "max_ratio_dev", "euler_ok"], rows,
              [f"seed={config['seed']}"])
    return {"ok": ok}, ok


def run_s_holomorphicity(config, out_dir):
    from .harmonic import check_s_holomorphic
    from .loops import FKDobrushinModel
    from .observables import (edge_line_residual, fk_edge_observable_exact,
                              vertex_field)
    rows = []
    ok = True
    for nx, ny in ((2, 2), (2, 3), (3, 3)):
        dom = _fk_domain(nx, ny)
        model = FKDobrushinModel(dom, PSD)
        F = fk_edge_observable_exact(model)
        line_res = edge_line_residual(F)
        gap = check_s_holomorphic(vertex_field(model, F), tol=config["tolerance"])
        rows.append((f"{nx}x{ny}", line_res, gap["max_gap"]))
        ok &= line_res < config["tolerance"] and gap["passed"]
    write_csv(out_dir / "s_holomorphicity.csv",
              ["instance", "line_residual", "projection_gap"], rows,
              [f"seed={config['seed']}"])
    return {"ok": ok}, ok


def run_massive_relation(config, out_dir):
    from .observables import massive_residual
    dom = _fk_domain(3, 3)
    rows = []
    ok = True
    for p in config["ps"]:
        res = massive_residual(dom, float(p))
        rows.append((p, res["relation"], res["laplacian"], res["alpha"]))
        ok &= res["relation"] < config["tolerance"]
    write_csv(out_dir / "massive_relation.csv",
              ["p", "relation_residual", "laplacian_residual", "alpha"],
              rows, [f"seed={config['seed']}"])
    return {"ok": ok}, ok


def run_parafermionic(config, out_dir):
    from .observables import parafermionic_residual
    dom = _fk_domain(2, 3)
    rows = []
    ok = True
    for q in config["qs"]:
        res = parafermionic_residual(dom, float(q))
        rows.append((q, res))
        ok &= res < config["tolerance"]
    write_csv(out_dir / "parafermionic.csv", ["q", "residual"], rows,
              [f"seed={config['seed']}"])
    return {"ok": ok}, ok


def run_martingales(config, out_dir):
    from .observables import SpinObservable, fk_martingale_residual
    dom = _fk_domain(2, 2)
    fk_res = fk_martingale_residual(dom, PSD)
    sdom = build_domain(Rectangle(2, 2), 1.0, "spin", "nw", "se")
    obs = SpinObservable(sdom)
    spin_res = max(obs.martingale_residual(z) for z in [(1, 0), (2, 3), (3, 2)])
    ok = fk_res < config["tolerance"] and spin_res < config["tolerance"]
    write_csv(out_dir / "martingales.csv", ["model", "residual"],
              [("fk", fk_res), ("spin", spin_res)], [f"seed={config['seed']}"])
    return {"fk": fk_res, "spin": spin_res, "ok": ok}, ok


def run_h_field(config, out_dir):
    from .harmonic import fk_observable_H
    from .loops import FKDobrushinModel
    dom = _fk_domain(2, 3)
    model = FKDobrushinModel(dom, PSD)
    H = fk_observable_H(model)
    wired_dev = max(abs(H[b] - 1.0) for b in dom.wired_arc)
    free_dev = max(abs(H[w]) for w in dom.dstar_ab)
    g = dom.graph
    lap_min = min((sum(H[w] - H[b] for w in g.adj[b]) / 4.0
                   for b in g.interior_vertices()), default=0.0)
    ok = wired_dev < 1e-12 and free_dev < 1e-12 and lap_min > -1e-12
    rows = [("wired_arc_dev", wired_dev), ("free_arc_dev", free_dev),
            ("min_black_laplacian", lap_min)]
    write_csv(out_dir / "h_field.csv", ["quantity", "value"], rows,
              [f"seed={config['seed']}"])
    return {"ok": ok}, ok


def run_verify_identities(config, out_dir):
    checks = [
        ("kw-duality", run_kw_duality,
         {"sizes": [2, 3], "betas": [0.3, "beta_c", 0.7], "tolerance": 1e-10}),
        ("ht-expansion", run_ht_expansion,
         {"betas": [0.3, "beta_c"], "tolerance": 1e-12}),
        ("loop-weights", run_loop_weights,
         {"p": PSD, "q": 2.0, "tolerance": 1e-12}),
        ("s-holomorphicity", run_s_holomorphicity, {"tolerance": 1e-12}),
        ("massive-relation", run_massive_relation,
         {"ps": [0.3, 0.55], "tolerance": 1e-10}),
        ("parafermionic", run_parafermionic,
         {"qs": [1.0, 2.0, 3.0], "tolerance": 1e-10}),
        ("martingales", run_martingales, {"tolerance": 1e-12}),
        ("h-field", run_h_field, {}),
    ]
    rows = []
    all_ok = True
    for name, fn, defaults in checks:
        sub = dict(defaults)
        sub["seed"] = config["seed"]
        summary, ok = fn(sub, out_dir)
        rows.append((name, int(ok)))
        all_ok &= ok
    write_csv(out_dir / "verify_identities.csv", ["check", "passed"], rows,
              [f"seed={config['seed']}"])
    return {"all_passed": all_ok}, all_ok


# ---------------------------------------------------------------------------
# statistical runners

def run_sampler_chi2(config, out_dir):
    from scipy import stats
    from .samplers import SpinSampler, FKSampler
    from .fk import FKGraph, exact_fk_distribution
    from .spin import exact_distribution
    seed = config["seed"]
    n = config["samples"]
    rows = []
    ok = True

    def spin_case(name, g, beta, sampler):
        nonlocal ok
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
        rows.append((name, sampler, chi2, crit, int(chi2 < crit)))
        ok &= chi2 < crit

    spin_case("grid22_free", SpinGraph.grid(2, 2), 0.5, "metropolis")
    spin_case("grid22_free", SpinGraph.grid(2, 2), 0.5, "wolff")
    spin_case("grid33_plus", SpinGraph.grid(3, 3, bc="plus"), 0.5, "wolff")

    g = FKGraph.grid(2, 2)
    sts, plist = exact_fk_distribution(g, PSD, 2.0)
    probs = np.zeros(16)
    for row, pr in zip(sts, plist):
        probs[int(sum(1 << k for k, b in enumerate(row) if b))] += pr
    fks = FKSampler(g, PSD, 2.0, seed=seed)
    counts = fks.state_counts(n, thinning=6)
    chi2 = float(((counts - probs * n) ** 2 / (probs * n)).sum())
    crit = stats.chi2.ppf(0.99, 15)
    rows.append(("fk_grid22_free", "heatbath", chi2, crit, int(chi2 < crit)))
    ok &= chi2 < crit
    write_csv(out_dir / "sampler_chi2.csv",
              ["instance", "sampler", "chi2", "critical_99", "passed"],
              rows, [f"seed={seed}", f"samples={n}"])
    return {"ok": ok}, ok


def run_energy_density(config, out_dir):
    from .experiments import energy_density_estimate
    rows = []
    results = []
    for k, delta in enumerate(config["deltas"]):
        r = energy_density_estimate(float(delta), samples=config["samples"],
                                    seed=config["seed"] + k)
        rows.append((delta, r["mean"], r["stderr"], r["prediction"]))
        results.append(r)
    s2 = math.sqrt(2) / 2
    deltas = np.array([r["delta"] for r in results])
    devs = np.array([r["mean"] - s2 for r in results])
    slope = float((deltas * devs).sum() / (deltas * deltas).sum())
    pulls = [abs(r["mean"] - r["prediction"]) / r["stderr"] for r in results]
    ok = max(pulls) < 3.0 and abs(slope + 1 / math.pi) < 0.2 / math.pi
    write_csv(out_dir / "energy_density.csv",
              ["delta", "mean", "stderr", "prediction"], rows,
              [f"seed={config['seed']}", f"samples={config['samples']}"])
    return {"slope": slope, "slope_target": -1 / math.pi,
            "max_pull": max(pulls), "ok": ok}, ok


def run_rsw(config, out_dir):
    from .experiments import annulus_circuit, rsw_crossing
    seed = config["seed"]
    sizes = [int(n) for n in config["sizes"]]
    threads = int(config.get("threads", 1))

    def one(k_n):
        k, n = k_n
        return rsw_crossing(n, samples=config["samples"], seed=seed + k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, enumerate(sizes)))
    else:
        results = [one(kn) for kn in enumerate(sizes)]
    rows = [(r["n"], r["p_hat"], r["stderr"], r["long_p_hat"], r["long_stderr"])
            for r in results]
    sub = rsw_crossing(sizes[-1], samples=config["samples"], seed=seed + 91,
                       p=config["subcritical_p"])
    ann = annulus_circuit(min(8, sizes[0]), samples=min(config["samples"], 1000),
                          seed=seed + 77)
    phats = [r["p_hat"] for r in results]
    spread = max(phats) - min(phats)
    ok = (all(0.05 <= p <= 0.95 for p in phats) and spread < 0.1
          and sub["p_hat"] < 0.05)
    rows.append(("subcritical", sub["p_hat"], sub["stderr"],
                 sub["long_p_hat"], sub["long_stderr"]))
    write_csv(out_dir / "rsw.csv",
              ["n", "p_hat", "stderr", "long_p_hat", "long_stderr"], rows,
              [f"seed={seed}", f"samples={config['samples']}",
               f"annulus_p_hat={ann['p_hat']}"])
    return {"p_hats": phats, "spread": spread, "subcritical": sub["p_hat"],
            "annulus": ann["p_hat"], "ok": ok}, ok


def run_critical_exponent(config, out_dir):
    from .experiments import critical_exponent_fit, decay_model_comparison
    r = critical_exponent_fit(L=config["L"], n_meas=config["samples"],
                              seed=config["seed"])
    control = decay_model_comparison(seed=config["seed"] + 1)
    ok = abs(r["eta"] - 0.25) < 0.05 and control["exponential_wins"]
    rows = [(d, r["profile"][d]) for d in r["distances"]]
    write_csv(out_dir / "two_point.csv", ["distance", "correlation"], rows,
              [f"seed={config['seed']}", f"L={config['L']}",
               f"eta={r['eta']}"])
    return {"eta": r["eta"], "control_exponential_wins":
            control["exponential_wins"], "ok": ok}, ok


def run_correlation_length(config, out_dir):
    from .experiments import (correlation_length, massive_green_decay_rate,
                              wulff_ratio)
    rows = []
    beta_near = BETA_C - 1e-3
    ok = True
    for (x, y) in ((1, 0), (1, 1)):
        ratio = wulff_ratio(beta_near, x, y)
        target = 4.0 * math.hypot(x, y)
        rows.append((f"wulff_{x}_{y}", ratio, target))
        ok &= abs(ratio - target) / target < 0.01
    beta = config["beta"]
    tau = correlation_length(beta, 1, 0)["tau"]
    green = massive_green_decay_rate(beta)["rate"]
    rows.append(("tau_axis", tau, tau))
    rows.append(("green_rate", green, tau))
    ok &= abs(green - tau) / tau < 0.05
    write_csv(out_dir / "correlation_length.csv",
              ["quantity", "value", "target"], rows, [f"seed={config['seed']}"])
    return {"tau": tau, "green_rate": green, "ok": ok}, ok


def run_loewner(config, out_dir):
    from .experiments import loewner_kappa
    rows = []
    ok = True
    summaries = {}
    for model, target in (("fk", 16.0 / 3.0), ("spin", 3.0)):
        r = loewner_kappa(model, lattice_size=config["L"],
                          n_interfaces=config["interfaces"],
                          seed=config["seed"])
        rows.append((model, r["kappa"], target, r["ci"][0], r["ci"][1],
                     r["round_trip_error"], r["n_discarded"]))
        ok &= abs(r["kappa"] - target) / target < 0.2
        ok &= r["round_trip_error"] < 1e-3
        summaries[model] = r["kappa"]
    write_csv(out_dir / "loewner.csv",
              ["model", "kappa", "target", "ci_lo", "ci_hi",
               "round_trip_error", "discarded"], rows,
              [f"seed={config['seed']}", f"L={config['L']}",
               f"interfaces={config['interfaces']}"])
    return {"kappa": summaries, "ok": ok}, ok


def run_fk_convergence(config, out_dir):
    from .experiments import fk_observable_convergence
    deltas = [float(d) for d in config["deltas"]]
    rows_d = fk_observable_convergence(deltas=deltas, samples=config["samples"],
                                       seed=config["seed"])
    rows = [(r["delta"], r["max_probe_error"], r["h_error"], r["mc_noise"])
            for r in rows_d]
    errs = [r["max_probe_error"] for r in rows_d]
    hs = [r["h_error"] for r in rows_d]
    noise = rows_d[-1]["mc_noise"]
    ok = errs[-1] < errs[0] + 2 * noise and hs[-1] < hs[0] + 2 * noise
    write_csv(out_dir / "fk_convergence.csv",
              ["delta", "max_probe_error", "h_error", "mc_noise"], rows,
              [f"seed={config['seed']}", f"samples={config['samples']}"])
    return {"errors": errs, "h_errors": hs, "ok": ok}, ok


def run_spin_convergence(config, out_dir):
    from .experiments import spin_observable_convergence
    rows_d = spin_observable_convergence()
    rows = [(r["delta"], r["max_probe_error"], r["b_value_error"])
            for r in rows_d]
    ok = (rows_d[-1]["max_probe_error"] < rows_d[0]["max_probe_error"]
          and all(r["b_value_error"] < 1e-12 for r in rows_d))
    write_csv(out_dir / "spin_convergence.csv",
              ["delta", "max_probe_error", "b_value_error"], rows,
              [f"seed={config['seed']}"])
    return {"ok": ok}, ok


def run_strip_decay(config, out_dir):
    from .observables import strip_decay_rate
    ps = np.linspace(0.1, PSD, 12)
    rows = [(float(p), strip_decay_rate(float(p))["xi"]) for p in ps]
    vals = [r[1] for r in rows]
    ok = all(a > b for a, b in zip(vals, vals[1:])) and abs(vals[-1]) < 1e-12
    write_csv(out_dir / "strip_decay.csv", ["p", "xi"], rows,
              [f"seed={config['seed']}"])
    return {"ok": ok}, ok


# CSV columns each experiment writes (the generated README fragment)
CSV_COLUMNS = {
    "verify-identities": ("verify_identities.csv", ["check", "passed"]),
    "kw-duality": ("kw_duality.csv", ["size", "beta", "residual"]),
    "ht-expansion": ("ht_expansion.csv",
                     ["fixture", "beta", "partition_rel_err", "correlation_err"]),
    "loop-weights": ("loop_weights.csv",
                     ["instance", "max_ratio_dev", "euler_ok"]),
    "s-holomorphicity": ("s_holomorphicity.csv",
                         ["instance", "line_residual", "projection_gap"]),
    "massive-relation": ("massive_relation.csv",
                         ["p", "relation_residual", "laplacian_residual", "alpha"]),
    "parafermionic": ("parafermionic.csv", ["q", "residual"]),
    "martingales": ("martingales.csv", ["model", "residual"]),
    "h-field": ("h_field.csv", ["quantity", "value"]),
    "sampler-chi2": ("sampler_chi2.csv",
                     ["instance", "sampler", "chi2", "critical_99", "passed"]),
    "energy-density": ("energy_density.csv",
                       ["delta", "mean", "stderr", "prediction"]),
    "rsw": ("rsw.csv", ["n", "p_hat", "stderr", "long_p_hat", "long_stderr"]),
    "critical-exponent": ("two_point.csv", ["distance", "correlation"]),
    "correlation-length": ("correlation_length.csv",
                           ["quantity", "value", "target"]),
    "loewner-kappa": ("loewner.csv",
                      ["model", "kappa", "target", "ci_lo", "ci_hi",
                       "round_trip_error", "discarded"]),
    "fk-convergence": ("fk_convergence.csv",
                       ["delta", "max_probe_error", "h_error", "mc_noise"]),
    "spin-convergence": ("spin_convergence.csv",
                         ["delta", "max_probe_error", "b_value_error"]),
    "strip-decay": ("strip_decay.csv", ["p", "xi"]),
}


def schema_fragment():
    """Markdown fragment documenting every experiment's CSV columns."""
    lines = ["## Experiment CSV columns", ""]
    for name in sorted(CSV_COLUMNS):
        fname, cols = CSV_COLUMNS[name]
        lines.append(f"- `{name}` writes `{fname}`: {', '.join(cols)}")
    return "\n".join(lines) + "\n"


REGISTRY = [
    Experiment("verify-identities",
               "run every exact identity check at its pinned tolerance",
               "§identities", run_verify_identities, {}),
    Experiment("kw-duality", "partition-function duality residuals",
               "§identities", run_kw_duality,
               {"sizes": [2, 3], "betas": [0.3, "beta_c", 0.7],
                "tolerance": 1e-10}),
    Experiment("ht-expansion", "contour expansion vs Boltzmann sums",
               "§identities", run_ht_expansion,
               {"betas": [0.3, "beta_c"], "tolerance": 1e-12}),
    Experiment("loop-weights", "loop representation weights and Euler count",
               "§identities", run_loop_weights,
               {"p": PSD, "q": 2.0, "tolerance": 1e-12}),
    Experiment("s-holomorphicity", "observable line and projection identities",
               "§identities", run_s_holomorphicity, {"tolerance": 1e-12}),
    Experiment("massive-relation", "off-critical observable identities",
               "§identities", run_massive_relation,
               {"ps": [0.3, 0.55], "tolerance": 1e-10}),
    Experiment("parafermionic", "general-q local relation residuals",
               "§identities", run_parafermionic,
               {"qs": [1.0, 2.0, 3.0], "tolerance": 1e-10}),
    Experiment("martingales", "one-step martingale identities",
               "§identities", run_martingales, {"tolerance": 1e-12}),
    Experiment("h-field", "H field boundary values and harmonicity",
               "§identities", run_h_field, {}),
    Experiment("sampler-chi2", "samplers vs enumerated distributions",
               "§samplers", run_sampler_chi2, {"samples": 200_000}),
    Experiment("energy-density", "nearest-edge correlation at criticality",
               "§experiments", run_energy_density,
               {"deltas": [0.125, 0.0625], "samples": 1_000_000}),
    Experiment("rsw", "crossing probabilities at the self-dual point",
               "§experiments", run_rsw,
               {"sizes": [8, 16, 32], "samples": 2000, "subcritical_p": 0.3}),
    Experiment("critical-exponent", "two-point decay exponent at criticality",
               "§experiments", run_critical_exponent,
               {"L": 128, "samples": 10_000}),
    Experiment("correlation-length", "arcsinh formula, Wulff limit, Green decay",
               "§experiments", run_correlation_length, {"beta": 0.3}),
    Experiment("loewner-kappa", "driving-function variance slope",
               "§scaling", run_loewner, {"L": 64, "interfaces": 200}),
    Experiment("fk-convergence", "observable and H field vs conformal maps",
               "§scaling", run_fk_convergence,
               {"deltas": [0.125, 0.0625, 0.03125], "samples": 200_000}),
    Experiment("spin-convergence", "enumerable observable vs the Moebius target",
               "§scaling", run_spin_convergence, {}),
    Experiment("strip-decay", "closed-form decay rate monotonicity",
               "§identities", run_strip_decay, {}),
]

BY_NAME = {e.name: e for e in REGISTRY}
