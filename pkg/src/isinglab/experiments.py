"""Scaling-limit experiments: observable and H-field convergence against
closed-form conformal maps, Loewner driving extraction with kappa fits,
RSW crossing estimates, correlation-length formulas, and the
critical-exponent and energy-density fits.

The canonical test domain is the unit disk with marked points -1 and 1,
where both conformal targets are elementary:

    phi(z)  = (1/pi) log((1+z)/(1-z)) + i/2      disk -> R x (0,1)
    psi(z)  = i (1-z)/(1+z)                       disk -> half-plane
    sqrt(psi'(z)/psi'(1)) = 2/(1+z)
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from . import _kernels as K
from .domains import Disk, build_domain
from .fk import p_self_dual
from .harmonic import massive_green
from .lattice import embed
from .loops import ContourTracer
from .mc_observable import fk_edge_observable_mc, sample_interfaces
from .observables import SQRT2, SpinObservable, fk_vertex_observable
from .samplers import SpinSampler, _pad_neighbors, jackknife
from .spin import BETA_C, SpinGraph
from .zipper import estimate_kappa, extract_driving, round_trip_error

PSD = p_self_dual(2.0)


# ---------------------------------------------------------------------------
# conformal targets on the unit disk, a = -1, b = 1

def conformal_target(kind, z):
    """Closed-form targets: 'im_phi', 'sqrt_phi_prime' (FK normalization)
    or 'sqrt_psi_prime_ratio' (spin normalization)."""
    z = complex(z)
    if abs(abs(z) - 1.0) < 1e-12:
        raise ValueError("z lies on the boundary")
    if abs(z) > 1.0:
        raise ValueError("z outside the unit disk")
    if kind == "im_phi":
        return ((1.0 / math.pi) * cmath.log((1 + z) / (1 - z)) + 0.5j).imag
    if kind == "sqrt_phi_prime":
        return cmath.sqrt(2.0 / (math.pi * (1 - z * z)))
    if kind == "sqrt_psi_prime_ratio":
        return 2.0 / (1 + z)
    raise ValueError(f"unknown target {kind!r}")


def disk_domain(delta, variant="fk"):
    return build_domain(Disk(1.0), delta, variant, -1 + 0j, 1 + 0j)


# ---------------------------------------------------------------------------
# observable convergence

def fk_observable_convergence(deltas=(1 / 8, 1 / 16, 1 / 32),
                              probes=(-0.5 + 0j, 0j, 0.5 + 0j),
                              samples=200_000, seed=0):
    """Max probe error of F(v)/sqrt(2 delta) against sqrt(phi') per mesh,
    plus the H-field error against Im(phi).  Errors should decrease with
    delta up to the reported Monte Carlo noise."""
    rows = []
    for delta in deltas:
        dom = disk_domain(delta)
        field, n = fk_edge_observable_mc(dom, PSD, samples,
                                         seed=seed + int(1 / delta))
        interior = set(dom.interior_medial_vertices())
        err = 0.0
        for probe in probes:
            v = min(interior, key=lambda m: abs(embed(m, delta) - probe))
            val = fk_vertex_observable(field, v) / math.sqrt(2 * delta)
            target = conformal_target("sqrt_phi_prime", embed(v, delta))
            err = max(err, abs(val - target))
        h_err = _h_field_error(dom, field, probes)
        noise = 4.0 / math.sqrt(samples * 2 * delta)
        rows.append({"delta": delta, "max_probe_error": err,
                     "h_error": h_err, "mc_noise": noise, "samples": n})
    return rows


def _h_field_error(dom, edge_field, probes):
    from .harmonic import fk_observable_H
    from .loops import FKDobrushinModel
    model = FKDobrushinModel(dom, PSD, 2.0)
    H = fk_observable_H(model, edge_field, tol=math.inf)
    err = 0.0
    for probe in probes:
        b = min(dom.graph.vertices,
                key=lambda v: abs(dom.graph.position(v) - probe))
        err = max(err, abs(H[b] - conformal_target("im_phi",
                                                   dom.graph.position(b))))
    return err


def spin_observable_convergence(deltas=(1 / 3, 1 / 4),
                                probes=(-0.4 + 0j, 0.3 + 0j)):
    """Exact-enumeration probe errors of the spin observable against
    2/(1+z); meshes too fine to enumerate raise."""
    rows = []
    for delta in deltas:
        dom = disk_domain(delta, "spin")
        obs = SpinObservable(dom)
        err = 0.0
        mv = [m for m in dom.medial_vertices() if m != dom.a_med]
        for probe in probes:
            z = min(mv, key=lambda m: abs(embed(m, delta) - probe))
            val = obs.value(z)
            target = conformal_target("sqrt_psi_prime_ratio", embed(z, delta))
            err = max(err, abs(val - target))
        bval = obs.value(dom.b_med)
        rows.append({"delta": delta, "max_probe_error": err,
                     "b_value_error": abs(bval - 1.0)})
    return rows


# ---------------------------------------------------------------------------
# Loewner driving and kappa

def mobius_disk_to_halfplane(z):
    """Unit disk -> H taking -1 (the start) to 0 and 1 (the end) to infinity."""
    return 1j * (1 + z) / (1 - z)


def loewner_kappa(model="fk", lattice_size=64, n_interfaces=200, seed=0,
                  thinning=None):
    """kappa estimate from sampled critical interfaces on the disk."""
    delta = SQRT2 / lattice_size
    if thinning is None:
        # interfaces are global objects; decorrelate hard between samples
        thinning = 16 if model == "fk" else 64
    drivings = []
    n_discarded = 0
    rt_err = None
    if model == "fk":
        dom = disk_domain(delta, "fk")
        gen = sample_interfaces(dom, PSD, n_interfaces, seed=seed,
                                thinning=thinning)
        curves = (list(c) for c in gen)
    elif model == "spin":
        dom = disk_domain(delta, "spin")
        curves = _spin_interfaces(dom, n_interfaces, seed=seed,
                                  thinning=thinning)
    else:
        raise ValueError(f"unknown interface model {model!r}")
    exit_caps = []
    radius = 0.8  # fit window: the curve within |w| <= radius, far from b
    for pts in curves:
        mapped = np.array([mobius_disk_to_halfplane(z) for z in pts])
        mapped = mapped[np.isfinite(mapped)]
        mapped = mapped[np.abs(mapped) < 1e6]
        kept = mapped[mapped.imag > 1e-12]
        try:
            ts, ws, hs = extract_driving(kept)
        except (ValueError, FloatingPointError):
            n_discarded += 1
            continue
        if not np.all(np.isfinite(ws)):
            n_discarded += 1
            continue
        drivings.append((ts, ws))
        out = np.abs(kept) > radius
        exit_caps.append(ts[int(np.argmax(out))] if out.any() else ts[-1])
        if rt_err is None:
            rt_err = round_trip_error(kept) / max(np.abs(kept).max(), 1.0)
    t_max = float(np.quantile(exit_caps, 0.25))
    est = estimate_kappa(drivings, t_max=t_max, seed=seed, t_min_frac=0.15)
    est["n_discarded"] = n_discarded
    est["round_trip_error"] = rt_err
    est["lattice_size"] = lattice_size
    est["model"] = model
    return est


def _spin_interfaces(dom, n_interfaces, seed=0, thinning=3):
    """Interfaces of the critical dual-lattice Ising model with plus/minus
    Dobrushin arcs, traced through the contour edges."""
    whites = list(dom.dual_interior)
    plus_arc = list(dom.dstar_ab)
    minus_arc = list(dom.dstar_ba_outer)
    vertices = whites + plus_arc + minus_arc
    index = {w: i for i, w in enumerate(vertices)}
    n = len(vertices)
    # couplings across every domain edge
    edges_idx = []
    edge_flank = []
    for (u, v) in dom.graph.edges:
        m = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
        if m[0] % 2 == 1:
            w1, w2 = (m[0], m[1] - 1), (m[0], m[1] + 1)
        else:
            w1, w2 = (m[0] - 1, m[1]), (m[0] + 1, m[1])
        if w1 in index and w2 in index:
            edges_idx.append((index[w1], index[w2]))
            edge_flank.append(((u, v), w1, w2))
    nbr = _pad_neighbors(n, edges_idx)
    frozen = np.zeros(n, dtype=np.bool_)
    spins = np.ones(n, dtype=np.int8)
    rng = np.random.default_rng(seed)
    spins[:] = np.where(rng.random(n) < 0.5, 1, -1)
    for w in plus_arc:
        frozen[index[w]] = True
        spins[index[w]] = 1
    for w in minus_arc:
        frozen[index[w]] = True
        spins[index[w]] = -1
    x_a = [v for v in _edge_of(dom.a_med) if v in dom.graph.vset][0]
    x_b = [v for v in _edge_of(dom.b_med) if v in dom.graph.vset][0]
    stream = [0]

    def next_seed():
        stream[0] += 1
        return (seed * 5000011 + stream[0]) % (2 ** 31 - 1)

    K.wolff_steps(spins, nbr, frozen, BETA_C, 60 + n // 2, next_seed())
    tracer = ContourTracer(dom.a_med, x_a, x_b, dom.b_med)
    for _ in range(n_interfaces):
        K.wolff_steps(spins, nbr, frozen, BETA_C, thinning, next_seed())
        contours = set()
        for (e, w1, w2) in edge_flank:
            if spins[index[w1]] != spins[index[w2]]:
                contours.add(e)
        _, detail = tracer.trace(contours)
        pts = [embed(dom.a_med, dom.delta)]
        pts += [embed(m, dom.delta) for m in detail["midpoints"]]
        pts.append(embed(dom.b_med, dom.delta))
        yield pts


def _edge_of(mid):
    from .lattice import primal_edge_of_medial_vertex
    return primal_edge_of_medial_vertex(mid)


# ---------------------------------------------------------------------------
# RSW crossing estimates

def rsw_crossing(n, samples=2000, seed=0, p=PSD, thinning=2):
    """Crossing probabilities of a critical FK box of 4n x n cells (4n rows
    by n columns) with free boundary conditions, by Edwards-Sokal sampling.

    p_hat is the horizontal crossing (left to right across the short span
    of n cells); long_p_hat is the crossing along the 4n direction, the
    rare event whose uniform positivity is the content of the crossing
    theorem.  Both are n-stable at criticality.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    ncols, nrows = n + 1, 4 * n + 1
    graph = SpinGraph.grid(ncols, nrows)  # index (i, j) -> i * nrows + j
    beta = -0.5 * math.log(1.0 - p)
    s = SpinSampler(graph, beta, sampler="wolff", seed=seed, thinning=thinning,
                    burn_in=3000)
    s.warm_up()
    edges = np.array(graph.edges, dtype=np.int32)
    opens = np.zeros(len(graph.edges), dtype=np.bool_)
    left = np.array([0 * nrows + j for j in range(nrows)], dtype=np.int32)
    right = np.array([(ncols - 1) * nrows + j for j in range(nrows)], dtype=np.int32)
    bottom = np.array([i * nrows + 0 for i in range(ncols)], dtype=np.int32)
    top = np.array([i * nrows + (nrows - 1) for i in range(ncols)], dtype=np.int32)
    hits_h = 0
    hits_v = 0
    for _ in range(samples):
        s.step(thinning)
        K.edwards_sokal_open(s.spins, edges, p, opens, s._next_seed())
        if K.crossing_left_right(opens, edges, graph.n, left, right):
            hits_h += 1
        if K.crossing_left_right(opens, edges, graph.n, bottom, top):
            hits_v += 1
    ph, pv = hits_h / samples, hits_v / samples
    return {"n": n, "p_hat": ph,
            "stderr": math.sqrt(max(ph * (1 - ph), 1e-12) / samples),
            "long_p_hat": pv,
            "long_stderr": math.sqrt(max(pv * (1 - pv), 1e-12) / samples),
            "samples": samples}


def annulus_circuit(n, samples=2000, seed=0, thinning=2):
    """Crossing probability between the boundaries of the annulus
    S_{n,2n} with wired boundary conditions (bounded away from 1)."""
    side = 4 * n + 1
    c = 2 * n
    verts = [(i, j) for i in range(side) for j in range(side)
             if n <= max(abs(i - c), abs(j - c)) <= 2 * n]
    index = {v: i for i, v in enumerate(verts)}
    edges_idx = []
    for (i, j) in verts:
        for w in ((i + 1, j), (i, j + 1)):
            if w in index:
                edges_idx.append((index[(i, j)], index[w]))
    inner = [index[v] for v in verts if max(abs(v[0] - c), abs(v[1] - c)) == n]
    outer = [index[v] for v in verts if max(abs(v[0] - c), abs(v[1] - c)) == 2 * n]
    frozen = {i: 1 for i in inner + outer}
    graph = SpinGraph(len(verts), edges_idx, frozen)
    s = SpinSampler(graph, BETA_C, sampler="wolff", seed=seed, thinning=thinning,
                    burn_in=3000)
    s.warm_up()
    edges = np.array(edges_idx, dtype=np.int32)
    opens = np.zeros(len(edges_idx), dtype=np.bool_)
    inner_ids = np.array(inner, dtype=np.int32)
    outer_ids = np.array(outer, dtype=np.int32)
    hits = 0
    for _ in range(samples):
        s.step(thinning)
        K.edwards_sokal_open(s.spins, edges, PSD, opens, s._next_seed())
        if K.crossing_left_right(opens, edges, graph.n, inner_ids, outer_ids):
            hits += 1
    phat = hits / samples
    return {"n": n, "p_hat": phat,
            "stderr": math.sqrt(max(phat * (1 - phat), 1e-12) / samples)}


# ---------------------------------------------------------------------------
# correlation length and the massive-Green cross-check

def correlation_length(beta, x, y):
    """Directional inverse correlation length tau(x, y) below criticality:
    bisection for s in sqrt(1+s^2 x^2) + sqrt(1+s^2 y^2) = sinh(2b) + 1/sinh(2b),
    then tau = x asinh(s x) + y asinh(s y)."""
    if (x, y) == (0, 0):
        raise ValueError("direction must be nonzero")
    if beta <= 0:
        raise ValueError("beta must be positive")
    flagged = beta >= BETA_C
    rhs = math.sinh(2 * beta) + 1.0 / math.sinh(2 * beta)

    def f(s):
        return math.sqrt(1 + (s * x) ** 2) + math.sqrt(1 + (s * y) ** 2) - rhs

    lo, hi = 1e-12, 1e12
    if f(lo) > 0 or f(hi) < 0:
        raise ValueError("bisection bracket failed")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, lo):
            break
    s = 0.5 * (lo + hi)
    tau = x * math.asinh(s * x) + y * math.asinh(s * y)
    return {"beta": beta, "direction": (x, y), "s": s, "tau": tau,
            "subcritical": not flagged}


def wulff_ratio(beta, x, y):
    r = correlation_length(beta, x, y)
    return r["tau"] / (BETA_C - beta)


def massive_green_decay_rate(beta, fit_range=(10, 30), size=None):
    """Fitted exponential decay rate of G_{m(beta)}(0, n e1) along the axis."""
    from .observables import mass_params
    from .fk import p_of_beta
    alpha, m = mass_params(p_of_beta(beta))
    field, half = massive_green(m, size=size)
    lo, hi = fit_range
    hi = min(hi, half - 2)
    ns = np.arange(lo, hi + 1)
    vals = np.array([field[(int(n), 0)] for n in ns])
    # G decays like n^{-1/2} e^{-tau n}: fit the log with the power-law
    # prefactor removed, otherwise the slope carries an O(1/n) bias
    coeffs = np.polyfit(ns, np.log(vals) + 0.5 * np.log(ns), 1)
    return {"rate": -float(coeffs[0]), "mass": m, "half_size": half}


# ---------------------------------------------------------------------------
# critical exponent

def two_point_profile(L, distances, n_meas, seed=0, beta=BETA_C, thinning=2,
                      periodic=True):
    """<sigma_0 sigma_x> along both axes (averaged over two centered pairs).

    Defaults to the torus: free or fixed boundaries distort the power law
    noticeably at desk sizes (free boundaries at L = 128 steepen the
    fitted exponent from 1/4 to about 0.36)."""
    graph = SpinGraph.grid(L, L, periodic=periodic)
    s = SpinSampler(graph, beta, sampler="wolff", seed=seed, thinning=thinning,
                    burn_in=2000)
    s.warm_up()
    idx = lambda i, j: i * L + j
    c = L // 2
    # pairs centered on the box midpoint (both endpoints equally far from
    # the boundary), horizontal and vertical
    pa, pb, labels = [], [], []
    for d in distances:
        for (di, dj) in ((d, 0), (0, d)):
            a = (c - di // 2, c - dj // 2)
            b = (a[0] + di, a[1] + dj)
            pa.append(idx(*a))
            pb.append(idx(*b))
            labels.append(d)
    pa = np.array(pa, dtype=np.int32)
    pb = np.array(pb, dtype=np.int32)
    prods = K.wolff_pair_products(s.spins, s.nbr, s.frozen, beta, n_meas,
                                  thinning, s._next_seed(), pa, pb)
    out = {}
    for d in distances:
        out[d] = float(np.mean([prods[k] for k in range(len(labels))
                                if labels[k] == d]))
    return out


def critical_exponent_fit(L=128, n_meas=10_000, seed=0, beta=BETA_C,
                          n_blocks=4, max_ci=0.2):
    """Log-log slope of the two-point function over [4, L/4].

    The confidence interval comes from independent measurement blocks;
    raises when it is wider than max_ci (insufficient statistics)."""
    distances = sorted({int(round(4 * (L / 16) ** (k / 5))) for k in range(6)})
    distances = [d for d in distances if 4 <= d <= L // 4]
    xs = np.log(np.array(distances, dtype=float))

    def fit(profile):
        ys = np.log(np.array([max(profile[d], 1e-12) for d in distances]))
        return -float(np.polyfit(xs, ys, 1)[0])

    prof = two_point_profile(L, distances, n_meas, seed=seed, beta=beta)
    eta = fit(prof)
    block_etas = [fit(two_point_profile(L, distances, n_meas // n_blocks,
                                        seed=seed + 1000 + b, beta=beta))
                  for b in range(n_blocks)]
    stderr = float(np.std(block_etas, ddof=1) / math.sqrt(n_blocks))
    ci = 2 * 1.96 * stderr
    if ci > max_ci:
        raise ValueError(f"insufficient statistics: CI width {ci:.3f} > {max_ci}")
    return {"eta": eta, "stderr": stderr, "ci_width": ci,
            "distances": distances, "profile": prof, "L": L}


def decay_model_comparison(L=48, n_meas=40_000, seed=0, beta=0.35):
    """AIC comparison of power-law vs exponential fits (negative control:
    off criticality the exponential must win).

    The window must sit inside a few correlation lengths, else both models
    fit noise; the default beta keeps tau ~ 0.4 so distances up to 6 carry
    signal.  Subcritical Wolff clusters are small, so measurements are
    spaced by a sweep-scale number of steps."""
    distances = [2, 3, 4, 5, 6]
    prof = two_point_profile(L, distances, n_meas, seed=seed, beta=beta,
                             thinning=max(2, (L * L) // 12))
    xs = np.array(distances, dtype=float)
    ys = np.log(np.array([max(prof[d], 1e-12) for d in distances]))
    n = len(xs)

    def aic(resid):
        return n * math.log(max(resid / n, 1e-300)) + 4.0

    r_pow = np.polyfit(np.log(xs), ys, 1, full=True)[1]
    # exponential in the massive Ornstein-Zernike form, y ~ d^{-1/2} e^{-tau d}
    r_exp = np.polyfit(xs, ys + 0.5 * np.log(xs), 1, full=True)[1]
    aic_pow = aic(float(r_pow[0]) if len(r_pow) else 0.0)
    aic_exp = aic(float(r_exp[0]) if len(r_exp) else 0.0)
    return {"aic_power": aic_pow, "aic_exponential": aic_exp,
            "exponential_wins": aic_exp < aic_pow, "profile": prof}


# ---------------------------------------------------------------------------
# energy density

def disk_graph_plain(radius, delta):
    """Disk discretized on the plain square lattice delta Z^2."""
    r = int(math.ceil(radius / delta)) + 1
    pts = [(i, j) for i in range(-r, r + 1) for j in range(-r, r + 1)
           if (i * i + j * j) * delta * delta < radius * radius]
    index = {p: k for k, p in enumerate(pts)}
    edges = []
    for p in pts:
        for w in ((p[0] + 1, p[1]), (p[0], p[1] + 1)):
            if w in index:
                edges.append((index[p], index[w]))
    g = SpinGraph(len(pts), edges)
    g.points = pts
    g.delta = delta
    return g


def energy_density_estimate(delta, samples=200_000, seed=0, radius=1.0,
                            thinning=1):
    """Monte Carlo <sigma_x sigma_y> at the horizontal edge nearest the disk
    center, critical free-boundary Ising; the first mesh correction is
    -delta/pi for the unit disk."""
    if radius / delta < 8:
        raise ValueError("mesh too coarse: fewer than 8 lattice units across")
    g = disk_graph_plain(radius, delta)
    index = {p: k for k, p in enumerate(g.points)}
    # horizontal edge nearest the center: ties broken lexicographically
    cands = []
    for p in g.points:
        w = (p[0] + 1, p[1])
        if w in index:
            midpoint = ((p[0] + 0.5) * delta, p[1] * delta)
            dist = math.hypot(*midpoint)
            cands.append((dist, p, w))
    _, p, w = min(cands)
    s = SpinSampler(g, BETA_C, sampler="wolff", seed=seed,
                    burn_in=max(2000, 20 * int(math.sqrt(g.n))), thinning=thinning)
    s.warm_up()
    vals = K.wolff_edge_product(s.spins, s.nbr, s.frozen, BETA_C, samples,
                                thinning, s._next_seed(), index[p], index[w])
    mean, err = jackknife(vals.astype(np.float64))
    return {"delta": delta, "mean": mean, "stderr": err,
            "prediction": SQRT2 / 2 - delta / math.pi, "samples": samples}
