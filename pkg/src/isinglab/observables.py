"""Fermionic and parafermionic observables, exact by enumeration, plus the
off-critical (massive) identities and the strip decay rate.

Edge observables are stored on canonically oriented medial edges, keyed by
(tail, head).  The FK observable of a directed medial edge e is

    F(e) = E[ exp(i * sigma * W(e, b)) * 1{e on the exploration path} ]

with sigma = 1/2 for the FK-Ising case and W the winding accumulated from
the traversal of e to the terminal edge at b_med.  The spin observable is
the winding-weighted contour sum ratio of the high-temperature expansion.
"""

from __future__ import annotations

import cmath
import math

from .lattice import (
    canonical_direction,
    line_of_edge,
    project_on_line,
    primal_edge_of_medial_vertex,
)
from .loops import ContourTracer, FKDobrushinModel

SQRT2 = math.sqrt(2.0)
XC = SQRT2 - 1.0  # critical high-temperature edge weight exp(-2 beta_c)

COMPASS = {"N": (1, 1), "E": (1, -1), "S": (-1, -1), "W": (-1, 1)}

# The spin observable's projection lines are the medial lines rotated by
# pi/8: its contour windings are referenced to the primal (diagonal) edge
# directions, half a lattice turn away from the medial directions.  With
# this family the projection identity holds exactly at every medial edge.
SPIN_LINE_TWIST = cmath.exp(1j * math.pi / 8)


def spin_line_of_edge(u, v):
    rep = SPIN_LINE_TWIST * line_of_edge(u, v)
    if rep.imag < 0 or (rep.imag == 0 and rep.real < 0):
        rep = -rep
    return rep


def edge_key(v, step):
    """Canonical (tail, head) key of the medial edge {v, v+step}."""
    u = (v[0] + step[0], v[1] + step[1])
    d = canonical_direction(v, u)
    return (v, u) if d == step else (u, v)


def compass_edges(v):
    """Canonical keys of the four incident medial edges, by position."""
    return {name: edge_key(v, s) for name, s in COMPASS.items()}


def spin_of_q(q):
    """Parafermionic spin sigma(q) = 1 - (2/pi) arccos(sqrt(q)/2)."""
    if not (0.0 < q <= 4.0):
        raise ValueError("q must lie in (0, 4]")
    return 1.0 - (2.0 / math.pi) * math.acos(math.sqrt(q) / 2.0)


def mass_params(p):
    """Off-critical angle alpha, mass cos(2 alpha) and decay rate for the
    FK-Ising observable at edge parameter p."""
    num = cmath.exp(-1j * math.pi / 4) * (1.0 - p) * SQRT2 + p
    den = cmath.exp(-1j * math.pi / 4) * p + (1.0 - p) * SQRT2
    alpha = cmath.phase(num / den)
    return alpha, math.cos(2.0 * alpha)


def strip_decay_rate(p):
    """Exponential decay rate of the observable across a strip,

        xi = -log( [1+cos(pi/4 - a)] cos(pi/4 - a)
                 / ([1+cos(pi/4 + a)] cos(pi/4 + a)) ),

    vanishing at the self-dual point and positive below it."""
    p_sd = SQRT2 / (1.0 + SQRT2)
    if not (0.0 < p):
        raise ValueError("p must be positive")
    alpha, _ = mass_params(p)
    num = (1.0 + math.cos(math.pi / 4 - alpha)) * math.cos(math.pi / 4 - alpha)
    den = (1.0 + math.cos(math.pi / 4 + alpha)) * math.cos(math.pi / 4 + alpha)
    xi = -math.log(num / den)
    return {"xi": xi, "alpha": alpha, "physical": p <= p_sd + 1e-12}


# ---------------------------------------------------------------------------
# exact FK / parafermionic observable

def fk_edge_observable_exact(model, sigma=0.5):
    """Exact edge observable by enumeration of the Dobrushin measure."""
    sts, probs = model.distribution()
    F = {}
    for row, pr in zip(sts, probs):
        gamma = model.trace_exploration(list(row))
        wq = gamma.winding_to_end_quarters()
        for i, (v, s) in enumerate(gamma.directed_edges()):
            key = (v, (v[0] + s[0], v[1] + s[1]))
            F[key] = F.get(key, 0j) + pr * cmath.exp(1j * sigma * wq[i] * math.pi / 2)
    return F


def fk_vertex_observable(edge_field, v):
    """F(v) = half the sum of the four incident edge observables."""
    total = 0j
    for name in COMPASS:
        total += edge_field.get(edge_key(v, COMPASS[name]), 0j)
    return total / 2.0


def vertex_field(model, edge_field=None, sigma=0.5):
    """Vertex observable on the interior medial vertices of the domain."""
    if edge_field is None:
        edge_field = fk_edge_observable_exact(model, sigma)
    return {v: fk_vertex_observable(edge_field, v)
            for v in model.domain.interior_medial_vertices()}


def edge_line_residual(edge_field):
    """Max distance from each edge value to its line ell(e)."""
    worst = 0.0
    for (u, v), val in edge_field.items():
        rep = line_of_edge(u, v)
        worst = max(worst, abs(val - project_on_line(rep, val)))
    return worst


def local_relation_residual(edge_field, vertices, alpha=0.0):
    """Max residual of the four-edge relation around medial vertices,

        F(A) - F(C) = i e^{i alpha} [F(B) - F(D)],

    with A the compass edge oriented toward the vertex and A, B, C, D read
    clockwise.  At alpha = 0 this is the critical relation
    F(N) - F(S) = i [F(E) - F(W)]."""
    ea = cmath.exp(1j * alpha)
    worst = 0.0
    for v in vertices:
        c = {k: edge_field.get(e, 0j) for k, e in compass_edges(v).items()}
        if v[0] % 2 == 1:  # inward edges at N and S
            r = abs(c["N"] - c["S"] - 1j * ea * (c["E"] - c["W"]))
        else:              # inward edges at E and W
            r = abs(c["E"] - c["W"] - 1j * ea * (c["S"] - c["N"]))
        worst = max(worst, r)
    return worst


def massive_laplacian_residual(model, edge_field=None):
    """Max residual of the massive harmonicity of the vertex observable in
    the killed-walk form

        F(v) = cos(2 alpha) * (mean of F over the four medial vertices at
               distance sqrt(2) delta),

    the same equation the massive Green function solves.  Equivalently,
    with the averaging Laplacian D = mean - value, D F = (sec(2a) - 1) F;
    exact enumeration pins sec, not cos, as the eigenvalue."""
    alpha, m = mass_params(model.p)
    vf = vertex_field(model, edge_field)
    worst = 0.0
    checked = 0
    for v, val in vf.items():
        nbrs = [(v[0] + 2, v[1]), (v[0] - 2, v[1]), (v[0], v[1] + 2), (v[0], v[1] - 2)]
        if not all(u in vf for u in nbrs):
            continue
        checked += 1
        avg = sum(vf[u] for u in nbrs) / 4.0
        worst = max(worst, abs(val - m * avg))
    return worst, checked


def massive_residual(domain, p):
    """Residuals of the off-critical relation and the massive Laplacian
    identity for the exact observable at edge parameter p."""
    model = FKDobrushinModel(domain, p, 2.0)
    F = fk_edge_observable_exact(model, sigma=0.5)
    alpha, _ = mass_params(p)
    rel = local_relation_residual(F, domain.interior_medial_vertices(), alpha)
    lap, checked = massive_laplacian_residual(model, F)
    return {"relation": rel, "laplacian": lap, "laplacian_sites": checked,
            "alpha": alpha}


def parafermionic_residual(domain, q, p=None, sigma=None):
    """Residual of the four-edge relation for the general-q parafermionic
    observable at the self-dual point (or a supplied p / spin)."""
    from .fk import p_self_dual
    if p is None:
        p = p_self_dual(q)
    if sigma is None:
        sigma = spin_of_q(q)
    model = FKDobrushinModel(domain, p, q)
    F = fk_edge_observable_exact(model, sigma=sigma)
    return local_relation_residual(F, domain.interior_medial_vertices(), 0.0)


def fk_first_random_vertex(model):
    """Medial vertex of the first random edge met by the exploration path.

    The path's prefix up to that vertex is forced (wired-arc and outside
    edges have frozen states), so the vertex is configuration independent.
    """
    dom = model.domain
    random_set = {((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
                  for (u, v) in dom.random_edges}
    gamma = model.trace_exploration([False] * len(dom.random_edges))
    for v in gamma.vertices[1:]:
        if v in random_set:
            return v
    raise ValueError("exploration path meets no random edge")


def fk_martingale_residual(domain, p, q=2.0, sigma=0.5):
    """Exhaustive one-step branching check of the martingale property of the
    FK observable: conditioning on the state of the first random edge met by
    the exploration path and averaging the conditional observables must
    reproduce the unconditional one.  Returns the max residual over edges."""
    model = FKDobrushinModel(domain, p, q)
    v1 = fk_first_random_vertex(model)
    pe = primal_edge_of_medial_vertex(v1)
    e = pe if pe in model.domain.random_index else (pe[1], pe[0])
    j = model.domain.random_index[e]
    sts, probs = model.distribution()
    full = fk_edge_observable_exact(model, sigma)
    combined = {}
    for state in (False, True):
        sel = sts[:, j] == state
        pr_s = probs[sel].sum()
        cond = {}
        for row, pr in zip(sts[sel], probs[sel]):
            gamma = model.trace_exploration(list(row))
            wq = gamma.winding_to_end_quarters()
            for i, (v, s) in enumerate(gamma.directed_edges()):
                key = (v, (v[0] + s[0], v[1] + s[1]))
                cond[key] = cond.get(key, 0j) + (pr / pr_s) * cmath.exp(
                    1j * sigma * wq[i] * math.pi / 2)
        for key, val in cond.items():
            combined[key] = combined.get(key, 0j) + pr_s * val
    worst = 0.0
    for key in set(full) | set(combined):
        worst = max(worst, abs(full.get(key, 0j) - combined.get(key, 0j)))
    return worst


# ---------------------------------------------------------------------------
# exact spin observable

class SpinObservable:
    """Spin fermionic observable on a spin Dobrushin domain, evaluated by
    enumerating the high-temperature contour families through a cycle basis."""

    def __init__(self, domain):
        if domain.variant != "spin":
            raise ValueError("domain must be a spin Dobrushin domain")
        self.domain = domain
        g = domain.graph
        self.x_a = self._inner_endpoint(domain.a_med)
        self._denominator = None

    def _inner_endpoint(self, mid):
        p, q = primal_edge_of_medial_vertex(mid)
        inside = [v for v in (p, q) if v in self.domain.graph.vset]
        if len(inside) != 1:
            raise ValueError(f"{mid} is not a boundary medial vertex")
        return inside[0]

    def _families(self, z):
        """(pool_edges, [target vertices]) for the contour sums to z."""
        g = self.domain.graph
        p, q = primal_edge_of_medial_vertex(z)
        inside = [v for v in (p, q) if v in g.vset]
        if len(inside) == 2:
            # interior midpoint: the terminal half-edge may come from either
            # side, and the full edge under z is excluded from the pool
            pool = [e for e in g.edges if set(e) != {p, q}]
            return pool, [p, q]
        if not inside:
            raise ValueError(f"{z} does not border the domain")
        return list(g.edges), inside

    def _configurations(self, pool, x_z):
        """Yield every contour edge set with odd degree exactly at x_a and
        x_z (all even when the two coincide), via a cycle basis of the pool."""
        index = {e: i for i, e in enumerate(pool)}
        adj = {}
        for (u, v) in pool:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        parent = {self.x_a: None}
        order = [self.x_a]
        for v in order:
            for w in adj.get(v, ()):
                if w not in parent:
                    parent[w] = v
                    order.append(w)

        def tree_path_mask(v):
            mask = 0
            while parent[v] is not None:
                u = parent[v]
                e = (u, v) if u <= v else (v, u)
                mask ^= 1 << index[e]
                v = u
            return mask

        if x_z == self.x_a:
            base = 0
        elif x_z in parent:
            base = tree_path_mask(x_z)
        else:
            return  # disconnected: no admissible contour
        tree_edges = set()
        for v, u in parent.items():
            if u is not None:
                tree_edges.add((u, v) if u <= v else (v, u))
        cycles = [tree_path_mask(u) ^ tree_path_mask(v) ^ (1 << index[e])
                  for e in pool if e not in tree_edges
                  for (u, v) in (e,) if u in parent and v in parent]
        if len(cycles) > 22:
            raise ValueError(f"contour space too large (2^{len(cycles)})")
        for code in range(1 << len(cycles)):
            mask = base
            k = code
            i = 0
            while k:
                if k & 1:
                    mask ^= cycles[i]
                k >>= 1
                i += 1
            yield {pool[i] for i in range(len(pool)) if (mask >> i) & 1}

    def _contour_sum(self, z, pool, x_z):
        """Sum of exp(-i W(a,z)/2) * (sqrt(2)-1)^{#edges} over the family."""
        tracer = ContourTracer(self.domain.a_med, self.x_a, x_z, z)
        total = 0.0j
        for edge_set in self._configurations(pool, x_z):
            wq, _ = tracer.trace(edge_set)
            total += cmath.exp(-1j * wq * math.pi / 4) * XC ** len(edge_set)
        return total

    def denominator(self):
        if self._denominator is None:
            pool, targets = self._families(self.domain.b_med)
            self._denominator = self._contour_sum(self.domain.b_med, pool, targets[0])
        return self._denominator

    def value(self, z):
        """F(z): ratio of winding-weighted contour sums."""
        z = tuple(z)
        if z == self.domain.a_med:
            raise ValueError("observable undefined at the start point")
        pool, targets = self._families(z)
        num = sum(self._contour_sum(z, pool, t) for t in targets)
        return num / self.denominator()

    # -- one-step martingale decomposition ------------------------------------

    def _grouped_sum(self, z, pool, x_z):
        """Contour sums grouped by the interface's first full step, with the
        slit-domain reweighting: windings measured from the new tip and one
        edge weight removed.  Returns {first_step: (slit_sum, plain_sum)}
        where plain_sum accumulates (sqrt(2)-1)^{#edges} with no phase."""
        tracer = ContourTracer(self.domain.a_med, self.x_a, x_z, z)
        out = {}
        for edge_set in self._configurations(pool, x_z):
            wq, detail = tracer.trace(edge_set)
            first = detail["first_step"]
            if first is None:
                raise ValueError(
                    "z borders the start vertex: the one-step decomposition "
                    "is degenerate there")
            slit_wq = wq - detail["turns"][0]
            s, pl = out.get(first, (0.0j, 0.0))
            w = XC ** len(edge_set)
            out[first] = (s + cmath.exp(-1j * slit_wq * math.pi / 4) * w / XC,
                          pl + w)
        return out

    def martingale_residual(self, z):
        """Residual of the one-step martingale identity: the average over
        the interface's first step of the slit-domain observable equals the
        observable itself."""
        z = tuple(z)
        pool_b, targets_b = self._families(self.domain.b_med)
        groups_b = self._grouped_sum(self.domain.b_med, pool_b, targets_b[0])
        z_total = sum(pl for _, pl in groups_b.values())
        pool, targets = self._families(z)
        groups_z = {}
        for t in targets:
            for first, (s, _) in self._grouped_sum(z, pool, t).items():
                groups_z[first] = groups_z.get(first, 0.0j) + s
        total = 0.0j
        for first, (s_b, pl_b) in groups_b.items():
            prob = pl_b / z_total              # mu(gamma_1 = first)
            if first not in groups_z:
                continue
            f_slit = groups_z[first] / s_b     # slit-domain observable at z
            total += prob * f_slit
        return abs(total - self.value(z))
