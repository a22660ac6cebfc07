"""Discrete harmonic and holomorphic analysis: Laplacian, Dirichlet solver,
harmonic measure (plain and boundary-modified), Green functions (plain and
massive), the dbar operator, s-holomorphicity checking, and the discrete
primitive of Im(integral of f^2) (the H field).

Fields are plain dicts vertex -> value over a Grid, a generic 4-neighbor
lattice graph with embedded positions.  Linear problems are assembled
sparse and solved directly; every solve asserts its residual.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import (
    is_primal,
    line_of_edge,
    medial_edge_faces,
    project_on_line,
)

RESIDUAL_TOL = 1e-10

# the boundary-modified walks jump onto the extra layer with this rate
RHO = 2.0 / (math.sqrt(2.0) + 1.0)


class Grid:
    """4-neighbor lattice graph with embedded positions."""

    def __init__(self, adjacency, positions):
        self.adj = {v: list(ws) for v, ws in adjacency.items()}
        self.position = dict(positions)
        self.vertices = sorted(self.adj)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.interior = [v for v in self.vertices if len(self.adj[v]) == 4]
        self.boundary = [v for v in self.vertices if len(self.adj[v]) < 4]

    @classmethod
    def box(cls, nx, ny, spacing=1.0):
        """Plain nx x ny square grid with mesh `spacing`."""
        adj = {}
        pos = {}
        for i in range(nx):
            for j in range(ny):
                v = (i, j)
                pos[v] = spacing * complex(i, j)
                adj[v] = [w for w in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1))
                          if 0 <= w[0] < nx and 0 <= w[1] < ny]
        return cls(adj, pos)

    @classmethod
    def from_primal(cls, primal_graph):
        adj = {v: list(primal_graph.adj[v]) for v in primal_graph.vertices}
        pos = {v: primal_graph.position(v) for v in primal_graph.vertices}
        return cls(adj, pos)


def discrete_laplacian(grid, f, u):
    """Quarter mean-minus-center Laplacian at an interior vertex."""
    nbrs = grid.adj[u]
    if len(nbrs) != 4:
        raise ValueError(f"{u} is a boundary vertex")
    return sum(f[v] - f[u] for v in nbrs) / 4.0


def solve_dirichlet(grid, boundary_data):
    """Unique preharmonic extension of boundary data.

    boundary_data must cover every boundary vertex; returns the full field.
    Raises if the interior is empty or the solve misses RESIDUAL_TOL.
    """
    missing = [v for v in grid.boundary if v not in boundary_data]
    if missing:
        raise ValueError(f"boundary data missing at {missing[0]}")
    interior = grid.interior
    if not interior:
        raise ValueError("empty interior")
    iidx = {v: i for i, v in enumerate(interior)}
    n = len(interior)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n, dtype=complex)
    for v in interior:
        i = iidx[v]
        rows.append(i)
        cols.append(i)
        vals.append(4.0)
        for w in grid.adj[v]:
            if w in iidx:
                rows.append(i)
                cols.append(iidx[w])
                vals.append(-1.0)
            else:
                rhs[i] += boundary_data[w]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    x = spla.spsolve(A, rhs)
    resid = np.abs(A @ x - rhs).max() if n else 0.0
    if resid > RESIDUAL_TOL:
        raise RuntimeError(f"Dirichlet solve residual {resid:.2e}")
    field = dict(boundary_data)
    for v, i in iidx.items():
        field[v] = complex(x[i])
    return field


def harmonic_measure(grid, y):
    """Exit probability through the boundary vertex y (indicator data)."""
    if y not in set(grid.boundary):
        raise ValueError(f"{y} is not a boundary vertex")
    data = {v: (1.0 if v == y else 0.0) for v in grid.boundary}
    return solve_dirichlet(grid, data)


def green_function(grid, y):
    """Discrete Green function: Laplacian 1 at y, 0 elsewhere inside,
    vanishing on the boundary.  -G(x, y) is the expected number of visits."""
    interior = grid.interior
    iidx = {v: i for i, v in enumerate(interior)}
    if y not in iidx:
        raise ValueError(f"{y} is not an interior vertex")
    n = len(interior)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    rhs[iidx[y]] = 1.0
    for v in interior:
        i = iidx[v]
        rows.append(i)
        cols.append(i)
        vals.append(-1.0)
        for w in grid.adj[v]:
            if w in iidx:
                rows.append(i)
                cols.append(iidx[w])
                vals.append(0.25)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    x = spla.spsolve(A, rhs)
    resid = np.abs(A @ x - rhs).max()
    if resid > RESIDUAL_TOL:
        raise RuntimeError(f"Green solve residual {resid:.2e}")
    field = {v: 0.0 for v in grid.boundary}
    for v, i in iidx.items():
        field[v] = float(x[i])
    return field


def massive_green(m, size=None):
    """Massive Green function h(x) = E^x[m^tau] on a box with absorbing
    boundary: h = m * (mean of neighbors) off the origin, h(0) = 1.

    Returns (field, half_size); the box side is at least 8/(1-m)."""
    if not (0.0 < m <= 1.0):
        raise ValueError("mass must lie in (0, 1]")
    if size is None:
        size = int(math.ceil(8.0 / (1.0 - m))) if m < 1 else 64
    half = size // 2
    verts = [(i, j) for i in range(-half, half + 1) for j in range(-half, half + 1)]
    inner = [v for v in verts if max(abs(v[0]), abs(v[1])) < half and v != (0, 0)]
    iidx = {v: i for i, v in enumerate(inner)}
    n = len(inner)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    for v in inner:
        i = iidx[v]
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for w in ((v[0] + 1, v[1]), (v[0] - 1, v[1]), (v[0], v[1] + 1), (v[0], v[1] - 1)):
            if w == (0, 0):
                rhs[i] += m / 4.0
            elif w in iidx:
                rows.append(i)
                cols.append(iidx[w])
                vals.append(-m / 4.0)
            # absorbing boundary contributes zero
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    x = spla.spsolve(A, rhs)
    resid = np.abs(A @ x - rhs).max()
    if resid > RESIDUAL_TOL:
        raise RuntimeError(f"massive Green residual {resid:.2e}")
    field = {(0, 0): 1.0}
    for v, i in iidx.items():
        field[v] = float(x[i])
    for v in verts:
        field.setdefault(v, 0.0)
    return field, half


# ---------------------------------------------------------------------------
# dbar operators

def dbar(field, x, delta=1.0):
    """Discrete dbar of a field on the rotated primal lattice, evaluated at
    a dual vertex x: (f(E)-f(W))/2 + i (f(N)-f(S))/2 with compass neighbors
    in the embedding."""
    if not (x[0] % 2 == 1 and x[1] % 2 == 1):
        raise ValueError(f"{x} is not a dual vertex")
    compass = {"N": (1, 1), "E": (1, -1), "S": (-1, -1), "W": (-1, 1)}
    vals = {}
    for name, d in compass.items():
        v = (x[0] + d[0], x[1] + d[1])
        if v not in field:
            raise ValueError(f"incomplete stencil at {x}: missing {v}")
        vals[name] = field[v]
    return (vals["E"] - vals["W"]) / 2.0 + 1j * (vals["N"] - vals["S"]) / 2.0


def dbar_medial(field, face):
    """Discrete dbar of a medial-vertex field at a face of the medial
    lattice (a primal or dual vertex), via its four corner medial vertices:
    (f(NW) - f(SE))/2 + i (f(SW) - f(NE))/2 in embedded compass.

    Vanishes identically for f(z) = z and is bounded by twice the maximum
    projection gap for fields passing the s-holomorphicity check.
    """
    # corners at internal offsets; embedded: (1,0) -> NE, (0,1) -> NW
    ne = (face[0] + 1, face[1])
    nw = (face[0], face[1] + 1)
    sw = (face[0] - 1, face[1])
    se = (face[0], face[1] - 1)
    for c in (ne, nw, sw, se):
        if c not in field:
            raise ValueError(f"incomplete stencil at {face}: missing {c}")
    return (field[nw] - field[se]) / 2.0 + 1j * (field[sw] - field[ne]) / 2.0


# ---------------------------------------------------------------------------
# s-holomorphicity and the H field

def check_s_holomorphic(field, tol=1e-9, line_twist=1.0):
    """Projection-gap report for a medial-vertex field.

    Checks |P_l(e) f(x) - P_l(e) f(y)| on every medial edge with both
    endpoint values present; line_twist rotates the line family (the spin
    observable uses exp(i pi/8)).
    """
    worst = 0.0
    violating = []
    for v in field:
        for s in ((1, 1), (1, -1)):
            w = (v[0] + s[0], v[1] + s[1])
            if w not in field:
                continue
            rep = line_twist * line_of_edge(v, w)
            rep /= abs(rep)
            gap = abs(project_on_line(rep, field[v]) - project_on_line(rep, field[w]))
            worst = max(worst, gap)
            if gap >= tol:
                violating.append(((v, w), gap))
    return {"max_gap": worst, "violating_edges": violating, "passed": worst < tol}


class HField:
    """Discrete primitive of (1/2) Im(integral of f^2) on the faces of the
    medial lattice, integrated from per-edge increments H(black) - H(white)."""

    def __init__(self, values, base):
        self.values = values
        self.base = base

    def __getitem__(self, face):
        return self.values[face]

    def __contains__(self, face):
        return face in self.values

    def black_values(self):
        return {f: v for f, v in self.values.items() if is_primal(f)}

    def white_values(self):
        return {f: v for f, v in self.values.items() if not is_primal(f)}


def integrate_H_from_increments(increments, base, base_value=1.0, tol=1e-9):
    """Integrate H over faces from increments {(black, white): H(b)-H(w)}.

    Integration runs along a spanning tree of the face adjacency; every
    off-tree increment is then checked for path independence within tol.
    """
    adj = {}
    for (b, w), inc in increments.items():
        adj.setdefault(b, []).append((w, -inc))
        adj.setdefault(w, []).append((b, +inc))
    if base not in adj:
        raise ValueError(f"base face {base} carries no increment")
    values = {base: base_value}
    order = [base]
    for f in order:
        for g, dv in adj[f]:
            if g not in values:
                values[g] = values[f] + dv
                order.append(g)
    worst = 0.0
    for (b, w), inc in increments.items():
        worst = max(worst, abs((values[b] - values[w]) - inc))
    if worst > tol:
        raise ValueError(f"path dependence {worst:.2e} exceeds {tol:.0e}; "
                         "input is not s-holomorphic")
    return HField(values, base), worst


def integrate_H(field, domain, base=None, tol=1e-9):
    """H field of an s-holomorphic medial-vertex field f: increments
    delta * |P_l(e) f(x)|^2 across each medial edge between a black and a
    white face of the domain."""
    report = check_s_holomorphic(field, tol=tol)
    if not report["passed"]:
        raise ValueError(f"field is not s-holomorphic (gap {report['max_gap']:.2e})")
    delta = domain.delta
    faces = set(domain.graph.vertices) | set(domain.dual_interior)
    if domain.variant == "fk":
        faces |= set(domain.dstar_ab)
    increments = {}
    for v in field:
        for s in ((1, 1), (1, -1)):
            w = (v[0] + s[0], v[1] + s[1])
            if w not in field:
                continue
            black, white = medial_edge_faces(v, (s[0], s[1]))
            if black not in faces or white not in faces:
                continue
            rep = line_of_edge(v, w)
            increments[(black, white)] = delta * abs(
                project_on_line(rep, field[v])) ** 2
    base = base if base is not None else domain.a_v
    hf, worst = integrate_H_from_increments(increments, base, 1.0, tol)
    return hf


def fk_observable_H(model, edge_field=None, base_value=1.0, tol=1e-9):
    """H field generated by the FK edge observable: the increment across a
    medial edge is |F(e)|^2 (the normalization under which H is 1 on the
    wired arc and converges to Im phi)."""
    from .observables import fk_edge_observable_exact
    if edge_field is None:
        edge_field = fk_edge_observable_exact(model)
    dom = model.domain
    faces = set(dom.graph.vertices) | set(dom.dual_interior) | set(dom.dstar_ab)
    mids = {((u[0] + v[0]) // 2, (u[1] + v[1]) // 2) for (u, v) in dom.graph.edges}
    n = len(dom.chain_mids)
    idx = dom.ia_chain
    while True:
        mids.add(dom.chain_mids[idx])
        if idx == dom.ib_chain:
            break
        idx = (idx + 1) % n
    from .lattice import canonical_direction
    increments = {}
    for v in mids:
        for s in ((1, 1), (1, -1)):
            w = (v[0] + s[0], v[1] + s[1])
            if w not in mids:
                continue
            black, white = medial_edge_faces(v, s)
            if black not in faces or white not in faces:
                continue
            cd = canonical_direction(v, w)
            key = (v, w) if cd == s else (w, v)
            val = edge_field.get(key, 0j)
            increments[(black, white)] = abs(val) ** 2
    return integrate_H_from_increments(increments, dom.a_v, base_value, tol)[0]


# ---------------------------------------------------------------------------
# boundary-modified harmonic measure on FK Dobrushin domains

def modified_harmonic_measure(domain, color):
    """Hitting probability of the favorable boundary for the rho-modified
    walks of an FK Dobrushin domain.

    color 'black': walk on primal vertices, absorbed at 1 on the wired arc,
    at 0 on the virtual layer across the free arc (entered at rate RHO).
    color 'white': walk on interior dual vertices, absorbed at 0 on the
    free-side outer arc, at 1 on the virtual layer across the wired arc
    (entered at rate RHO).
    """
    if domain.variant != "fk":
        raise ValueError("modified harmonic measure needs an fk domain")
    g = domain.graph
    if color == "black":
        wired = set(domain.wired_arc)
        free_interior = [v for v in domain.free_arc if v not in wired]
        states = [v for v in g.vertices if v not in wired]
        sidx = {v: i for i, v in enumerate(states)}
        n = len(states)
        rows, cols, vals = [], [], []
        rhs = np.zeros(n)
        for v in states:
            i = sidx[v]
            weights = []
            for w in g.adj[v]:
                weights.append((w, 1.0))
            if v in set(free_interior):
                n_out = 4 - len(g.adj[v])
                for _ in range(n_out):
                    weights.append((None, RHO))  # virtual layer, value 0
            total = sum(wt for _, wt in weights)
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
            for w, wt in weights:
                if w is None:
                    continue
                if w in wired:
                    rhs[i] += wt / total
                else:
                    rows.append(i)
                    cols.append(sidx[w])
                    vals.append(-wt / total)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        x = spla.spsolve(A, rhs)
        field = {v: 1.0 for v in wired}
        for v, i in sidx.items():
            field[v] = float(x[i])
        return field
    if color == "white":
        dstar = set(domain.dstar_ab)
        wired_mids = {((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
                      for (u, v) in domain.wired_edges}
        states = list(domain.dual_interior)
        sidx = {w: i for i, w in enumerate(states)}
        n = len(states)
        rows, cols, vals = [], [], []
        rhs = np.zeros(n)
        for w in states:
            i = sidx[w]
            weights = []
            for m in ((w[0] + 1, w[1]), (w[0] - 1, w[1]),
                      (w[0], w[1] + 1), (w[0], w[1] - 1)):
                # m is the midpoint between w and the opposite white face
                w2 = (2 * m[0] - w[0], 2 * m[1] - w[1])
                if m in wired_mids:
                    weights.append(("extra", RHO))  # virtual layer, value 1
                else:
                    weights.append((w2, 1.0))
            total = sum(wt for _, wt in weights)
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
            for w2, wt in weights:
                if w2 == "extra":
                    rhs[i] += wt / total
                elif w2 in sidx:
                    rows.append(i)
                    cols.append(sidx[w2])
                    vals.append(-wt / total)
                elif w2 in dstar:
                    pass  # absorbed at 0
                else:
                    raise ValueError(f"white walk escaped the domain at {w2}")
        A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        x = spla.spsolve(A, rhs)
        field = {w: 0.0 for w in dstar}
        for w, i in sidx.items():
            field[w] = float(x[i])
        return field
    raise ValueError(f"unknown color {color!r}")
