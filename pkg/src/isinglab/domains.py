"""Discretized domains and Dobrushin domains on the rotated square lattice.

A domain is built from a shape descriptor (rectangle in lattice units, disk
of given radius, or explicit polyomino vertex list), a mesh delta (the
*medial* mesh; the primal lattice then has mesh sqrt(2)*delta), and two
boundary anchors a, b.  Construction is exact: the vertex set, boundary
cycle, arcs, outer dual chain and marked medial points a_med / b_med are all
integer data; delta enters only through embedded positions.

Conventions (fixed once, used everywhere):

* the boundary cycle is counterclockwise in the embedding, interior on the
  left;
* the free arc runs counterclockwise from a_v to b_v, the wired arc from
  b_v back to a_v (endpoints shared);
* b_med is the southeast corner of the black face b_v, i.e. the midpoint of
  the outward edge b_v -> b_v + (0, -2), and must be the first outward
  midpoint of b_v along the chain;
* a_med is the last outward midpoint of a_v, so the chain continues along
  the free side immediately after it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lattice import (
    SQRT2,
    embed,
    is_primal,
    rot_left,
)

PRIMAL_STEPS = ((2, 0), (0, 2), (-2, 0), (0, -2))


# ---------------------------------------------------------------------------
# shape descriptors

@dataclass(frozen=True)
class Rectangle:
    """nx x ny primal vertices at (2i, 2j), 0 <= i < nx, 0 <= j < ny."""
    nx: int
    ny: int

    def vertices(self, delta):
        return [(2 * i, 2 * j) for i in range(self.nx) for j in range(self.ny)]

    def corner(self, name):
        xmax, ymax = 2 * (self.nx - 1), 2 * (self.ny - 1)
        return {
            "sw": (0, 0), "se": (xmax, 0), "nw": (0, ymax), "ne": (xmax, ymax),
        }[name]

    def descriptor(self):
        return {"shape": "rectangle", "nx": self.nx, "ny": self.ny}


@dataclass(frozen=True)
class Disk:
    """Primal vertices whose embedded position lies in the open disk."""
    radius: float
    center: complex = 0j

    def vertices(self, delta):
        # bounding box in integer coordinates
        rint = int(math.ceil(self.radius / (delta / SQRT2))) + 2
        rint += rint % 2
        out = set()
        for x in range(-rint, rint + 1, 2):
            for y in range(-rint, rint + 1, 2):
                z = embed((x, y), delta)
                if abs(z - self.center) < self.radius:
                    out.add((x, y))
        # drop antenna vertices: a degree-1 spur carries no contour edge and
        # breaks the simple-boundary requirement at coarse meshes
        while True:
            spurs = [v for v in out
                     if sum(((v[0] + d[0], v[1] + d[1]) in out)
                            for d in PRIMAL_STEPS) < 2]
            if not spurs or len(out) <= len(spurs):
                break
            out -= set(spurs)
        return sorted(out)

    def descriptor(self):
        return {"shape": "disk", "radius": self.radius,
                "center": f"{self.center.real}+{self.center.imag}j"}


@dataclass(frozen=True)
class Polyomino:
    """Explicit primal vertex list (integer coordinates, both even)."""
    cells: tuple

    def vertices(self, delta):
        return [tuple(c) for c in self.cells]

    def descriptor(self):
        return {"shape": "polyomino", "cells": ";".join(f"{x},{y}" for x, y in self.cells)}


# ---------------------------------------------------------------------------
# primal graph

class PrimalGraph:
    """Finite simply connected subgraph of the primal lattice.

    Vertices and edges are kept lexicographically sorted; every index map
    and CSV export follows this deterministic order.
    """

    def __init__(self, vertices, delta=1.0):
        vs = sorted(set(map(tuple, vertices)))
        if not vs:
            raise ValueError("empty vertex set")
        for v in vs:
            if not is_primal(v):
                raise ValueError(f"{v} is not a primal vertex")
        self.delta = float(delta)
        self.vertices = vs
        self.vset = set(vs)
        self.index = {v: i for i, v in enumerate(vs)}
        self.edges = []
        for v in vs:
            for d in ((2, 0), (0, 2)):
                w = (v[0] + d[0], v[1] + d[1])
                if w in self.vset:
                    self.edges.append((v, w))
        self.edges.sort()
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self.adj = {v: [] for v in vs}
        for (u, v) in self.edges:
            self.adj[u].append(v)
            self.adj[v].append(u)
        self._assert_connected()

    def _assert_connected(self):
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in self.adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.vertices):
            raise ValueError("primal graph is not connected")

    def nv(self):
        return len(self.vertices)

    def ne(self):
        return len(self.edges)

    def has_edge(self, u, v):
        return (u, v) in self.edge_index or (v, u) in self.edge_index

    def edge_id(self, u, v):
        if (u, v) in self.edge_index:
            return self.edge_index[(u, v)]
        return self.edge_index[(v, u)]

    def degree(self, v):
        return len(self.adj[v])

    def position(self, v):
        return embed(v, self.delta)

    def boundary_vertices(self):
        return [v for v in self.vertices if len(self.adj[v]) < 4]

    def interior_vertices(self):
        return [v for v in self.vertices if len(self.adj[v]) == 4]

    def dual_interior(self):
        """Dual vertices all four of whose corner primal vertices are in the
        graph (the faces of the domain)."""
        out = []
        seen = set()
        for v in self.vertices:
            for w in ((v[0] + 1, v[1] + 1), (v[0] - 1, v[1] + 1),
                      (v[0] + 1, v[1] - 1), (v[0] - 1, v[1] - 1)):
                if w in seen:
                    continue
                seen.add(w)
                corners = ((w[0] + 1, w[1] + 1), (w[0] - 1, w[1] + 1),
                           (w[0] + 1, w[1] - 1), (w[0] - 1, w[1] - 1))
                if all(c in self.vset for c in corners):
                    out.append(w)
        out.sort()
        return out

    def boundary_cycle(self):
        """Counterclockwise outer boundary cycle; each boundary vertex must
        appear exactly once (simple boundary)."""
        if self.nv() == 1:
            return list(self.vertices)
        v0 = min(self.vertices)
        # fake arrival heading north keeps the exterior (everything with
        # smaller x) on the correct side for the first sweep
        d_in = (0, 1)
        cycle = []
        v, d = v0, d_in
        while True:
            cycle.append(v)
            # next direction: rotate ccw from the reversed arrival until an
            # edge of the graph is found
            nd = rot_left((-d[0], -d[1]))
            for _ in range(4):
                w = (v[0] + 2 * nd[0], v[1] + 2 * nd[1])
                if w in self.vset:
                    break
                nd = rot_left(nd)
            else:
                raise ValueError("boundary walk stuck (isolated vertex?)")
            v = (v[0] + 2 * nd[0], v[1] + 2 * nd[1])
            d = nd
            if v == v0:
                break
        # the walk may pivot through degree-4 vertices whose diagonal face is
        # outside (lattice disks have those); it must still be a simple cycle
        # covering every vertex with a missing neighbor
        bset = set(self.boundary_vertices())
        if len(set(cycle)) != len(cycle) or not bset <= set(cycle):
            raise ValueError("domain boundary is not a simple cycle")
        # orientation check via the shoelace formula on embedded positions
        area = 0.0
        pos = [self.position(v) for v in cycle]
        for p, q in zip(pos, pos[1:] + pos[:1]):
            area += p.real * q.imag - q.real * p.imag
        if area < 0:
            cycle = [cycle[0]] + cycle[:0:-1]
        return cycle


# ---------------------------------------------------------------------------
# outer chain: outward-edge midpoints and outer dual layer, in ccw order

def outer_chain(graph, cycle):
    """Walk the boundary cycle and collect, in counterclockwise order, the
    midpoints of outward edges together with the outer dual (white) faces
    between consecutive midpoints.

    Returns (mids, whites, owner) where mids[i] is an outward midpoint,
    owner[i] its boundary vertex, and whites[i] the white face following
    mids[i] along the chain.
    """
    n = len(cycle)
    mids, whites, owner = [], [], []
    for i, v in enumerate(cycle):
        prev = cycle[(i - 1) % n]
        nxt = cycle[(i + 1) % n]
        d_in = ((v[0] - prev[0]) // 2, (v[1] - prev[1]) // 2)
        d_out = ((nxt[0] - v[0]) // 2, (nxt[1] - v[1]) // 2)
        d = rot_left((-d_in[0], -d_in[1]))
        sector = []
        while d != d_out:
            sector.append(d)
            d = rot_left(d)
        for j, dd in enumerate(sector):
            w = (v[0] + 2 * dd[0], v[1] + 2 * dd[1])
            if w in graph.vset:
                raise ValueError("non-simple boundary geometry")
            mids.append((v[0] + dd[0], v[1] + dd[1]))
            owner.append(v)
            # white face between this outward midpoint and the next chain
            # element (next outward midpoint of v, or the white flanking the
            # boundary edge v -> nxt from outside)
            if j + 1 < len(sector):
                de = sector[j + 1]
            else:
                de = d_out
            whites.append((v[0] + dd[0] + de[0], v[1] + dd[1] + de[1]))
    return mids, whites, owner


# ---------------------------------------------------------------------------
# Dobrushin domains

class DobrushinDomain:
    """Primal/dual/medial data of a Dobrushin domain (spin or fk variant)."""

    def __init__(self, graph, a_v, b_v, variant, shape_descriptor=None):
        if variant not in ("spin", "fk"):
            raise ValueError(f"unknown variant {variant!r}")
        self.graph = graph
        self.delta = graph.delta
        self.variant = variant
        self.shape_descriptor = shape_descriptor or {}
        self.cycle = graph.boundary_cycle()
        if a_v == b_v:
            raise ValueError("marked points coincide")
        if a_v not in set(self.cycle) or b_v not in set(self.cycle):
            raise ValueError("marked points must lie on the boundary")
        self.a_v = a_v
        self.b_v = b_v

        # arcs: free a -> b ccw, wired b -> a ccw, sharing only endpoints
        ia = self.cycle.index(a_v)
        cyc = self.cycle[ia:] + self.cycle[:ia]
        ib = cyc.index(b_v)
        self.free_arc = cyc[: ib + 1]
        self.wired_arc = cyc[ib:] + [a_v]
        if len(self.free_arc) < 2 or len(self.wired_arc) < 2:
            raise ValueError("shape too small to host both marked points")

        mids, whites, owner = outer_chain(graph, cyc)
        self.chain_mids = mids
        self.chain_whites = whites
        self.chain_owner = owner

        # a_med: last outward midpoint of a_v; b_med: first outward midpoint
        # of b_v, which must be its southeast corner midpoint
        a_slots = [i for i, o in enumerate(owner) if o == a_v]
        b_slots = [i for i, o in enumerate(owner) if o == b_v]
        if not a_slots or not b_slots:
            raise ValueError("marked vertex has no outward edge")
        self.ia_chain = a_slots[-1]
        self.ib_chain = b_slots[0]
        self.a_med = mids[self.ia_chain]
        self.b_med = mids[self.ib_chain]
        se_mid = (b_v[0], b_v[1] - 1)
        if self.b_med != se_mid:
            raise ValueError("b is not the southeast corner of a black face")

        # free-side outer whites: strictly between a_med and b_med going ccw
        n = len(mids)
        idx = self.ia_chain
        self.dstar_ab = []
        while idx != self.ib_chain:
            self.dstar_ab.append(whites[idx])
            idx = (idx + 1) % n
        # wired-side outer whites (used for spin +/- layers)
        self.dstar_ba_outer = []
        idx = self.ib_chain
        while idx != self.ia_chain:
            self.dstar_ba_outer.append(whites[idx])
            idx = (idx + 1) % n

        self.wired_vertices = set(self.wired_arc)
        self.wired_edges = []
        for u, v in zip(self.wired_arc, self.wired_arc[1:]):
            if not graph.has_edge(u, v):
                raise ValueError("wired arc is not a path in the graph")
            self.wired_edges.append((u, v) if (u, v) in graph.edge_index else (v, u))
        wired_set = set(self.wired_edges)
        self.random_edges = [e for e in graph.edges if e not in wired_set]
        self.random_index = {e: i for i, e in enumerate(self.random_edges)}

        self.dual_interior = graph.dual_interior()
        self.dual_interior_set = set(self.dual_interior)
        self.dstar_ab_set = set(self.dstar_ab)

    # -- medial structure ---------------------------------------------------

    def medial_vertices(self):
        """Medial vertices of the domain.

        Spin variant: every medial vertex bordering a black face of the
        domain (midpoints of all edges with at least one endpoint inside).
        FK variant: midpoints of domain edges, of the free-side outer dual
        arc, and the two marked points.
        """
        out = set()
        if self.variant == "spin":
            for v in self.graph.vertices:
                for d in PRIMAL_STEPS:
                    out.add((v[0] + d[0] // 2, v[1] + d[1] // 2))
        else:
            for (u, v) in self.graph.edges:
                out.add(((u[0] + v[0]) // 2, (u[1] + v[1]) // 2))
            n = len(self.chain_mids)
            idx = self.ia_chain
            while True:
                out.add(self.chain_mids[idx])
                if idx == self.ib_chain:
                    break
                idx = (idx + 1) % n
        return sorted(out)

    def interior_medial_vertices(self):
        """Medial vertices all four of whose incident medial edges border
        the domain (both flanking faces are domain faces)."""
        out = []
        for (u, v) in self.graph.edges:
            m = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
            w1, w2 = ((m[0], m[1] - 1), (m[0], m[1] + 1)) if m[0] % 2 == 1 \
                else ((m[0] - 1, m[1]), (m[0] + 1, m[1]))
            if self.variant == "fk":
                ok = all(w in self.dual_interior_set or w in self.dstar_ab_set
                         for w in (w1, w2))
            else:
                ok = all(w in self.dual_interior_set for w in (w1, w2))
            if ok:
                out.append(m)
        return sorted(out)

    def edge_state_fn(self, open_random):
        """State lookup for interface tracing: wired-arc edges are open,
        random edges follow the configuration, every other lattice edge is
        closed.  open_random is a sequence indexed like random_edges."""
        gi = self.graph.edge_index
        wired = set(self.wired_edges)
        ridx = self.random_index

        def state(p, q):
            e = (p, q) if (p, q) in gi else ((q, p) if (q, p) in gi else None)
            if e is None:
                return False
            if e in wired:
                return True
            return bool(open_random[ridx[e]])

        return state

    # -- serialization -------------------------------------------------------

    def descriptor_text(self):
        kv = dict(self.shape_descriptor)
        kv.update({
            "mesh": self.delta,
            "variant": self.variant,
            "a": f"{self.a_v[0]},{self.a_v[1]}",
            "b": f"{self.b_v[0]},{self.b_v[1]}",
        })
        return "".join(f"{k} = {kv[k]}\n" for k in sorted(kv))


# ---------------------------------------------------------------------------
# anchor snapping and the public constructor

def _snap(graph, anchor, candidates, shape=None):
    """Nearest candidate vertex to an anchor (complex position, internal
    coordinate pair, or rectangle corner name); ties break lexicographically."""
    if isinstance(anchor, str):
        if not isinstance(shape, Rectangle):
            raise ValueError("corner names only apply to rectangles")
        anchor = shape.corner(anchor)
    if isinstance(anchor, complex):
        target = anchor
    else:
        target = embed(tuple(anchor), graph.delta)
    return min(candidates, key=lambda v: (abs(graph.position(v) - target), v))


def _b_admissible(graph, cycle):
    """Boundary vertices whose first outward midpoint is their southeast
    corner midpoint (the b_med convention)."""
    mids, _, owner = outer_chain(graph, cycle)
    first = {}
    for m, o in zip(mids, owner):
        first.setdefault(o, m)
    return [v for v, m in first.items() if m == (v[0], v[1] - 1)]


def build_domain(shape, mesh, variant, a, b):
    """Construct a DobrushinDomain from a shape descriptor and two anchors.

    b snaps to the nearest boundary vertex admitting the southeast-corner
    marked point; a snaps to the nearest remaining boundary vertex with an
    outward edge.
    """
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    if a == b:
        raise ValueError("marked points coincide")
    graph = PrimalGraph(shape.vertices(mesh), delta=mesh)
    if graph.nv() < 4:
        raise ValueError("shape too small to host both marked points")
    cycle = graph.boundary_cycle()
    b_cand = _b_admissible(graph, cycle)
    if not b_cand:
        raise ValueError("no admissible southeast-corner marked point")
    b_v = _snap(graph, b, b_cand, shape)
    mids, _, owner = outer_chain(graph, cycle)
    a_cand = [v for v in dict.fromkeys(owner) if v != b_v]
    a_v = _snap(graph, a, a_cand, shape)
    if a_v == b_v:
        raise ValueError("marked points coincide")
    dom = DobrushinDomain(graph, a_v, b_v, variant,
                          shape_descriptor=shape.descriptor())
    return dom
