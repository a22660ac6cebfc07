"""Loop representation of FK configurations on Dobrushin domains, and the
contour/interface tracing shared with the spin model.

The exploration path and the loops are traced directly on the medial
lattice: at every medial vertex the walker turns right if the primal edge
under that vertex is open and left if it is closed (wired-arc edges count
as open, every lattice edge outside the domain as closed).  The walker then
automatically follows the canonical orientation of the medial lattice
(counterclockwise around black faces) and bounces off open primal and open
dual edges without crossing them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    canonical_direction,
    primal_edge_of_medial_vertex,
    rot_left,
    rot_right,
    turn_quarters,
)
from .union_find import UnionFind

MEDIAL_E = (1, -1)


@dataclass
class Interface:
    """Directed medial path with exact quarter-turn winding bookkeeping."""
    vertices: list            # medial vertices, length n+1
    steps: list               # internal step vectors, length n
    turns: list               # quarter turns between consecutive steps, length n-1

    def __len__(self):
        return len(self.steps)

    def winding_to_end_quarters(self):
        """w[i] = total quarter turns from step i to the final step."""
        n = len(self.steps)
        w = [0] * n
        acc = 0
        for i in range(n - 2, -1, -1):
            acc += self.turns[i]
            w[i] = acc
        return w

    def winding(self, i, j):
        """Winding in radians between steps i and j."""
        return sum(self.turns[i:j]) * math.pi / 2.0

    def directed_edges(self):
        return list(zip(self.vertices[:-1], self.steps))


@dataclass
class LoopConfiguration:
    gamma: Interface
    loops: list = field(default_factory=list)   # list of Interface-like loops
    n_open: int = 0

    @property
    def n_loops(self):
        return len(self.loops)


class FKDobrushinModel:
    """FK percolation with Dobrushin boundary conditions on a domain.

    Configurations are boolean arrays over domain.random_edges; the wired
    arc is structurally open and its vertices form one wiring class.
    """

    def __init__(self, domain, p, q=2.0):
        if domain.variant != "fk":
            raise ValueError("domain must be an fk Dobrushin domain")
        if not (0.0 < p < 1.0) or q <= 0.0:
            raise ValueError("need 0 < p < 1 and q > 0")
        self.domain = domain
        self.p = float(p)
        self.q = float(q)
        self._first_edge = self._find_first_edge()

    # -- measure --------------------------------------------------------------

    def cluster_count(self, states):
        g = self.domain.graph
        uf = UnionFind(g.nv())
        for (u, v) in self.domain.wired_edges:
            uf.union(g.index[u], g.index[v])
        for s, (u, v) in zip(states, self.domain.random_edges):
            if s:
                uf.union(g.index[u], g.index[v])
        return uf.n_components

    def weight(self, states):
        states = np.asarray(states, dtype=bool)
        o = int(states.sum())
        c = len(states) - o
        k = self.cluster_count(states)
        return self.p ** o * (1.0 - self.p) ** c * self.q ** k

    def all_states(self):
        ne = len(self.domain.random_edges)
        if ne > 24:
            raise ValueError(f"too many random edges to enumerate ({ne})")
        codes = np.arange(1 << ne, dtype=np.uint32)
        return ((codes[:, None] >> np.arange(ne)[None, :]) & 1).astype(bool)

    def distribution(self):
        sts = self.all_states()
        w = np.array([self.weight(row) for row in sts])
        return sts, w / w.sum()

    # -- tracing --------------------------------------------------------------

    def _find_first_edge(self):
        """First step of the exploration path: the edge oriented out of
        a_med that separates the black face a_v from the first free-side
        white face."""
        dom = self.domain
        a = dom.a_med
        a_star = dom.chain_whites[dom.ia_chain]
        from .lattice import medial_edge_faces
        for step in ((1, -1), (1, 1), (-1, 1), (-1, -1)):
            v2 = (a[0] + step[0], a[1] + step[1])
            if canonical_direction(a, v2) != step:
                continue  # not oriented out of a_med
            black, white = medial_edge_faces(a, step)
            if black == dom.a_v and white == a_star:
                return step
        raise ValueError("no admissible first interface edge at a_med")

    def trace_exploration(self, states):
        """Exploration path from a_med to b_med for a configuration."""
        state = self.domain.edge_state_fn(states)
        v = self.domain.a_med
        d = self._first_edge
        vertices = [v]
        steps = []
        turns = []
        limit = 16 * (self.domain.graph.ne() + len(self.domain.chain_mids) + 8)
        for _ in range(limit):
            v = (v[0] + d[0], v[1] + d[1])
            vertices.append(v)
            steps.append(d)
            if v == self.domain.b_med:
                return Interface(vertices, steps, turns)
            pe = primal_edge_of_medial_vertex(v)
            nd = rot_right(d) if state(*pe) else rot_left(d)
            turns.append(turn_quarters(d, nd))
            d = nd
        raise RuntimeError("exploration path failed to reach b_med")

    def trace_loops(self, states):
        """Full loop representation: exploration path plus closed loops."""
        gamma = self.trace_exploration(states)
        state = self.domain.edge_state_fn(states)
        used = set(gamma.directed_edges())
        loops = []
        dom = self.domain
        seeds = []
        for (u, v) in dom.graph.edges:
            m = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
            for nb in ((m[0] + 1, m[1] + 1), (m[0] + 1, m[1] - 1),
                       (m[0] - 1, m[1] + 1), (m[0] - 1, m[1] - 1)):
                d = canonical_direction(nb, m)
                if d == (m[0] - nb[0], m[1] - nb[1]):
                    seeds.append((nb, d))
        for seed in seeds:
            if seed in used:
                continue
            strand = [seed]
            v, d = seed
            ok = True
            limit = 16 * (dom.graph.ne() + len(dom.chain_mids) + 8)
            for _ in range(limit):
                v = (v[0] + d[0], v[1] + d[1])
                if v == dom.a_med or v == dom.b_med:
                    ok = False  # virtual return strand, not a domain loop
                pe = primal_edge_of_medial_vertex(v)
                d = rot_right(d) if state(*pe) else rot_left(d)
                if (v, d) == seed:
                    break
                strand.append((v, d))
            else:
                raise RuntimeError("loop tracing failed to close")
            used.update(strand)
            if ok:
                verts = [s[0] for s in strand] + [seed[0]]
                stps = [s[1] for s in strand]
                turns = [turn_quarters(a, b) for a, b in zip(stps, stps[1:])]
                loops.append(Interface(verts, stps, turns))
        return LoopConfiguration(gamma, loops, n_open=int(np.sum(states)))

    # -- combinatorial identities ----------------------------------------------

    def dual_cluster_count(self, states):
        """Clusters of the dual configuration on the dual Dobrushin domain
        (interior duals plus the free-side outer arc, which is wired through
        its structurally open arc edges)."""
        dom = self.domain
        verts = list(dom.dual_interior) + list(dom.dstar_ab)
        index = {w: i for i, w in enumerate(dict.fromkeys(verts))}
        uf = UnionFind(len(index))
        # arc edges: duals of the outward primal edges between consecutive
        # free-side whites
        n = len(dom.chain_mids)
        idx = (dom.ia_chain + 1) % n
        prev_white = dom.chain_whites[dom.ia_chain]
        while idx != dom.ib_chain:
            w = dom.chain_whites[idx]
            if prev_white != w:
                uf.union(index[prev_white], index[w])
            prev_white = w
            idx = (idx + 1) % n
        # duals of random edges: open iff the primal edge is closed
        for s, (u, v) in zip(states, dom.random_edges):
            if not s:
                m = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
                if m[0] % 2 == 1:
                    w1, w2 = (m[0], m[1] - 1), (m[0], m[1] + 1)
                else:
                    w1, w2 = (m[0] - 1, m[1]), (m[0] + 1, m[1])
                if w1 in index and w2 in index:
                    uf.union(index[w1], index[w2])
        return uf.n_components

    def euler_loop_count(self, states):
        """k(w) + k(w*) - 1, counting the exploration path closed up through
        the exterior as one of the loops (the convention under which the
        Euler identity holds configuration by configuration)."""
        return self.cluster_count(states) + self.dual_cluster_count(states) - 1


# ---------------------------------------------------------------------------
# spin contour tracing (high-temperature expansion interfaces)

def unit(vec):
    g = math.gcd(abs(vec[0]), abs(vec[1]))
    return (vec[0] // g, vec[1] // g)


class ContourTracer:
    """Interface through a contour configuration, turning as far left as
    possible at every ambiguity.

    Contour edges are primal edges (diagonals of the embedding); the curve
    starts at a medial point along a given half-edge and ends when it takes
    the terminal half-edge.
    """

    def __init__(self, start_mid, start_vertex, end_vertex, end_mid):
        self.start_mid = start_mid
        self.start_vertex = start_vertex
        self.end_vertex = end_vertex
        self.end_mid = end_mid

    def trace(self, edge_set):
        """edge_set: set of primal edges, each normalized with u <= v.

        Returns (winding_quarters, detail) for the interface from the start
        half-edge through the contour edges to the end half-edge.  The curve
        takes the leftmost available candidate at every vertex; the terminal
        half-edge competes like any other candidate and ends the curve when
        chosen.  detail carries the turn sequence and the midpoint of the
        first full edge (None if the curve ends at once).
        """
        d = unit((self.start_vertex[0] - self.start_mid[0],
                  self.start_vertex[1] - self.start_mid[1]))
        v = self.start_vertex
        consumed = set()
        turns = []
        midpoints = []
        first_step = None
        limit = 4 * (len(edge_set) + 2)
        for _ in range(limit):
            cands = []
            for w in self._neighbors(v, edge_set, consumed):
                nd = unit((w[0] - v[0], w[1] - v[1]))
                t = turn_quarters(d, nd)
                if t != 2:
                    cands.append((t, w, nd))
            if v == self.end_vertex:
                nd = unit((self.end_mid[0] - v[0], self.end_mid[1] - v[1]))
                t = turn_quarters(d, nd)
                if t != 2:
                    cands.append((t, None, nd))
            if not cands:
                raise RuntimeError("contour interface is stuck")
            t, w, nd = max(cands, key=lambda c: c[0])
            turns.append(t)
            if w is None:
                return sum(turns), {"turns": turns, "first_step": first_step,
                                    "midpoints": midpoints}
            mid = ((v[0] + w[0]) // 2, (v[1] + w[1]) // 2)
            if first_step is None:
                first_step = mid
            midpoints.append(mid)
            consumed.add((v, w))
            consumed.add((w, v))
            v, d = w, nd
        raise RuntimeError("contour interface failed to terminate")

    def _neighbors(self, v, edge_set, consumed):
        for step in ((2, 0), (0, 2), (-2, 0), (0, -2)):
            w = (v[0] + step[0], v[1] + step[1])
            e = (v, w) if v <= w else (w, v)
            if e in edge_set and (v, w) not in consumed:
                yield w
