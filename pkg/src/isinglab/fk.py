"""FK (random-cluster) percolation with general cluster weight q: exact
weights and distributions, planar duality, and the Edwards-Sokal coupling.

Configurations are edge-state arrays over a graph's edge list.  Boundary
conditions enter as a wiring partition: a list of vertex groups whose
members count as one cluster.
"""

from __future__ import annotations

import hashlib
import math
import struct

import numpy as np

from .union_find import UnionFind


def p_self_dual(q):
    return math.sqrt(q) / (1.0 + math.sqrt(q))


def p_dual(p, q):
    """Dual edge parameter p* = (1-p) q / ((1-p) q + p); an involution."""
    return (1.0 - p) * q / ((1.0 - p) * q + p)


def beta_of_p(p):
    """Edwards-Sokal coupling: e^{-2 beta} = 1 - p."""
    return -0.5 * math.log(1.0 - p)


def p_of_beta(beta):
    return 1.0 - math.exp(-2.0 * beta)


class FKGraph:
    """Vertex count, edge list, and wiring groups."""

    def __init__(self, n_vertices, edges, wirings=()):
        self.n = int(n_vertices)
        self.edges = [(int(u), int(v)) for u, v in edges]
        self.wirings = [list(g) for g in wirings]

    @classmethod
    def grid(cls, nx, ny, bc="free"):
        idx = lambda i, j: i * ny + j
        edges = []
        for i in range(nx):
            for j in range(ny):
                if i + 1 < nx:
                    edges.append((idx(i, j), idx(i + 1, j)))
                if j + 1 < ny:
                    edges.append((idx(i, j), idx(i, j + 1)))
        wir = []
        if bc == "wired":
            wir = [[idx(i, j) for i in range(nx) for j in range(ny)
                    if i in (0, nx - 1) or j in (0, ny - 1)]]
        elif bc != "free":
            raise ValueError(f"unknown boundary condition {bc!r}")
        g = cls(nx * ny, edges, wir)
        g.shape = (nx, ny)
        return g

    def cluster_count(self, states):
        """k(w, xi): connected components of open edges plus wirings."""
        uf = UnionFind(self.n)
        for group in self.wirings:
            for v in group[1:]:
                uf.union(group[0], v)
        for s, (u, v) in zip(states, self.edges):
            if s:
                uf.union(u, v)
        return uf.n_components

    def cluster_count_bfs(self, states):
        """Independent recount by breadth-first search over open edges."""
        adj = [[] for _ in range(self.n)]
        for s, (u, v) in zip(states, self.edges):
            if s:
                adj[u].append(v)
                adj[v].append(u)
        for group in self.wirings:
            for v in group[1:]:
                adj[group[0]].append(v)
                adj[v].append(group[0])
        seen = [False] * self.n
        k = 0
        for start in range(self.n):
            if seen[start]:
                continue
            k += 1
            stack = [start]
            seen[start] = True
            while stack:
                for w in adj[stack.pop()]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
        return k

    def connected(self, states, a, b, skip_edge=None):
        uf = UnionFind(self.n)
        for group in self.wirings:
            for v in group[1:]:
                uf.union(group[0], v)
        for i, (s, (u, v)) in enumerate(zip(states, self.edges)):
            if s and i != skip_edge:
                uf.union(u, v)
        return uf.connected(a, b)


def fk_weight(graph, states, p, q):
    """Unnormalized weight p^o (1-p)^c q^k."""
    states = np.asarray(states, dtype=bool)
    o = int(states.sum())
    c = len(graph.edges) - o
    k = graph.cluster_count(states)
    return p ** o * (1.0 - p) ** c * q ** k


def all_states(n_edges):
    if n_edges > 24:
        raise ValueError(f"too many edges to enumerate ({n_edges})")
    codes = np.arange(1 << n_edges, dtype=np.uint32)
    return (codes[:, None] >> np.arange(n_edges)[None, :]) & 1


def exact_fk_distribution(graph, p, q):
    """(states, probabilities) over all 2^E configurations."""
    sts = all_states(len(graph.edges)).astype(bool)
    w = np.array([fk_weight(graph, row, p, q) for row in sts])
    total = w.sum()
    return sts, w / total


def dual_configuration(states):
    """Dual edge states: dual open iff primal closed (per matched edge)."""
    return ~np.asarray(states, dtype=bool)


def dual_of_wired_grid(graph):
    """Dual graph of an nx x ny grid with wired boundary: the interior faces
    with free boundary, edges matched to the primal INNER edges in order."""
    nx, ny = graph.shape
    dual = FKGraph.grid(nx - 1, ny - 1)
    didx = lambda i, j: i * (ny - 1) + j
    inner = []
    matched = []
    for k, (u, v) in enumerate(graph.edges):
        iu, ju = divmod(u, ny)
        iv, jv = divmod(v, ny)
        if iu == iv:  # vertical edge between (i, j) and (i, j+1)
            faces = [didx(i, ju) for i in (iu - 1, iu) if 0 <= i < nx - 1]
        else:  # horizontal edge
            faces = [didx(iu, j) for j in (ju - 1, ju) if 0 <= j < ny - 1]
        if len(faces) == 2:
            inner.append(k)
            matched.append(tuple(faces))
    # reorder the dual edge list to match the primal inner edges
    dual_edges = [tuple(sorted(f)) for f in matched]
    d = FKGraph(dual.n, dual_edges)
    d.shape = dual.shape
    d.inner_primal_edges = inner
    return d


# ---------------------------------------------------------------------------
# Edwards-Sokal coupling (q = 2)

def edwards_sokal_fk_to_spin(graph, states, rng):
    """Color clusters +-1 uniformly; wired groups share their cluster color."""
    uf = UnionFind(graph.n)
    for group in graph.wirings:
        for v in group[1:]:
            uf.union(group[0], v)
    for s, (u, v) in zip(states, graph.edges):
        if s:
            uf.union(u, v)
    roots = {}
    spins = np.empty(graph.n, dtype=np.int8)
    for v in range(graph.n):
        r = uf.find(v)
        if r not in roots:
            roots[r] = 1 if rng.random() < 0.5 else -1
        spins[v] = roots[r]
    return spins


def edwards_sokal_spin_to_fk(graph, spins, p, rng):
    """Open agreeing edges independently with probability p; disagreeing
    edges stay closed."""
    states = np.zeros(len(graph.edges), dtype=bool)
    for i, (u, v) in enumerate(graph.edges):
        if spins[u] == spins[v] and rng.random() < p:
            states[i] = True
    return states


def serialize_configuration(graph, states, p, q, seed, xi_label="free"):
    """Edge-indexed bitset with a small header for reproducible dumps."""
    h = hashlib.sha256()
    h.update(struct.pack("<I", graph.n))
    for u, v in graph.edges:
        h.update(struct.pack("<II", u, v))
    for group in graph.wirings:
        h.update(b"w" + b",".join(str(v).encode() for v in sorted(group)))
    header = (f"isinglab-fk graph={h.hexdigest()[:16]} p={p!r} q={q!r} "
              f"xi={xi_label} seed={seed} edges={len(graph.edges)}\n").encode()
    bits = np.packbits(np.asarray(states, dtype=np.uint8))
    return header + bits.tobytes()


def deserialize_configuration(blob):
    header, _, rest = blob.partition(b"\n")
    fields = dict(kv.split(b"=") for kv in header.split(b" ")[1:])
    n_edges = int(fields[b"edges"])
    bits = np.unpackbits(np.frombuffer(rest, dtype=np.uint8))[:n_edges]
    return fields, bits.astype(bool)
