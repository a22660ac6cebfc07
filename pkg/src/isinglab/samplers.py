"""Monte Carlo samplers: Metropolis and Wolff for spin graphs, single-edge
heat bath for FK configurations, and the coupled FK-Dobrushin sampler
(Wolff on spins with a frozen wired arc, then Edwards-Sokal opening).

Every sampler takes an explicit 64-bit seed; runs are reproducible for a
fixed seed.  The generator driving the kernels is numpy's legacy MT19937
inside numba; seeds are recorded in experiment outputs.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as K

DEFAULT_BURNIN_SWEEPS = 1000
DEFAULT_BURNIN_WOLFF_FACTOR = 100
DEFAULT_THINNING = 10


def _pad_neighbors(n, edges):
    deg = np.zeros(n, dtype=np.int32)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    width = max(4, int(deg.max()) if n else 4)
    nbr = -np.ones((n, width), dtype=np.int32)
    fill = np.zeros(n, dtype=np.int32)
    for u, v in edges:
        nbr[u, fill[u]] = v
        fill[u] += 1
        nbr[v, fill[v]] = u
        fill[v] += 1
    return nbr


class SpinSampler:
    """Markov chain over spin configurations of a SpinGraph."""

    def __init__(self, graph, beta, sampler="wolff", seed=0, burn_in=None,
                 thinning=DEFAULT_THINNING):
        if sampler not in ("wolff", "metropolis"):
            raise ValueError(f"unknown sampler {sampler!r}")
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.graph = graph
        self.beta = float(beta)
        self.sampler = sampler
        self.seed = int(seed)
        self.thinning = int(thinning)
        self.nbr = _pad_neighbors(graph.n, graph.edges)
        self.frozen = np.zeros(graph.n, dtype=np.bool_)
        self.spins = np.ones(graph.n, dtype=np.int8)
        rng = np.random.default_rng(seed)
        self.spins[:] = np.where(rng.random(graph.n) < 0.5, 1, -1)
        for v, s in graph.frozen.items():
            self.frozen[v] = True
            self.spins[v] = s
        if burn_in is None:
            burn_in = (DEFAULT_BURNIN_WOLFF_FACTOR * graph.n
                       if sampler == "wolff" else DEFAULT_BURNIN_SWEEPS)
        self.burn_in = int(burn_in)
        self._stream = 0
        self._warm = False

    def _next_seed(self):
        self._stream += 1
        return (self.seed * 1000003 + self._stream) % (2 ** 31 - 1)

    def warm_up(self):
        if self._warm:
            return
        if self.sampler == "wolff":
            K.wolff_steps(self.spins, self.nbr, self.frozen, self.beta,
                          self.burn_in, self._next_seed())
        else:
            K.metropolis_sweeps(self.spins, self.nbr, self.frozen, self.beta,
                                self.burn_in, self._next_seed())
        self._warm = True

    def run(self, n_samples):
        """Yield n_samples configurations (views are copied)."""
        if n_samples <= 0:
            raise ValueError("n_samples must be positive")
        self.warm_up()
        for _ in range(n_samples):
            self.step(self.thinning)
            yield self.spins.copy()

    def step(self, n=1):
        if self.sampler == "wolff":
            K.wolff_steps(self.spins, self.nbr, self.frozen, self.beta,
                          n, self._next_seed())
        else:
            K.metropolis_sweeps(self.spins, self.nbr, self.frozen, self.beta,
                                n, self._next_seed())

    def state_counts(self, n_samples, thinning=None):
        """Counts over free-spin bitmask states (for chi-square tests)."""
        self.warm_up()
        thin = self.thinning if thinning is None else thinning
        free = np.array(self.graph.free, dtype=np.int32)
        if self.sampler == "wolff":
            return K.wolff_state_counts(self.spins, self.nbr, self.frozen,
                                        free, self.beta, n_samples, thin,
                                        self._next_seed())
        return K.metropolis_state_counts(self.spins, self.nbr, self.frozen,
                                         free, self.beta, n_samples, thin,
                                         self._next_seed())


def estimate_two_point(graph, beta, x, y, samples, sampler="wolff", seed=0,
                       thinning=2):
    """Monte Carlo <sigma_x sigma_y> with a jackknife (binned) error."""
    if not (0 <= x < graph.n and 0 <= y < graph.n):
        raise ValueError("vertex not in graph")
    if x == y:
        return 1.0, 0.0
    s = SpinSampler(graph, beta, sampler=sampler, seed=seed, thinning=thinning)
    s.warm_up()
    if sampler == "wolff":
        vals = K.wolff_edge_product(s.spins, s.nbr, s.frozen, beta, samples,
                                    thinning, s._next_seed(), x, y)
    else:
        vals = np.empty(samples, dtype=np.int8)
        for i, spins in enumerate(s.run(samples)):
            vals[i] = spins[x] * spins[y]
    return jackknife(vals.astype(np.float64))


def jackknife(values, n_bins=50):
    """Binned jackknife mean and standard error."""
    values = np.asarray(values, dtype=np.float64)
    n_bins = min(n_bins, len(values))
    usable = (len(values) // n_bins) * n_bins
    bins = values[:usable].reshape(n_bins, -1).mean(axis=1)
    mean = bins.mean()
    jk = (bins.sum() - bins) / (n_bins - 1)
    err = math.sqrt((n_bins - 1) / n_bins * ((jk - jk.mean()) ** 2).sum())
    return float(mean), float(err)


class FKSampler:
    """Single-edge heat bath for FK percolation on an FKGraph."""

    def __init__(self, graph, p, q, seed=0, warn_q_below_one=True):
        if q < 1 and warn_q_below_one:
            import warnings
            warnings.warn("q < 1: heat-bath odds remain valid but "
                          "FKG-based diagnostics do not apply")
        self.graph = graph
        self.p = float(p)
        self.q = float(q)
        self.seed = int(seed)
        self.edges = np.array(graph.edges, dtype=np.int32)
        self.states = np.zeros(len(graph.edges), dtype=np.bool_)
        self.wired_class = -np.ones(graph.n, dtype=np.int32)
        for ci, group in enumerate(graph.wirings):
            for v in group:
                self.wired_class[v] = ci
        self._stream = 0

    def _next_seed(self):
        self._stream += 1
        return (self.seed * 2000003 + self._stream) % (2 ** 31 - 1)

    def step(self, n=1):
        K.fk_heatbath_steps(self.states, self.edges, self.graph.n,
                            self.wired_class, self.p, self.q, n,
                            self._next_seed())

    def run(self, n_samples, thinning=None):
        if n_samples <= 0:
            raise ValueError("n_samples must be positive")
        thin = thinning if thinning is not None else max(1, len(self.graph.edges))
        self.step(20 * max(1, len(self.graph.edges)))
        for _ in range(n_samples):
            self.step(thin)
            yield self.states.copy()

    def state_counts(self, n_samples, thinning=None):
        thin = thinning if thinning is not None else max(1, len(self.graph.edges))
        counts = np.zeros(1 << len(self.graph.edges), dtype=np.int64)
        weights = np.ones(len(self.graph.edges), dtype=np.int64)
        for k in range(len(weights)):
            weights[k] = 1 << k
        self.step(20 * max(1, len(self.graph.edges)))
        for _ in range(n_samples):
            self.step(thin)
            counts[int((self.states * weights).sum())] += 1
        return counts


class FKDobrushinSampler:
    """FK-Ising configurations under Dobrushin boundary conditions, via the
    Edwards-Sokal coupling: Wolff on spins with the wired arc frozen to +,
    then independent opening of aligned edges."""

    def __init__(self, domain, p, seed=0, thinning=3):
        if domain.variant != "fk":
            raise ValueError("needs an fk Dobrushin domain")
        self.domain = domain
        self.p = float(p)
        self.beta = -0.5 * math.log(1.0 - p)
        self.seed = int(seed)
        self.thinning = int(thinning)
        g = domain.graph
        self.n = g.nv()
        edges_idx = [(g.index[u], g.index[v]) for (u, v) in g.edges]
        self.nbr = _pad_neighbors(self.n, edges_idx)
        self.frozen = np.zeros(self.n, dtype=np.bool_)
        self.spins = np.ones(self.n, dtype=np.int8)
        rng = np.random.default_rng(seed)
        self.spins[:] = np.where(rng.random(self.n) < 0.5, 1, -1)
        for v in domain.wired_arc:
            self.frozen[g.index[v]] = True
            self.spins[g.index[v]] = 1
        self.random_edges_idx = np.array(
            [(g.index[u], g.index[v]) for (u, v) in domain.random_edges],
            dtype=np.int32)
        self.open_buf = np.zeros(len(domain.random_edges), dtype=np.bool_)
        self._stream = 0
        self._warm = False

    def _next_seed(self):
        self._stream += 1
        return (self.seed * 3000017 + self._stream) % (2 ** 31 - 1)

    def warm_up(self, steps=None):
        if self._warm:
            return
        K.wolff_steps(self.spins, self.nbr, self.frozen, self.beta,
                      steps if steps is not None else 40 + 4 * int(math.sqrt(self.n)) * 10,
                      self._next_seed())
        self._warm = True

    def sample_states(self):
        """One FK configuration over domain.random_edges."""
        self.warm_up()
        K.wolff_steps(self.spins, self.nbr, self.frozen, self.beta,
                      self.thinning, self._next_seed())
        K.edwards_sokal_open(self.spins, self.random_edges_idx, self.p,
                             self.open_buf, self._next_seed())
        return self.open_buf.copy()
