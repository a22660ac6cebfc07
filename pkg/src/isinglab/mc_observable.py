"""Monte Carlo estimation of the FK edge observable and interface sampling,
backed by the numba medial-walk tracer."""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .samplers import FKDobrushinSampler

# direction indexing shared with the kernel: E, N, W, S as internal steps
DIR_STEPS = ((1, -1), (1, 1), (-1, 1), (-1, -1))
DIR_INDEX = {s: i for i, s in enumerate(DIR_STEPS)}
ROT_LEFT = np.array([1, 2, 3, 0], dtype=np.int64)
ROT_RIGHT = np.array([3, 0, 1, 2], dtype=np.int64)


class TraceArrays:
    """Flattened bounding-box encoding of a Dobrushin domain for the
    kernel tracer."""

    def __init__(self, domain):
        pts = list(domain.graph.vertices) + list(domain.chain_mids)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        self.x0, self.y0 = min(xs) - 2, min(ys) - 2
        self.nx = max(xs) - self.x0 + 3
        self.ny = max(ys) - self.y0 + 3
        self.stride = self.ny
        size = self.nx * self.ny
        self.med_kind = np.zeros(size, dtype=np.int8)
        self.med_edge_id = -np.ones(size, dtype=np.int32)
        for (u, v) in domain.wired_edges:
            m = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
            self.med_kind[self.flat(m)] = 1
        for i, (u, v) in enumerate(domain.random_edges):
            m = ((u[0] + v[0]) // 2, (u[1] + v[1]) // 2)
            f = self.flat(m)
            self.med_kind[f] = 2
            self.med_edge_id[f] = i
        self.a_flat = self.flat(domain.a_med)
        self.b_flat = self.flat(domain.b_med)
        from .loops import FKDobrushinModel
        first = FKDobrushinModel(domain, 0.5, 2.0)._first_edge
        self.first_dir = DIR_INDEX[first]
        self.steps_dx = np.array([s[0] for s in DIR_STEPS], dtype=np.int64)
        self.steps_dy = np.array([s[1] for s in DIR_STEPS], dtype=np.int64)
        self.max_len = 16 * (domain.graph.ne() + len(domain.chain_mids) + 8)
        self.path_flat = np.empty(self.max_len, dtype=np.int64)
        self.path_dir = np.empty(self.max_len, dtype=np.int64)
        self.path_turn = np.empty(self.max_len, dtype=np.int64)

    def flat(self, p):
        return (p[0] - self.x0) * self.stride + (p[1] - self.y0)

    def unflat(self, f):
        return (f // self.stride + self.x0, f % self.stride + self.y0)


def fk_edge_observable_mc(domain, p, samples, seed=0, thinning=3):
    """Monte Carlo FK edge observable E[e^{i W(e,b)/2} 1_{e in gamma}].

    Returns (edge_field, n_samples); values carry 1/sqrt(n) noise, edges
    never visited get 0.
    """
    arrays = TraceArrays(domain)
    sampler = FKDobrushinSampler(domain, p, seed=seed, thinning=thinning)
    size = arrays.med_kind.shape[0]
    acc_re = np.zeros(4 * size)
    acc_im = np.zeros(4 * size)
    w8 = np.arange(8)
    phase_re = np.cos(math.pi * w8 / 4.0)
    phase_im = np.sin(math.pi * w8 / 4.0)
    for _ in range(samples):
        states = sampler.sample_states()
        n = K.trace_accumulate(states, arrays.med_kind, arrays.med_edge_id,
                               arrays.stride, arrays.a_flat, arrays.first_dir,
                               arrays.b_flat, arrays.steps_dx, arrays.steps_dy,
                               ROT_LEFT, ROT_RIGHT, acc_re, acc_im,
                               phase_re, phase_im, arrays.path_flat,
                               arrays.path_dir, arrays.path_turn, arrays.max_len)
        if n < 0:
            raise RuntimeError("exploration path failed to close")
    field = {}
    for idx in np.nonzero((acc_re != 0) | (acc_im != 0))[0]:
        d = int(idx % 4)
        f = int(idx // 4)
        tail = arrays.unflat(f)
        step = DIR_STEPS[d]
        head = (tail[0] + step[0], tail[1] + step[1])
        field[(tail, head)] = complex(acc_re[idx], acc_im[idx]) / samples
    return field, samples


def sample_interfaces(domain, p, n_interfaces, seed=0, thinning=3):
    """Sample exploration paths; yields lists of embedded curve points."""
    from .lattice import embed
    arrays = TraceArrays(domain)
    sampler = FKDobrushinSampler(domain, p, seed=seed, thinning=thinning)
    size = arrays.med_kind.shape[0]
    acc_re = np.zeros(4 * size)
    acc_im = np.zeros(4 * size)
    phase_re = np.cos(math.pi * np.arange(8) / 4.0)
    phase_im = np.sin(math.pi * np.arange(8) / 4.0)
    for _ in range(n_interfaces):
        states = sampler.sample_states()
        n = K.trace_accumulate(states, arrays.med_kind, arrays.med_edge_id,
                               arrays.stride, arrays.a_flat, arrays.first_dir,
                               arrays.b_flat, arrays.steps_dx, arrays.steps_dy,
                               ROT_LEFT, ROT_RIGHT, acc_re, acc_im,
                               phase_re, phase_im, arrays.path_flat,
                               arrays.path_dir, arrays.path_turn, arrays.max_len)
        if n < 0:
            raise RuntimeError("exploration path failed to close")
        pts = [embed(arrays.unflat(int(arrays.path_flat[i])), domain.delta)
               for i in range(n)]
        pts.append(embed(domain.b_med, domain.delta))
        yield pts
