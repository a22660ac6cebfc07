"""Numba kernels for the samplers and sample-path tracing.

All kernels are seeded explicitly through numpy's legacy RNG inside numba
(reproducible for a fixed seed and numba version) and operate on padded
int32 adjacency arrays: neighbors[i, k] < 0 marks a missing neighbor.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def metropolis_sweeps(spins, neighbors, frozen, beta, n_sweeps, seed):
    np.random.seed(seed)
    n = spins.shape[0]
    for _ in range(n_sweeps):
        for _ in range(n):
            i = np.random.randint(0, n)
            if frozen[i]:
                continue
            h = 0
            for k in range(neighbors.shape[1]):
                j = neighbors[i, k]
                if j >= 0:
                    h += spins[j]
            de = 2 * spins[i] * h
            if de <= 0 or np.random.random() < np.exp(-beta * de):
                spins[i] = -spins[i]


@njit(cache=True)
def wolff_steps(spins, neighbors, frozen, beta, n_steps, seed):
    """Single-cluster updates with frozen-boundary Metropolis acceptance.

    Grows a cluster among free sites with the usual bond probability
    1 - exp(-2 beta); bonds from the cluster to frozen sites are never
    crossed but contribute to the acceptance min(1, e^{-2 beta (al - anti)}).
    With no frozen sites this is exactly the Wolff algorithm.
    """
    np.random.seed(seed)
    n = spins.shape[0]
    p_add = 1.0 - np.exp(-2.0 * beta)
    stack = np.empty(n, dtype=np.int32)
    members = np.empty(n, dtype=np.int32)
    mark = np.zeros(n, dtype=np.int64)
    epoch = 0
    for _ in range(n_steps):
        epoch += 1
        while True:
            seed_site = np.random.randint(0, n)
            if not frozen[seed_site]:
                break
        s0 = spins[seed_site]
        top = 0
        nm = 0
        stack[top] = seed_site
        top += 1
        mark[seed_site] = epoch
        members[nm] = seed_site
        nm += 1
        n_al = 0
        n_anti = 0
        while top > 0:
            top -= 1
            v = stack[top]
            for k in range(neighbors.shape[1]):
                w = neighbors[v, k]
                if w < 0:
                    continue
                if frozen[w]:
                    if spins[w] == s0:
                        n_al += 1
                    else:
                        n_anti += 1
                    continue
                if spins[w] == s0 and mark[w] != epoch:
                    if np.random.random() < p_add:
                        mark[w] = epoch
                        stack[top] = w
                        top += 1
                        members[nm] = w
                        nm += 1
        acc = np.exp(-2.0 * beta * (n_al - n_anti))
        if n_al <= n_anti or np.random.random() < acc:
            for t in range(nm):
                spins[members[t]] = -s0


@njit(cache=True)
def metropolis_state_counts(spins, neighbors, frozen, free_index, beta,
                            n_samples, thin, seed):
    """Sample state-index counts (bitmask over free spins) for exact
    chi-square comparisons on tiny graphs."""
    np.random.seed(seed)
    n = spins.shape[0]
    nf = free_index.shape[0]
    counts = np.zeros(1 << nf, dtype=np.int64)
    for s in range(n_samples):
        for _ in range(thin * n):
            i = np.random.randint(0, n)
            if frozen[i]:
                continue
            h = 0
            for k in range(neighbors.shape[1]):
                j = neighbors[i, k]
                if j >= 0:
                    h += spins[j]
            de = 2 * spins[i] * h
            if de <= 0 or np.random.random() < np.exp(-beta * de):
                spins[i] = -spins[i]
        code = 0
        for t in range(nf):
            if spins[free_index[t]] > 0:
                code |= 1 << t
        counts[code] += 1
    return counts


@njit(cache=True)
def wolff_state_counts(spins, neighbors, frozen, free_index, beta,
                       n_samples, thin, seed):
    np.random.seed(seed)
    n = spins.shape[0]
    nf = free_index.shape[0]
    counts = np.zeros(1 << nf, dtype=np.int64)
    p_add = 1.0 - np.exp(-2.0 * beta)
    stack = np.empty(n, dtype=np.int32)
    members = np.empty(n, dtype=np.int32)
    mark = np.zeros(n, dtype=np.int64)
    epoch = 0
    for s in range(n_samples):
        for _ in range(thin):
            epoch += 1
            while True:
                seed_site = np.random.randint(0, n)
                if not frozen[seed_site]:
                    break
            s0 = spins[seed_site]
            top = 0
            nm = 0
            stack[top] = seed_site
            top += 1
            mark[seed_site] = epoch
            members[nm] = seed_site
            nm += 1
            n_al = 0
            n_anti = 0
            while top > 0:
                top -= 1
                v = stack[top]
                for k in range(neighbors.shape[1]):
                    w = neighbors[v, k]
                    if w < 0:
                        continue
                    if frozen[w]:
                        if spins[w] == s0:
                            n_al += 1
                        else:
                            n_anti += 1
                        continue
                    if spins[w] == s0 and mark[w] != epoch:
                        if np.random.random() < p_add:
                            mark[w] = epoch
                            stack[top] = w
                            top += 1
                            members[nm] = w
                            nm += 1
            if n_al <= n_anti or np.random.random() < np.exp(-2.0 * beta * (n_al - n_anti)):
                for t in range(nm):
                    spins[members[t]] = -s0
        code = 0
        for t in range(nf):
            if spins[free_index[t]] > 0:
                code |= 1 << t
        counts[code] += 1
    return counts


@njit(cache=True)
def fk_heatbath_steps(states, edges, n_vertices, wired_class, p, q,
                      n_steps, seed):
    """Single-edge heat bath for FK percolation.

    One step resamples one uniformly random edge with the exact conditional
    odds p : q(1-p) when the endpoints are not connected off the edge, and
    p : (1-p) when they are.  wired_class[v] >= 0 marks vertices fused by
    the boundary wiring (same class id = same cluster).
    """
    np.random.seed(seed)
    ne = edges.shape[0]
    # incidence lists for BFS
    deg = np.zeros(n_vertices, dtype=np.int32)
    for e in range(ne):
        deg[edges[e, 0]] += 1
        deg[edges[e, 1]] += 1
    ptr = np.zeros(n_vertices + 1, dtype=np.int32)
    for v in range(n_vertices):
        ptr[v + 1] = ptr[v] + deg[v]
    inc = np.empty(ptr[n_vertices], dtype=np.int32)
    fill = ptr[:-1].copy()
    for e in range(ne):
        u, v = edges[e, 0], edges[e, 1]
        inc[fill[u]] = e
        fill[u] += 1
        inc[fill[v]] = e
        fill[v] += 1
    n_classes = wired_class.max() + 1 if wired_class.size else 0
    queue = np.empty(n_vertices, dtype=np.int32)
    seen = np.zeros(n_vertices, dtype=np.int64)
    class_seen = np.zeros(max(n_classes, 1), dtype=np.int64)
    epoch = 0
    for _ in range(n_steps):
        e0 = np.random.randint(0, ne)
        a, b = edges[e0, 0], edges[e0, 1]
        # BFS from a avoiding e0, following open edges and wiring jumps
        epoch += 1
        top = 0
        queue[top] = a
        top += 1
        seen[a] = epoch
        if wired_class[a] >= 0:
            class_seen[wired_class[a]] = epoch
        connected = False
        head = 0
        while head < top and not connected:
            v = queue[head]
            head += 1
            for t in range(ptr[v], ptr[v + 1]):
                e = inc[t]
                if e == e0 or not states[e]:
                    continue
                w = edges[e, 0] + edges[e, 1] - v
                if seen[w] != epoch:
                    if w == b:
                        connected = True
                        break
                    seen[w] = epoch
                    queue[top] = w
                    top += 1
                    c = wired_class[w]
                    if c >= 0 and class_seen[c] != epoch:
                        class_seen[c] = epoch
                        # wake every vertex of the class
                        for u2 in range(n_vertices):
                            if wired_class[u2] == c and seen[u2] != epoch:
                                if u2 == b:
                                    connected = True
                                seen[u2] = epoch
                                queue[top] = u2
                                top += 1
            cb = wired_class[b]
            if cb >= 0 and class_seen[cb] == epoch:
                connected = True
        if connected:
            p_open = p
        else:
            p_open = p / (p + q * (1.0 - p))
        states[e0] = np.random.random() < p_open


@njit(cache=True)
def edwards_sokal_open(spins, edges, p, out_states, seed):
    """Open agreeing edges independently with probability p (in place)."""
    np.random.seed(seed)
    for e in range(edges.shape[0]):
        if spins[edges[e, 0]] == spins[edges[e, 1]] and np.random.random() < p:
            out_states[e] = True
        else:
            out_states[e] = False


@njit(cache=True)
def uf_find(parent, a):
    p = a
    while parent[p] != p:
        p = parent[p]
    while parent[a] != p:
        nxt = parent[a]
        parent[a] = p
        a = nxt
    return p


@njit(cache=True)
def crossing_left_right(states, edges, n_vertices, left_ids, right_ids):
    """Open-path crossing between two vertex sets, by union-find."""
    parent = np.arange(n_vertices + 2, dtype=np.int32)
    left_node = n_vertices
    right_node = n_vertices + 1
    for e in range(edges.shape[0]):
        if states[e]:
            ra = uf_find(parent, edges[e, 0])
            rb = uf_find(parent, edges[e, 1])
            if ra != rb:
                parent[rb] = ra
    for i in range(left_ids.shape[0]):
        ra = uf_find(parent, left_node)
        rb = uf_find(parent, left_ids[i])
        if ra != rb:
            parent[rb] = ra
    for i in range(right_ids.shape[0]):
        ra = uf_find(parent, right_node)
        rb = uf_find(parent, right_ids[i])
        if ra != rb:
            parent[rb] = ra
    return uf_find(parent, left_node) == uf_find(parent, right_node)


@njit(cache=True)
def wolff_edge_product(spins, neighbors, frozen, beta, n_meas, thin, seed,
                       ex, ey):
    """Wolff chain measuring spins[ex] * spins[ey] every `thin` steps."""
    np.random.seed(seed)
    n = spins.shape[0]
    p_add = 1.0 - np.exp(-2.0 * beta)
    stack = np.empty(n, dtype=np.int32)
    members = np.empty(n, dtype=np.int32)
    mark = np.zeros(n, dtype=np.int64)
    out = np.empty(n_meas, dtype=np.int8)
    epoch = 0
    for m in range(n_meas):
        for _ in range(thin):
            epoch += 1
            while True:
                seed_site = np.random.randint(0, n)
                if not frozen[seed_site]:
                    break
            s0 = spins[seed_site]
            top = 0
            nm = 0
            stack[top] = seed_site
            top += 1
            mark[seed_site] = epoch
            members[nm] = seed_site
            nm += 1
            n_al = 0
            n_anti = 0
            while top > 0:
                top -= 1
                v = stack[top]
                for k in range(neighbors.shape[1]):
                    w = neighbors[v, k]
                    if w < 0:
                        continue
                    if frozen[w]:
                        if spins[w] == s0:
                            n_al += 1
                        else:
                            n_anti += 1
                        continue
                    if spins[w] == s0 and mark[w] != epoch:
                        if np.random.random() < p_add:
                            mark[w] = epoch
                            stack[top] = w
                            top += 1
                            members[nm] = w
                            nm += 1
            if n_al <= n_anti or np.random.random() < np.exp(-2.0 * beta * (n_al - n_anti)):
                for t in range(nm):
                    spins[members[t]] = -s0
        out[m] = spins[ex] * spins[ey]
    return out


@njit(cache=True)
def wolff_pair_products(spins, neighbors, frozen, beta, n_meas, thin, seed,
                        pair_a, pair_b):
    """Wolff chain accumulating products over a list of vertex pairs."""
    np.random.seed(seed)
    n = spins.shape[0]
    npairs = pair_a.shape[0]
    p_add = 1.0 - np.exp(-2.0 * beta)
    stack = np.empty(n, dtype=np.int32)
    members = np.empty(n, dtype=np.int32)
    mark = np.zeros(n, dtype=np.int64)
    acc = np.zeros(npairs, dtype=np.float64)
    acc2 = np.zeros(npairs, dtype=np.float64)
    epoch = 0
    for m in range(n_meas):
        for _ in range(thin):
            epoch += 1
            while True:
                seed_site = np.random.randint(0, n)
                if not frozen[seed_site]:
                    break
            s0 = spins[seed_site]
            top = 0
            nm = 0
            stack[top] = seed_site
            top += 1
            mark[seed_site] = epoch
            members[nm] = seed_site
            nm += 1
            n_al = 0
            n_anti = 0
            while top > 0:
                top -= 1
                v = stack[top]
                for k in range(neighbors.shape[1]):
                    w = neighbors[v, k]
                    if w < 0:
                        continue
                    if frozen[w]:
                        if spins[w] == s0:
                            n_al += 1
                        else:
                            n_anti += 1
                        continue
                    if spins[w] == s0 and mark[w] != epoch:
                        if np.random.random() < p_add:
                            mark[w] = epoch
                            stack[top] = w
                            top += 1
                            members[nm] = w
                            nm += 1
            if n_al <= n_anti or np.random.random() < np.exp(-2.0 * beta * (n_al - n_anti)):
                for t in range(nm):
                    spins[members[t]] = -s0
        for t in range(npairs):
            pr = spins[pair_a[t]] * spins[pair_b[t]]
            acc[t] += pr
            acc2[t] += 1.0
    return acc / acc2


@njit(cache=True)
def trace_accumulate(states, med_kind, med_edge_id, med_stride, a_flat,
                     first_dir, b_flat, steps_dx, steps_dy, rot_left_idx,
                     rot_right_idx, acc_re, acc_im, phase_re, phase_im,
                     path_flat, path_dir, path_turn, max_len):
    """Trace one exploration path and accumulate exp(i sigma W(e,b)) per
    directed medial edge.

    med_kind (flattened bounding box): 0 closed, 1 open (wired arc),
    2 random (state looked up through med_edge_id).  Directions are indexed
    0..3; rot tables give the turn maps.  The phase tables carry
    exp(i sigma (pi/2) w) for w mod 8.  Returns the path length or -1.
    """
    v = a_flat
    d = first_dir
    n = 0
    cum = 0
    while n < max_len:
        tail = v
        v = v + steps_dx[d] * med_stride + steps_dy[d]
        path_flat[n] = tail
        path_dir[n] = d
        path_turn[n] = cum
        n += 1
        if v == b_flat:
            total = cum
            for i in range(n):
                w = (total - path_turn[i]) % 8
                idx = path_flat[i] * 4 + path_dir[i]
                acc_re[idx] += phase_re[w]
                acc_im[idx] += phase_im[w]
            return n
        kind = med_kind[v]
        is_open = kind == 1 or (kind == 2 and states[med_edge_id[v]])
        if is_open:
            d = rot_right_idx[d]
            cum -= 1
        else:
            d = rot_left_idx[d]
            cum += 1
    return -1
