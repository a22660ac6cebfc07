import math
import cmath

import numpy as np
import pytest

from isinglab.domains import Rectangle, build_domain
from isinglab.fk import p_self_dual
from isinglab.harmonic import (
    Grid,
    RHO,
    check_s_holomorphic,
    dbar,
    dbar_medial,
    discrete_laplacian,
    fk_observable_H,
    green_function,
    harmonic_measure,
    integrate_H,
    massive_green,
    modified_harmonic_measure,
    solve_dirichlet,
)
from isinglab.lattice import embed
from isinglab.loops import FKDobrushinModel
from isinglab.observables import fk_edge_observable_exact, vertex_field

PSD = p_self_dual(2.0)


def test_laplacian_basics():
    g = Grid.box(5, 5)
    const = {v: 3.0 for v in g.vertices}
    lin = {v: g.position[v].real for v in g.vertices}
    sq = {v: g.position[v].real ** 2 for v in g.vertices}
    assert discrete_laplacian(g, const, (2, 2)) == 0.0
    assert discrete_laplacian(g, lin, (2, 2)) == 0.0
    # mesh-1 second difference of x^2: ((x+1)^2 + (x-1)^2 - 2 x^2)/4 = 1/2
    assert abs(discrete_laplacian(g, sq, (2, 2)) - 0.5) < 1e-15


def test_laplacian_boundary_error():
    g = Grid.box(3, 3)
    with pytest.raises(ValueError):
        discrete_laplacian(g, {v: 0.0 for v in g.vertices}, (0, 1))


def test_dirichlet_constant_and_linear():
    g = Grid.box(6, 6)
    f = solve_dirichlet(g, {v: 3.0 for v in g.boundary})
    assert all(abs(f[v] - 3.0) < 1e-12 for v in g.vertices)
    f = solve_dirichlet(g, {v: g.position[v].real for v in g.boundary})
    assert all(abs(f[v] - g.position[v].real) < 1e-10 for v in g.vertices)
    f = solve_dirichlet(g, {v: g.position[v].imag for v in g.boundary})
    assert all(abs(f[v] - g.position[v].imag) < 1e-10 for v in g.vertices)


def test_dirichlet_max_principle():
    rng = np.random.default_rng(3)
    g = Grid.box(7, 5)
    data = {v: float(rng.normal()) for v in g.boundary}
    f = solve_dirichlet(g, data)
    lo, hi = min(data.values()), max(data.values())
    for v in g.interior:
        assert lo - 1e-12 <= f[v].real <= hi + 1e-12


def test_dirichlet_harmonic_quadratic_exact():
    # Re(z^2) = x^2 - y^2 is exactly preharmonic on the square lattice, so
    # the discrete solution reproduces the continuum one to solver precision
    for n in (9, 17):
        spacing = 1.0 / (n - 1)
        g = Grid.box(n, n, spacing)
        target = {v: (g.position[v] ** 2).real for v in g.vertices}
        f = solve_dirichlet(g, {v: target[v] for v in g.boundary})
        assert max(abs(f[v] - target[v]) for v in g.vertices) < 1e-10


def test_dirichlet_converges_to_continuum():
    # a harmonic function that is not preharmonic: max error decreases with
    # the mesh
    pole = 1.5 + 0.3j
    errs = []
    for n in (9, 17, 33):
        spacing = 1.0 / (n - 1)
        g = Grid.box(n, n, spacing)
        target = {v: (1.0 / (g.position[v] - pole)).real for v in g.vertices}
        f = solve_dirichlet(g, {v: target[v] for v in g.boundary})
        errs.append(max(abs(f[v] - target[v]) for v in g.vertices))
    assert errs[2] < errs[1] < errs[0]


def test_harmonic_measure_single_interior():
    g = Grid.box(3, 3)
    hm = harmonic_measure(g, (0, 1))
    assert abs(hm[(1, 1)] - 0.25) < 1e-12


def test_harmonic_measure_representation():
    # h(x) = sum_y h(y) H(x, y) for the solved Dirichlet field on a 5x5 box
    g = Grid.box(5, 5)
    rng = np.random.default_rng(11)
    data = {v: float(rng.normal()) for v in g.boundary}
    h = solve_dirichlet(g, data)
    measures = {y: harmonic_measure(g, y) for y in g.boundary}
    for x in g.interior:
        rep = sum(data[y] * measures[y][x] for y in g.boundary)
        assert abs(h[x] - rep) < 1e-10
        total = sum(measures[y][x] for y in g.boundary)
        assert abs(total - 1.0) < 1e-10


def test_green_basics():
    # 3x3 box: single interior vertex, one visit
    g = Grid.box(3, 3)
    G = green_function(g, (1, 1))
    assert abs(G[(1, 1)] + 1.0) < 1e-12
    # symmetry on a 6x6 box
    g = Grid.box(6, 6)
    ys = [(2, 2), (3, 2), (2, 3)]
    Gs = {y: green_function(g, y) for y in ys}
    for y1 in ys:
        for y2 in ys:
            assert abs(Gs[y1][y2] - Gs[y2][y1]) < 1e-10


def test_riesz_representation():
    g = Grid.box(6, 6)
    rng = np.random.default_rng(5)
    f = {v: 0.0 for v in g.vertices}
    for v in g.interior:
        f[v] = float(rng.normal())
    greens = {y: green_function(g, y) for y in g.interior}
    for x in g.vertices:
        rec = sum(discrete_laplacian(g, f, y) * greens[y][x] for y in g.interior)
        assert abs(f[x] - rec) < 1e-9


def test_derivative_estimate_constant_stable():
    # |h(x)-h(y)| <= C delta sup|h| / d(x, boundary): the fitted C is O(1)
    # and stable across mesh sizes
    cs = []
    for n in (9, 17, 33):
        spacing = 1.0 / (n - 1)
        g = Grid.box(n, n, spacing)
        data = {v: (1.0 if g.position[v].real > 0.5 else 0.0) for v in g.boundary}
        h = solve_dirichlet(g, data)
        sup = max(abs(h[v]) for v in g.vertices)
        c = 0.0
        for x in g.interior:
            px = g.position[x]
            d = min(px.real, 1 - px.real, px.imag, 1 - px.imag)
            if d < 0.2:
                continue
            for w in g.adj[x]:
                c = max(c, abs(h[x] - h[w]) * d / (spacing * sup))
        cs.append(c)
    assert max(cs) / min(cs) < 2.0


def test_massive_green_equation():
    m = 0.8
    field, half = massive_green(m, size=24)
    assert field[(0, 0)] == 1.0
    for v in [(1, 0), (3, 2), (0, 5)]:
        avg = sum(field[(v[0] + d[0], v[1] + d[1])]
                  for d in ((1, 0), (-1, 0), (0, 1), (0, -1))) / 4.0
        assert abs(field[v] - m * avg) < 1e-10


def test_dbar_rotated():
    # field on the rotated primal lattice around the dual vertex (1, 1)
    pts = [(0, 0), (2, 0), (0, 2), (2, 2)]
    ident = {p: embed(p, 1.0) for p in pts}
    conj = {p: embed(p, 1.0).conjugate() for p in pts}
    const = {p: 2.7 for p in pts}
    assert abs(dbar(ident, (1, 1))) < 1e-15
    assert abs(dbar(const, (1, 1))) < 1e-15
    # f = conj(z): equals the horizontal span, twice the half-diagonal
    assert abs(dbar(conj, (1, 1)) - 2.0) < 1e-12


def test_dbar_medial_identity():
    corners = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    ident = {c: embed(c, 1.0) for c in corners}
    assert abs(dbar_medial(ident, (0, 0))) < 1e-15
    conj = {c: embed(c, 1.0).conjugate() for c in corners}
    assert abs(dbar_medial(conj, (0, 0))) > 0.5


def test_check_s_holomorphic_trivial_and_perturbed():
    dom = build_domain(Rectangle(3, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    F = fk_edge_observable_exact(model)
    vf = vertex_field(model, F)
    zero = {v: 0j for v in vf}
    assert check_s_holomorphic(zero, tol=1e-12)["max_gap"] == 0.0
    rep = check_s_holomorphic(vf, tol=1e-12)
    assert rep["passed"]
    # perturbing one vertex flags exactly its incident edges
    bad = dict(vf)
    v0 = sorted(vf)[len(vf) // 2]
    bad[v0] += 0.1
    rep = check_s_holomorphic(bad, tol=1e-6)
    flagged = {e for e, _ in rep["violating_edges"]}
    assert flagged
    for (x, y) in flagged:
        assert v0 in (x, y)


def test_s_holomorphic_implies_preholomorphic():
    dom = build_domain(Rectangle(3, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    vf = vertex_field(model)
    tol = check_s_holomorphic(vf, tol=1e-9)["max_gap"] + 1e-15
    faces = set(dom.graph.vertices) | set(dom.dual_interior)
    checked = 0
    for face in faces:
        corners = [(face[0] + 1, face[1]), (face[0], face[1] + 1),
                   (face[0] - 1, face[1]), (face[0], face[1] - 1)]
        if not all(c in vf for c in corners):
            continue
        assert abs(dbar_medial(vf, face)) < 4 * max(tol, 1e-12)
        checked += 1
    assert checked > 0


def test_H_field_boundary_and_monotonicity():
    dom = build_domain(Rectangle(2, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    H = fk_observable_H(model)
    # H = 1 on the wired arc, 0 on the free-side outer duals, exactly
    for b in dom.wired_arc:
        assert abs(H[b] - 1.0) < 1e-12
    for w in dom.dstar_ab:
        assert abs(H[w]) < 1e-12
    # black face value exceeds adjacent white face value
    for b in dom.graph.vertices:
        for w in ((b[0] + 1, b[1] + 1), (b[0] + 1, b[1] - 1)):
            if w in H:
                assert H[b] >= H[w] - 1e-12


def test_H_field_sub_super_harmonic():
    dom = build_domain(Rectangle(3, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    H = fk_observable_H(model)
    g = dom.graph
    for b in g.interior_vertices():
        lap = sum(H[w] - H[b] for w in g.adj[b]) / 4.0
        assert lap >= -1e-12
    interior_whites = [w for w in dom.dual_interior
                       if all((w[0] + d[0], w[1] + d[1]) in H
                              for d in ((2, 0), (-2, 0), (0, 2), (0, -2)))]
    for w in interior_whites:
        nbrs = [(w[0] + d[0], w[1] + d[1]) for d in ((2, 0), (-2, 0), (0, 2), (0, -2))]
        if all(n in set(dom.dual_interior) for n in nbrs):
            lap = sum(H[n] - H[w] for n in nbrs) / 4.0
            assert lap <= 1e-12


def test_H_same_color_increment_identity():
    # H(b1) - H(b2) = (1/2) Im[f(v)^2 (b1 - b2)] with f the vertex
    # observable scaled by 1/sqrt(delta), embedded positions
    dom = build_domain(Rectangle(3, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    F = fk_edge_observable_exact(model)
    H = fk_observable_H(model, F)
    vf = vertex_field(model, F)
    delta = dom.delta
    checked = 0
    from isinglab.lattice import primal_edge_of_medial_vertex
    for v, val in vf.items():
        b1, b2 = primal_edge_of_medial_vertex(v)
        if b1 not in H or b2 not in H:
            continue
        f = val / math.sqrt(delta)
        lhs = H[b1] - H[b2]
        rhs = 0.5 * (f * f * (embed(b1, delta) - embed(b2, delta))).imag
        assert abs(lhs - rhs) < 1e-12
        checked += 1
    assert checked > 0


def test_subharmonicity_algebraic_identity():
    # S = 4(a^2+b^2+c^2+d^2) - 4 sqrt(2)(ab+bc+cd-da) is a complex square,
    #   S = 4 |a + e^{3 i pi/4} b - i c + e^{i pi/4} d|^2 >= 0
    # (the unit coefficients are fixed by the cross terms: consecutive
    # angles 3pi/4 apart, so each product contributes -sqrt(2) and the
    # opposite pairs are orthogonal)
    rng = np.random.default_rng(17)
    for _ in range(200):
        a, b, c, d = rng.normal(size=4)
        s1 = 4 * (a * a + b * b + c * c + d * d) \
            - 4 * math.sqrt(2) * (a * b + b * c + c * d - d * a)
        z = a + cmath.exp(3j * math.pi / 4) * b - 1j * c \
            + cmath.exp(1j * math.pi / 4) * d
        assert abs(s1 - 4 * abs(z) ** 2) < 1e-10
        assert s1 >= -1e-12


def test_path_independence_failure_detected():
    dom = build_domain(Rectangle(2, 3), 1.0, "fk", "nw", "se")
    model = FKDobrushinModel(dom, PSD)
    F = fk_edge_observable_exact(model)
    # corrupt one edge value: increments become path dependent
    key = max(F, key=lambda k: abs(F[k]))
    F2 = dict(F)
    F2[key] += 0.2
    with pytest.raises(ValueError, match="path dependence"):
        fk_observable_H(model, F2, tol=1e-9)


def test_modified_harmonic_measure_sandwich():
    # sqrt(H~white(W)) <= phi(B <-> wired arc) <= sqrt(H~black(B))
    for nx, ny in [(2, 3), (3, 3)]:
        dom = build_domain(Rectangle(nx, ny), 1.0, "fk", "nw", "se")
        model = FKDobrushinModel(dom, PSD)
        hb = modified_harmonic_measure(dom, "black")
        hw = modified_harmonic_measure(dom, "white")
        sts, probs = model.distribution()
        g = dom.graph
        wired0 = g.index[dom.wired_arc[0]]
        from isinglab.union_find import UnionFind
        free_interior = [v for v in dom.free_arc if v not in set(dom.wired_arc)]
        for B in free_interior:
            phi = 0.0
            for row, pr in zip(sts, probs):
                uf = UnionFind(g.nv())
                for (u, v) in dom.wired_edges:
                    uf.union(g.index[u], g.index[v])
                for s, (u, v) in zip(row, dom.random_edges):
                    if s:
                        uf.union(g.index[u], g.index[v])
                if uf.connected(g.index[B], wired0):
                    phi += pr
            assert phi <= math.sqrt(hb[B]) + 1e-12
            # W: any dual neighbor of B not on the outer free arc
            whites = [w for w in ((B[0] + 1, B[1] + 1), (B[0] - 1, B[1] + 1),
                                  (B[0] + 1, B[1] - 1), (B[0] - 1, B[1] - 1))
                      if w in hw and w not in set(dom.dstar_ab)]
            for W in whites:
                assert math.sqrt(hw[W]) <= phi + 1e-12


def test_modified_rates_normalized():
    # transition weights (1,1,1,rho) normalized by their sum: check one row
    dom = build_domain(Rectangle(3, 3), 1.0, "fk", "nw", "se")
    hb = modified_harmonic_measure(dom, "black")
    # values are probabilities
    assert all(-1e-12 <= v <= 1 + 1e-12 for v in hb.values())
    assert abs(RHO - 2.0 / (math.sqrt(2) + 1)) < 1e-15


def test_massive_green_truncation_stability():
    # absorbing-box truncation: the fitted decay rate is stable when the
    # box grows past the default 8/(1-m) size
    from isinglab.experiments import massive_green_decay_rate
    r1 = massive_green_decay_rate(0.3)           # default box
    r2 = massive_green_decay_rate(0.3, size=int(r1["half_size"] * 2.8))
    assert abs(r1["rate"] - r2["rate"]) < 1e-3
