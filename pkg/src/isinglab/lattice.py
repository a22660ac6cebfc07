"""Integer primitives for the rotated square lattice and its medial graph.

All graph combinatorics live on integer coordinates (x, y):

* primal vertices   : x, y both even
* dual vertices     : x, y both odd
* medial vertices   : x + y odd  (midpoints of primal = midpoints of dual edges)

The plane embedding

    z = (delta / sqrt(2)) * exp(i*pi/4) * (x + i*y)

is applied only when a real position is needed, so a primal lattice of mesh
sqrt(2)*delta yields a medial lattice of mesh delta and no floating point
enters the graph logic.  Internal unit steps map to embedded compass
directions as (1,-1) -> E, (1,1) -> N, (-1,1) -> W, (-1,-1) -> S for medial
steps and (1,0) -> NE, (0,1) -> NW, etc. for primal half-steps.
"""

from __future__ import annotations

import cmath
import math

SQRT2 = math.sqrt(2.0)

# internal unit directions (primal half-steps / face offsets)
UNIT_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))
# medial steps, keyed by embedded compass direction
MEDIAL_E = (1, -1)
MEDIAL_N = (1, 1)
MEDIAL_W = (-1, 1)
MEDIAL_S = (-1, -1)
MEDIAL_STEPS = (MEDIAL_E, MEDIAL_N, MEDIAL_W, MEDIAL_S)


def is_primal(p):
    return p[0] % 2 == 0 and p[1] % 2 == 0


def is_dual(p):
    return p[0] % 2 == 1 and p[1] % 2 == 1


def is_medial(p):
    return (p[0] + p[1]) % 2 == 1


def embed(p, delta=1.0):
    """Embedded position of an integer point as a complex number."""
    return (delta / SQRT2) * cmath.exp(1j * math.pi / 4) * complex(p[0], p[1])


def embed_dir(d):
    """Embedded unit direction of an integer step."""
    z = cmath.exp(1j * math.pi / 4) * complex(d[0], d[1])
    return z / abs(z)


def rot_left(d):
    """Rotate an integer vector by +90 degrees (counterclockwise, embedded)."""
    return (-d[1], d[0])


def rot_right(d):
    """Rotate an integer vector by -90 degrees (clockwise, embedded)."""
    return (d[1], -d[0])


def turn_quarters(d_from, d_to):
    """Signed quarter turns from one direction to another.

    Returns k in {-1, 0, 1, 2} with rot_left^k(d_from) ~ d_to; +1 is a left
    turn.  Raises if the vectors are not related by a quarter rotation.
    """
    d = d_from
    for k in (0, 1, -1, 2):
        dd = d
        if k == 1:
            dd = rot_left(d)
        elif k == -1:
            dd = rot_right(d)
        elif k == 2:
            dd = (-d[0], -d[1])
        if dd == d_to:
            return k
    raise ValueError(f"directions {d_from} -> {d_to} not a quarter rotation")


def medial_neighbors(v):
    return [(v[0] + s[0], v[1] + s[1]) for s in MEDIAL_STEPS]


def medial_edge_faces(u, d):
    """(black, white) faces flanking the directed medial edge u -> u+d.

    Black = primal face on one side, white = dual face on the other.  The
    left face of the step is u + (d + rot_left(d))/2, the right face
    u + (d + rot_right(d))/2; exactly one of the two is primal.
    """
    dl = rot_left(d)
    left = (u[0] + (d[0] + dl[0]) // 2, u[1] + (d[1] + dl[1]) // 2)
    dr = rot_right(d)
    right = (u[0] + (d[0] + dr[0]) // 2, u[1] + (d[1] + dr[1]) // 2)
    if is_primal(left):
        return left, right
    return right, left


def canonical_direction(u, v):
    """Lattice orientation of the medial edge {u, v}: counterclockwise
    around its black face, i.e. the black face lies on the left."""
    d = (v[0] - u[0], v[1] - u[1])
    if d not in MEDIAL_STEPS:
        raise ValueError(f"{u}-{v} is not a medial edge")
    dl = rot_left(d)
    left = (u[0] + (d[0] + dl[0]) // 2, u[1] + (d[1] + dl[1]) // 2)
    if is_primal(left):
        return d
    return (-d[0], -d[1])


def primal_edge_of_medial_vertex(v):
    """The primal edge whose midpoint is the medial vertex v, as (p, q)."""
    if not is_medial(v):
        raise ValueError(f"{v} is not a medial vertex")
    if v[0] % 2 == 1:  # x odd, y even: endpoints east/west internally
        return (v[0] - 1, v[1]), (v[0] + 1, v[1])
    return (v[0], v[1] - 1), (v[0], v[1] + 1)


def dual_edge_of_medial_vertex(v):
    """The dual edge crossing the same midpoint, as (w1, w2)."""
    if v[0] % 2 == 1:
        return (v[0], v[1] - 1), (v[0], v[1] + 1)
    return (v[0] - 1, v[1]), (v[0] + 1, v[1])


# ---------------------------------------------------------------------------
# lines ell(e) and projections

def line_for_direction(z):
    """Unit representative (argument in [0, pi)) of the line through
    sqrt(conj(z)) for a direction z, i.e. ell(e) for an edge pointing along z."""
    z = complex(z)
    if z == 0:
        raise ValueError("zero direction")
    u = cmath.sqrt(z.conjugate() / abs(z))
    if u.imag < 0 or (u.imag == 0 and u.real < 0):
        u = -u
    return u


def line_of_edge(u, v):
    """ell(e) of the medial edge {u, v}, from its canonical orientation.

    The line belongs to the undirected edge, so querying with either
    direction returns the same representative.
    """
    d = canonical_direction(u, v)
    return line_for_direction(embed_dir(d))


def project_on_line(u_rep, z):
    """Orthogonal projection of z onto the line u_rep * R.

    Branch-free form (z + u^2 * conj(z)) / 2, exact for unit representatives.
    """
    return (z + u_rep * u_rep * complex(z).conjugate()) / 2.0


# the four lines around a white face, as unit representatives
LINE_R = line_for_direction(1)            # horizontal edges oriented east
LINE_NE = line_for_direction(-1j)         # vertical edges oriented south
LINE_I = line_for_direction(-1)           # horizontal edges oriented west
LINE_NW = line_for_direction(1j)          # vertical edges oriented north


class MedialPath:
    """Directed path of medial steps with exact winding bookkeeping.

    Stores the start vertex and the sequence of internal step vectors; turn
    angles are integer quarter-turns (+1 = left = +pi/2).
    """

    def __init__(self, start, steps):
        self.start = tuple(start)
        self.steps = [tuple(s) for s in steps]
        for s in self.steps:
            if s not in MEDIAL_STEPS:
                raise ValueError(f"{s} is not a medial step")
        self.turns = [turn_quarters(a, b) for a, b in zip(self.steps, self.steps[1:])]

    def __len__(self):
        return len(self.steps)

    def vertices(self):
        out = [self.start]
        x, y = self.start
        for s in self.steps:
            x, y = x + s[0], y + s[1]
            out.append((x, y))
        return out

    def winding_quarters(self, i=0, j=None):
        """Sum of quarter turns strictly between steps i and j (inclusive ends)."""
        if j is None:
            j = len(self.steps) - 1
        if not (0 <= i <= j < len(self.steps)):
            raise IndexError(f"winding range [{i}, {j}] out of bounds")
        return sum(self.turns[i:j])

    def winding(self, i=0, j=None):
        """Winding in radians between steps i and j (a multiple of pi/2)."""
        return self.winding_quarters(i, j) * math.pi / 2.0

    def concat(self, other):
        if other.start != self.vertices()[-1]:
            raise ValueError("paths do not share an endpoint")
        return MedialPath(self.start, self.steps + other.steps)
