"""Exact planar lattice geometry for almost-toric base diagrams.

Primitive vectors, affine length/distance, Delzant polygons with corner
chopping, the AGL(2,Z) action, exact half-plane feasibility, and the
embedding predicates for surgery triangles.  All coordinates are exact
rationals; there is no floating point and no tolerance anywhere.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from math import gcd
from typing import Iterable, NamedTuple, Optional, Sequence

from .rat import Q, ZERO, rat, rat_str


class GeometryError(ValueError):
    pass


class Point(NamedTuple):
    x: Q
    y: Q

    def __add__(self, other):  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])


class PrimitiveVector(NamedTuple):
    a: int
    b: int


def pt(x, y) -> Point:
    return Point(rat(x), rat(y))


def det2(u, v) -> Q:
    """Determinant of the 2x2 matrix with columns u, v."""
    return u[0] * v[1] - u[1] * v[0]


def dot2(u, v) -> Q:
    return u[0] * v[0] + u[1] * v[1]


def primitive_of(v) -> tuple[PrimitiveVector, Q]:
    """Split a nonzero rational vector as (primitive direction, positive multiplier).

    For integer input the multiplier is gcd(|a|, |b|); the sign stays on
    the primitive vector so the multiplier is always positive.
    """
    vx, vy = rat(v[0]), rat(v[1])
    if vx == 0 and vy == 0:
        raise GeometryError("zero vector has no primitive direction")
    # Clear denominators, then divide out the integer content.
    d = int((vx.denominator * vy.denominator) // gcd(int(vx.denominator), int(vy.denominator)))
    nx = int(vx.numerator) * (d // int(vx.denominator))
    ny = int(vy.numerator) * (d // int(vy.denominator))
    g = gcd(abs(nx), abs(ny))
    return PrimitiveVector(nx // g, ny // g), Q(g, d)


def affine_length(a: Point, b: Point) -> Q:
    """Lattice-normalized length of the segment ab (rational slope)."""
    if a == b:
        raise GeometryError("degenerate segment has no affine length")
    return primitive_of((b.x - a.x, b.y - a.y))[1]


def affine_distance(o: Point, a: Point, b: Point) -> Q:
    """Lattice-normalized distance from o to the line through a, b.

    Equals |det(p, a - o)| for p the primitive direction of ab; any path
    from o to the segment gives the same value, so no path is needed.
    """
    p, _ = primitive_of((b.x - a.x, b.y - a.y))
    return abs(det2(p, (a.x - o.x, a.y - o.y)))


def _rot90(v: PrimitiveVector) -> PrimitiveVector:
    """Inward normal of a counterclockwise edge direction."""
    return PrimitiveVector(-v.b, v.a)


@dataclass(frozen=True)
class LatticePolygon:
    """Convex counterclockwise polygon with rational vertices.

    Vertices are strictly convex (no three consecutive collinear) and
    edge i runs from vertices[i] to vertices[i+1].  edge_labels, when
    present, tag edges with opaque identifiers that survive chopping.
    """

    vertices: tuple[Point, ...]
    edge_labels: Optional[tuple[object, ...]] = None

    def __post_init__(self):
        v = self.vertices
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        m = len(v)
        for i in range(m):
            e1 = (v[(i + 1) % m].x - v[i].x, v[(i + 1) % m].y - v[i].y)
            e2 = (v[(i + 2) % m].x - v[(i + 1) % m].x, v[(i + 2) % m].y - v[(i + 1) % m].y)
            if det2(e1, e2) <= 0:
                raise GeometryError(
                    f"polygon not strictly convex/counterclockwise at vertex {(i + 1) % m}"
                )
        if self.edge_labels is not None and len(self.edge_labels) != m:
            raise GeometryError("one label per edge expected")

    def __len__(self) -> int:
        return len(self.vertices)

    def edge(self, i: int) -> tuple[Point, Point]:
        v = self.vertices
        return v[i], v[(i + 1) % len(v)]

    def edge_direction(self, i: int) -> PrimitiveVector:
        a, b = self.edge(i)
        return primitive_of((b.x - a.x, b.y - a.y))[0]

    def edge_length(self, i: int) -> Q:
        a, b = self.edge(i)
        return affine_length(a, b)

    def edge_lengths(self) -> tuple[Q, ...]:
        return tuple(self.edge_length(i) for i in range(len(self)))

    def label_index(self, label) -> int:
        if self.edge_labels is None:
            raise GeometryError("polygon has no edge labels")
        return self.edge_labels.index(label)

    def area(self) -> Q:
        v = self.vertices
        s = ZERO
        for i in range(len(v)):
            s += det2(v[i], v[(i + 1) % len(v)])
        return s / 2

    def contains(self, p: Point, strict: bool = False) -> bool:
        for i in range(len(self)):
            a, _ = self.edge(i)
            # interior lies on the positive side of every ccw edge
            s = det2(self.edge_direction(i), (p.x - a.x, p.y - a.y))
            if s < 0 or (strict and s == 0):
                return False
        return True

    def distance_to_edge(self, p: Point, i: int) -> Q:
        a, b = self.edge(i)
        return affine_distance(p, a, b)


def polygon(points: Iterable, labels: Optional[Sequence] = None) -> LatticePolygon:
    verts = tuple(pt(p[0], p[1]) for p in points)
    return LatticePolygon(verts, tuple(labels) if labels is not None else None)


class DelzantReport(NamedTuple):
    ok: bool
    violations: tuple[int, ...]  # vertex indices where |det| != 1


def is_delzant(poly: LatticePolygon) -> DelzantReport:
    """Check that adjacent primitive edge directions form a Z^2 basis.

    At every vertex the two primitive directions emanating from it must
    have determinant +-1 (toric smoothness).
    """
    bad = []
    v = poly.vertices
    m = len(v)
    for i in range(m):
        out_next, _ = primitive_of((v[(i + 1) % m].x - v[i].x, v[(i + 1) % m].y - v[i].y))
        out_prev, _ = primitive_of((v[i - 1].x - v[i].x, v[i - 1].y - v[i].y))
        if abs(det2(out_next, out_prev)) != 1:
            bad.append(i)
    return DelzantReport(not bad, tuple(bad))


def chop_corner(poly: LatticePolygon, vertex_index: int, size, label=None) -> LatticePolygon:
    """Truncate the corner at a vertex by the given affine size.

    The vertex V with emanating primitive directions u (toward the next
    vertex) and w (toward the previous) is replaced by the edge from
    V + size*w to V + size*u, which has affine length exactly `size`.
    The size must be strictly less than both adjacent edge lengths.
    """
    size = rat(size)
    if size <= 0:
        raise GeometryError("chop size must be positive")
    v = poly.vertices
    m = len(v)
    i = vertex_index % m
    u, len_next = primitive_of((v[(i + 1) % m].x - v[i].x, v[(i + 1) % m].y - v[i].y))
    w, len_prev = primitive_of((v[i - 1].x - v[i].x, v[i - 1].y - v[i].y))
    if abs(det2(u, w)) != 1:
        raise GeometryError(f"vertex {i} is not a Delzant corner")
    if size >= len_next or size >= len_prev:
        raise GeometryError(
            f"chop size {rat_str(size)} not strictly below both edge lengths at vertex {i}"
        )
    a = Point(v[i].x + size * w.a, v[i].y + size * w.b)
    b = Point(v[i].x + size * u.a, v[i].y + size * u.b)
    verts = v[:i] + (a, b) + v[i + 1:]
    labels = None
    if poly.edge_labels is not None:
        lab = list(poly.edge_labels)
        # incoming edge i-1 keeps its label, the new edge is inserted at i
        lab.insert(i, label)
        labels = tuple(lab)
    elif label is not None:
        labels = tuple([None] * (i) + [label] + [None] * (m - i))
    return LatticePolygon(verts, labels)


TRAPEZOID_ROLES = ("Y", "X'", "Z", "X")


def make_trapezoid(k: int, x, y, z, labels: Optional[Sequence] = None,
                   allow_degenerate: bool = False) -> LatticePolygon:
    """Canonical embedding of the k-trapezoid with edge lengths y, x, z, x.

    Vertices (0,0), (y,0), (y-kx,x), (0,x); edges are labeled in the
    order bottom Y, right X' (direction (-k,1)), top Z, left X.  Requires
    y - z = kx with x, y > 0 and z > 0; z = 0 collapses the top edge to a
    point and is only allowed when explicitly requested (the polygon is
    then a triangle with edges Y, X', X).
    """
    x, y, z = rat(x), rat(y), rat(z)
    if k < 0:
        raise GeometryError("canonical trapezoid needs k >= 0")
    if y - z != k * x:
        raise GeometryError("trapezoid moduli must satisfy y - z = k*x")
    if x <= 0 or y <= 0 or z < 0 or (z == 0 and not allow_degenerate):
        raise GeometryError("trapezoid edge lengths must be positive")
    if labels is None:
        labels = TRAPEZOID_ROLES
    if z == 0:
        verts = (Point(ZERO, ZERO), Point(y, ZERO), Point(ZERO, x))
        labs = (labels[0], labels[1], labels[3])
        return LatticePolygon(verts, labs)
    verts = (Point(ZERO, ZERO), Point(y, ZERO), Point(y - k * x, x), Point(ZERO, x))
    return LatticePolygon(verts, tuple(labels))


def trapezoid_canonical(k: int, x, y, z) -> tuple[int, Q, Q, Q]:
    """Canonical representative under (k,x,y,z) ~ (-k,x,z,y) and (0,x,y,y) ~ (0,y,x,x).

    Output has k >= 0 with y >= z, and for k = 0 additionally x <= y.
    Pure relabeling; the modulus constraint is checked by make_trapezoid.
    """
    x, y, z = rat(x), rat(y), rat(z)
    if k < 0:
        k, y, z = -k, z, y
    if k == 0 and x > y:
        x, y, z = y, x, x
    return k, x, y, z


def apply_agl(poly: LatticePolygon, m: Sequence[Sequence[int]], t=(0, 0)) -> LatticePolygon:
    """Apply an AGL(2,Z) transformation V -> M V + t.

    M must be unimodular.  Orientation-reversing maps re-reverse the
    vertex list so the stored polygon stays counterclockwise; edge labels
    follow their edges.
    """
    d = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if d not in (1, -1):
        raise GeometryError("matrix must have determinant +-1")
    tx, ty = rat(t[0]), rat(t[1])
    verts = [Point(m[0][0] * v.x + m[0][1] * v.y + tx, m[1][0] * v.x + m[1][1] * v.y + ty)
             for v in poly.vertices]
    labels = poly.edge_labels
    if d == -1:
        n = len(verts)
        verts = [verts[0]] + verts[:0:-1]
        if labels is not None:
            # old edge (i, i+1) becomes the edge starting at new index n-1-i
            relab = [None] * n
            for i in range(n):
                relab[(n - 1 - i) % n] = labels[i]
            labels = tuple(relab)
    return LatticePolygon(tuple(verts), labels)


def edge_self_intersections(poly: LatticePolygon) -> tuple[int, ...]:
    """Self-intersection of the toric divisor component over each edge.

    Solves the fan relation nu_{i-1} + nu_{i+1} + a_i nu_i = 0 for the
    inward normals nu of a Delzant polygon.
    """
    rep = is_delzant(poly)
    if not rep.ok:
        raise GeometryError(f"polygon is not Delzant at vertices {rep.violations}")
    m = len(poly)
    nus = [_rot90(poly.edge_direction(i)) for i in range(m)]
    out = []
    for i in range(m):
        s = (nus[i - 1].a + nus[(i + 1) % m].a, nus[i - 1].b + nus[(i + 1) % m].b)
        n = nus[i]
        a = -(s[0] // n.a) if n.a != 0 else -(s[1] // n.b)
        if (s[0] + a * n.a, s[1] + a * n.b) != (0, 0):
            raise GeometryError(f"fan relation failed at edge {i}")
        out.append(a)
    return tuple(out)


# --- exact half-plane feasibility ------------------------------------------


class HalfPlane(NamedTuple):
    """The set {O : det(direction, O - anchor) >= offset}."""

    anchor: Point
    direction: PrimitiveVector
    offset: Q

    def normal(self) -> PrimitiveVector:
        return _rot90(self.direction)

    def bound(self) -> Q:
        # n . O >= bound where n is the inward normal
        n = self.normal()
        return self.offset + n.a * self.anchor.x + n.b * self.anchor.y

    def holds(self, p: Point, strict: bool = False) -> bool:
        n = self.normal()
        v = n.a * p.x + n.b * p.y - self.bound()
        return v > 0 if strict else v >= 0


def edge_constraint(poly: LatticePolygon, i: int, weight) -> HalfPlane:
    """Half-plane where the affine distance to edge i is at least `weight`."""
    a, _ = poly.edge(i)
    return HalfPlane(a, poly.edge_direction(i), rat(weight))


class FeasibleRegion(NamedTuple):
    empty: bool
    witness: Optional[Point]
    vertices: tuple[Point, ...]
    unbounded: bool


def _angle_half(v) -> int:
    """0 for directions in the upper half (incl. positive x-axis), else 1."""
    a, b = v
    return 0 if (b > 0 or (b == 0 and a > 0)) else 1


def _dir_sorted(dirs):
    def cmp(u, v):
        hu, hv = _angle_half(u), _angle_half(v)
        if hu != hv:
            return -1 if hu < hv else 1
        d = det2(u, v)
        return 0 if d == 0 else (-1 if d > 0 else 1)

    return sorted(dirs, key=functools.cmp_to_key(cmp))


def _recession_nontrivial(normals) -> bool:
    """True iff some direction d != 0 satisfies n . d >= 0 for all normals."""
    dirs = []
    for n in normals:
        if (n.a, n.b) not in dirs:
            dirs.append((n.a, n.b))
    if len(dirs) <= 1:
        return True
    dirs = _dir_sorted(dirs)
    k = len(dirs)
    for i in range(k):
        u, v = dirs[i], dirs[(i + 1) % k]
        # the cyclic gap from u to v is >= pi iff v does not lie strictly
        # within the open ccw half-turn starting at u
        d = det2(u, v)
        if d < 0 or (d == 0 and dot2(u, v) < 0):
            return True
    return False


def _hull_order(points: list[Point]) -> list[Point]:
    """Order extreme points counterclockwise (monotone chain hull)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and det2(
                (out[-1].x - out[-2].x, out[-1].y - out[-2].y),
                (p.x - out[-1].x, p.y - out[-1].y),
            ) <= 0:
                out.pop()
            out.append(p)
        return out
    lower = half(pts)
    upper = half(pts[::-1])
    return lower[:-1] + upper[:-1]


def halfplane_feasible(constraints: Sequence[HalfPlane]) -> FeasibleRegion:
    """Exact intersection of finitely many half-planes.

    Returns emptiness, the vertex list of the region (hull-ordered), an
    unbounded flag, and a deterministic witness: the lexicographically
    smallest (x, then y) vertex when a vertex exists.
    """
    cons = list(constraints)
    if not cons:
        return FeasibleRegion(False, Point(ZERO, ZERO), (), True)
    normals = [c.normal() for c in cons]
    bounds = [c.bound() for c in cons]

    # rank of the normal set
    rank2 = any(det2(normals[0], n) != 0 for n in normals)
    if not rank2:
        # all constraints parallel: bounds on t = n0 . x
        n0 = normals[0]
        lo, hi = None, None
        for n, b in zip(normals, bounds):
            # n = lam * n0 with lam = +-(integer ratio); primitive, so +-1
            lam = 1 if (n.a, n.b) == (n0.a, n0.b) else -1
            if lam == 1:
                lo = b if lo is None or b > lo else lo
            else:
                hi = -b if hi is None or -b < hi else hi
        if lo is not None and hi is not None and lo > hi:
            return FeasibleRegion(True, None, (), False)
        t = lo if lo is not None else (hi if hi is not None else ZERO)
        nn = Q(n0.a * n0.a + n0.b * n0.b)
        w = Point(t * n0.a / nn, t * n0.b / nn)
        return FeasibleRegion(False, w, (), True)

    # candidate vertices: pairwise boundary intersections satisfying everything
    k = len(cons)
    feas: list[Point] = []
    for i in range(k):
        ni, bi = normals[i], bounds[i]
        for j in range(i + 1, k):
            nj, bj = normals[j], bounds[j]
            d = Q(ni.a * nj.b - ni.b * nj.a)
            if d == 0:
                continue
            x = (bi * nj.b - bj * ni.b) / d
            y = (bj * ni.a - bi * nj.a) / d
            p = Point(x, y)
            if all(n.a * x + n.b * y >= b for n, b in zip(normals, bounds)):
                feas.append(p)
    if not feas:
        return FeasibleRegion(True, None, (), False)
    # keep genuine vertices: active normals must span rank 2
    verts = []
    for p in set(feas):
        active = [n for n, b in zip(normals, bounds) if n.a * p.x + n.b * p.y == b]
        if any(det2(active[0], n) != 0 for n in active):
            verts.append(p)
    ordered = _hull_order(verts)
    witness = min(verts)
    unbounded = _recession_nontrivial(normals)
    return FeasibleRegion(False, witness, tuple(ordered), unbounded)


# --- surgery triangle embedding --------------------------------------------


class EmbeddingReport(NamedTuple):
    ok: bool
    problems: tuple[str, ...]


def _triangle_points(poly: LatticePolygon, tri) -> tuple[Point, Point, Point]:
    """Base endpoints and apex of a triangle given as (edge, start, size, apex)."""
    edge, start, size, apex = tri[0], rat(tri[1]), rat(tri[2]), tri[3]
    a, _ = poly.edge(edge)
    p = poly.edge_direction(edge)
    b1 = Point(a.x + start * p.a, a.y + start * p.b)
    b2 = Point(a.x + (start + size) * p.a, a.y + (start + size) * p.b)
    return b1, b2, Point(rat(apex[0]), rat(apex[1]))


def _interiors_disjoint(t1, t2) -> bool:
    """Exact separating-axis test; touching boundaries still count as disjoint."""
    for tri_a, tri_b in ((t1, t2), (t2, t1)):
        for i in range(3):
            e = (tri_a[(i + 1) % 3].x - tri_a[i].x, tri_a[(i + 1) % 3].y - tri_a[i].y)
            n = (-e[1], e[0])
            base = n[0] * tri_a[i].x + n[1] * tri_a[i].y
            amax = max(n[0] * p.x + n[1] * p.y for p in tri_a)
            amin = min(n[0] * p.x + n[1] * p.y for p in tri_a)
            bmax = max(n[0] * p.x + n[1] * p.y for p in tri_b)
            bmin = min(n[0] * p.x + n[1] * p.y for p in tri_b)
            if amax <= bmin or bmax <= amin:
                return True
    return False


def verify_embedding(poly: LatticePolygon, triangles: Sequence) -> EmbeddingReport:
    """Check that surgery triangles embed disjointly in the polygon.

    Each triangle is (edge index, start offset, size, apex).  Accepts iff
    every triangle lies in the polygon, bases sit strictly inside their
    edges (no vertex contact), and interiors are pairwise disjoint.
    """
    problems = []
    pts = []
    for idx, tri in enumerate(triangles):
        edge, start, size = tri[0], rat(tri[1]), rat(tri[2])
        tpts = _triangle_points(poly, tri)
        pts.append(tpts)
        if start <= 0 or start + size >= poly.edge_length(edge):
            problems.append(f"triangle {idx}: base not strictly inside edge {edge}")
        for corner in tpts:
            if not poly.contains(corner):
                problems.append(f"triangle {idx}: vertex outside polygon")
                break
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if not _interiors_disjoint(pts[i], pts[j]):
                problems.append(f"triangles {i} and {j} overlap")
    return EmbeddingReport(not problems, tuple(problems))


# --- JSON --------------------------------------------------------------------


def polygon_to_json(poly: LatticePolygon) -> dict:
    out = {"vertices": [[rat_str(v.x), rat_str(v.y)] for v in poly.vertices]}
    if poly.edge_labels is not None:
        out["labels"] = [None if l is None else str(l) for l in poly.edge_labels]
    return out


def polygon_from_json(data: dict) -> LatticePolygon:
    labels = data.get("labels")
    return polygon(data["vertices"], labels)
