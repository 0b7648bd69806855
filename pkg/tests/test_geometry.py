import random

import pytest

from lcyatf.geometry import (
    GeometryError,
    HalfPlane,
    LatticePolygon,
    Point,
    affine_distance,
    affine_length,
    apply_agl,
    chop_corner,
    edge_constraint,
    edge_self_intersections,
    halfplane_feasible,
    is_delzant,
    make_trapezoid,
    polygon,
    polygon_from_json,
    polygon_to_json,
    primitive_of,
    pt,
    trapezoid_canonical,
    verify_embedding,
)
from lcyatf.rat import Q


CP2 = polygon([(0, 0), (3, 0), (0, 3)])
SQUARE4 = polygon([(0, 0), (4, 0), (4, 4), (0, 4)])


def test_primitive_of():
    assert primitive_of((4, 6)) == ((2, 3), 2)
    assert primitive_of((1, 0)) == ((1, 0), 1)
    assert primitive_of((-3, 0)) == ((-1, 0), 3)
    assert primitive_of((Q(5, 2), 0)) == ((1, 0), Q(5, 2))
    with pytest.raises(GeometryError):
        primitive_of((0, 0))


def test_affine_length():
    assert affine_length(pt(0, 0), pt(4, 6)) == 2
    assert affine_length(pt(0, 0), pt(1, 0)) == 1
    assert affine_length(pt(0, 0), pt(Q(5, 2), 0)) == Q(5, 2)
    with pytest.raises(GeometryError):
        affine_length(pt(1, 1), pt(1, 1))


def test_affine_distance():
    assert affine_distance(pt(1, 1), pt(0, 0), pt(3, 0)) == 1
    assert affine_distance(pt(0, 0), pt(1, 0), pt(0, 1)) == 1
    assert affine_distance(pt(2, 2), pt(0, 0), pt(4, 0)) == 2


def test_affine_distance_representative_independent():
    rnd = random.Random(7)
    for _ in range(50):
        a = pt(rnd.randint(-5, 5), rnd.randint(-5, 5))
        d = (rnd.randint(-4, 4), rnd.randint(-4, 4))
        if d == (0, 0):
            continue
        b = Point(a.x + d[0], a.y + d[1])
        o = pt(rnd.randint(-5, 5), rnd.randint(-5, 5))
        q = Q(rnd.randint(1, 9), rnd.randint(1, 9))
        p, _ = primitive_of(d)
        b2 = Point(b.x + q * p.a, b.y + q * p.b)
        assert affine_distance(o, a, b) == affine_distance(o, a, b2)


def test_is_delzant():
    assert is_delzant(CP2).ok
    assert is_delzant(SQUARE4).ok
    bad = polygon([(0, 0), (2, 0), (0, 1)])
    rep = is_delzant(bad)
    assert not rep.ok
    # the determinant oracle localizes the failure at (0, 1)
    assert rep.violations == (2,)


def test_chop_corner():
    chopped = chop_corner(CP2, 0, 1)
    assert chopped.vertices == (pt(0, 1), pt(1, 0), pt(3, 0), pt(0, 3))
    assert is_delzant(chopped).ok
    assert chopped.edge_length(0) == 1  # the new edge (0,1)-(1,0)
    second = chop_corner(CP2, 1, Q(1, 2))
    assert is_delzant(second).ok
    assert second.area() == CP2.area() - Q(1, 8)
    with pytest.raises(GeometryError):
        chop_corner(CP2, 0, 3)


def test_chop_preserves_delzant_and_area():
    rnd = random.Random(3)
    poly = SQUARE4
    for _ in range(6):
        i = rnd.randrange(len(poly))
        bound = min(poly.edge_length(i % len(poly)), poly.edge_length((i - 1) % len(poly)))
        size = bound * Q(1, rnd.randint(3, 7))
        before = poly.area()
        poly = chop_corner(poly, i, size)
        assert is_delzant(poly).ok
        assert before - poly.area() == size * size / 2


def test_make_trapezoid():
    t = make_trapezoid(2, 6, 16, 4)
    assert t.vertices == (pt(0, 0), pt(16, 0), pt(4, 6), pt(0, 6))
    assert t.edge_labels == ("Y", "X'", "Z", "X")
    assert make_trapezoid(0, 1, 1, 1).vertices == (pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1))
    d2, di, dj = Q(1, 8), Q(1, 16), Q(1, 32)
    w = make_trapezoid(1, 1 - d2, 2 - d2 - di - dj, 1 - di - dj)
    assert is_delzant(w).ok
    with pytest.raises(GeometryError):
        make_trapezoid(2, 1, 4, 1)
    with pytest.raises(GeometryError):
        make_trapezoid(1, 1, 1, 0)
    tri = make_trapezoid(1, 1, 1, 0, allow_degenerate=True)
    assert len(tri) == 3 and is_delzant(tri).ok


def test_trapezoid_canonical():
    assert trapezoid_canonical(-2, 1, 3, 7) == (2, 1, 7, 3)
    assert trapezoid_canonical(0, 5, 2, 2) == (0, 2, 5, 5)
    assert trapezoid_canonical(1, 1, 2, 1) == (1, 1, 2, 1)


def test_apply_agl():
    moved = apply_agl(CP2, [[1, 0], [0, 1]], (1, 1))
    assert moved.vertices == (pt(1, 1), pt(4, 1), pt(1, 4))
    unit = polygon([(0, 0), (1, 0), (1, 1), (0, 1)], labels=list("abcd"))
    sheared = apply_agl(unit, [[1, 1], [0, 1]])
    assert sheared.edge_lengths() == unit.edge_lengths()
    reflected = apply_agl(unit, [[0, 1], [1, 0]])
    assert reflected.area() == unit.area()
    # labels follow their edges through the orientation fix
    assert sorted(reflected.edge_labels) == list("abcd")
    with pytest.raises(GeometryError):
        apply_agl(CP2, [[2, 0], [0, 1]])


def test_agl_invariance_of_lengths_and_distances():
    rnd = random.Random(11)
    mats = [[[1, 1], [0, 1]], [[0, -1], [1, 0]], [[1, 0], [3, 1]], [[0, 1], [1, 0]],
            [[2, 1], [1, 1]]]
    for _ in range(40):
        m = rnd.choice(mats)
        t = (rnd.randint(-3, 3), rnd.randint(-3, 3))
        a = pt(rnd.randint(-4, 4), rnd.randint(-4, 4))
        b = pt(rnd.randint(-4, 4), rnd.randint(-4, 4))
        o = pt(rnd.randint(-4, 4), rnd.randint(-4, 4))
        if a == b:
            continue
        def f(p):
            return pt(m[0][0] * p.x + m[0][1] * p.y + t[0], m[1][0] * p.x + m[1][1] * p.y + t[1])
        assert affine_length(a, b) == affine_length(f(a), f(b))
        assert affine_distance(o, a, b) == affine_distance(f(o), f(a), f(b))


def test_edge_self_intersections():
    assert edge_self_intersections(CP2) == (1, 1, 1)
    assert edge_self_intersections(polygon([(0, 0), (1, 0), (1, 1), (0, 1)])) == (0, 0, 0, 0)
    for k in (0, 1, 2, 3):
        t = make_trapezoid(k, 2, 9 + 2 * k, 9)
        assert edge_self_intersections(t) == (k, 0, -k, 0)


def test_charge_zero_for_chopped_trapezoids():
    rnd = random.Random(5)
    for _ in range(10):
        k = rnd.randint(0, 3)
        x = Q(rnd.randint(2, 5))
        z = Q(rnd.randint(2, 5))
        poly = make_trapezoid(k, x, z + k * x, z)
        for _ in range(rnd.randint(0, 3)):
            i = rnd.randrange(len(poly))
            bound = min(poly.edge_length(i), poly.edge_length(i - 1))
            poly = chop_corner(poly, i, bound * Q(1, 3))
        a = edge_self_intersections(poly)
        n = len(poly)
        d_sq = sum(a) + 2 * n
        assert 12 - d_sq - n == 0


def test_halfplane_feasible_square():
    cons = [edge_constraint(SQUARE4, i, 1) for i in range(4)]
    reg = halfplane_feasible(cons)
    assert not reg.empty and not reg.unbounded
    assert reg.witness == pt(1, 1)
    assert set(reg.vertices) == {pt(1, 1), pt(3, 1), pt(3, 3), pt(1, 3)}


def test_halfplane_feasible_point_and_empty():
    cons = [edge_constraint(SQUARE4, i, 2) for i in range(4)]
    reg = halfplane_feasible(cons)
    assert reg.witness == pt(2, 2)
    assert reg.vertices == (pt(2, 2),)
    bad = [
        HalfPlane(pt(0, 0), primitive_of((1, 0))[0], Q(1)),
        HalfPlane(pt(0, 0), primitive_of((-1, 0))[0], Q(1)),
    ]
    assert halfplane_feasible(bad).empty


def test_halfplane_feasible_unbounded():
    cons = [HalfPlane(pt(0, 0), primitive_of((1, 0))[0], Q(0)),
            HalfPlane(pt(0, 0), primitive_of((0, -1))[0], Q(0))]
    reg = halfplane_feasible(cons)
    assert not reg.empty and reg.unbounded
    assert reg.witness == pt(0, 0)


def test_halfplane_feasible_vs_grid_oracle():
    rnd = random.Random(17)
    for _ in range(60):
        cons = []
        for _ in range(rnd.randint(1, 8)):
            d = (rnd.randint(-3, 3), rnd.randint(-3, 3))
            if d == (0, 0):
                d = (1, 0)
            cons.append(HalfPlane(pt(rnd.randint(-3, 3), rnd.randint(-3, 3)),
                                  primitive_of(d)[0], Q(rnd.randint(-2, 2))))
        reg = halfplane_feasible(cons)
        grid_pts = [pt(Q(i, 4), Q(j, 4)) for i in range(-16, 17) for j in range(-16, 17)]
        grid_feasible = [p for p in grid_pts if all(c.holds(p) for c in cons)]
        if grid_feasible:
            assert not reg.empty
        if not reg.empty:
            assert all(c.holds(reg.witness) for c in cons)
            assert all(all(c.holds(v) for c in cons) for v in reg.vertices)


def test_verify_embedding():
    tri = [(0, 1, 1, (Q(3, 2), 1))]
    assert verify_embedding(SQUARE4, tri).ok
    overlapping = [(0, 1, 2, (2, 2)), (0, Q(3, 2), 2, (Q(5, 2), 2))]
    rep = verify_embedding(SQUARE4, overlapping)
    assert not rep.ok and any("overlap" in p for p in rep.problems)
    touching_vertex = [(0, 0, 1, (1, 1))]
    assert not verify_embedding(SQUARE4, touching_vertex).ok
    outside = [(0, 1, 1, (Q(3, 2), 5))]
    assert not verify_embedding(SQUARE4, outside).ok


def test_polygon_json_roundtrip():
    poly = chop_corner(make_trapezoid(1, 2, 5, 3), 0, Q(1, 2), label="c0")
    data = polygon_to_json(poly)
    back = polygon_from_json(data)
    assert back.vertices == poly.vertices
    assert back.edge_labels == tuple(
        None if l is None else str(l) for l in poly.edge_labels)
