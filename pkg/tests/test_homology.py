import random

import pytest

from lcyatf.homology import (
    AreaVector,
    HomologyError,
    NonToricBlowup,
    ToricBlowup,
    anticanonical,
    areas,
    basis_e,
    basis_h,
    blowdown,
    blowup,
    cls,
    cycle_from_json,
    cycle_to_json,
    h_minus,
    in_c1_nef,
    is_nontoric_exceptional,
    is_reduced,
    make_cycle,
    pairing,
    s_area_sequences,
    taut_equal,
    validate_cycle,
)
from lcyatf.rat import Q


def test_pairing():
    n = 4
    assert pairing(basis_h(n), basis_h(n)) == 1
    assert pairing(basis_e(1, n), basis_e(1, n)) == -1
    a = cls(2, 0, -1, -1, 0)          # 2H - E2 - E3
    b = cls(1, -1, 0, -1, -1)         # H - E1 - E3 - E4
    assert pairing(a, b) == 1


def test_validate_cycle():
    d = make_cycle([basis_h(1), basis_h(1), h_minus([1], 1)], areas(1, [Q(1, 3)]))
    rep = validate_cycle(d)
    assert rep.ok and rep.charge == 1 and not rep.toric

    two = make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 4)]))
    rep2 = validate_cycle(two)
    assert rep2.ok and rep2.charge == 2

    bad = make_cycle([cls(2, 0), cls(1, 0)], areas(1, [Q(1, 4)]))
    assert not validate_cycle(bad).ok


def test_is_reduced_and_nef():
    third = Q(1, 3)
    assert is_reduced(areas(1, [third, third, third]))
    assert not is_reduced(areas(1, [Q(1, 2), Q(1, 2), Q(1, 2)]))
    assert not is_reduced(areas(1, [Q(3, 10), Q(4, 10)]))
    assert in_c1_nef(areas(1, [third, third, third]))
    assert in_c1_nef(areas(1, [Q(1, 2), Q(1, 4), Q(1, 4)]))
    with pytest.raises(HomologyError):
        in_c1_nef(areas(1, [1, 1, Q(9, 10)]))


def test_blowup_toric_and_nontoric():
    d = make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 5)]))
    t = blowup(d, ToricBlowup(0, 0, Q(1, 10), 2))
    assert [c.coeffs for c in t.components] == [(2, 0, -1), (0, 0, 1), (1, -1, -1)]
    assert validate_cycle(t).ok
    assert t.charge() == d.charge()

    nt = blowup(d, NonToricBlowup(0, Q(1, 10), 2))
    assert [c.coeffs for c in nt.components] == [(2, 0, -1), (1, -1, 0)]
    assert validate_cycle(nt).ok
    assert nt.charge() == d.charge() + 1

    with pytest.raises(HomologyError):
        blowup(d, NonToricBlowup(1, Q(2), 2))  # size above the component area


def test_blowup_fourth_example_shape():
    # two toric blowups at the two nodes of a 2-component cycle
    d = make_cycle([cls(100, -99, -1, 0), cls(-97, 98, 0, -1)],
                   areas(1, [Q(99, 100), Q(1, 100), Q(1, 100)]))
    e = Q(1, 1000)
    d1 = blowup(d, ToricBlowup(0, 0, e, 4))
    g = next(g for g in range(len(d1)) if set(d1.gap_pair(g)) == {2, 0})
    d2 = blowup(d1, ToricBlowup(g, 0, e, 5))
    keys = sorted(c.coeffs for c in d2.components)
    assert keys == sorted([
        (100, -99, -1, 0, -1, -1), (0, 0, 0, 0, 1, 0),
        (-97, 98, 0, -1, -1, -1), (0, 0, 0, 0, 0, 1)])
    assert validate_cycle(d2).ok


def test_blowdown_tor_and_nontoric():
    d = make_cycle([basis_h(3), h_minus([3], 3), h_minus([1, 2], 3)],
                   areas(1, [Q(1, 3), Q(1, 3), Q(1, 3)]))
    d2, step = blowdown(d, 3)
    assert [c.coeffs for c in d2.components] == [(1, 0, 0), (1, 0, 0), (1, -1, -1)]
    assert isinstance(step, NonToricBlowup) and step.size == Q(1, 3)

    t = make_cycle([cls(2, 0, -1), basis_e(2, 2), h_minus([1, 2], 2)],
                   areas(1, [Q(1, 5), Q(1, 10)]))
    t2, tstep = blowdown(t, 2)
    assert [c.coeffs for c in t2.components] == [(2, 0), (1, -1)]
    assert isinstance(tstep, ToricBlowup) and tstep.size == Q(1, 10)

    base = make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 4)]))
    with pytest.raises(HomologyError):
        blowdown(base, 1)  # would leave rank 0


def test_blowup_blowdown_roundtrip():
    rnd = random.Random(23)
    d = make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 5)]))
    for _ in range(60):
        k = d.n + 1
        if rnd.random() < 0.5:
            g = rnd.randrange(len(d))
            slot = rnd.randrange(len(d.nodes[g]))
            i, j = d.gap_pair(g)
            bound = min(d.component_area(i), d.component_area(j))
            step = ToricBlowup(g, slot, bound / rnd.randint(2, 5), k)
        else:
            p = rnd.randrange(len(d))
            step = NonToricBlowup(p, d.component_area(p) / rnd.randint(2, 5), k)
        up = blowup(d, step)
        assert validate_cycle(up).ok
        back, inverse = blowdown(up, k)
        assert [c.coeffs for c in back.components] == [c.coeffs for c in d.components]
        assert back.areas == d.areas
        assert inverse.size == step.size and inverse.index == k
        # charge bookkeeping: toric keeps q, non-toric raises it by one
        dq = up.charge() - d.charge()
        assert dq == (0 if isinstance(step, ToricBlowup) else 1)
        # omega . c1 recomputes consistently
        assert 3 * up.areas.c - sum(up.areas.deltas, Q(0)) == \
            3 * d.areas.c - sum(d.areas.deltas, Q(0)) - step.size
        if rnd.random() < 0.6 and up.n < 9:
            d = up


def test_is_nontoric_exceptional():
    x_eps = make_cycle(
        [cls(1, -1, 0, -1, -1, -1), basis_e(3, 5), cls(2, 0, -1, -1, 0, -1), basis_e(5, 5)],
        areas(1, [Q(1, 4), Q(1, 5), Q(1, 6), Q(1, 7), Q(1, 100)]))
    assert is_nontoric_exceptional(h_minus([2, 3], 5), x_eps)
    assert is_nontoric_exceptional(basis_e(1, 5), x_eps)
    two = make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 4)]))
    assert not is_nontoric_exceptional(h_minus([1], 1), two)


def test_s_area_sequences_and_taut():
    d = make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 4)]))
    s, a = s_area_sequences(d)
    assert s == (4, 0) and a == (2, Q(3, 4))

    tri = make_cycle([basis_h(0)] * 3, areas(1, []))
    assert s_area_sequences(tri) == ((1, 1, 1), (1, 1, 1))

    seq_s = (0, 1, 0, -1)
    seq_a = (Q(1), Q(2), Q(1), Q(3))
    rot_s = seq_s[2:] + seq_s[:2]
    rot_a = seq_a[2:] + seq_a[:2]
    assert taut_equal((seq_s, seq_a), (rot_s, rot_a))
    assert taut_equal((seq_s, seq_a), (seq_s[::-1], seq_a[::-1]))
    assert not taut_equal((seq_s, seq_a), (seq_s, (Q(1), Q(2), Q(1), Q(4))))


def test_validate_after_blowups_property():
    rnd = random.Random(5)
    for _ in range(20):
        d = make_cycle([basis_h(1), basis_h(1), h_minus([1], 1)], areas(1, [Q(1, 3)]))
        for _ in range(rnd.randint(1, 6)):
            k = d.n + 1
            if rnd.random() < 0.5:
                g = rnd.randrange(len(d))
                i, j = d.gap_pair(g)
                size = min(d.component_area(i), d.component_area(j)) / 3
                d = blowup(d, ToricBlowup(g, 0, size, k))
            else:
                p = rnd.randrange(len(d))
                d = blowup(d, NonToricBlowup(p, d.component_area(p) / 3, k))
            assert validate_cycle(d).ok


def test_cycle_json_roundtrip():
    d = make_cycle([basis_h(3), h_minus([3], 3), h_minus([1, 2], 3)],
                   areas(1, [Q(1, 3), Q(1, 3), Q(1, 4)]))
    data = cycle_to_json(d)
    back = cycle_from_json(data)
    assert [c.coeffs for c in back.components] == [c.coeffs for c in d.components]
    assert back.areas == d.areas
    assert data["adjacency"] == [[0, 1], [1, 2], [2, 0]]

    two = cycle_to_json(make_cycle([cls(2, 0), h_minus([1], 1)], areas(1, [Q(1, 4)])))
    assert two["adjacency"] == [[0, 1], [1, 0]]
    assert cycle_from_json(two).charge() == 2

    data["adjacency"] = [[0, 1], [1, 2], [1, 2]]
    with pytest.raises(HomologyError):
        cycle_from_json(data)
