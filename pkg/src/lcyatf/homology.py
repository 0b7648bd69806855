"""Intersection lattice of CP^2 # n C̄P^2 and the divisor-cycle calculus.

Homology classes live in the signature-(1, n) lattice with ordered basis
{H, E_1, ..., E_n}.  A divisor cycle is a cyclically ordered list of
classes summing to the anticanonical class 3H - E_1 - ... - E_n, with an
explicit record of the nodes shared by adjacent components.  Toric and
non-toric blowups/blowdowns act on cycles; everything is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

from .rat import Q, rat, rat_str


class HomologyError(ValueError):
    pass


@dataclass(frozen=True)
class HomologyClass:
    """Integer vector (h, e_1, ..., e_n) in the basis {H, E_1, ..., E_n}."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise HomologyError("coefficient vector may not be empty")

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @property
    def h(self) -> int:
        return self.coeffs[0]

    def e(self, i: int) -> int:
        return self.coeffs[i]

    def __add__(self, other: "HomologyClass") -> "HomologyClass":
        self._check_rank(other)
        return HomologyClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "HomologyClass") -> "HomologyClass":
        self._check_rank(other)
        return HomologyClass(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def _check_rank(self, other: "HomologyClass"):
        if self.n != other.n:
            raise HomologyError("rank mismatch")

    def extended(self, n: int) -> "HomologyClass":
        """Same class viewed in a larger lattice (new E-slots get 0)."""
        if n < self.n:
            raise HomologyError("cannot shrink a class by extension")
        return HomologyClass(self.coeffs + (0,) * (n - self.n))

    def truncated(self) -> "HomologyClass":
        """Drop the last E-slot; it must be zero."""
        if self.coeffs[-1] != 0:
            raise HomologyError("cannot drop a nonzero coefficient slot")
        return HomologyClass(self.coeffs[:-1])

    def key(self) -> tuple[int, ...]:
        return self.coeffs

    def __str__(self) -> str:
        terms = []
        if self.h:
            terms.append(f"{self.h}H" if self.h != 1 else "H")
        for i in range(1, self.n + 1):
            c = self.coeffs[i]
            if c:
                s = f"{'+' if c > 0 and terms else ''}{c if abs(c) != 1 else ('-' if c < 0 else '')}E{i}"
                terms.append(s)
        return "".join(terms) or "0"


def cls(*coeffs: int) -> HomologyClass:
    return HomologyClass(tuple(int(c) for c in coeffs))


def basis_h(n: int) -> HomologyClass:
    return HomologyClass((1,) + (0,) * n)


def basis_e(i: int, n: int) -> HomologyClass:
    if not 1 <= i <= n:
        raise HomologyError(f"E_{i} does not exist at rank {n}")
    return HomologyClass(tuple(1 if j == i else 0 for j in range(n + 1)))


def h_minus(indices: Sequence[int], n: int) -> HomologyClass:
    """The class H - E_{i_1} - E_{i_2} - ... at rank n."""
    c = [1] + [0] * n
    for i in indices:
        c[i] -= 1
    return HomologyClass(tuple(c))


def anticanonical(n: int) -> HomologyClass:
    return HomologyClass((3,) + (-1,) * n)


def pairing(a: HomologyClass, b: HomologyClass) -> int:
    """Signature-(1, n) intersection form: a.b = a_h b_h - sum a_i b_i."""
    a._check_rank(b)
    return a.coeffs[0] * b.coeffs[0] - sum(x * y for x, y in zip(a.coeffs[1:], b.coeffs[1:]))


@dataclass(frozen=True)
class AreaVector:
    """Symplectic areas: c on H and delta_i on E_i, all positive."""

    c: Q
    deltas: tuple[Q, ...]

    @property
    def n(self) -> int:
        return len(self.deltas)

    def area_of(self, cl: HomologyClass) -> Q:
        if cl.n != self.n:
            raise HomologyError("rank mismatch between class and areas")
        return cl.h * self.c + sum((d * e for d, e in zip(self.deltas, cl.coeffs[1:])), Q(0))

    def extended(self, size: Q) -> "AreaVector":
        return AreaVector(self.c, self.deltas + (rat(size),))

    def truncated(self) -> "AreaVector":
        return AreaVector(self.c, self.deltas[:-1])

    def normalized(self) -> "AreaVector":
        return AreaVector(Q(1), tuple(d / self.c for d in self.deltas))


def areas(c, deltas) -> AreaVector:
    return AreaVector(rat(c), tuple(rat(d) for d in deltas))


class ToricBlowup(NamedTuple):
    """Blow up the node in the given gap; the new class is E_index."""

    gap: int
    slot: int
    size: Q
    index: int

    kind = "toric"


class NonToricBlowup(NamedTuple):
    """Blow up a free point of the component at `pos`; new class E_index."""

    pos: int
    size: Q
    index: int

    kind = "nontoric"


BlowupStep = Union[ToricBlowup, NonToricBlowup]


@dataclass(frozen=True)
class DivisorCycle:
    """Cyclically ordered spheres with areas and explicit node bookkeeping.

    nodes[g] holds the ids of the intersection points between components
    g and g+1 (mod length); component ids are stable through blowups so
    lineages can be traced along a path.
    """

    components: tuple[HomologyClass, ...]
    areas: AreaVector
    ids: tuple[int, ...]
    nodes: tuple[tuple[int, ...], ...]
    next_id: int

    @property
    def n(self) -> int:
        return self.areas.n

    def __len__(self) -> int:
        return len(self.components)

    def gap_pair(self, g: int) -> tuple[int, int]:
        return g, (g + 1) % len(self)

    def component_area(self, pos: int) -> Q:
        return self.areas.area_of(self.components[pos])

    def component_areas(self) -> tuple[Q, ...]:
        return tuple(self.component_area(i) for i in range(len(self)))

    def total(self) -> HomologyClass:
        t = self.components[0]
        for c in self.components[1:]:
            t = t + c
        return t

    def charge(self) -> int:
        d = self.total()
        return 12 - pairing(d, d) - len(self)

    def pos_of_id(self, cid: int) -> int:
        return self.ids.index(cid)

    def find_node(self, node_id: int) -> Optional[tuple[int, int]]:
        for g, grp in enumerate(self.nodes):
            for s, nid in enumerate(grp):
                if nid == node_id:
                    return g, s
        return None


def make_cycle(components: Sequence[HomologyClass], av: AreaVector,
               start_ids: int = 0) -> DivisorCycle:
    """Build a cycle with fresh component and node ids.

    Node counts per gap are derived from the pairing of adjacent
    components (two gaps of one node each for a 2-component cycle).
    """
    comps = tuple(components)
    m = len(comps)
    if m < 2:
        raise HomologyError("a divisor cycle needs at least 2 components")
    ids = tuple(range(start_ids, start_ids + m))
    nxt = start_ids + m
    nodes = []
    for g in range(m):
        i, j = g, (g + 1) % m
        p = pairing(comps[i], comps[j])
        count = 1 if m == 2 else p
        if count < 1:
            raise HomologyError(f"components {i} and {j} are not adjacent (pairing {p})")
        nodes.append(tuple(range(nxt, nxt + count)))
        nxt += count
    return DivisorCycle(comps, av, ids, tuple(nodes), nxt)


class CycleReport(NamedTuple):
    ok: bool
    problems: tuple[str, ...]
    charge: int
    toric: bool


def validate_cycle(d: DivisorCycle) -> CycleReport:
    """Check every divisor-cycle invariant; never raises."""
    problems = []
    m = len(d)
    if m < 2:
        problems.append("fewer than 2 components")
    if any(c.n != d.n for c in d.components):
        problems.append("component rank differs from area rank")
        return CycleReport(False, tuple(problems), 0, False)
    if d.total().coeffs != anticanonical(d.n).coeffs:
        problems.append(f"components sum to {d.total()}, not the anticanonical class")
    for i, c in enumerate(d.components):
        if pairing(anticanonical(d.n), c) != pairing(c, c) + 2:
            problems.append(f"component {i} ({c}) violates adjunction")
        if d.areas.area_of(c) <= 0:
            problems.append(f"component {i} ({c}) has non-positive area")
    for g in range(m):
        i, j = d.gap_pair(g)
        p = pairing(d.components[i], d.components[j])
        expected = 1 if m == 2 else p
        if p < 1:
            problems.append(f"adjacent components {i},{j} have pairing {p} < 1")
        elif len(d.nodes[g]) != expected:
            problems.append(f"gap {g} records {len(d.nodes[g])} nodes, expected {expected}")
    if m == 2 and pairing(d.components[0], d.components[1]) != 2:
        problems.append("2-component cycle must have pairing 2")
    if m >= 4:
        for i in range(m):
            for j in range(i + 2, m):
                if (i, j) == (0, m - 1):
                    continue
                if pairing(d.components[i], d.components[j]) != 0:
                    problems.append(f"non-adjacent components {i},{j} intersect")
    if any(x <= 0 for x in (d.areas.c,) + d.areas.deltas):
        problems.append("area vector has non-positive entries")
    q = d.charge()
    return CycleReport(not problems, tuple(problems), q, q == 0 and not problems)


def is_reduced(av: AreaVector) -> bool:
    """Areas sorted descending and dominated: c >= d1+d2+d3 (d1+d2 if n=2)."""
    if av.n < 2:
        raise HomologyError("reducedness needs n >= 2")
    if any(av.deltas[i] < av.deltas[i + 1] for i in range(av.n - 1)):
        return False
    if av.n == 2:
        return av.c >= av.deltas[0] + av.deltas[1]
    return av.c >= av.deltas[0] + av.deltas[1] + av.deltas[2]


def in_c1_nef(av: AreaVector) -> bool:
    """Strict positivity of omega . c_1 in normalized coordinates."""
    if not is_reduced(av):
        raise HomologyError("area vector is not reduced")
    return sum(av.deltas, Q(0)) < 3 * av.c


def blowup(d: DivisorCycle, step: BlowupStep) -> DivisorCycle:
    """Apply a toric or non-toric blowup, extending the lattice by E_index."""
    size = rat(step.size)
    if size <= 0:
        raise HomologyError("blowup size must be positive")
    if step.index != d.n + 1:
        raise HomologyError(f"next class index must be {d.n + 1}, got {step.index}")
    m = len(d)
    n1 = d.n + 1
    e_new = basis_e(n1, n1)
    if isinstance(step, ToricBlowup):
        g = step.gap
        if not (0 <= g < m) or not (0 <= step.slot < len(d.nodes[g])):
            raise HomologyError(f"no node at gap {g} slot {step.slot}")
        i, j = d.gap_pair(g)
        if size >= d.component_area(i) or size >= d.component_area(j):
            raise HomologyError("toric blowup size must be below both adjacent areas")
        comps = [c.extended(n1) for c in d.components]
        comps[i] = comps[i] - e_new
        comps[j] = comps[j] - e_new
        new_comps = comps[: i + 1] + [e_new] + comps[i + 1:]
        new_ids = d.ids[: i + 1] + (d.next_id,) + d.ids[i + 1:]
        nid1, nid2 = d.next_id + 1, d.next_id + 2
        new_nodes = list(d.nodes[: g]) + [(nid1,), (nid2,)] + list(d.nodes[g + 1:])
        return DivisorCycle(tuple(new_comps), d.areas.extended(size), new_ids,
                            tuple(new_nodes), d.next_id + 3)
    if isinstance(step, NonToricBlowup):
        p = step.pos
        if not (0 <= p < m):
            raise HomologyError(f"no component at position {p}")
        if size >= d.component_area(p):
            raise HomologyError("non-toric blowup size must be below the component area")
        comps = [c.extended(n1) for c in d.components]
        comps[p] = comps[p] - e_new
        return DivisorCycle(tuple(comps), d.areas.extended(size), d.ids, d.nodes, d.next_id)
    raise HomologyError(f"unknown blowup step {step!r}")


def blowdown(d: DivisorCycle, k: int) -> tuple[DivisorCycle, BlowupStep]:
    """Contract E_k (k must be the maximal index) and return the inverse step.

    Either E_k is itself a component (toric) or exactly one component
    meets it once (non-toric); anything else is rejected, as is dropping
    to rank 0.
    """
    if k != d.n:
        raise HomologyError(f"only the maximal index E_{d.n} can be contracted, got E_{k}")
    if d.n == 1:
        raise HomologyError("contraction below rank 1 is not part of the calculus")
    m = len(d)
    e_k = basis_e(k, d.n)
    size = d.areas.deltas[k - 1]
    toric_pos = next((i for i, c in enumerate(d.components) if c.coeffs == e_k.coeffs), None)
    if toric_pos is not None:
        if m == 2:
            raise HomologyError("contracting a component of a 2-cycle would leave one sphere")
        i = toric_pos
        prev_, next_ = (i - 1) % m, (i + 1) % m
        for other in range(m):
            expected = -1 if other in (prev_, next_) else 0
            if other != i and d.components[other].e(k) != expected:
                raise HomologyError(f"component {other} blocks the toric contraction of E_{k}")
        comps = list(d.components)
        comps[prev_] = comps[prev_] + e_k
        comps[next_] = comps[next_] + e_k
        comps = [c.truncated() for c in comps[:i] + comps[i + 1:]]
        ids = d.ids[:i] + d.ids[i + 1:]
        # the two gaps flanking position i merge into one restored node
        gaps = list(d.nodes)
        restored = (d.next_id,)
        if i == 0:
            # flanking gaps are m-1 and 0; the merged gap wraps
            gaps = gaps[1:-1] + [restored]
        else:
            gaps = gaps[: i - 1] + [restored] + gaps[i + 1:]
        new = DivisorCycle(tuple(comps), d.areas.truncated(), ids, tuple(gaps), d.next_id + 1)
        gap_new = (len(new) - 1) if i == 0 else (i - 1)
        slot = len(new.nodes[gap_new]) - 1
        return new, ToricBlowup(gap_new, slot, size, k)
    hosts = [i for i, c in enumerate(d.components) if c.e(k) != 0]
    if len(hosts) != 1 or d.components[hosts[0]].e(k) != -1:
        raise HomologyError(
            f"E_{k} is neither a component nor non-torically placed on a unique component")
    i = hosts[0]
    comps = list(d.components)
    comps[i] = comps[i] + e_k
    comps = [c.truncated() for c in comps]
    new = DivisorCycle(tuple(comps), d.areas.truncated(), d.ids, d.nodes, d.next_id)
    return new, NonToricBlowup(i, size, k)


def is_nontoric_exceptional(s: HomologyClass, d: DivisorCycle) -> bool:
    """(-1)-class of positive area meeting exactly one component, once."""
    if s.n != d.n:
        raise HomologyError("rank mismatch")
    if pairing(s, s) != -1 or pairing(anticanonical(d.n), s) != 1:
        return False
    if d.areas.area_of(s) <= 0:
        return False
    pairs = [pairing(s, c) for c in d.components]
    return sorted(pairs) == [0] * (len(d) - 1) + [1]


def s_area_sequences(d: DivisorCycle) -> tuple[tuple[int, ...], tuple[Q, ...]]:
    """Cyclic self-intersection and area sequences of the components."""
    rep = validate_cycle(d)
    if not rep.ok:
        raise HomologyError("invalid cycle: " + "; ".join(rep.problems))
    return (tuple(pairing(c, c) for c in d.components), d.component_areas())


def _rotations(seq):
    n = len(seq)
    for r in range(n):
        yield tuple(seq[(r + i) % n] for i in range(n))


def taut_align(seq_a: Sequence, seq_b: Sequence) -> Optional[tuple[int, bool]]:
    """Rotation offset and reflection flag aligning two cyclic sequences.

    Alignment maps position p of seq_a to seq_b via: p -> (offset + p) mod n
    when not reflected, p -> (offset - p) mod n when reflected.
    """
    a, b = list(seq_a), list(seq_b)
    if len(a) != len(b):
        return None
    n = len(a)
    for off in range(n):
        if all(a[p] == b[(off + p) % n] for p in range(n)):
            return off, False
    for off in range(n):
        if all(a[p] == b[(off - p) % n] for p in range(n)):
            return off, True
    return None


def taut_equal(seqs_a, seqs_b) -> bool:
    """Equality of paired (self-intersection, area) cyclic sequences
    up to rotation and reflection."""
    sa, aa = seqs_a
    sb, ab = seqs_b
    return taut_align(list(zip(sa, aa)), list(zip(sb, ab))) is not None


# --- JSON --------------------------------------------------------------------


def cycle_to_json(d: DivisorCycle) -> dict:
    adjacency = []
    for g in range(len(d)):
        i, j = d.gap_pair(g)
        adjacency.extend([[i, j]] * len(d.nodes[g]))
    return {
        "n": d.n,
        "c": rat_str(d.areas.c),
        "deltas": [rat_str(x) for x in d.areas.deltas],
        "components": [list(c.coeffs) for c in d.components],
        "adjacency": adjacency,
    }


def cycle_from_json(data: dict) -> DivisorCycle:
    n = int(data["n"])
    av = areas(data["c"], data["deltas"])
    if av.n != n:
        raise HomologyError("deltas length disagrees with n")
    comps = [HomologyClass(tuple(int(x) for x in row)) for row in data["components"]]
    if any(c.n != n for c in comps):
        raise HomologyError("component rank disagrees with n")
    d = make_cycle(comps, av)
    if "adjacency" in data:
        declared = sorted(tuple(sorted(map(int, pair))) for pair in data["adjacency"])
        actual = []
        for g in range(len(d)):
            i, j = d.gap_pair(g)
            actual.extend([tuple(sorted((i, j)))] * len(d.nodes[g]))
        if declared != sorted(actual):
            raise HomologyError("declared adjacency disagrees with component pairings")
    return d
