"""Canonical pipeline data for a framed divisor cycle.

Starting from a valid cycle with reduced areas this module computes, in
order: the reduced form reached by contracting top exceptional classes
(one of five terminal shapes), the small-blowup replacement that fills
the case's marked nodes, the case's set of non-toric exceptional classes,
the toric form obtained by contracting that set, the Hirzebruch trapezoid
moduli, and the corner-chop plan that rebuilds the toric form from the
trapezoid.  The marked-node conventions are exercised against worked
examples in the test suite; they are the only case-specific tables in the
package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .errors import StageError
from .geometry import (
    LatticePolygon,
    chop_corner,
    edge_self_intersections,
    make_trapezoid,
    trapezoid_canonical,
)
from .homology import (
    AreaVector,
    BlowupStep,
    DivisorCycle,
    HomologyClass,
    NonToricBlowup,
    ToricBlowup,
    basis_e,
    blowdown,
    blowup,
    h_minus,
    is_nontoric_exceptional,
    is_reduced,
    pairing,
    taut_align,
    validate_cycle,
)
from .rat import Q, rat, rat_str


@dataclass(frozen=True)
class ReducedCase:
    """Terminal shape tag with its parameters and blowup-pattern branch.

    branch is 'A'/'B' for tag 'i' (first blowup non-toric on the conic or
    not), 'first'/'other' for tag 'ii', 'alpha'/'beta'/'gamma' for tags
    'iii'/'iv', and '' for tag 'v'.  role_ids maps the terminal pattern
    roles C1, C2, ... to stable component ids; beta_chop_id is set in the
    'beta' branches and names the component whose copy opens the chop
    sequence.
    """

    tag: str
    a: Optional[int]
    l: Optional[int]
    branch: str
    role_ids: tuple[tuple[str, int], ...]
    beta_chop_id: Optional[int] = None

    @property
    def f2_special(self) -> bool:
        return self.branch in ("A", "first", "alpha", "beta")

    def role(self, name: str) -> int:
        for key, val in self.role_ids:
            if key == name:
                return val
        raise KeyError(name)


class StepRecord(NamedTuple):
    step: BlowupStep
    consumed_node: Optional[int]
    created_comp: Optional[int]
    created_nodes: tuple[int, ...]  # toric: (node toward left comp, node toward right comp)
    left_id: Optional[int]
    right_id: Optional[int]
    host_id: Optional[int]


@dataclass(frozen=True)
class BlowupPath:
    """Ordered blowups from a terminal cycle; step k creates E_k."""

    terminal: DivisorCycle
    steps: tuple[BlowupStep, ...]

    def replay(self) -> DivisorCycle:
        cur = self.terminal
        for s in self.steps:
            cur = blowup(cur, s)
        return cur

    def replay_with_trace(self) -> tuple[DivisorCycle, tuple[StepRecord, ...]]:
        cur = self.terminal
        records = []
        for s in self.steps:
            if isinstance(s, ToricBlowup):
                i, j = cur.gap_pair(s.gap)
                left_id, right_id = cur.ids[i], cur.ids[j]
                consumed = cur.nodes[s.gap][s.slot]
                created = cur.next_id
                cur = blowup(cur, s)
                pos = cur.pos_of_id(created)
                created_nodes = (cur.nodes[(pos - 1) % len(cur)][0], cur.nodes[pos][0])
                records.append(StepRecord(s, consumed, created, created_nodes,
                                          left_id, right_id, None))
            else:
                host = cur.ids[s.pos]
                cur = blowup(cur, s)
                records.append(StepRecord(s, None, None, (), None, None, host))
        return cur, tuple(records)

    def nontoric_indices(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.steps if isinstance(s, NonToricBlowup))

    def extended(self, extra: Sequence[BlowupStep]) -> "BlowupPath":
        return BlowupPath(self.terminal, self.steps + tuple(extra))


def _match_rank1(cur: DivisorCycle, f2: Optional[BlowupStep]):
    """Classify a rank-1 terminal cycle into shapes (i)-(iv)."""
    comps = [c.coeffs for c in cur.components]
    m = len(cur)
    if m == 2:
        key = sorted(comps)
        if key == sorted([(2, 0), (1, -1)]):
            c1 = cur.ids[comps.index((2, 0))]
            c2 = cur.ids[comps.index((1, -1))]
            branch = "A" if (isinstance(f2, NonToricBlowup)
                             and cur.ids[f2.pos] == c1) else "B"
            return ReducedCase("i", None, None, branch, (("C1", c1), ("C2", c2)))
        hs = [c[0] for c in comps]
        a = max(hs) - 1
        p = hs.index(a + 1)
        if a >= 1 and comps[p] == (a + 1, -a) and comps[1 - p] == (2 - a, a - 1):
            c1, c2 = cur.ids[p], cur.ids[1 - p]
            branch = "first" if (isinstance(f2, NonToricBlowup)
                                 and cur.ids[f2.pos] == c1) else "other"
            return ReducedCase("ii", a, None, branch, (("C1", c1), ("C2", c2)))
        raise StageError("reduce", f"terminal 2-cycle {comps} matches no listed shape")
    if m == 3:
        mids = [p for p, c in enumerate(comps) if c == (1, -1)]
        if len(mids) != 1:
            raise StageError("reduce", f"terminal 3-cycle {comps} matches no listed shape")
        p = mids[0]
        options = []
        for c1p, c3p in (((p - 1) % 3, (p + 1) % 3), ((p + 1) % 3, (p - 1) % 3)):
            a = comps[c1p][0]
            if a >= 1 and comps[c1p] == (a, 1 - a) and comps[c3p] == (2 - a, a - 1):
                options.append((a, c1p, p, c3p))
        if not options:
            raise StageError("reduce", f"terminal 3-cycle {comps} matches no listed shape")

        def branch_of(opt):
            a, c1p, c2p, c3p = opt
            c1, c2 = cur.ids[c1p], cur.ids[c2p]
            if isinstance(f2, NonToricBlowup) and cur.ids[f2.pos] == c1:
                return "alpha"
            if isinstance(f2, ToricBlowup):
                gap_ids = {cur.ids[g] for g in cur.gap_pair(f2.gap)}
                if gap_ids == {c1, c2}:
                    return "beta"
            return "gamma"

        ranked = sorted(options, key=lambda o: ("alpha", "beta", "gamma").index(branch_of(o)))
        a, c1p, c2p, c3p = ranked[0]
        branch = branch_of(ranked[0])
        roles = (("C1", cur.ids[c1p]), ("C2", cur.ids[c2p]), ("C3", cur.ids[c3p]))
        beta_id = cur.ids[c2p] if branch == "beta" else None
        return ReducedCase("iii", a, None, branch, roles, beta_id)
    if m == 4:
        mids = [p for p, c in enumerate(comps) if c == (1, -1)]
        if len(mids) == 2 and (mids[1] - mids[0]) == 2:
            others = [p for p in range(4) if p not in mids]
            c1p = max(others, key=lambda p: comps[p][0])
            c3p = others[0] if others[1] == c1p else others[1]
            a = comps[c1p][0]
            if a >= 1 and comps[c1p] == (a, 1 - a) and comps[c3p] == (1 - a, a):
                c1 = cur.ids[c1p]
                c2p, c4p = (c1p + 1) % 4, (c1p - 1) % 4
                branch, beta_id = "gamma", None
                if isinstance(f2, NonToricBlowup) and cur.ids[f2.pos] == c1:
                    branch = "alpha"
                elif isinstance(f2, ToricBlowup):
                    gap_ids = {cur.ids[g] for g in cur.gap_pair(f2.gap)}
                    for hp in (c2p, c4p):
                        if gap_ids == {c1, cur.ids[hp]}:
                            branch, beta_id = "beta", cur.ids[hp]
                            break
                roles = (("C1", c1), ("C2", cur.ids[c2p]),
                         ("C3", cur.ids[c3p]), ("C4", cur.ids[c4p]))
                return ReducedCase("iv", a, None, branch, roles, beta_id)
        raise StageError("reduce", f"terminal 4-cycle {comps} matches no listed shape")
    raise StageError("reduce", f"terminal cycle of length {m} matches no listed shape")


def reduced_model(d: DivisorCycle) -> tuple[ReducedCase, DivisorCycle, BlowupPath]:
    """Contract E_n, E_{n-1}, ... until a terminal shape is reached.

    Stops at rank 1, or earlier when the cycle has two components one of
    which is the next class to contract (shape (v)).  Returns the case
    classification, the terminal cycle, and the forward blowup path whose
    replay reproduces the input.
    """
    rep = validate_cycle(d)
    if not rep.ok:
        raise StageError("reduce", "invalid cycle: " + "; ".join(rep.problems))
    if d.n < 2:
        raise StageError("reduce", "the construction needs rank n >= 2")
    if not is_reduced(d.areas):
        raise StageError("reduce", "areas are not reduced under the given framing")
    cur = d
    inverse: list[BlowupStep] = []
    case = None
    while True:
        k = cur.n
        if k >= 2 and len(cur) == 2 and any(
                c.coeffs == basis_e(k, k).coeffs for c in cur.components):
            expect = tuple([3] + [-1] * (k - 1) + [-2])
            big = next(c for c in cur.components if c.coeffs != basis_e(k, k).coeffs)
            if big.coeffs != expect:
                raise StageError("reduce", f"2-cycle with E_{k} does not match shape (v)")
            e_pos = next(p for p, c in enumerate(cur.components)
                         if c.coeffs == basis_e(k, k).coeffs)
            roles = (("C1", cur.ids[1 - e_pos]), ("C2", cur.ids[e_pos]))
            case = ReducedCase("v", None, k, "", roles)
            break
        if k == 1:
            steps = tuple(reversed(inverse))
            case = _match_rank1(cur, steps[0] if steps else None)
            break
        try:
            cur, inv = blowdown(cur, k)
        except Exception as exc:
            raise StageError("reduce", f"cannot contract E_{k}: {exc}") from exc
        inverse.append(inv)
    path = BlowupPath(cur, tuple(reversed(inverse)))
    check = path.replay()
    if [c.coeffs for c in check.components] != [c.coeffs for c in d.components] \
            or check.areas != d.areas:
        raise StageError("reduce", "path replay failed to reproduce the input cycle")
    return case, cur, path


class EpsilonReport(NamedTuple):
    replaced: bool
    distinguished: tuple[tuple[int, Q], ...]  # (class index, size), at most two
    marked_nodes: tuple[int, ...]


def default_epsilon(d: DivisorCycle, path: BlowupPath) -> Q:
    pool = list(d.component_areas()) + [s.size for s in path.steps]
    return min(pool) / 10


def epsilon_replacement(case: ReducedCase, path: BlowupPath,
                        eps=None) -> tuple[DivisorCycle, BlowupPath, EpsilonReport]:
    """Fill the case's marked nodes with small toric blowups.

    Marked nodes already consumed by a toric step of the path keep their
    recorded sizes ("distinguished"); unoccupied ones receive synthetic
    blowups of size eps (and eps/2 for the nested second node of case
    (i)).  Applying the operation to its own output changes nothing.
    """
    d, records = path.replay_with_trace()
    bound = default_epsilon(d, path)
    eps = rat(eps) if eps is not None else bound
    if eps <= 0 or eps > bound:
        raise StageError("replace", f"epsilon must lie in (0, {rat_str(bound)}]")

    if case.tag == "iv":
        return d, path, EpsilonReport(False, (), ())

    terminal = path.terminal
    consumed_by = {rec.consumed_node: rec.step for rec in records
                   if rec.consumed_node is not None}

    marked: list[Optional[int]] = []
    if case.tag == "iii":
        c1, c3 = case.role("C1"), case.role("C3")
        gap = next(g for g in range(len(terminal))
                   if {terminal.ids[p] for p in terminal.gap_pair(g)} == {c1, c3})
        marked = [terminal.nodes[gap][0]]
    elif case.tag in ("ii", "v"):
        marked = [terminal.nodes[0][0], terminal.nodes[1][0]]
    else:  # case i
        originals = [terminal.nodes[0][0], terminal.nodes[1][0]]
        if case.branch == "A":
            marked = list(originals)
        else:
            # the first toric blowup of the path necessarily sits on an
            # original node; the second marked node is nested between its
            # exceptional sphere and the conic side
            first = next((rec for rec in records
                          if rec.consumed_node in originals), None)
            if first is None:
                marked = [originals[0], None]  # nested node appears after the first blowup
            else:
                side = 0 if first.left_id == case.role("C1") else 1
                marked = [first.consumed_node, first.created_nodes[side]]

    dist: list[tuple[int, Q]] = []
    missing: list[Optional[int]] = []
    for node in marked:
        if node in consumed_by:
            step = consumed_by[node]
            dist.append((step.index, step.size))
        else:
            missing.append(node)
    synth_sizes = [eps] * len(missing)
    if case.tag == "i" and len(missing) == 2:
        synth_sizes = [eps, eps / 2]

    conic = case.role("C1") if case.tag == "i" else None
    cur = d
    new_steps: list[BlowupStep] = []
    used_nodes: list[int] = [n for n in marked if n is not None]
    prev_created: Optional[int] = None
    for node, size in zip(missing, synth_sizes):
        if node is None:
            # case (i) branch B nested node, created by the previous step
            pos = cur.pos_of_id(prev_created)
            left_gap = (pos - 1) % len(cur)
            node = cur.nodes[left_gap][0] if cur.ids[left_gap] == conic \
                else cur.nodes[pos][0]
            used_nodes.append(node)
        found = cur.find_node(node)
        if found is None:
            raise StageError("replace", f"marked node {node} vanished from the cycle")
        gap, slot = found
        step = ToricBlowup(gap, slot, size, cur.n + 1)
        dist.append((step.index, size))
        prev_created = cur.next_id
        cur = blowup(cur, step)
        new_steps.append(step)

    dist.sort(key=lambda t: t[0])
    report = EpsilonReport(bool(new_steps), tuple(dist), tuple(used_nodes))
    return cur, path.extended(new_steps), report


def exceptional_set(case: ReducedCase, path_eps: BlowupPath, report: EpsilonReport,
                    x_eps: DivisorCycle) -> tuple[HomologyClass, ...]:
    """The case's list of pairwise-orthogonal non-toric exceptional classes."""
    n = x_eps.n
    nt = [k for k in path_eps.nontoric_indices()]
    dist = [idx for idx, _ in report.distinguished]
    i = dist[0] if dist else None
    j = dist[1] if len(dist) > 1 else None

    def e_of(ks):
        return [basis_e(k, n) for k in ks]

    out: list[HomologyClass]
    if case.tag == "i":
        if case.branch == "A":
            out = [basis_e(1, n), h_minus([2, i], n), h_minus([2, j], n)] \
                + e_of(k for k in nt if k >= 3)
        else:
            out = [basis_e(1, n), h_minus([i, j], n)] + e_of(nt)
    elif case.tag == "ii":
        if case.branch == "first":
            out = [h_minus([1, 2], n), h_minus([1, i], n), h_minus([1, j], n)] \
                + e_of(k for k in nt if k >= 3)
        else:
            out = [h_minus([1, i], n), h_minus([1, j], n)] + e_of(nt)
    elif case.tag == "iii":
        if case.branch == "alpha":
            out = [h_minus([1, 2], n), h_minus([1, i], n)] + e_of(k for k in nt if k >= 3)
        else:
            out = [h_minus([1, i], n)] + e_of(nt)
    elif case.tag == "iv":
        if case.branch == "alpha":
            out = [h_minus([1, 2], n)] + e_of(k for k in nt if k >= 3)
        else:
            out = e_of(nt)
    elif case.tag == "v":
        l = case.l
        out = e_of(range(3, l)) + [h_minus([1, l], n)]
        if l >= 3:
            out.append(h_minus([2, l], n))
        out += [h_minus([l, i], n), h_minus([l, j], n)] + e_of(nt)
    else:
        raise StageError("exceptional-set", f"unknown case {case.tag}")

    for s in out:
        if not is_nontoric_exceptional(s, x_eps):
            raise StageError("exceptional-set", f"{s} is not non-toric exceptional here")
    for p in range(len(out)):
        for q in range(p + 1, len(out)):
            if pairing(out[p], out[q]) != 0:
                raise StageError("exceptional-set", f"{out[p]} and {out[q]} are not orthogonal")
    return tuple(out)


@dataclass(frozen=True)
class ToricModel:
    """(s, area) data of the toric form, indexed by stable component ids."""

    ids: tuple[int, ...]
    s: tuple[int, ...]
    area: tuple[Q, ...]
    bites: tuple[tuple[int, tuple[HomologyClass, ...]], ...]  # comp id -> contracted classes

    def seqs(self) -> tuple[tuple[int, ...], tuple[Q, ...]]:
        return self.s, self.area

    def bites_of(self, cid: int) -> tuple[HomologyClass, ...]:
        for key, val in self.bites:
            if key == cid:
                return val
        return ()


def toric_model(x_eps: DivisorCycle, exc: Sequence[HomologyClass]) -> ToricModel:
    """Contract every class of the exceptional set; the result is toric.

    Each contraction adds the class's area to the unique component meeting
    it and raises that component's self-intersection by one; classes are
    tracked only through their (s, area) effect.
    """
    m = len(x_eps)
    s = [pairing(c, c) for c in x_eps.components]
    area = list(x_eps.component_areas())
    bites: dict[int, list[HomologyClass]] = {}
    for cl in exc:
        hits = [p for p in range(m) if pairing(cl, x_eps.components[p]) != 0]
        if len(hits) != 1 or pairing(cl, x_eps.components[hits[0]]) != 1:
            raise StageError("toric-model", f"{cl} does not meet exactly one component once")
        p = hits[0]
        s[p] += 1
        area[p] += x_eps.areas.area_of(cl)
        bites.setdefault(x_eps.ids[p], []).append(cl)
    d_sq = sum(s) + 2 * m
    if 12 - d_sq - m != 0:
        raise StageError("toric-model", "contraction did not reach a toric pair (charge != 0)")
    return ToricModel(x_eps.ids, tuple(s), tuple(area),
                      tuple((k, tuple(v)) for k, v in bites.items()))


class TrapezoidParams(NamedTuple):
    raw: tuple[int, Q, Q, Q]
    canonical: tuple[int, Q, Q, Q]


def trapezoid_params(case: ReducedCase, areas: AreaVector,
                     report: EpsilonReport) -> TrapezoidParams:
    """Hirzebruch moduli (k, x, y, z) of the case's minimal toric reduction."""
    if areas.c != 1:
        raise StageError("trapezoid", "areas must be normalized to c = 1")
    dl = areas.deltas
    d = lambda k: dl[k - 1]
    dist = report.distinguished
    di = d(dist[0][0]) if dist else None
    dj = d(dist[1][0]) if len(dist) > 1 else None
    a = case.a
    if case.tag == "i":
        raw = (1, 1 - d(2), 2 - d(2) - di - dj, 1 - di - dj) if case.branch == "A" \
            else (2, 1 - di, 2 - di - dj, di - dj)
    elif case.tag == "ii":
        raw = (2 * a - 2, 1 - d(1), 1 + a - a * d(1) - d(2) - di - dj,
               3 - a + (a - 2) * d(1) - d(2) - di - dj) if case.branch == "first" \
            else (2 * a - 1, 1 - d(1), a + 1 - a * d(1) - di - dj,
                  2 - a + (a - 1) * d(1) - di - dj)
    elif case.tag == "iii":
        raw = (2 * a - 3, 1 - d(1), a - (a - 1) * d(1) - d(2) - di,
               3 - a + (a - 2) * d(1) - d(2) - di) if case.branch in ("alpha", "beta") \
            else (2 * a - 2, 1 - d(1), a - (a - 1) * d(1) - di,
                  2 - a + (a - 1) * d(1) - di)
    elif case.tag == "iv":
        raw = (2 * a - 2, 1 - d(1), a - (a - 1) * d(1) - d(2),
               2 - a + (a - 1) * d(1) - d(2)) if case.branch in ("alpha", "beta") \
            else (2 * a - 1, 1 - d(1), a - (a - 1) * d(1), 1 - a + a * d(1))
    elif case.tag == "v":
        l = case.l
        if l >= 3:
            raw = (1, 1 - d(l), 3 - d(1) - d(2) - 2 * d(l) - di - dj,
                   2 - d(1) - d(2) - d(l) - di - dj)
        else:
            # rank-2 shape: only one restoring class meets the short side,
            # so the moduli differ from the generic formula
            raw = (2, 1 - d(2), 3 - d(1) - 2 * d(2) - di - dj, 1 - d(1) - di - dj)
    else:
        raise StageError("trapezoid", f"unknown case {case.tag}")
    k, x, y, z = raw
    if y - z != k * x:
        raise StageError("trapezoid", "moduli violate y - z = k*x")
    canon = trapezoid_canonical(*raw)
    if canon[1] <= 0 or canon[2] <= 0 or canon[3] <= 0:
        raise StageError("trapezoid", f"non-positive trapezoid moduli {raw}")
    return TrapezoidParams(raw, canon)


class ChopSpec(NamedTuple):
    label: int        # component id realized by this chop
    left: int         # edge label clockwise of the new edge
    right: int        # edge label counterclockwise of the new edge
    size: Q


@dataclass(frozen=True)
class ChopPlan:
    specs: tuple[ChopSpec, ...]
    p0: LatticePolygon
    p1: LatticePolygon
    edge_roles: tuple[tuple[int, str], ...]   # trapezoid component id -> role Y/X'/Z/X
    b_by_role: tuple[tuple[str, Q], ...]      # largest chop size over each initial edge

    def role_of(self, cid: int) -> Optional[str]:
        for key, val in self.edge_roles:
            if key == cid:
                return val
        return None


_ROLE_SEQ = ("Y", "X'", "Z", "X")


def chop_plan(case: ReducedCase, path_eps: BlowupPath, report: EpsilonReport,
              tm: ToricModel, params: TrapezoidParams) -> ChopPlan:
    """Corner chops turning the canonical trapezoid into the toric form.

    Chops are copies of the path's toric blowups (the marked-node ones
    excluded); in the 'beta' branches the first chop is the copy of the
    middle component and has size 1 - delta_1 - delta_2.  The plan is
    derived by un-chopping the toric form and is checked against the
    trapezoid reading at the end.
    """
    dist = {idx for idx, _ in report.distinguished}
    _, records = path_eps.replay_with_trace()
    chop_ids = [rec.created_comp for rec in records
                if rec.created_comp is not None and rec.step.index not in dist]
    if case.beta_chop_id is not None:
        chop_ids = [case.beta_chop_id] + chop_ids

    work = [[cid, s, area] for cid, s, area in zip(tm.ids, tm.s, tm.area)]
    specs: list[ChopSpec] = []
    for cid in reversed(chop_ids):
        pos = next((p for p, row in enumerate(work) if row[0] == cid), None)
        if pos is None:
            raise StageError("chop-plan", f"chop component {cid} missing from toric form")
        if work[pos][1] != -1:
            raise StageError("chop-plan", f"chop component {cid} has self-intersection "
                                          f"{work[pos][1]}, expected -1")
        size = work[pos][2]
        left, right = work[(pos - 1) % len(work)], work[(pos + 1) % len(work)]
        left[1] += 1
        right[1] += 1
        left[2] += size
        right[2] += size
        specs.append(ChopSpec(cid, left[0], right[0], size))
        del work[pos]
    specs.reverse()

    if len(work) != 4:
        raise StageError("chop-plan", f"{len(work)} components left after un-chopping")
    k, x, y, z = params.canonical
    target = [(k, y), (0, x), (-k, z), (0, x)]
    got = [(row[1], row[2]) for row in work]
    align = taut_align(target, got)
    if align is None:
        raise StageError("chop-plan", "trapezoid moduli do not match the un-chopped form")
    off, refl = align
    roles = {}
    for p, role in enumerate(_ROLE_SEQ):
        q = (off + p) % 4 if not refl else (off - p) % 4
        roles[work[q][0]] = role
    labels = [next(cid for cid, r in roles.items() if r == role) for role in _ROLE_SEQ]
    p0 = make_trapezoid(k, x, y, z, labels=labels)

    poly = p0
    b: dict[str, Q] = {}
    for spec in specs:
        lab = list(poly.edge_labels)
        el, er = lab.index(spec.left), lab.index(spec.right)
        m = len(lab)
        if er == (el + 1) % m:
            vertex = er
        elif el == (er + 1) % m:
            vertex = el
        else:
            raise StageError("chop-plan", f"edges {spec.left}/{spec.right} not adjacent")
        for e in (el, er):
            role = roles.get(lab[e])
            if role is not None:
                b[role] = max(b.get(role, Q(0)), spec.size)
        poly = chop_corner(poly, vertex, spec.size, label=spec.label)

    # the rebuilt polygon must read back exactly as the toric form
    s_read = edge_self_intersections(poly)
    for e in range(len(poly)):
        cid = poly.edge_labels[e]
        pos = tm.ids.index(cid)
        if s_read[e] != tm.s[pos] or poly.edge_length(e) != tm.area[pos]:
            raise StageError("chop-plan", "rebuilt polygon disagrees with the toric form")
    b_full = tuple((role, b.get(role, Q(0))) for role in _ROLE_SEQ)
    return ChopPlan(tuple(specs), p0, poly, tuple((cid, r) for cid, r in roles.items()),
                    b_full)


# --- trace JSON ---------------------------------------------------------------


def path_to_json(path: BlowupPath) -> dict:
    from .homology import cycle_to_json, s_area_sequences

    cur = path.terminal
    steps = []
    for s in path.steps:
        entry = {"index": s.index, "size": rat_str(s.size), "kind": s.kind}
        if isinstance(s, ToricBlowup):
            entry["node"] = int(cur.nodes[s.gap][s.slot])
            entry["between"] = [cur.ids[p] for p in cur.gap_pair(s.gap)]
        else:
            entry["component"] = cur.ids[s.pos]
        cur = blowup(cur, s)
        ss, aa = (tuple(pairing(c, c) for c in cur.components), cur.component_areas())
        entry["s_sequence"] = list(ss)
        entry["areas"] = [rat_str(v) for v in aa]
        steps.append(entry)
    return {"terminal": cycle_to_json(path.terminal), "steps": steps}
