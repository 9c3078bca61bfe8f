"""Closure audits for axiomatic frame classes on finite universes.

A class of frames cut out by axioms is closed under disjoint unions,
generated subframes, and p-morphic images, and both closed under and
reflected by prime filter extensions. audit_closure executes those four
checks literally over a universe of isomorphism-class representatives and
reports the first counterexample per section, if any.

Membership of a constructed frame in the class is decided by a
relabeling-invariant certificate when the frame fits inside the universe;
constructions that outgrow it (disjoint unions, or images missing from a
sampled universe) are judged by validity of the class axioms when those are
supplied. Work limits and size guards mark sections incomplete instead of
failing silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .caps import Caps, DEFAULT_CAPS
from .duality import eta_frame_iso, pfe
from .errors import FrameConditionError, SizeGuard
from .fasteval import FrameEvaluator, compile_formulas
from .frames import (
    Frame,
    check_frame_morphism,
    disjoint_union,
    frame_key,
    functor_action,
    generated_subframe_check,
    im_member,
    make_cin_frame,
    make_im_frame,
    validate_frame,
)
from .order import Poset, PosetMap, iter_bits, upsets
from .syntax import print_formula
from .universe import Universe

__all__ = [
    "AuditBudget",
    "DEFAULT_BUDGET",
    "SectionResult",
    "AuditReport",
    "induced_subframe",
    "quotient_frames",
    "audit_closure",
]


@dataclass(frozen=True)
class AuditBudget:
    """Work limits for one audit run. max_checks bounds the constructions
    examined per section; union_size_limit skips oversized disjoint unions.
    Exhausted limits mark the section incomplete, never silently truncated."""

    max_checks: int | None = None
    union_size_limit: int = 8


DEFAULT_BUDGET = AuditBudget()


@dataclass(frozen=True)
class SectionResult:
    """One closure condition's verdict: how many constructions were checked,
    how many were skipped by limits, whether all checked ones landed in the
    class, and the first counterexample when one did not."""

    name: str
    checked: int
    skipped: int
    passed: bool
    complete: bool
    witness: dict | None = None
    note: str | None = None

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "checked": self.checked,
            "skipped": self.skipped,
            "passed": self.passed,
            "complete": self.complete,
            "witness": self.witness,
            "note": self.note,
        }


@dataclass(frozen=True)
class AuditReport:
    kind: str
    universe_size: int
    members: tuple[int, ...]
    sections: tuple[SectionResult, ...]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.sections)

    @property
    def complete(self) -> bool:
        return all(s.complete for s in self.sections)

    def as_json(self) -> dict:
        return {
            "kind": self.kind,
            "universe_size": self.universe_size,
            "class_size": len(self.members),
            "members": list(self.members),
            "passed": self.passed,
            "complete": self.complete,
            "sections": [s.as_json() for s in self.sections],
        }


def _restrict(mask: int, states: list[int]) -> int:
    out = 0
    for new, old in enumerate(states):
        if mask >> old & 1:
            out |= 1 << new
    return out


def induced_subframe(frame: Frame, state_mask: int, *, caps: Caps = DEFAULT_CAPS):
    """The substructure on an upward-closed state set that makes the
    inclusion a frame morphism, with that inclusion, or None when the set
    carries no such structure.

    Every generated subframe arises this way, since an embedding is
    determined by its image up to isomorphism. Relational kinds need the set
    closed under the relation; neighborhood kinds need every family
    membership to be unchanged by restricting the candidate set, because the
    morphism condition quantifies membership over traces.
    """
    base = frame.base
    if state_mask == 0 or state_mask & ~base.full_mask:
        raise ValueError("state set empty or out of range")
    states = list(iter_bits(state_mask))
    for x in states:
        if base.up[x] & ~state_mask:
            return None
    sub_base = Poset(len(states),
                     tuple(_restrict(base.up[x], states) for x in states))
    inclusion = PosetMap(sub_base, base, tuple(states))
    try:
        if frame.kind in ("box", "si"):
            if any(frame.rel[x] & ~state_mask for x in states):
                return None
            sub = validate_frame(
                Frame(frame.kind, sub_base,
                      rel=tuple(_restrict(frame.rel[x], states) for x in states)),
                caps=caps)
        elif frame.kind == "im":
            # a sub-upset of an up-closed set is an upset of the whole frame,
            # so the trace condition is just invariance under restriction
            ups = upsets(base, caps=caps)
            for x in states:
                for a in ups:
                    if im_member(frame, x, a) != im_member(frame, x, a & state_mask):
                        return None
            fams = [[_restrict(a, states) for a in ups
                     if a & ~state_mask == 0 and im_member(frame, x, a)]
                    for x in states]
            sub = make_im_frame(sub_base, fams, caps=caps)
        else:
            width = 1 << base.size
            for x in states:
                for fam in (frame.nbox[x], frame.ndia[x]):
                    if any(((a & state_mask) in fam) != (a in fam)
                           for a in range(width)):
                        return None
            nbox = [[_restrict(a, states) for a in frame.nbox[x]
                     if a & ~state_mask == 0] for x in states]
            ndia = [[_restrict(a, states) for a in frame.ndia[x]
                     if a & ~state_mask == 0] for x in states]
            sub = make_cin_frame(sub_base, nbox, ndia, caps=caps)
    except FrameConditionError:
        return None
    if not generated_subframe_check(inclusion, sub, frame, caps=caps):
        return None
    return sub, inclusion


def _set_partitions(n: int):
    """All partitions of range(n) as tuples of blocks ordered by least
    element, in a deterministic order ending with the all-singletons one."""
    out: list[tuple[tuple[int, ...], ...]] = []

    def rec(i: int, blocks: list[list[int]]) -> None:
        if i == n:
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(1, [[0]])
    return out


def _rows_are_poset(rows: list[int]) -> bool:
    for i, row in enumerate(rows):
        if not row >> i & 1:
            return False
        for j in iter_bits(row):
            if j != i and rows[j] >> i & 1:
                return False
            if rows[j] & ~row:
                return False
    return True


def _quotient_by(frame: Frame, blocks, *, caps: Caps):
    cls = [0] * frame.size
    for bi, blk in enumerate(blocks):
        for x in blk:
            cls[x] = bi
    n = len(blocks)
    rows: list[int | None] = [None] * n
    for x in range(frame.size):
        img = 0
        for y in iter_bits(frame.base.up[x]):
            img |= 1 << cls[y]
        if rows[cls[x]] is None:
            rows[cls[x]] = img
        elif rows[cls[x]] != img:
            return None
    if not _rows_are_poset(rows):
        return None
    qbase = Poset(n, tuple(rows))
    qmap = PosetMap(frame.base, qbase, tuple(cls))
    try:
        if frame.kind in ("box", "si"):
            qrel: list[int | None] = [None] * n
            for x in range(frame.size):
                img = qmap.image_mask(frame.rel[x])
                if qrel[cls[x]] is None:
                    qrel[cls[x]] = img
                elif qrel[cls[x]] != img:
                    return None
            q = validate_frame(Frame(frame.kind, qbase, rel=tuple(qrel)),
                               caps=caps)
        elif frame.kind == "im":
            fams: list = [None] * n
            for x in range(frame.size):
                fam = functor_action("im", qmap, frame.nbhd[x], caps=caps)
                if fams[cls[x]] is None:
                    fams[cls[x]] = fam
                elif fams[cls[x]] != fam:
                    return None
            q = validate_frame(Frame("im", qbase, nbhd=tuple(fams)), caps=caps)
        else:
            pairs: list = [None] * n
            for x in range(frame.size):
                pushed = functor_action("cin", qmap,
                                        (frame.nbox[x], frame.ndia[x]), caps=caps)
                if pairs[cls[x]] is None:
                    pairs[cls[x]] = pushed
                elif pairs[cls[x]] != pushed:
                    return None
            q = validate_frame(
                Frame("cin", qbase, nbox=tuple(p[0] for p in pairs),
                      ndia=tuple(p[1] for p in pairs)), caps=caps)
    except FrameConditionError:
        return None
    if check_frame_morphism(qmap, frame, q, caps=caps) is not None:
        return None
    return q, qmap


def quotient_frames(frame: Frame, *, caps: Caps = DEFAULT_CAPS):
    """Every p-morphic image of the frame, one per kernel, with its quotient
    map, in deterministic partition order.

    A surjective frame morphism forces the structure of its image: the order
    row and modal structure of f(x) are exactly the pushforwards of those of
    x. Scanning state partitions and keeping the ones whose forced quotient
    is a frame and whose map passes the literal morphism check therefore
    finds all images up to isomorphism.
    """
    out = []
    for blocks in _set_partitions(frame.size):
        got = _quotient_by(frame, blocks, caps=caps)
        if got is not None:
            out.append(got)
    return out


def _state_list(mask: int) -> list[int]:
    return list(iter_bits(mask))


def audit_closure(class_frames, universe: Universe, *, formulas=None,
                  budget: AuditBudget | None = None, transform: str = "tau",
                  caps: Caps = DEFAULT_CAPS) -> AuditReport:
    """Audit the closure conditions on a class of universe frames.

    class_frames must all occur in the universe up to relabeling. formulas,
    when given, should be the axioms that carved the class out; they let
    constructions falling outside the universe be judged by validity rather
    than by certificate, which is also what keeps sampled universes honest.
    Without formulas, membership is certificate-only, and any construction
    larger than the universe bound counts as outside the class.

    Sections: pairwise disjoint unions of class members (including
    self-pairs), generated subframes via the exhaustive state-subset scan,
    p-morphic images via the exhaustive kernel scan, and prime filter
    extensions in both directions (class members must extend into the class;
    frames extending into the class must be members). The last section also
    records on how many universe frames the unit map was certified as an
    isomorphism, which is what makes closure and reflection coincide.
    """
    budget = budget if budget is not None else DEFAULT_BUDGET
    if transform == "sigma" and universe.kind != "im":
        raise ValueError("the sigma transform is defined for im only")
    u_frames = universe.frames
    u_index = {frame_key(f): i for i, f in enumerate(u_frames)}
    member_ids = set()
    member_keys = set()
    for f in class_frames:
        key = frame_key(f)
        pos = u_index.get(key)
        if pos is None:
            raise ValueError("class member is not in the universe")
        member_ids.add(pos)
        member_keys.add(key)
    members = tuple(sorted(member_ids))
    max_size = universe.max_size
    program = None if formulas is None else compile_formulas(tuple(formulas))

    def membership(frame: Frame):
        """(in_class, decided_by, counterexample) for one construction."""
        if frame.size <= max_size:
            if frame_key(frame) in member_keys:
                return True, "certificate", None
            if program is None:
                return False, "certificate", None
        elif program is None:
            return False, "size", None
        fe = FrameEvaluator(frame, letters=program.letters, caps=caps)
        mat = fe.truth_matrix(program)
        bad = np.argwhere(mat != frame.base.full_mask)
        if bad.size:
            fi, vi = (int(v) for v in bad[0])
            got = int(mat[fi, vi])
            state = next(x for x in range(frame.size) if not got >> x & 1)
            return False, "validity", {
                "formula": print_formula(program.formulas[fi]),
                "valuation": {name: _state_list(int(fe.grid[name][vi]))
                              for name in program.letters},
                "state": state,
            }
        return True, "validity", None

    def drive(name: str, stream) -> SectionResult:
        checked = skipped = 0
        note = None
        complete = True
        try:
            for tag, payload, info in stream:
                if budget.max_checks is not None and checked >= budget.max_checks:
                    complete = False
                    note = "budget exhausted"
                    break
                if tag == "skip":
                    skipped += 1
                    complete = False
                    if note is None:
                        note = payload
                    continue
                ok, how, extra = membership(payload)
                checked += 1
                if not ok:
                    witness = dict(info)
                    witness["decided_by"] = how
                    if extra:
                        witness.update(extra)
                    return SectionResult(name, checked, skipped, False,
                                         complete, witness, note)
        except SizeGuard as e:
            complete = False
            note = str(e)
        return SectionResult(name, checked, skipped, True, complete, None, note)

    def unions():
        for pi, i in enumerate(members):
            for j in members[pi:]:
                fi, fj = u_frames[i], u_frames[j]
                info = {"construction": "disjoint_union", "members": [i, j]}
                if fi.size + fj.size > budget.union_size_limit:
                    yield "skip", "union size limit", info
                    continue
                try:
                    du, _ = disjoint_union((fi, fj), caps=caps)
                except SizeGuard as e:
                    yield "skip", str(e), info
                    continue
                yield "check", du, info

    def subframes():
        for i in members:
            f = u_frames[i]
            for smask in range(1, f.base.full_mask + 1):
                got = induced_subframe(f, smask, caps=caps)
                if got is None:
                    continue
                yield "check", got[0], {"construction": "generated_subframe",
                                        "member": i,
                                        "states": _state_list(smask)}

    def images():
        for i in members:
            for q, qmap in quotient_frames(u_frames[i], caps=caps):
                yield "check", q, {"construction": "p_morphic_image",
                                   "member": i,
                                   "map": list(qmap.graph)}

    def pfe_checks() -> SectionResult:
        checked = skipped = 0
        witness = None
        complete = True
        note = None
        eta_ok = 0
        try:
            for i, f in enumerate(u_frames):
                if budget.max_checks is not None and checked >= budget.max_checks:
                    complete = False
                    note = "budget exhausted"
                    break
                pe = pfe(f, transform=transform, caps=caps)
                in_class = i in member_ids
                pe_in, how, extra = membership(pe)
                checked += 1
                if eta_frame_iso(f, transform=transform, caps=caps) is not None:
                    eta_ok += 1
                if in_class and not pe_in:
                    witness = {"construction": "pfe", "member": i,
                               "direction": "closure", "decided_by": how}
                elif pe_in and not in_class:
                    witness = {"construction": "pfe", "member": i,
                               "direction": "reflection", "decided_by": how}
                if witness is not None:
                    if extra:
                        witness.update(extra)
                    break
        except SizeGuard as e:
            complete = False
            note = str(e)
        eta_note = f"unit map an isomorphism on {eta_ok}/{checked} frames"
        note = eta_note if note is None else f"{note}; {eta_note}"
        return SectionResult("pfe_closure_reflection", checked, skipped,
                             witness is None, complete, witness, note)

    sections = (
        drive("disjoint_unions", unions()),
        drive("generated_subframes", subframes()),
        drive("p_morphic_images", images()),
        pfe_checks(),
    )
    return AuditReport(universe.kind, len(u_frames), members, sections)
