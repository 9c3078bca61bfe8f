"""Finite modal algebras: Heyting algebras carrying the modal operation
tables of one signature kind, complex algebras of frames, algebra-side
evaluation, and the homomorphism/subalgebra/product primitives.

Equational validation on construction follows the signature: box tables must
satisfy op(top) = top and op(a) meet op(b) = op(a meet b); im tables must be
monotone; cin and si tables carry no equations (none are imposed by the
logics' frame classes at this level; si normality is deliberately left
unvalidated).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .caps import DEFAULT_CAPS, Caps, guard
from .errors import KindMismatch, MissingLetterError, SizeGuard
from .heyting import FinHA, check_lattice, check_residuation
from .frames import Frame, im_member
from .order import iter_bits
from .syntax import (
    And,
    AxiomPair,
    Bot,
    Box,
    Dia,
    Formula,
    Imp,
    Letter,
    Or,
    Signature,
    Sto,
    Top,
    Tri,
    validate_formula,
)


@dataclass(frozen=True, eq=False)
class ModalAlgebra:
    """A FinHA plus modal tables: unary_ops holds one table for box and im,
    two (box then dia) for cin; binary_op is the si table."""

    kind: str
    base: FinHA
    unary_ops: tuple[tuple[int, ...], ...] = ()
    binary_op: tuple[tuple[int, ...], ...] | None = None

    @property
    def size(self) -> int:
        return self.base.size

    @cached_property
    def signature(self) -> Signature:
        return Signature(self.kind)


_ARITY = {"box": 1, "im": 1, "cin": 2, "si": 0}


def validate_modal_algebra(alg: ModalAlgebra, *, caps: Caps = DEFAULT_CAPS) -> ModalAlgebra:
    check_lattice(alg.base, caps=caps)
    check_residuation(alg.base, caps=caps)
    return check_modal_tables(alg, caps=caps)


def check_modal_tables(alg: ModalAlgebra, *, caps: Caps = DEFAULT_CAPS) -> ModalAlgebra:
    """Table shapes plus the kind-specific modal equations, without
    re-verifying the base lattice laws."""
    n = alg.size
    if len(alg.unary_ops) != _ARITY[alg.kind]:
        raise ValueError(f"{alg.kind} algebra needs {_ARITY[alg.kind]} unary tables")
    if (alg.binary_op is None) == (alg.kind == "si"):
        raise ValueError("binary table required exactly for si")
    for t in alg.unary_ops:
        if len(t) != n or any(not 0 <= v < n for v in t):
            raise ValueError("unary table malformed")
    if alg.binary_op is not None:
        if len(alg.binary_op) != n or any(
                len(row) != n or any(not 0 <= v < n for v in row)
                for row in alg.binary_op):
            raise ValueError("binary table malformed")
    if n > caps.max_lattice_check:
        return alg
    b = alg.base
    if alg.kind == "box":
        op = alg.unary_ops[0]
        if op[b.top] != b.top:
            raise ValueError("box table violates op(top) = top")
        for x in range(n):
            for y in range(n):
                if b.meet[op[x]][op[y]] != op[b.meet[x][y]]:
                    raise ValueError(
                        f"box table violates meet preservation at ({x},{y})")
    elif alg.kind == "im":
        op = alg.unary_ops[0]
        for x in range(n):
            for y in iter_bits(b.le[x]):
                if not b.leq(op[x], op[y]):
                    raise ValueError(f"im table not monotone at ({x},{y})")
    return alg


def complex_algebra(frame: Frame, *, caps: Caps = DEFAULT_CAPS) -> ModalAlgebra:
    """The algebra of upsets of the frame with the modal structure read off
    pointwise; labels of the base algebra are the upset masks."""
    from .heyting import up_algebra
    base = up_algebra(frame.base, caps=caps)
    masks = base.labels
    index = {m: i for i, m in enumerate(masks)}
    n_states = frame.size
    full = frame.base.full_mask

    def table(point_cond):
        out = []
        for a in masks:
            m = sum(1 << x for x in range(n_states) if point_cond(x, a))
            out.append(index[m])
        return tuple(out)

    if frame.kind == "box":
        ops = (table(lambda x, a: frame.rel[x] & ~a == 0),)
        binop = None
    elif frame.kind == "im":
        ops = (table(lambda x, a: im_member(frame, x, a)),)
        binop = None
    elif frame.kind == "cin":
        ops = (table(lambda x, a: a in frame.nbox[x]),
               table(lambda x, a: (full & ~a) not in frame.ndia[x]))
        binop = None
    elif frame.kind == "si":
        ops = ()
        binop = tuple(
            tuple(index[sum(1 << x for x in range(n_states)
                            if frame.rel[x] & a & ~b == 0)]
                  for b in masks)
            for a in masks)
    else:
        raise ValueError(f"unknown frame kind {frame.kind!r}")
    # The base algebra is trusted by construction (see up_algebra); the modal
    # equations are still checked, as they are genuine invariants of the
    # pointwise tables.
    return check_modal_tables(
        ModalAlgebra(frame.kind, base, unary_ops=ops, binary_op=binop), caps=caps)


def algebra_eval(alg: ModalAlgebra, formula: Formula,
                 assignment: dict[str, int]) -> int:
    validate_formula(formula, alg.signature)
    return _eval(alg, formula, assignment, {})


def _eval(alg: ModalAlgebra, f: Formula, asg: dict[str, int], memo: dict) -> int:
    hit = memo.get(f)
    if hit is not None:
        return hit
    b = alg.base
    if isinstance(f, Top):
        out = b.top
    elif isinstance(f, Bot):
        out = b.bottom
    elif isinstance(f, Letter):
        if f.name not in asg:
            raise MissingLetterError(f.name)
        out = asg[f.name]
    elif isinstance(f, And):
        out = b.meet[_eval(alg, f.left, asg, memo)][_eval(alg, f.right, asg, memo)]
    elif isinstance(f, Or):
        out = b.join[_eval(alg, f.left, asg, memo)][_eval(alg, f.right, asg, memo)]
    elif isinstance(f, Imp):
        out = b.imp[_eval(alg, f.left, asg, memo)][_eval(alg, f.right, asg, memo)]
    elif isinstance(f, (Box, Dia, Tri)):
        which = 1 if isinstance(f, Dia) else 0
        out = alg.unary_ops[which][_eval(alg, f.child, asg, memo)]
    elif isinstance(f, Sto):
        out = alg.binary_op[_eval(alg, f.left, asg, memo)][_eval(alg, f.right, asg, memo)]
    else:
        raise ValueError(f"unknown formula node {type(f).__name__}")
    memo[f] = out
    return out


@dataclass(frozen=True)
class AlgebraValidityResult:
    valid: bool
    assignment: tuple[tuple[str, int], ...] | None = None

    def __bool__(self) -> bool:
        return self.valid


def _iter_assignments(alg: ModalAlgebra, names: tuple[str, ...], *, caps: Caps):
    guard("assignment search", alg.size ** len(names), caps.max_valuations)
    for combo in itertools.product(range(alg.size), repeat=len(names)):
        yield dict(zip(names, combo))


def algebra_validates(alg: ModalAlgebra, formula: Formula,
                      *, caps: Caps = DEFAULT_CAPS) -> AlgebraValidityResult:
    """Whether the formula evaluates to top under every assignment."""
    from .syntax import letters as _letters
    validate_formula(formula, alg.signature)
    names = tuple(sorted(_letters(formula)))
    for asg in _iter_assignments(alg, names, caps=caps):
        if _eval(alg, formula, asg, {}) != alg.base.top:
            return AlgebraValidityResult(False, tuple(sorted(asg.items())))
    return AlgebraValidityResult(True)


def algebra_validates_axiom(alg: ModalAlgebra, ax: AxiomPair,
                            *, caps: Caps = DEFAULT_CAPS) -> AlgebraValidityResult:
    from .syntax import letters as _letters
    validate_formula(ax.lhs, alg.signature)
    validate_formula(ax.rhs, alg.signature)
    names = tuple(sorted(_letters(ax.lhs) | _letters(ax.rhs)))
    for asg in _iter_assignments(alg, names, caps=caps):
        memo: dict = {}
        if _eval(alg, ax.lhs, asg, memo) != _eval(alg, ax.rhs, asg, memo):
            return AlgebraValidityResult(False, tuple(sorted(asg.items())))
    return AlgebraValidityResult(True)


def check_modal_homomorphism(h, a: ModalAlgebra, b: ModalAlgebra) -> str | None:
    """None if the total map h (a graph tuple) preserves bounds, lattice
    operations, Heyting implication and every modal table; else a reason."""
    if a.kind != b.kind:
        raise KindMismatch(f"{a.kind} vs {b.kind}")
    if len(h) != a.size or any(not 0 <= v < b.size for v in h):
        raise ValueError("homomorphism graph malformed")
    if h[a.base.top] != b.base.top:
        return "top not preserved"
    if h[a.base.bottom] != b.base.bottom:
        return "bottom not preserved"
    for x in range(a.size):
        for y in range(a.size):
            if h[a.base.meet[x][y]] != b.base.meet[h[x]][h[y]]:
                return f"meet not preserved at ({x},{y})"
            if h[a.base.join[x][y]] != b.base.join[h[x]][h[y]]:
                return f"join not preserved at ({x},{y})"
            if h[a.base.imp[x][y]] != b.base.imp[h[x]][h[y]]:
                return f"implication not preserved at ({x},{y})"
            if a.binary_op is not None:
                if h[a.binary_op[x][y]] != b.binary_op[h[x]][h[y]]:
                    return f"strict implication not preserved at ({x},{y})"
    for k, (ta, tb) in enumerate(zip(a.unary_ops, b.unary_ops)):
        for x in range(a.size):
            if h[ta[x]] != tb[h[x]]:
                return f"modal table {k} not preserved at {x}"
    return None


def is_modal_homomorphism(h, a: ModalAlgebra, b: ModalAlgebra) -> bool:
    return check_modal_homomorphism(h, a, b) is None


def _search_homs(a: ModalAlgebra, b: ModalAlgebra, *, surjective: bool,
                 caps: Caps):
    """Backtracking enumeration of modal homomorphisms a -> b in lexicographic
    graph order. Bounds are pinned first; partial assignments are pruned as
    soon as an operation with fully assigned operands disagrees."""
    guard("homomorphism search", b.size ** a.size, caps.max_map_search)
    n = a.size
    h = [-1] * n
    h[a.base.bottom] = b.base.bottom
    h[a.base.top] = b.base.top
    order = [x for x in range(n) if h[x] == -1]

    def consistent(x: int) -> bool:
        assigned = [y for y in range(n) if h[y] != -1]
        for y in assigned:
            for p, q in ((x, y), (y, x)):
                for op_a, op_b in ((a.base.meet, b.base.meet),
                                   (a.base.join, b.base.join),
                                   (a.base.imp, b.base.imp)):
                    r = op_a[p][q]
                    if h[r] != -1 and h[r] != op_b[h[p]][h[q]]:
                        return False
                if a.binary_op is not None:
                    r = a.binary_op[p][q]
                    if h[r] != -1 and h[r] != b.binary_op[h[p]][h[q]]:
                        return False
        for ta, tb in zip(a.unary_ops, b.unary_ops):
            for y in assigned:
                r = ta[y]
                if h[r] != -1 and h[r] != tb[h[y]]:
                    return False
        return True

    def rec(i: int):
        if i == len(order):
            if surjective and set(h) != set(range(b.size)):
                return
            graph = tuple(h)
            if check_modal_homomorphism(graph, a, b) is None:
                yield graph
            return
        if surjective:
            missing = len(set(range(b.size)) - set(v for v in h if v != -1))
            if missing > len(order) - i:
                return
        x = order[i]
        for v in range(b.size):
            h[x] = v
            if consistent(x):
                yield from rec(i + 1)
            h[x] = -1

    yield from rec(0)


def enumerate_modal_homs(a: ModalAlgebra, b: ModalAlgebra,
                         *, caps: Caps = DEFAULT_CAPS) -> tuple[tuple[int, ...], ...]:
    return tuple(_search_homs(a, b, surjective=False, caps=caps))


def is_homomorphic_image(a: ModalAlgebra, b: ModalAlgebra,
                         *, caps: Caps = DEFAULT_CAPS) -> tuple[int, ...] | None:
    """The first surjective modal homomorphism a -> b, or None: a witness
    that b is a homomorphic image of a."""
    for h in _search_homs(a, b, surjective=True, caps=caps):
        return h
    return None


def subalgebra_masks(alg: ModalAlgebra, *, caps: Caps = DEFAULT_CAPS) -> tuple[int, ...]:
    """Bitmasks of all subsets containing the bounds and closed under meet,
    join, implication and the modal operations, ascending."""
    if alg.size > caps.max_subalgebra:
        raise SizeGuard("subalgebra scan", alg.size, caps.max_subalgebra)
    must = 1 << alg.base.top | 1 << alg.base.bottom
    out = []
    for s in range(1 << alg.size):
        if s & must != must:
            continue
        elems = list(iter_bits(s))
        ok = True
        for x in elems:
            for t in alg.unary_ops:
                if not s >> t[x] & 1:
                    ok = False
            for y in elems:
                for t2 in (alg.base.meet, alg.base.join, alg.base.imp):
                    if not s >> t2[x][y] & 1:
                        ok = False
                if alg.binary_op is not None and not s >> alg.binary_op[x][y] & 1:
                    ok = False
            if not ok:
                break
        if ok:
            out.append(s)
    return tuple(out)


def subalgebra(alg: ModalAlgebra, mask: int, *, caps: Caps = DEFAULT_CAPS) -> ModalAlgebra:
    """The algebra induced on a closed subset; base labels keep the original
    element indices."""
    elems = list(iter_bits(mask))
    idx = {e: i for i, e in enumerate(elems)}
    n = len(elems)
    le = tuple(sum(1 << idx[y] for y in elems if alg.base.leq(x, y)) for x in elems)
    meet = tuple(tuple(idx[alg.base.meet[x][y]] for y in elems) for x in elems)
    join = tuple(tuple(idx[alg.base.join[x][y]] for y in elems) for x in elems)
    imp = tuple(tuple(idx[alg.base.imp[x][y]] for y in elems) for x in elems)
    base = FinHA(n, le, meet, join, idx[alg.base.bottom], idx[alg.base.top],
                 labels=tuple(elems), imp=imp)
    ops = tuple(tuple(idx[t[x]] for x in elems) for t in alg.unary_ops)
    binop = None
    if alg.binary_op is not None:
        binop = tuple(tuple(idx[alg.binary_op[x][y]] for y in elems) for x in elems)
    return validate_modal_algebra(
        ModalAlgebra(alg.kind, base, unary_ops=ops, binary_op=binop), caps=caps)


def subalgebras(alg: ModalAlgebra, *, caps: Caps = DEFAULT_CAPS) -> tuple[ModalAlgebra, ...]:
    return tuple(subalgebra(alg, m, caps=caps) for m in subalgebra_masks(alg, caps=caps))


def product(a: ModalAlgebra, b: ModalAlgebra, *, caps: Caps = DEFAULT_CAPS) -> ModalAlgebra:
    """Component-wise product; element i*|B|+j is the pair (i, j)."""
    if a.kind != b.kind:
        raise KindMismatch(f"{a.kind} vs {b.kind}")
    na, nb = a.size, b.size
    n = na * nb

    def pair(i, j):
        return i * nb + j

    le = []
    for i in range(na):
        for j in range(nb):
            m = 0
            for x in iter_bits(a.base.le[i]):
                for y in iter_bits(b.base.le[j]):
                    m |= 1 << pair(x, y)
            le.append(m)

    def combine(ta, tb):
        return tuple(
            tuple(pair(ta[i][x], tb[j][y])
                  for x in range(na) for y in range(nb))
            for i in range(na) for j in range(nb))

    meet = combine(a.base.meet, b.base.meet)
    join = combine(a.base.join, b.base.join)
    imp = combine(a.base.imp, b.base.imp)
    base = FinHA(n, tuple(le), meet, join,
                 pair(a.base.bottom, b.base.bottom), pair(a.base.top, b.base.top),
                 imp=imp)
    ops = tuple(
        tuple(pair(ta[i], tb[j]) for i in range(na) for j in range(nb))
        for ta, tb in zip(a.unary_ops, b.unary_ops))
    binop = None
    if a.binary_op is not None:
        binop = combine(a.binary_op, b.binary_op)
    return validate_modal_algebra(
        ModalAlgebra(a.kind, base, unary_ops=ops, binary_op=binop), caps=caps)
