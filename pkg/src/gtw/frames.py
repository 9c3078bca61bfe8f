"""The four kinds of modal intuitionistic frames over finite posets.

A frame is a poset with one piece of modal structure:

- box: a relation R with images R[x] stored as bitmask rows, required to
  satisfy (<= . R . <=) = R, equivalently: every R[x] is an upset and
  x <= y implies R[y] a subset of R[x];
- im: per-state families N(x) of upsets, upward closed among upsets and
  monotone in x. Families are stored as the antichain of their minimal
  members (supersets implied) but compared extensionally;
- cin: two per-state families of arbitrary subsets, stored extensionally,
  N_box monotone and N_dia antitone in x. Hard-capped at 4 states;
- si: a relation R whose only law is x <= y R z implies x R z, i.e. the
  image map is antitone. The image map x -> R[x] is monotone only when
  subsets are ordered by reverse inclusion, which is the order this module
  uses for the si successor functor throughout; with plain inclusion the
  frame law and the persistence of `a ~> b` would both fail.

Frames are immutable and compared by identity; use frame_equal or
frame_isomorphic for structural comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .caps import DEFAULT_CAPS, Caps, guard
from .errors import (
    FrameConditionError,
    KindError,
    KindMismatch,
    MissingLetterError,
)
from .order import Poset, PosetMap, iter_bits, permute_mask, poset_coproduct, upsets
from .syntax import (
    And,
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
    AxiomPair,
    validate_formula,
)


@dataclass(frozen=True, eq=False)
class Frame:
    kind: str
    base: Poset
    rel: tuple[int, ...] = ()
    nbhd: tuple[frozenset, ...] = ()
    nbox: tuple[frozenset, ...] = ()
    ndia: tuple[frozenset, ...] = ()

    @property
    def size(self) -> int:
        return self.base.size

    @cached_property
    def signature(self) -> Signature:
        return Signature(self.kind)


def minimal_antichain(masks) -> frozenset:
    """Keep only the subset-minimal masks."""
    ms = set(masks)
    return frozenset(m for m in ms
                     if not any(o != m and o & ~m == 0 for o in ms))


def im_member(frame: Frame, x: int, mask: int) -> bool:
    """Whether the upset `mask` belongs to N(x)."""
    return any(m & ~mask == 0 for m in frame.nbhd[x])


def im_family(frame: Frame, x: int, *, caps: Caps = DEFAULT_CAPS) -> tuple[int, ...]:
    """The full extensional family N(x), as upset masks in ascending order."""
    return tuple(a for a in upsets(frame.base, caps=caps) if im_member(frame, x, a))


def rel_rows(size: int, pairs) -> tuple[int, ...]:
    rows = [0] * size
    for x, y in pairs:
        if not (0 <= x < size and 0 <= y < size):
            raise ValueError(f"relation pair ({x},{y}) out of range")
        rows[x] |= 1 << y
    return tuple(rows)


def make_box_frame(base: Poset, pairs, *, caps: Caps = DEFAULT_CAPS) -> Frame:
    return validate_frame(Frame("box", base, rel=rel_rows(base.size, pairs)), caps=caps)


def make_si_frame(base: Poset, pairs, *, caps: Caps = DEFAULT_CAPS) -> Frame:
    return validate_frame(Frame("si", base, rel=rel_rows(base.size, pairs)), caps=caps)


def make_im_frame(base: Poset, families, *, caps: Caps = DEFAULT_CAPS) -> Frame:
    nbhd = tuple(minimal_antichain(fam) for fam in families)
    return validate_frame(Frame("im", base, nbhd=nbhd), caps=caps)


def make_cin_frame(base: Poset, nbox, ndia, *, caps: Caps = DEFAULT_CAPS) -> Frame:
    return validate_frame(
        Frame("cin", base, nbox=tuple(map(frozenset, nbox)),
              ndia=tuple(map(frozenset, ndia))), caps=caps)


def _require_shape(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def validate_frame(frame: Frame, *, caps: Caps = DEFAULT_CAPS) -> Frame:
    """Check the kind-specific frame law; raise FrameConditionError with the
    first violating witness (states scanned in ascending order)."""
    p = frame.base
    n = p.size
    full = p.full_mask
    if frame.kind in ("box", "si"):
        _require_shape(len(frame.rel) == n and not frame.nbhd
                       and not frame.nbox and not frame.ndia,
                       f"{frame.kind} frame needs exactly a relation")
        _require_shape(all(r & ~full == 0 for r in frame.rel),
                       "relation row out of range")
        if frame.kind == "box":
            for x in range(n):
                for z in iter_bits(frame.rel[x]):
                    bad = p.up[z] & ~frame.rel[x]
                    if bad:
                        w = next(iter_bits(bad))
                        raise FrameConditionError(
                            "box-image-upset", (x, z, w),
                            f"{x} R {z} <= {w} requires {x} R {w}")
        for x in range(n):
            for y in iter_bits(p.up[x]):
                bad = frame.rel[y] & ~frame.rel[x]
                if bad:
                    z = next(iter_bits(bad))
                    raise FrameConditionError(
                        f"{frame.kind}-antitone", (x, y, z),
                        f"{x} <= {y} R {z} requires {x} R {z}")
    elif frame.kind == "im":
        _require_shape(len(frame.nbhd) == n and not frame.rel
                       and not frame.nbox and not frame.ndia,
                       "im frame needs exactly per-state neighborhood families")
        for x in range(n):
            fam = frame.nbhd[x]
            _require_shape(minimal_antichain(fam) == fam,
                           f"neighborhoods of state {x} are not a minimal antichain")
            for m in fam:
                _require_shape(m & ~full == 0, f"neighborhood of {x} out of range")
                if not p.is_upset(m):
                    raise FrameConditionError(
                        "im-member-upset", (x, m),
                        f"member {m:#x} of N({x}) is not an upset")
        for x in range(n):
            for y in iter_bits(p.up[x]):
                for m in frame.nbhd[x]:
                    if not im_member(frame, y, m):
                        raise FrameConditionError(
                            "im-monotone", (x, y, m),
                            f"{x} <= {y} but member {m:#x} of N({x}) is not in N({y})")
    elif frame.kind == "cin":
        guard("cin frame size", n, caps.max_cin_size)
        _require_shape(len(frame.nbox) == n and len(frame.ndia) == n
                       and not frame.rel and not frame.nbhd,
                       "cin frame needs exactly the two neighborhood families")
        for fams in (frame.nbox, frame.ndia):
            for x in range(n):
                _require_shape(all(m & ~full == 0 for m in fams[x]),
                               f"neighborhood of {x} out of range")
        for x in range(n):
            for y in iter_bits(p.up[x]):
                missing = frame.nbox[x] - frame.nbox[y]
                if missing:
                    m = min(missing)
                    raise FrameConditionError(
                        "cin-box-monotone", (x, y, m),
                        f"{x} <= {y} but {m:#x} in N_box({x}) is not in N_box({y})")
                extra = frame.ndia[y] - frame.ndia[x]
                if extra:
                    m = min(extra)
                    raise FrameConditionError(
                        "cin-dia-antitone", (x, y, m),
                        f"{x} <= {y} but {m:#x} in N_dia({y}) is not in N_dia({x})")
    else:
        raise ValueError(f"unknown frame kind {frame.kind!r}")
    return frame


def frame_equal(a: Frame, b: Frame) -> bool:
    return (a.kind == b.kind and a.base.size == b.base.size
            and a.base.up == b.base.up and a.rel == b.rel
            and a.nbhd == b.nbhd and a.nbox == b.nbox and a.ndia == b.ndia)


@dataclass(frozen=True)
class Valuation:
    """Letters in strictly increasing order, each mapped to an upset mask."""

    letters: tuple[str, ...]
    masks: tuple[int, ...]

    def __post_init__(self):
        if len(self.letters) != len(self.masks):
            raise ValueError("letters and masks differ in length")
        if any(a >= b for a, b in zip(self.letters, self.letters[1:])):
            raise ValueError("letters must be strictly increasing")

    @classmethod
    def from_dict(cls, d: dict[str, int]) -> "Valuation":
        items = sorted(d.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    def mask(self, letter: str) -> int:
        try:
            return self.masks[self.letters.index(letter)]
        except ValueError:
            raise MissingLetterError(letter) from None

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.letters, self.masks))


@dataclass(frozen=True, eq=False)
class Model:
    frame: Frame
    valuation: Valuation


def make_model(frame: Frame, assignment: dict[str, int]) -> Model:
    v = Valuation.from_dict(assignment)
    for letter, m in zip(v.letters, v.masks):
        if m & ~frame.base.full_mask:
            raise ValueError(f"valuation of {letter!r} out of range")
        if not frame.base.is_upset(m):
            raise ValueError(f"valuation of {letter!r} is not an upset")
    return Model(frame, v)


def truth_set(model: Model, formula: Formula) -> int:
    """The denotation of formula as a state bitmask (always an upset)."""
    validate_formula(formula, model.frame.signature)
    return _eval(model, formula, {})


def satisfies(model: Model, x: int, formula: Formula) -> bool:
    return truth_set(model, formula) >> x & 1 == 1


def _eval(m: Model, f: Formula, memo: dict) -> int:
    hit = memo.get(f)
    if hit is not None:
        return hit
    fr = m.frame
    p = fr.base
    full = p.full_mask
    if isinstance(f, Top):
        out = full
    elif isinstance(f, Bot):
        out = 0
    elif isinstance(f, Letter):
        out = m.valuation.mask(f.name)
    elif isinstance(f, And):
        out = _eval(m, f.left, memo) & _eval(m, f.right, memo)
    elif isinstance(f, Or):
        out = _eval(m, f.left, memo) | _eval(m, f.right, memo)
    elif isinstance(f, Imp):
        a, b = _eval(m, f.left, memo), _eval(m, f.right, memo)
        out = sum(1 << x for x in range(p.size) if p.up[x] & a & ~b == 0)
    elif isinstance(f, Box):
        a = _eval(m, f.child, memo)
        if fr.kind == "box":
            out = sum(1 << x for x in range(p.size) if fr.rel[x] & ~a == 0)
        else:
            out = sum(1 << x for x in range(p.size) if a in fr.nbox[x])
    elif isinstance(f, Dia):
        a = _eval(m, f.child, memo)
        comp = full & ~a
        out = sum(1 << x for x in range(p.size) if comp not in fr.ndia[x])
    elif isinstance(f, Tri):
        a = _eval(m, f.child, memo)
        out = sum(1 << x for x in range(p.size) if im_member(fr, x, a))
    elif isinstance(f, Sto):
        a, b = _eval(m, f.left, memo), _eval(m, f.right, memo)
        out = sum(1 << x for x in range(p.size) if fr.rel[x] & a & ~b == 0)
    else:
        raise ValueError(f"unknown formula node {type(f).__name__}")
    memo[f] = out
    return out


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    valuation: Valuation | None = None
    state: int | None = None

    def __bool__(self) -> bool:
        return self.valid


def _iter_valuations(frame: Frame, names: tuple[str, ...], *, caps: Caps):
    us = upsets(frame.base, caps=caps)
    guard("valuation search", len(us) ** len(names), caps.max_valuations)
    for combo in itertools.product(us, repeat=len(names)):
        yield Valuation(names, combo)


def frame_validates(frame: Frame, formula: Formula,
                    *, caps: Caps = DEFAULT_CAPS) -> ValidityResult:
    """Exhaustive check over all valuations of the letters occurring in the
    formula; the first counterexample (canonical valuation order, lowest
    state) is reported."""
    from .syntax import letters as _letters
    validate_formula(formula, frame.signature)
    names = tuple(sorted(_letters(formula)))
    full = frame.base.full_mask
    for v in _iter_valuations(frame, names, caps=caps):
        ts = _eval(Model(frame, v), formula, {})
        if ts != full:
            fail = full & ~ts
            return ValidityResult(False, v, next(iter_bits(fail)))
    return ValidityResult(True)


def frame_validates_axiom(frame: Frame, ax: AxiomPair,
                          *, caps: Caps = DEFAULT_CAPS) -> ValidityResult:
    """lhs <-> rhs is valid iff the two truth sets agree in every model."""
    from .syntax import letters as _letters
    validate_formula(ax.lhs, frame.signature)
    validate_formula(ax.rhs, frame.signature)
    names = tuple(sorted(_letters(ax.lhs) | _letters(ax.rhs)))
    for v in _iter_valuations(frame, names, caps=caps):
        memo: dict = {}
        m = Model(frame, v)
        a, b = _eval(m, ax.lhs, memo), _eval(m, ax.rhs, memo)
        if a != b:
            return ValidityResult(False, v, next(iter_bits(a ^ b)))
    return ValidityResult(True)


def functor_action(kind: str, f: PosetMap, value, *, caps: Caps = DEFAULT_CAPS):
    """Apply the modal-structure functor of the kind to a p-morphism.

    box: direct image of an upset; im: a family is pushed to
    {a' | preimage of a' in the family}, returned as a minimal antichain;
    cin: the same preimage condition applied to both families of arbitrary
    subsets; si: direct image of an arbitrary subset.
    """
    if kind in ("box", "si"):
        return f.image_mask(value)
    if kind == "im":
        out = []
        for a2 in upsets(f.cod, caps=caps):
            pre = f.preimage_mask(a2)
            if any(m & ~pre == 0 for m in value):
                out.append(a2)
        return minimal_antichain(out)
    if kind == "cin":
        guard("cin functor action", 1 << f.cod.size, caps.max_subset_scan)
        outs = []
        for fam in value:
            outs.append(frozenset(
                a2 for a2 in range(1 << f.cod.size)
                if f.preimage_mask(a2) in fam))
        return tuple(outs)
    raise ValueError(f"unknown frame kind {kind!r}")


def check_frame_morphism(f: PosetMap, x_frame: Frame, y_frame: Frame,
                         *, caps: Caps = DEFAULT_CAPS) -> str | None:
    """None if f is a frame morphism, else a reason with a witness.

    The kind condition is checked literally and then cross-checked against
    the square `structure(f(x)) == functor_action(f)(structure(x))`; the two
    formulations are equivalent, so disagreement is a bug.
    """
    if x_frame.kind != y_frame.kind:
        raise KindMismatch(f"{x_frame.kind} vs {y_frame.kind}")
    if f.dom.up != x_frame.base.up or f.cod.up != y_frame.base.up:
        raise ValueError("map endpoints do not match the frames")
    if not f.is_monotone():
        return "not monotone"
    if not f.is_p_morphism():
        return "order back condition fails"
    kind = x_frame.kind
    reason = None
    if kind in ("box", "si"):
        for x in range(x_frame.size):
            for y in iter_bits(x_frame.rel[x]):
                if not y_frame.rel[f(x)] >> f(y) & 1:
                    reason = f"forth fails: {x} R {y} but not {f(x)} R' {f(y)}"
                    break
            if reason:
                break
            for z2 in iter_bits(y_frame.rel[f(x)]):
                if not any(f(z) == z2 for z in iter_bits(x_frame.rel[x])):
                    reason = f"back fails: {f(x)} R' {z2} has no R-preimage from {x}"
                    break
            if reason:
                break
    elif kind == "im":
        cod_upsets = upsets(f.cod, caps=caps)
        for x in range(x_frame.size):
            for a2 in cod_upsets:
                if im_member(x_frame, x, f.preimage_mask(a2)) != im_member(y_frame, f(x), a2):
                    reason = f"neighborhood condition fails at state {x}, upset {a2:#x}"
                    break
            if reason:
                break
    else:
        for x in range(x_frame.size):
            for a2 in range(1 << f.cod.size):
                pre = f.preimage_mask(a2)
                if (pre in x_frame.nbox[x]) != (a2 in y_frame.nbox[f(x)]):
                    reason = f"box-family condition fails at state {x}, set {a2:#x}"
                    break
                if (pre in x_frame.ndia[x]) != (a2 in y_frame.ndia[f(x)]):
                    reason = f"dia-family condition fails at state {x}, set {a2:#x}"
                    break
            if reason:
                break
    square_ok = True
    for x in range(x_frame.size):
        if kind in ("box", "si"):
            lhs = functor_action(kind, f, x_frame.rel[x], caps=caps)
            rhs = y_frame.rel[f(x)]
        elif kind == "im":
            lhs = functor_action(kind, f, x_frame.nbhd[x], caps=caps)
            rhs = y_frame.nbhd[f(x)]
        else:
            lhs = functor_action(kind, f, (x_frame.nbox[x], x_frame.ndia[x]), caps=caps)
            rhs = (y_frame.nbox[f(x)], y_frame.ndia[f(x)])
        if lhs != rhs:
            square_ok = False
            break
    assert (reason is None) == square_ok, "kind condition and functor square disagree"
    return reason


def is_frame_morphism(f: PosetMap, x_frame: Frame, y_frame: Frame,
                      *, caps: Caps = DEFAULT_CAPS) -> bool:
    return check_frame_morphism(f, x_frame, y_frame, caps=caps) is None


def disjoint_union(frames, *, caps: Caps = DEFAULT_CAPS):
    """The coproduct frame plus the injections.

    box/si keep each component's relation; im/cin neighborhoods are
    determined by traces: a set belongs to N(x in component k) iff its
    intersection with component k belongs to N_k(x).
    """
    frames = tuple(frames)
    if not frames:
        raise ValueError("disjoint_union needs at least one frame")
    kind = frames[0].kind
    if any(fr.kind != kind for fr in frames):
        raise KindMismatch("disjoint_union requires frames of one kind")
    base, injections = poset_coproduct([fr.base for fr in frames])
    offsets = [inj.graph[0] for inj in injections]
    if kind in ("box", "si"):
        rel = []
        for fr, off in zip(frames, offsets):
            rel.extend(r << off for r in fr.rel)
        out = Frame(kind, base, rel=tuple(rel))
    elif kind == "im":
        nbhd = []
        for fr, off in zip(frames, offsets):
            nbhd.extend(frozenset(m << off for m in fam) for fam in fr.nbhd)
        out = Frame(kind, base, nbhd=tuple(nbhd))
    else:
        guard("cin disjoint union size", base.size, caps.max_cin_size)
        nbox, ndia = [], []
        for fr, off in zip(frames, offsets):
            comp = fr.base.full_mask << off
            for x in range(fr.size):
                nbox.append(frozenset(a for a in range(1 << base.size)
                                      if (a & comp) >> off in fr.nbox[x]))
                ndia.append(frozenset(a for a in range(1 << base.size)
                                      if (a & comp) >> off in fr.ndia[x]))
        out = Frame(kind, base, nbox=tuple(nbox), ndia=tuple(ndia))
    return validate_frame(out, caps=caps), injections


def _restrict_mask(mask: int, states: list[int]) -> int:
    out = 0
    for new, old in enumerate(states):
        if mask >> old & 1:
            out |= 1 << new
    return out


def generate_subframe(frame: Frame, seed_mask: int, *, caps: Caps = DEFAULT_CAPS):
    """The smallest subframe containing the seed states, closed under <= and
    the relation; box and si only (no closure law exists for neighborhoods).
    Returns the subframe and its inclusion."""
    if frame.kind not in ("box", "si"):
        raise KindError(f"generate_subframe undefined for kind {frame.kind}")
    if seed_mask & ~frame.base.full_mask or seed_mask == 0:
        raise ValueError("seed set empty or out of range")
    s = seed_mask
    while True:
        grown = s
        for x in iter_bits(s):
            grown |= frame.base.up[x] | frame.rel[x]
        if grown == s:
            break
        s = grown
    states = list(iter_bits(s))
    sub_base = Poset(len(states),
                     tuple(_restrict_mask(frame.base.up[x], states) for x in states))
    sub = Frame(frame.kind, sub_base,
                rel=tuple(_restrict_mask(frame.rel[x], states) for x in states))
    inclusion = PosetMap(sub_base, frame.base, tuple(states))
    return validate_frame(sub, caps=caps), inclusion


def generated_subframe_check(f: PosetMap, sub: Frame, frame: Frame,
                             *, caps: Caps = DEFAULT_CAPS) -> bool:
    """Whether f exhibits sub as a generated subframe: an embedding of posets
    that is also a frame morphism."""
    return f.is_embedding() and is_frame_morphism(f, sub, frame, caps=caps)


def p_morphic_image_check(f: PosetMap, frame: Frame, image: Frame,
                          *, caps: Caps = DEFAULT_CAPS) -> bool:
    return f.is_surjective() and is_frame_morphism(f, frame, image, caps=caps)


def find_p_morphic_images(frame: Frame, universe, *, caps: Caps = DEFAULT_CAPS):
    """Scan candidate frames (in order) for p-morphic images of `frame`; for
    each hit, the first surjective morphism in lexicographic graph order is
    returned with it."""
    out = []
    for cand in universe:
        if cand.kind != frame.kind:
            raise KindMismatch("universe kind does not match frame")
        guard("morphism search", cand.size ** frame.size, caps.max_map_search)
        for graph in itertools.product(range(cand.size), repeat=frame.size):
            g = PosetMap(frame.base, cand.base, graph)
            if not (g.is_surjective() and g.is_monotone() and g.is_p_morphism()):
                continue
            if check_frame_morphism(g, frame, cand, caps=caps) is None:
                out.append((cand, g))
                break
    return out


def relabel_frame(frame: Frame, perm: tuple[int, ...]) -> Frame:
    base = frame.base.relabel(perm)
    if frame.kind in ("box", "si"):
        rel = [0] * frame.size
        for x in range(frame.size):
            rel[perm[x]] = permute_mask(frame.rel[x], perm)
        return Frame(frame.kind, base, rel=tuple(rel))
    if frame.kind == "im":
        nbhd = [frozenset()] * frame.size
        for x in range(frame.size):
            nbhd[perm[x]] = frozenset(permute_mask(m, perm) for m in frame.nbhd[x])
        return Frame(frame.kind, base, nbhd=tuple(nbhd))
    nbox = [frozenset()] * frame.size
    ndia = [frozenset()] * frame.size
    for x in range(frame.size):
        nbox[perm[x]] = frozenset(permute_mask(m, perm) for m in frame.nbox[x])
        ndia[perm[x]] = frozenset(permute_mask(m, perm) for m in frame.ndia[x])
    return Frame(frame.kind, base, nbox=tuple(nbox), ndia=tuple(ndia))


def _structure_encoding(frame: Frame):
    if frame.kind in ("box", "si"):
        return frame.rel
    if frame.kind == "im":
        return tuple(tuple(sorted(fam)) for fam in frame.nbhd)
    return (tuple(tuple(sorted(fam)) for fam in frame.nbox),
            tuple(tuple(sorted(fam)) for fam in frame.ndia))


def frame_key(frame: Frame):
    """A relabeling-invariant key: the minimal structure encoding over all
    permutations that carry the base poset to its canonical form."""
    best = None
    for perm in frame.base.canonicalizing_perms():
        enc = _structure_encoding(relabel_frame(frame, perm))
        if best is None or enc < best:
            best = enc
    return (frame.kind, frame.base.canonical_key, best)


def frame_isomorphic(a: Frame, b: Frame) -> tuple[int, ...] | None:
    """A relabeling of a onto b, if one exists (brute force, small frames)."""
    if a.kind != b.kind or a.size != b.size:
        return None
    for perm in itertools.permutations(range(a.size)):
        r = relabel_frame(a, perm)
        if r.base.up == b.base.up and frame_equal(r, b):
            return perm
    return None
