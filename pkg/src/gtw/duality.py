"""Concrete duals of the modal signature layer over a finite Heyting algebra.

The free distributive lattice over the modal generators of an algebra A has
prime filters that are fully determined by their generator traces: which
generator images they contain. l_dual_points enumerates those traces directly
(box: the filters of A; im: the upsets of A; cin: arbitrary pairs of subsets),
and free_dl_oracle materializes the free lattice itself so the trace
representation can be certified independently.

tau maps such a point to structure over the prime filters of A (an upset for
box, an upward-closed family of upsets for im, a pair of subset families for
cin); sigma is the alternative transform for im. rho_flat goes back to a
trace, and rho_flat after tau is the identity. dual_frame applies tau to the
trace of every prime filter of a modal algebra's carrier, yielding a frame;
composing with complex algebras gives prime filter extensions of frames and
models. The si prime filter extension is computed directly from its relational
clause since si has no dual frame construction here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .algebras import ModalAlgebra, complex_algebra, is_modal_homomorphism
from .caps import DEFAULT_CAPS, Caps, guard
from .errors import KindError, SizeGuard
from .frames import (
    Frame,
    Model,
    frame_equal,
    make_model,
    minimal_antichain,
    relabel_frame,
    validate_frame,
)
from .heyting import (
    FinDL,
    FinHA,
    PrimeFilterSpace,
    dl_from_le,
    is_closed_upset,
    is_open_upset,
    prime_filters,
)
from .order import Poset, PosetMap, iter_bits, upsets


@dataclass(frozen=True)
class LDualPoint:
    """A prime filter of the free modal layer over an algebra, given by its
    generator trace.

    trace is a bitmask of algebra elements: for box the set {a | the box
    generator of a is in the filter}, always a filter of the algebra; for im
    the analogous set for the single unary generator, always an upset. For
    cin, trace holds the box generators and dia_trace the dia generators,
    both arbitrary subsets.
    """

    kind: str
    trace: int
    dia_trace: int | None = None

    def key(self):
        return (self.trace, -1 if self.dia_trace is None else self.dia_trace)


@dataclass(frozen=True, eq=False)
class LDualSpace:
    """All lower dual points of an algebra, ordered by trace inclusion
    (coordinatewise for cin), in ascending trace order.

    The inclusion poset is quadratic in the point count and only needed by
    the small-space consumers (oracle comparison, naturality squares), so it
    is materialized lazily and guarded."""

    kind: str
    algebra: FinHA
    points: tuple[LDualPoint, ...]

    @cached_property
    def index(self) -> dict[LDualPoint, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def poset(self) -> Poset:
        guard("dual point order", len(self.points),
              DEFAULT_CAPS.max_poset_order)
        rows = tuple(
            sum(1 << j for j, q in enumerate(self.points) if _point_leq(p, q))
            for p in self.points
        )
        return Poset(len(self.points), rows)


def _point_leq(p: LDualPoint, q: LDualPoint) -> bool:
    if p.trace & ~q.trace:
        return False
    if p.dia_trace is None:
        return True
    return p.dia_trace & ~q.dia_trace == 0


def _space_from_points(kind: str, algebra: FinHA, points) -> LDualSpace:
    return LDualSpace(kind, algebra, tuple(sorted(points, key=LDualPoint.key)))


def l_dual_points(kind: str, algebra: FinHA, *, caps: Caps = DEFAULT_CAPS) -> LDualSpace:
    """Enumerate the prime filters of the free modal layer by generator trace.

    box: one point per filter of the algebra, the improper filter included;
    im: one per upset of the algebra; cin: one per pair of arbitrary subsets.
    """
    n = algebra.size
    if kind == "box":
        traces = sorted(set(algebra.le))
        assert all(_box_trace_is_filter(algebra, t) for t in traces)
        points = [LDualPoint("box", t) for t in traces]
    elif kind == "im":
        points = [LDualPoint("im", t)
                  for t in upsets(algebra.as_poset(), caps=caps)]
    elif kind == "cin":
        guard("lower dual point enumeration", (1 << n) ** 2, caps.max_dual_points)
        points = [LDualPoint("cin", tb, td)
                  for tb in range(1 << n) for td in range(1 << n)]
    else:
        raise KindError(f"no lower dual for kind {kind!r}")
    guard("lower dual point enumeration", len(points), caps.max_dual_points)
    return _space_from_points(kind, algebra, points)


def _box_trace_is_filter(algebra: FinHA, trace: int) -> bool:
    if not trace >> algebra.top & 1:
        return False
    for a in iter_bits(trace):
        if algebra.le[a] & ~trace:
            return False
        for b in iter_bits(trace):
            if not trace >> algebra.meet[a][b] & 1:
                return False
    return True


def _tau_box(space: PrimeFilterSpace, trace: int) -> int:
    return sum(1 << k for k, f in enumerate(space.filters) if trace & ~f == 0)


def _tau_im_closed(space: PrimeFilterSpace, trace: int, d: int) -> bool:
    return all(trace >> a & 1 for a in range(space.algebra.size)
               if d & ~space.theta[a] == 0)


def _tau_im_member(space: PrimeFilterSpace, trace: int, d: int) -> bool:
    """Membership of the upset d in tau(Q), by the first applicable clause:
    theta-image, then closed, then reduction to a closed subset. Overlapping
    clauses must agree."""
    image = space.theta_index.get(d)
    if image is not None:
        verdict = trace >> image & 1 == 1
        assert _tau_im_closed(space, trace, d) == verdict, \
            "im tau clauses disagree on a theta-image upset"
        return verdict
    if is_closed_upset(d, space):
        return _tau_im_closed(space, trace, d)
    return any(
        _tau_im_closed(space, trace, c)
        for c in upsets(space.poset)
        if c & ~d == 0 and is_closed_upset(c, space)
    )


def _tau_im(space: PrimeFilterSpace, trace: int, *, caps: Caps) -> frozenset:
    fam = frozenset(d for d in upsets(space.poset, caps=caps)
                    if _tau_im_member(space, trace, d))
    for d in fam:
        for e in upsets(space.poset, caps=caps):
            assert d & ~e or e in fam, "im tau family is not upward closed"
    return fam


def _sigma_im_open(space: PrimeFilterSpace, trace: int, d: int) -> bool:
    return any(trace >> a & 1 and space.theta[a] & ~d == 0
               for a in range(space.algebra.size))


def _sigma_im(space: PrimeFilterSpace, trace: int, *, caps: Caps) -> frozenset:
    out = []
    for d in upsets(space.poset, caps=caps):
        if is_open_upset(d, space):
            ok = _sigma_im_open(space, trace, d)
        else:
            ok = all(_sigma_im_open(space, trace, e)
                     for e in upsets(space.poset, caps=caps)
                     if is_open_upset(e, space) and d & ~e == 0)
        if ok:
            out.append(d)
    return frozenset(out)


def _tau_cin(space: PrimeFilterSpace, trace: int, dia_trace: int) -> tuple[frozenset, frozenset]:
    full = (1 << len(space.filters)) - 1
    w1 = frozenset(space.theta[a] for a in iter_bits(trace))
    w2 = frozenset(full ^ space.theta[a] for a in range(space.algebra.size)
                   if not dia_trace >> a & 1)
    return (w1, w2)


def tau(kind: str, algebra: FinHA, point: LDualPoint, *, caps: Caps = DEFAULT_CAPS,
        space: PrimeFilterSpace | None = None):
    """The canonical structure over the prime filters of the algebra induced
    by a lower dual point: an upset mask for box, a frozenset of upset masks
    for im, a pair of frozensets of arbitrary subset masks for cin.

    Pass the algebra's prime filter space when calling in a loop; it is
    recomputed otherwise."""
    if space is None:
        space = prime_filters(algebra, caps=caps)
    if kind == "box":
        return _tau_box(space, point.trace)
    if kind == "im":
        return _tau_im(space, point.trace, caps=caps)
    if kind == "cin":
        return _tau_cin(space, point.trace, point.dia_trace)
    raise KindError(f"no tau for kind {kind!r}")


def sigma(algebra: FinHA, point: LDualPoint, *, caps: Caps = DEFAULT_CAPS,
          space: PrimeFilterSpace | None = None) -> frozenset:
    """The alternative im transform: open upsets enter by a witness below
    them, all other upsets by unanimity of their open supersets."""
    if space is None:
        space = prime_filters(algebra, caps=caps)
    return _sigma_im(space, point.trace, caps=caps)


def rho_flat(kind: str, algebra: FinHA, value, *, caps: Caps = DEFAULT_CAPS,
             space: PrimeFilterSpace | None = None) -> LDualPoint:
    """Read a generator trace back off structure over the prime filters."""
    if space is None:
        space = prime_filters(algebra, caps=caps)
    n = algebra.size
    if kind == "box":
        return LDualPoint("box", sum(
            1 << a for a in range(n) if value & ~space.theta[a] == 0))
    if kind == "im":
        return LDualPoint("im", sum(
            1 << a for a in range(n) if space.theta[a] in value))
    if kind == "cin":
        w1, w2 = value
        full = (1 << len(space.filters)) - 1
        tb = sum(1 << a for a in range(n) if space.theta[a] in w1)
        td = sum(1 << a for a in range(n) if full ^ space.theta[a] not in w2)
        return LDualPoint("cin", tb, td)
    raise KindError(f"no rho_flat for kind {kind!r}")


def _filter_traces(alg: ModalAlgebra, space: PrimeFilterSpace):
    """Generator traces of the prime filters of the carrier, via the modal
    tables: a is in the trace of q iff the table routes a into q."""
    out = []
    for f in space.filters:
        masks = tuple(
            sum(1 << a for a in range(alg.size) if f >> op[a] & 1)
            for op in alg.unary_ops
        )
        out.append(masks)
    return out


def _dual_frame_on(alg: ModalAlgebra, space: PrimeFilterSpace, transform: str,
                   caps: Caps) -> Frame:
    traces = _filter_traces(alg, space)
    if alg.kind == "box":
        rows = tuple(_tau_box(space, t[0]) for t in traces)
        return validate_frame(Frame("box", space.poset, rel=rows), caps=caps)
    if alg.kind == "im":
        member = _sigma_im if transform == "sigma" else _tau_im
        nbhd = tuple(minimal_antichain(member(space, t[0], caps=caps))
                     for t in traces)
        return validate_frame(Frame("im", space.poset, nbhd=nbhd), caps=caps)
    pairs = [_tau_cin(space, tb, td) for tb, td in traces]
    return validate_frame(
        Frame("cin", space.poset,
              nbox=tuple(p[0] for p in pairs),
              ndia=tuple(p[1] for p in pairs)), caps=caps)


def dual_frame(alg: ModalAlgebra, *, transform: str = "tau",
               caps: Caps = DEFAULT_CAPS) -> Frame:
    """The frame on the prime filters of the carrier, with modal structure
    obtained by applying the transform to each prime filter's generator trace."""
    if alg.kind == "si":
        raise KindError("si algebras have no dual frame construction")
    if transform not in ("tau", "sigma"):
        raise ValueError(f"unknown transform {transform!r}")
    if transform == "sigma" and alg.kind != "im":
        raise ValueError("the sigma transform is defined for im only")
    space = prime_filters(alg.base, caps=caps)
    return _dual_frame_on(alg, space, transform, caps)


def _si_pfe(alg: ModalAlgebra, space: PrimeFilterSpace, caps: Caps) -> Frame:
    op = alg.binary_op
    n = alg.size
    k = len(space.filters)
    rows = []
    for p in space.filters:
        row = 0
        for j, q in enumerate(space.filters):
            if all(q >> b & 1
                   for a in range(n) for b in range(n)
                   if p >> op[a][b] & 1 and q >> a & 1):
                row |= 1 << j
        rows.append(row)
    return validate_frame(Frame("si", space.poset, rel=tuple(rows)), caps=caps)


def _pfe_with_space(frame: Frame, transform: str, caps: Caps):
    alg = complex_algebra(frame, caps=caps)
    space = prime_filters(alg.base, caps=caps)
    if frame.kind == "si":
        if transform != "tau":
            raise ValueError("the sigma transform is defined for im only")
        return _si_pfe(alg, space, caps), space, alg
    return _dual_frame_on(alg, space, transform, caps), space, alg


def pfe(frame: Frame, *, transform: str = "tau", caps: Caps = DEFAULT_CAPS) -> Frame:
    """The prime filter extension: states are prime filters of the upset
    algebra, ordered by inclusion, carrying the transformed modal structure.
    For si the relational clause is evaluated directly."""
    if transform not in ("tau", "sigma"):
        raise ValueError(f"unknown transform {transform!r}")
    if transform == "sigma" and frame.kind != "im":
        raise ValueError("the sigma transform is defined for im only")
    return _pfe_with_space(frame, transform, caps)[0]


def pfe_with_unit(frame: Frame, *, transform: str = "tau",
                  caps: Caps = DEFAULT_CAPS) -> tuple[Frame, tuple[int, ...]]:
    """The prime filter extension together with the unit map, giving each
    state's image point in the extension."""
    if transform not in ("tau", "sigma"):
        raise ValueError(f"unknown transform {transform!r}")
    if transform == "sigma" and frame.kind != "im":
        raise ValueError("the sigma transform is defined for im only")
    pe, space, alg = _pfe_with_space(frame, transform, caps)
    return pe, pfe_unit(frame, space, alg)


def pfe_model(model: Model, *, transform: str = "tau",
              caps: Caps = DEFAULT_CAPS) -> Model:
    """Extend a model along pfe: a letter holds at a prime filter iff its
    original truth set is a member."""
    frame = model.frame
    pe, space, alg = _pfe_with_space(frame, transform, caps)
    label_index = {m: i for i, m in enumerate(alg.base.labels)}
    assignment = {
        name: space.theta[label_index[mask]]
        for name, mask in zip(model.valuation.letters, model.valuation.masks)
    }
    return make_model(pe, assignment)


def pfe_unit(frame: Frame, space: PrimeFilterSpace, alg: ModalAlgebra) -> tuple[int, ...]:
    """Position of each state's point filter {a | x in a} among the prime
    filters. Defined for every frame, isomorphism or not."""
    out = []
    for x in range(frame.size):
        members = sum(1 << i for i, m in enumerate(alg.base.labels)
                      if m >> x & 1)
        out.append(space.index[members])
    return tuple(out)


def eta_frame_iso(frame: Frame, *, transform: str = "tau",
                  caps: Caps = DEFAULT_CAPS) -> tuple[int, ...] | None:
    """The map sending a state to its point filter, as a permutation into the
    prime filter extension, when that map is a frame isomorphism; None when
    it is not. eta(x) = {upsets containing x}."""
    pe, space, alg = _pfe_with_space(frame, transform, caps)
    if pe.size != frame.size:
        return None
    perm = pfe_unit(frame, space, alg)
    if len(set(perm)) != frame.size:
        return None
    transported = relabel_frame(frame, perm)
    return perm if frame_equal(transported, pe) else None


def check_theta_prime_morphism(alg: ModalAlgebra, *, caps: Caps = DEFAULT_CAPS) -> bool:
    """Whether the evaluation embedding a -> {q | a in q} is a modal
    homomorphism into the complex algebra of the dual frame."""
    df = dual_frame(alg, caps=caps)
    ca = complex_algebra(df, caps=caps)
    space = prime_filters(alg.base, caps=caps)
    label_index = {m: i for i, m in enumerate(ca.base.labels)}
    h = tuple(label_index[space.theta[a]] for a in range(alg.size))
    return is_modal_homomorphism(h, alg, ca)


def check_heyting_hom(h: tuple[int, ...], a: FinHA, b: FinHA) -> str | None:
    """First reason h is not a bounded-lattice-and-implication homomorphism,
    or None."""
    if len(h) != a.size or any(not 0 <= v < b.size for v in h):
        raise ValueError("homomorphism graph malformed")
    if h[a.top] != b.top:
        return "top not preserved"
    if h[a.bottom] != b.bottom:
        return "bottom not preserved"
    for x in range(a.size):
        for y in range(a.size):
            if h[a.meet[x][y]] != b.meet[h[x]][h[y]]:
                return f"meet not preserved at ({x},{y})"
            if h[a.join[x][y]] != b.join[h[x]][h[y]]:
                return f"join not preserved at ({x},{y})"
            if h[a.imp[x][y]] != b.imp[h[x]][h[y]]:
                return f"implication not preserved at ({x},{y})"
    return None


def heyting_homs(a: FinHA, b: FinHA, *, caps: Caps = DEFAULT_CAPS) -> tuple[tuple[int, ...], ...]:
    """All Heyting algebra homomorphisms a -> b, by exhaustive scan."""
    guard("Heyting homomorphism search", b.size ** a.size, caps.max_map_search)
    return tuple(h for h in itertools.product(range(b.size), repeat=a.size)
                 if check_heyting_hom(h, a, b) is None)


def check_tau_naturality(kind: str, h: tuple[int, ...], a: FinHA, b: FinHA, *,
                         transform: str = "tau", caps: Caps = DEFAULT_CAPS) -> bool:
    """Whether the transform commutes with a Heyting homomorphism h: a -> b.

    The square compares, for every lower dual point over b: transforming over
    b then pushing the structure along the inverse-image map between prime
    filter spaces, against pulling the trace back along h and transforming
    over a.
    """
    if transform == "sigma" and kind != "im":
        raise ValueError("the sigma transform is defined for im only")
    reason = check_heyting_hom(h, a, b)
    if reason is not None:
        raise ValueError(f"not a Heyting homomorphism: {reason}")
    spa = prime_filters(a, caps=caps)
    spb = prime_filters(b, caps=caps)
    graph = []
    for q in spb.filters:
        pre = sum(1 << x for x in range(a.size) if q >> h[x] & 1)
        graph.append(spa.index[pre])
    f = PosetMap(spb.poset, spa.poset, tuple(graph))
    assert f.is_p_morphism(), "inverse image of a Heyting hom must be a p-morphism"

    member = _sigma_im if transform == "sigma" else _tau_im
    for point in l_dual_points(kind, b, caps=caps).points:
        pulled = LDualPoint(
            kind,
            sum(1 << x for x in range(a.size) if point.trace >> h[x] & 1),
            None if point.dia_trace is None else
            sum(1 << x for x in range(a.size) if point.dia_trace >> h[x] & 1),
        )
        if kind == "box":
            path1 = f.image_mask(_tau_box(spb, point.trace))
            path2 = _tau_box(spa, pulled.trace)
        elif kind == "im":
            fam = member(spb, point.trace, caps=caps)
            path1 = frozenset(d for d in upsets(spa.poset, caps=caps)
                              if f.preimage_mask(d) in fam)
            path2 = member(spa, pulled.trace, caps=caps)
        elif kind == "cin":
            guard("cin functor action", 1 << spa.poset.size, caps.max_subset_scan)
            w1, w2 = _tau_cin(spb, point.trace, point.dia_trace)
            path1 = tuple(
                frozenset(d for d in range(1 << spa.poset.size)
                          if f.preimage_mask(d) in w)
                for w in (w1, w2))
            path2 = _tau_cin(spa, pulled.trace, pulled.dia_trace)
        else:
            raise KindError(f"no tau for kind {kind!r}")
        if path1 != path2:
            return False
    return True


@dataclass(frozen=True, eq=False)
class FreeDLOracle:
    """The free distributive lattice over the modal generators, materialized
    as the sublattice of the full function lattice on admissible generator
    assignments that the generator vectors generate.

    An admissible assignment sends each generator to 0 or 1 respecting the
    rank-1 laws of the kind: filter-indicator assignments for box, monotone
    assignments for im, arbitrary pairs for cin. gen_vectors[g] is the bitmask
    of assignments sending g to 1 (for cin, box generators first). lattice is
    the dense closure when it fits the cap, None when only the vector
    representation is available.
    """

    kind: str
    algebra: FinHA
    valuations: tuple
    gen_vectors: tuple[int, ...]
    lattice: FinDL | None


def _lattice_closure(vectors, full: int, cap: int) -> tuple[int, ...] | None:
    masks = {0, full, *vectors}
    frontier = list(masks)
    while frontier:
        fresh = []
        for x in frontier:
            for y in tuple(masks):
                for z in (x & y, x | y):
                    if z not in masks:
                        if len(masks) >= cap:
                            return None
                        masks.add(z)
                        fresh.append(z)
        frontier = fresh
    return tuple(sorted(masks))


def free_dl_oracle(kind: str, algebra: FinHA, *, caps: Caps = DEFAULT_CAPS) -> FreeDLOracle:
    n = algebra.size
    kind_cap = {"box": caps.oracle_box_max, "im": caps.oracle_im_max,
                "cin": caps.oracle_cin_max}
    if kind not in kind_cap:
        raise KindError(f"no free lattice oracle for kind {kind!r}")
    if n > kind_cap[kind]:
        raise SizeGuard(f"free lattice oracle ({kind})", n, kind_cap[kind])
    if kind == "box":
        vals = tuple(sorted(set(algebra.le)))
        vecs = tuple(sum(1 << i for i, v in enumerate(vals) if v >> a & 1)
                     for a in range(n))
    elif kind == "im":
        vals = upsets(algebra.as_poset(), caps=caps)
        vecs = tuple(sum(1 << i for i, v in enumerate(vals) if v >> a & 1)
                     for a in range(n))
    else:
        vals = tuple((tb, td) for tb in range(1 << n) for td in range(1 << n))
        vecs = tuple(sum(1 << i for i, v in enumerate(vals) if v[0] >> a & 1)
                     for a in range(n)) + \
               tuple(sum(1 << i for i, v in enumerate(vals) if v[1] >> a & 1)
                     for a in range(n))
    full = (1 << len(vals)) - 1
    elems = _lattice_closure(vecs, full, caps.max_dense_lattice)
    lattice = None
    if elems is not None:
        le = tuple(
            sum(1 << j for j, ej in enumerate(elems) if ei & ~ej == 0)
            for ei in elems
        )
        lattice = dl_from_le(le, labels=elems, caps=caps)
    return FreeDLOracle(kind, algebra, vals, vecs, lattice)


def oracle_points(oracle: FreeDLOracle, *, caps: Caps = DEFAULT_CAPS) -> LDualSpace:
    """Lower dual points as the oracle sees them.

    Dense path: the prime filters of the materialized free lattice, each
    reduced to its generator trace. Vector path (lattice too large to
    materialize): every assignment coordinate is a bound-preserving lattice
    homomorphism onto the 2-chain, and homomorphisms are determined by their
    generator traces because the vectors generate; the coordinates are
    pairwise separated by some generator, so the assignments themselves stand
    in for the prime filters.
    """
    n = oracle.algebra.size
    if oracle.lattice is not None:
        space = prime_filters(oracle.lattice, caps=caps)
        vec_index = {m: i for i, m in enumerate(oracle.lattice.labels)}
        points = []
        for f in space.filters:
            bits = [f >> vec_index[v] & 1 for v in oracle.gen_vectors]
            if oracle.kind == "cin":
                points.append(LDualPoint(
                    "cin",
                    sum(1 << a for a in range(n) if bits[a]),
                    sum(1 << a for a in range(n) if bits[n + a])))
            else:
                points.append(LDualPoint(
                    oracle.kind, sum(1 << a for a in range(n) if bits[a])))
        return _space_from_points(oracle.kind, oracle.algebra, points)
    for i in range(len(oracle.valuations)):
        for j in range(i + 1, len(oracle.valuations)):
            assert any(v >> i & 1 != v >> j & 1 for v in oracle.gen_vectors), \
                "generator vectors do not separate assignments"
    if oracle.kind == "cin":
        points = [LDualPoint("cin", tb, td) for tb, td in oracle.valuations]
    else:
        points = [LDualPoint(oracle.kind, t) for t in oracle.valuations]
    return _space_from_points(oracle.kind, oracle.algebra, points)
