"""Finite distributive lattices and Heyting algebras, with prime-filter duality.

Elements are dense indices into explicit operation tables. The two prime
filter computations (exhaustive subset scan, and principal upsets of
join-irreducibles) are both implemented; which one runs depends on the size,
and each serves as the oracle for the other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .caps import DEFAULT_CAPS, Caps, guard
from .errors import SizeGuard
from .order import Poset, PosetMap, iter_bits, upsets


@dataclass(frozen=True, eq=False)
class FinDL:
    """A finite bounded distributive lattice with explicit tables.

    le[i] is the bitmask of {j | i <= j}; meet/join are full tables. labels
    is optional extra data per element (up-algebras store upset bitmasks).
    """

    size: int
    le: tuple[int, ...]
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[int, ...], ...]
    bottom: int
    top: int
    labels: tuple | None = field(default=None, kw_only=True)

    def leq(self, i: int, j: int) -> bool:
        return self.le[i] >> j & 1 == 1

    @cached_property
    def dn(self) -> tuple[int, ...]:
        rows = [0] * self.size
        for i in range(self.size):
            for j in iter_bits(self.le[i]):
                rows[j] |= 1 << i
        return tuple(rows)

    def as_poset(self) -> Poset:
        return Poset(self.size, self.le)

    def meet_all(self, idxs) -> int:
        out = self.top
        for i in idxs:
            out = self.meet[out][i]
        return out

    def join_all(self, idxs) -> int:
        out = self.bottom
        for i in idxs:
            out = self.join[out][i]
        return out


@dataclass(frozen=True, eq=False)
class FinHA(FinDL):
    """A finite Heyting algebra: a FinDL plus the relative pseudocomplement."""

    imp: tuple[tuple[int, ...], ...] = ()


def check_lattice(d: FinDL, *, caps: Caps = DEFAULT_CAPS) -> None:
    """Validate order/meet/join/bounds and distributivity (below the cap)."""
    n = d.size
    if n < 2:
        raise ValueError("lattices of size < 2 are not supported")
    if len(d.le) != n or len(d.meet) != n or len(d.join) != n:
        raise ValueError("table sizes do not match carrier")
    for i in range(n):
        if not d.leq(i, i):
            raise ValueError(f"order not reflexive at {i}")
        for j in iter_bits(d.le[i]):
            if i != j and d.leq(j, i):
                raise ValueError(f"order not antisymmetric at ({i},{j})")
            if d.le[j] & ~d.le[i]:
                raise ValueError(f"order not transitive at ({i},{j})")
    if d.le[d.bottom].bit_count() != n or d.dn[d.top].bit_count() != n:
        raise ValueError("bottom/top are not the least/greatest elements")
    if n > caps.max_lattice_check:
        return
    for i in range(n):
        for j in range(n):
            m, v = d.meet[i][j], d.join[i][j]
            lower = d.dn[i] & d.dn[j]
            upper = d.le[i] & d.le[j]
            if not (lower >> m & 1) or lower & ~d.dn[m]:
                raise ValueError(f"meet[{i}][{j}] is not the glb")
            if not (upper >> v & 1) or upper & ~d.le[v]:
                raise ValueError(f"join[{i}][{j}] is not the lub")
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if d.meet[a][d.join[b][c]] != d.join[d.meet[a][b]][d.meet[a][c]]:
                    raise ValueError(f"distributivity fails at ({a},{b},{c})")


def check_residuation(h: FinHA, *, caps: Caps = DEFAULT_CAPS) -> None:
    """a & c <= b  iff  c <= a -> b, exhaustively (below the cap)."""
    n = h.size
    if len(h.imp) != n:
        raise ValueError("implication table size does not match carrier")
    if n > caps.max_lattice_check:
        return
    for a in range(n):
        for b in range(n):
            ab = h.imp[a][b]
            for c in range(n):
                if (h.leq(h.meet[a][c], b)) != (h.leq(c, ab)):
                    raise ValueError(f"residuation fails at ({a},{b},{c})")


def dl_from_le(le: tuple[int, ...], labels=None, *, caps: Caps = DEFAULT_CAPS) -> FinDL:
    """Build a FinDL from order rows alone; fails if meets/joins don't exist."""
    n = len(le)
    d0 = FinDL(n, tuple(le), (), (), 0, 0)
    dn = d0.dn
    bottom = top = None
    for i in range(n):
        if le[i].bit_count() == n:
            bottom = i
        if dn[i].bit_count() == n:
            top = i
    if bottom is None or top is None:
        raise ValueError("order has no bottom or no top")
    meet = [[0] * n for _ in range(n)]
    join = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            lower = dn[i] & dn[j]
            cands = [k for k in iter_bits(lower) if lower & ~dn[k] == 0]
            if len(cands) != 1:
                raise ValueError(f"no unique glb for ({i},{j})")
            meet[i][j] = cands[0]
            upper = le[i] & le[j]
            cands = [k for k in iter_bits(upper) if upper & ~le[k] == 0]
            if len(cands) != 1:
                raise ValueError(f"no unique lub for ({i},{j})")
            join[i][j] = cands[0]
    d = FinDL(n, tuple(le), tuple(map(tuple, meet)), tuple(map(tuple, join)),
              bottom, top, labels=labels)
    check_lattice(d, caps=caps)
    return d


def up_algebra(poset: Poset, *, caps: Caps = DEFAULT_CAPS) -> FinHA:
    """The Heyting algebra of upsets of a poset.

    Elements are the upsets in ascending bitmask order; labels holds the
    bitmasks. Implication is computed from its defining clause:
    a -> b = {x | every y >= x in a is in b}.
    """
    masks = upsets(poset, caps=caps)
    index = {m: i for i, m in enumerate(masks)}
    n = len(masks)
    le = tuple(
        sum(1 << j for j, mj in enumerate(masks) if mi & ~mj == 0)
        for mi in masks
    )
    meet = tuple(tuple(index[a & b] for b in masks) for a in masks)
    join = tuple(tuple(index[a | b] for b in masks) for a in masks)
    imp = []
    for a in masks:
        row = []
        for b in masks:
            m = 0
            for x in range(poset.size):
                ys = poset.up[x]
                if ys & a & ~b == 0:
                    m |= 1 << x
            row.append(index[m])
        imp.append(tuple(row))
    # Upset families satisfy the lattice and residuation laws by
    # construction (meet/join are intersection/union); the law checkers are
    # exercised on these algebras in the test suite instead of per call,
    # which matters when universes construct tens of thousands of them.
    return FinHA(n, le, meet, join, index[0], index[poset.full_mask],
                 labels=masks, imp=tuple(imp))


def join_irreducibles(d: FinDL) -> tuple[int, ...]:
    """Elements that are not the join of the elements strictly below them."""
    out = []
    for j in range(d.size):
        below = d.dn[j] & ~(1 << j)
        if d.join_all(iter_bits(below)) != j:
            out.append(j)
    return tuple(out)


@dataclass(frozen=True)
class PrimeFilter:
    """A prime filter, as a bitmask of element indices of its algebra."""

    algebra: FinDL
    members: int


@dataclass(frozen=True, eq=False)
class PrimeFilterSpace:
    """All prime filters of a FinDL, ordered by inclusion.

    filters[k] is the member bitmask of the k-th prime filter, ascending by
    bitmask value; theta[a] is the bitmask of {k | a in filters[k]} — the
    Birkhoff embedding of the algebra into the upsets of this poset.
    """

    algebra: FinDL
    filters: tuple[int, ...]
    poset: Poset

    @cached_property
    def points(self) -> tuple[PrimeFilter, ...]:
        return tuple(PrimeFilter(self.algebra, f) for f in self.filters)

    @cached_property
    def theta(self) -> tuple[int, ...]:
        rows = []
        for a in range(self.algebra.size):
            rows.append(sum(1 << k for k, f in enumerate(self.filters) if f >> a & 1))
        return tuple(rows)

    @cached_property
    def index(self) -> dict[int, int]:
        return {f: k for k, f in enumerate(self.filters)}

    @cached_property
    def theta_index(self) -> dict[int, int]:
        """Inverse of theta: upset-of-space bitmask -> algebra element."""
        return {t: a for a, t in enumerate(self.theta)}


def _is_prime_filter_mask(d: FinDL, s: int) -> bool:
    if not s >> d.top & 1 or s >> d.bottom & 1:
        return False
    for i in iter_bits(s):
        if d.le[i] & ~s:
            return False
        for j in iter_bits(s):
            if not s >> d.meet[i][j] & 1:
                return False
    for a in range(d.size):
        for b in range(d.size):
            if s >> d.join[a][b] & 1 and not (s >> a & 1 or s >> b & 1):
                return False
    return True


def _prime_filters_scan(d: FinDL, *, caps: Caps = DEFAULT_CAPS) -> tuple[int, ...]:
    guard("prime filter subset scan", 1 << d.size, caps.max_pf_scan)
    return tuple(s for s in range(1 << d.size) if _is_prime_filter_mask(d, s))


def _prime_filters_ji(d: FinDL) -> tuple[int, ...]:
    out = []
    for j in join_irreducibles(d):
        if j == d.bottom:
            continue
        out.append(d.le[j])
    return tuple(sorted(out))


def prime_filters(d: FinDL, *, caps: Caps = DEFAULT_CAPS) -> PrimeFilterSpace:
    """The prime filter space; scan for small carriers, join-irreducibles above."""
    if 1 << d.size <= caps.pf_shortcut_above:
        filters = _prime_filters_scan(d, caps=caps)
    else:
        filters = _prime_filters_ji(d)
    if not filters:
        raise ValueError("lattice has no prime filters")
    le_rows = tuple(
        sum(1 << j for j, fj in enumerate(filters) if fi & ~fj == 0)
        for fi in filters
    )
    return PrimeFilterSpace(d, filters, Poset(len(filters), le_rows))


def eta_bundle(poset: Poset, *, caps: Caps = DEFAULT_CAPS):
    """(eta, space, algebra): the unit embedding of a poset into the prime
    filters of its upset algebra. eta(x) = {a | x in a}."""
    alg = up_algebra(poset, caps=caps)
    space = prime_filters(alg, caps=caps)
    graph = []
    for x in range(poset.size):
        members = sum(1 << i for i, m in enumerate(alg.labels) if m >> x & 1)
        graph.append(space.index[members])
    return PosetMap(poset, space.poset, tuple(graph)), space, alg


def eta(poset: Poset, *, caps: Caps = DEFAULT_CAPS) -> PosetMap:
    return eta_bundle(poset, caps=caps)[0]


def theta(d: FinDL, *, caps: Caps = DEFAULT_CAPS) -> tuple[int, ...]:
    """theta[a] = bitmask over prime filters containing a."""
    return prime_filters(d, caps=caps).theta


def is_closed_upset(mask: int, space: PrimeFilterSpace) -> bool:
    """mask equals the intersection of the theta-images that contain it."""
    full = (1 << len(space.filters)) - 1
    acc = full
    for t in space.theta:
        if mask & ~t == 0:
            acc &= t
    return acc == mask


def is_open_upset(mask: int, space: PrimeFilterSpace) -> bool:
    """mask equals the union of the theta-images inside it."""
    acc = 0
    for t in space.theta:
        if t & ~mask == 0:
            acc |= t
    return acc == mask
