"""Finite posets over dense indices, with all subsets as machine-word bitmasks.

Conventions used across the whole package:
- carrier elements are 0..size-1;
- a subset of the carrier is an int bitmask (bit i set iff i is a member);
- whenever a family of subsets is enumerated, the order is ascending bitmask
  value, which makes every downstream construction deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations

from .caps import DEFAULT_CAPS, Caps, guard
from .errors import CycleError


def iter_bits(mask: int):
    """Yield the set bit positions of a mask in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def permute_mask(mask: int, perm: tuple[int, ...]) -> int:
    """Apply a relabelling i -> perm[i] to a subset bitmask."""
    out = 0
    for i in iter_bits(mask):
        out |= 1 << perm[i]
    return out


@dataclass(frozen=True)
class Poset:
    """A finite partial order; up[i] is the bitmask of {j | i <= j}."""

    size: int
    up: tuple[int, ...]

    def leq(self, i: int, j: int) -> bool:
        return self.up[i] >> j & 1 == 1

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    @cached_property
    def down(self) -> tuple[int, ...]:
        """down[j] is the bitmask of {i | i <= j}."""
        rows = [0] * self.size
        for i in range(self.size):
            for j in iter_bits(self.up[i]):
                rows[j] |= 1 << i
        return tuple(rows)

    def is_upset(self, mask: int) -> bool:
        for i in iter_bits(mask):
            if self.up[i] & ~mask:
                return False
        return True

    def up_closure(self, mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= self.up[i]
        return out

    def down_closure(self, mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= self.down[i]
        return out

    @cached_property
    def _upsets(self) -> tuple[int, ...]:
        return tuple(m for m in range(1 << self.size) if self.is_upset(m))

    @cached_property
    def covers(self) -> tuple[tuple[int, int], ...]:
        """Pairs (i, j) with j covering i (i < j, nothing strictly between)."""
        out = []
        for i in range(self.size):
            strict = self.up[i] & ~(1 << i)
            for j in iter_bits(strict):
                between = strict & self.down[j] & ~(1 << j)
                if not between:
                    out.append((i, j))
        return tuple(out)

    def encode(self, perm: tuple[int, ...] | None = None) -> int:
        """Row-major adjacency bitstring of the (relabelled) order."""
        n = self.size
        code = 0
        if perm is None:
            for i in range(n):
                code |= self.up[i] << (i * n)
            return code
        for i in range(n):
            code |= permute_mask(self.up[i], perm) << (perm[i] * n)
        return code

    @cached_property
    def canonical_key(self) -> int:
        return min(self.encode(p) for p in permutations(range(self.size)))

    @cached_property
    def automorphisms(self) -> tuple[tuple[int, ...], ...]:
        own = self.encode()
        return tuple(
            p for p in permutations(range(self.size)) if self.encode(p) == own
        )

    def canonicalizing_perms(self) -> tuple[tuple[int, ...], ...]:
        """All relabellings that send this poset to its canonical form."""
        key = self.canonical_key
        return tuple(
            p for p in permutations(range(self.size)) if self.encode(p) == key
        )

    def relabel(self, perm: tuple[int, ...]) -> "Poset":
        rows = [0] * self.size
        for i in range(self.size):
            rows[perm[i]] = permute_mask(self.up[i], perm)
        return Poset(self.size, tuple(rows))

    def canonical_form(self) -> tuple["Poset", tuple[int, ...]]:
        perm = self.canonicalizing_perms()[0]
        return self.relabel(perm), perm


def validate_poset(size: int, pairs, *, caps: Caps = DEFAULT_CAPS) -> Poset:
    """Build a poset from generator pairs.

    Takes the reflexive-transitive closure of the pairs; raises CycleError if
    the closure is not antisymmetric. Pairs may list any generators; the
    stored order is always the full closure.
    """
    if size < 1:
        raise ValueError("poset size must be >= 1")
    guard("poset order rows", size, caps.max_poset_order)
    rows = [1 << i for i in range(size)]
    for i, j in pairs:
        if not (0 <= i < size and 0 <= j < size):
            raise ValueError(f"order pair ({i},{j}) out of range for size {size}")
        rows[i] |= 1 << j
    for k in range(size):
        bit = 1 << k
        for i in range(size):
            if rows[i] & bit:
                rows[i] |= rows[k]
    for i in range(size):
        for j in iter_bits(rows[i]):
            if j != i and rows[j] >> i & 1:
                raise CycleError(min(i, j), max(i, j))
    return Poset(size, tuple(rows))


def upsets(poset: Poset, *, caps: Caps = DEFAULT_CAPS) -> tuple[int, ...]:
    """All up-closed subsets, ascending bitmask order (includes 0 and full)."""
    guard("upset scan", 1 << poset.size, caps.max_subset_scan)
    return poset._upsets


@dataclass(frozen=True)
class PosetMap:
    """A function between poset carriers; graph[x] is the image of x."""

    dom: Poset
    cod: Poset
    graph: tuple[int, ...]

    def __post_init__(self):
        if len(self.graph) != self.dom.size:
            raise ValueError("map graph length does not match domain size")
        for y in self.graph:
            if not 0 <= y < self.cod.size:
                raise ValueError(f"map value {y} outside codomain")

    def __call__(self, x: int) -> int:
        return self.graph[x]

    def is_monotone(self) -> bool:
        for x in range(self.dom.size):
            fx = self.graph[x]
            for y in iter_bits(self.dom.up[x]):
                if not self.cod.leq(fx, self.graph[y]):
                    return False
        return True

    def is_p_morphism(self) -> bool:
        """Monotone, and every f(x) <= z' lifts to some x <= z with f(z) = z'."""
        if not self.is_monotone():
            return False
        for x in range(self.dom.size):
            need = self.cod.up[self.graph[x]]
            have = self.image_mask(self.dom.up[x])
            if need & ~have:
                return False
        return True

    def is_embedding(self) -> bool:
        """Injective and order-reflecting (hence an order isomorphism onto its image)."""
        if len(set(self.graph)) != self.dom.size:
            return False
        for x in range(self.dom.size):
            for y in range(self.dom.size):
                if self.cod.leq(self.graph[x], self.graph[y]) != self.dom.leq(x, y):
                    return False
        return True

    def is_surjective(self) -> bool:
        return len(set(self.graph)) == self.cod.size

    def image_mask(self, mask: int) -> int:
        out = 0
        for x in iter_bits(mask):
            out |= 1 << self.graph[x]
        return out

    def preimage_mask(self, mask: int) -> int:
        out = 0
        for x, y in enumerate(self.graph):
            if mask >> y & 1:
                out |= 1 << x
        return out

    def then(self, other: "PosetMap") -> "PosetMap":
        """Composite: first self, then other."""
        if self.cod is not other.dom and self.cod != other.dom:
            raise ValueError("composition mismatch")
        return PosetMap(self.dom, other.cod, tuple(other.graph[y] for y in self.graph))


def is_p_morphism(f: PosetMap) -> bool:
    return f.is_p_morphism()


def poset_coproduct(posets) -> tuple[Poset, tuple[PosetMap, ...]]:
    """Disjoint union with component injections; offsets follow list order."""
    posets = list(posets)
    if not posets:
        raise ValueError("coproduct of no posets")
    total = sum(p.size for p in posets)
    rows = []
    injections = []
    offset = 0
    for p in posets:
        rows.extend(r << offset for r in p.up)
        offset += p.size
    out = Poset(total, tuple(rows))
    offset = 0
    for p in posets:
        injections.append(PosetMap(p, out, tuple(range(offset, offset + p.size))))
        offset += p.size
    return out, tuple(injections)


def enumerate_posets(n: int, *, caps: Caps = DEFAULT_CAPS) -> tuple[Poset, ...]:
    """One canonical representative per isomorphism class of n-element posets.

    Candidates are generated with labels forming a linear extension (the order
    relation only ever goes upward in the labelling), which covers every
    isomorphism class; duplicates are removed by minimal adjacency bitstring
    over all relabellings. Output is sorted by that canonical key.
    """
    if n < 1:
        raise ValueError("poset size must be >= 1")
    guard("poset enumeration", n, caps.max_poset_enum)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen: dict[int, Poset] = {}
    for choice in range(1 << len(pairs)):
        rows = [1 << i for i in range(n)]
        for b, (i, j) in enumerate(pairs):
            if choice >> b & 1:
                rows[i] |= 1 << j
        ok = True
        for i in range(n):
            reach = rows[i]
            for j in iter_bits(rows[i]):
                reach |= rows[j]
            if reach != rows[i]:
                ok = False
                break
        if not ok:
            continue
        cand = Poset(n, tuple(rows))
        key = cand.canonical_key
        if key not in seen:
            seen[key] = cand.canonical_form()[0]
    return tuple(seen[k] for k in sorted(seen))


def poset_isomorphism(p: Poset, q: Poset) -> tuple[int, ...] | None:
    """A relabelling sending p to q, or None if they are not isomorphic."""
    if p.size != q.size or p.canonical_key != q.canonical_key:
        return None
    gp = p.canonicalizing_perms()[0]
    gq = q.canonicalizing_perms()[0]
    inv_gq = [0] * q.size
    for i, v in enumerate(gq):
        inv_gq[v] = i
    return tuple(inv_gq[gp[i]] for i in range(p.size))
