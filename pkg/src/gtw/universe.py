"""Frame universes up to isomorphism and the deterministic test corpus.

A universe collects one representative per isomorphism class of validated
frames of a given kind, for every carrier size up to a requested bound.
Enumeration walks canonical posets in their canonical order and, per poset,
the admissible modal structures in ascending encoding order; isomorphism
rejection quotients by the poset's automorphisms via canonical frame
certificates. Frames on distinct canonical posets are never isomorphic, so
the certificate cache resets per poset.

cin structures explode immediately (each state carries an arbitrary pair of
subset families), so cin universes are exhaustive only up to
``universe_cin_exhaustive_max`` states; beyond that a seeded sample of
monotone/antitone family assignments stands in, deterministically per seed.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .caps import Caps, DEFAULT_CAPS, guard
from .errors import KindError
from .frames import (Frame, frame_key, frame_validates, make_cin_frame,
                     make_im_frame, validate_frame)
from .order import Poset, enumerate_posets, upsets
from .syntax import (Formula, KINDS, Signature, enumerate_formulas,
                     validate_formula)

__all__ = [
    "Universe", "build_universe", "fr_class", "Corpus", "corpus",
    "all_valuations",
]


@dataclass(frozen=True, eq=False)
class Universe:
    kind: str
    max_size: int
    frames: tuple[Frame, ...]

    def of_size(self, n: int) -> tuple[Frame, ...]:
        return tuple(f for f in self.frames if f.size == n)


def _row_assignments(poset: Poset, choices):
    """Row tuples over `choices` that are antitone: x <= y forces
    rows[y] subset-of rows[x]."""
    n = poset.size
    rows = [0] * n

    def rec(i):
        if i == n:
            yield tuple(rows)
            return
        for r in choices:
            ok = True
            for j in range(i):
                if poset.leq(j, i) and r & ~rows[j]:
                    ok = False
                    break
                if poset.leq(i, j) and rows[j] & ~r:
                    ok = False
                    break
            if ok:
                rows[i] = r
                yield from rec(i + 1)
        rows[i] = 0

    yield from rec(0)


def _antichains(masks):
    """Subsets of `masks` that are pairwise incomparable under bit inclusion,
    in deterministic order. The empty antichain (empty family) comes first."""
    masks = tuple(masks)
    out = []

    def rec(i, acc):
        if i == len(masks):
            out.append(tuple(acc))
            return
        rec(i + 1, acc)
        m = masks[i]
        if all(a & ~m and m & ~a for a in acc):
            acc.append(m)
            rec(i + 1, acc)
            acc.pop()

    rec(0, [])
    out.sort(key=lambda a: (len(a), a))
    return tuple(out)


def _im_assignments(poset: Poset, caps: Caps):
    """Per-state antichain generators with N monotone along the order:
    x <= y forces family(x) subset-of family(y)."""
    achains = _antichains(upsets(poset, caps=caps))

    def member(chain, g):
        return any(h | g == g for h in chain)

    def below(cx, cy):
        return all(member(cy, g) for g in cx)

    n = poset.size
    fams: list[tuple[int, ...]] = [()] * n

    def rec(i):
        if i == n:
            yield tuple(fams)
            return
        for c in achains:
            ok = True
            for j in range(i):
                if poset.leq(j, i) and not below(fams[j], c):
                    ok = False
                    break
                if poset.leq(i, j) and not below(c, fams[j]):
                    ok = False
                    break
            if ok:
                fams[i] = c
                yield from rec(i + 1)
        fams[i] = ()

    yield from rec(0)


def _bits_to_members(fam_bits: int, width: int) -> tuple[int, ...]:
    return tuple(m for m in range(width) if fam_bits >> m & 1)


def _cin_exhaustive(poset: Poset):
    """All (nbox, ndia) family assignments, families encoded as bitmasks over
    the 2^n candidate member sets; nbox monotone, ndia antitone."""
    n = poset.size
    width = 1 << n
    fam_range = range(1 << width)
    n_rows = [0] * n
    d_rows = [0] * n

    def rec(i):
        if i == n:
            yield (tuple(_bits_to_members(b, width) for b in n_rows),
                   tuple(_bits_to_members(b, width) for b in d_rows))
            return
        for nb in fam_range:
            ok = True
            for j in range(i):
                if poset.leq(j, i) and n_rows[j] & ~nb:
                    ok = False
                    break
                if poset.leq(i, j) and nb & ~n_rows[j]:
                    ok = False
                    break
            if not ok:
                continue
            n_rows[i] = nb
            for db in fam_range:
                ok = True
                for j in range(i):
                    if poset.leq(j, i) and db & ~d_rows[j]:
                        ok = False
                        break
                    if poset.leq(i, j) and d_rows[j] & ~db:
                        ok = False
                        break
                if ok:
                    d_rows[i] = db
                    yield from rec(i + 1)
            d_rows[i] = 0
        n_rows[i] = 0

    yield from rec(0)


def _cin_sample(poset: Poset, rng: random.Random):
    """One random monotone/antitone family pair: per-state random extras are
    accumulated downward for nbox and upward for ndia, which makes the laws
    hold by construction."""
    n = poset.size
    width = 1 << n
    # AND of two random draws biases toward sparse families, which keeps the
    # sampled frames structurally varied instead of mostly-full.
    extra_box = [rng.getrandbits(width) & rng.getrandbits(width)
                 for _ in range(n)]
    extra_dia = [rng.getrandbits(width) & rng.getrandbits(width)
                 for _ in range(n)]
    nbox = []
    ndia = []
    for x in range(n):
        nb = 0
        nd = 0
        for y in range(n):
            if poset.leq(y, x):
                nb |= extra_box[y]
            if poset.leq(x, y):
                nd |= extra_dia[y]
        nbox.append(_bits_to_members(nb, width))
        ndia.append(_bits_to_members(nd, width))
    return tuple(nbox), tuple(ndia)


def build_universe(kind: str, n: int, *, caps: Caps = DEFAULT_CAPS,
                   seed: int = 0) -> Universe:
    """One validated representative per isomorphism class, sizes 1..n.

    Deterministic for a fixed (kind, n, seed); the seed only matters for the
    sampled cin sizes."""
    if kind not in KINDS:
        raise KindError(f"unknown frame kind {kind!r}")
    if n < 1:
        raise ValueError("universe needs at least one state")
    guard(f"{kind} universe size", n, getattr(caps, f"universe_{kind}_max"))
    frames: list[Frame] = []
    for size in range(1, n + 1):
        for pidx, poset in enumerate(enumerate_posets(size, caps=caps)):
            seen: set = set()

            def keep(frame: Frame) -> bool:
                k = frame_key(frame)
                if k in seen:
                    return False
                seen.add(k)
                frames.append(frame)
                return True

            if kind == "box":
                for rows in _row_assignments(poset, upsets(poset, caps=caps)):
                    keep(validate_frame(Frame("box", poset, rel=rows)))
            elif kind == "si":
                for rows in _row_assignments(poset, range(1 << size)):
                    keep(validate_frame(Frame("si", poset, rel=rows)))
            elif kind == "im":
                for fams in _im_assignments(poset, caps):
                    keep(make_im_frame(poset, fams, caps=caps))
            elif size <= caps.universe_cin_exhaustive_max:
                for nbox, ndia in _cin_exhaustive(poset):
                    keep(make_cin_frame(poset, nbox, ndia, caps=caps))
            else:
                rng = random.Random(f"{seed}:{kind}:{size}:{pidx}")
                target = caps.universe_cin_samples
                got = 0
                for _ in range(target * 50):
                    if got >= target:
                        break
                    nbox, ndia = _cin_sample(poset, rng)
                    if keep(make_cin_frame(poset, nbox, ndia, caps=caps)):
                        got += 1
    return Universe(kind=kind, max_size=n, frames=tuple(frames))


def fr_class(formulas, universe: Universe,
             *, caps: Caps = DEFAULT_CAPS) -> tuple[Frame, ...]:
    """Frames of the universe validating every formula of the set."""
    formulas = tuple(formulas)
    sig = Signature(universe.kind)
    for phi in formulas:
        validate_formula(phi, sig)
    return tuple(f for f in universe.frames
                 if all(frame_validates(f, phi, caps=caps).valid
                        for phi in formulas))


def all_valuations(frame: Frame, letters=("p", "q"),
                   *, caps: Caps = DEFAULT_CAPS):
    """The full valuation grid for the given letters, in canonical order
    (ascending upset masks, rightmost letter fastest)."""
    from .frames import Valuation
    names = tuple(sorted(letters))
    us = upsets(frame.base, caps=caps)
    guard("valuation grid", len(us) ** len(names), caps.max_valuations)
    return tuple(Valuation(names, combo)
                 for combo in itertools.product(us, repeat=len(names)))


@dataclass(frozen=True, eq=False)
class Corpus:
    """Deterministic test stock: per kind, the full universe at the capped
    size and every formula to height 2 over the letters p, q."""

    seed: int
    universes: dict[str, Universe] = field(repr=False)
    formulas: dict[str, tuple[Formula, ...]] = field(repr=False)

    def frames(self, kind: str, max_size: int | None = None):
        fs = self.universes[kind].frames
        if max_size is None:
            return fs
        return tuple(f for f in fs if f.size <= max_size)


def corpus(seed: int = 0, *, caps: Caps = DEFAULT_CAPS,
           max_sizes: dict[str, int] | None = None) -> Corpus:
    sizes = {k: getattr(caps, f"universe_{k}_max") for k in KINDS}
    if max_sizes:
        sizes.update(max_sizes)
    universes = {k: build_universe(k, sizes[k], caps=caps, seed=seed)
                 for k in KINDS}
    formulas = {k: enumerate_formulas(Signature(k), 2) for k in KINDS}
    return Corpus(seed=seed, universes=universes, formulas=formulas)
