"""Bulk evaluation of formula sets over full valuation grids.

The per-model checker in frames walks one formula in one model; the corpus
suites need thousands of formulas over every valuation of every frame of a
universe, which is only tractable batched. Formula sets are compiled once
into a flat postfix program (one slot per distinct subterm, children before
parents), and each frame executes the program over the whole valuation grid
at once: truth values are numpy arrays of state bitmasks indexed by
valuation, and every connective is one or two vector operations. Since a
frame has at most 2^size candidate truth masks, the implication and modal
clauses are precomputed per frame as lookup tables over raw masks, so each
non-lattice connective is a single fancy-index gather.

Two independent routes are provided on purpose. FrameEvaluator applies the
Kripke clauses through those per-mask tables, built directly from the frame
structure; AlgebraEvaluator evaluates through the finite operation tables of
a modal algebra. When the algebra is the frame's complex algebra the two
must agree valuation for valuation, and the agreement checkers below report
the first divergence instead of asserting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebras import ModalAlgebra, complex_algebra
from .caps import Caps, DEFAULT_CAPS, guard
from .errors import KindMismatch, MissingLetterError
from .frames import Frame, im_member
from .order import upsets
from .syntax import (And, Bot, Box, Dia, Formula, Imp, Letter, Or, Sto, Top,
                     Tri)

__all__ = [
    "Program", "compile_formulas", "FrameEvaluator", "AlgebraEvaluator",
    "frame_algebra_agreement", "pfe_truth_lemma",
]

_TOP, _BOT, _LETTER, _AND, _OR, _IMP, _BOX, _DIA, _TRI, _STO = range(10)

_MODAL_KINDS = {_BOX: ("box", "cin"), _DIA: ("cin",), _TRI: ("im",),
                _STO: ("si",)}


@dataclass(frozen=True, eq=False)
class Program:
    """A formula set as straight-line code: ops[s] = (opcode, a, b) where a
    and b are earlier slots (or a letter position for letter loads). roots
    maps each input formula to its slot. The formula objects are retained;
    slots are keyed by object identity during compilation."""

    ops: tuple[tuple[int, int, int], ...]
    roots: tuple[int, ...]
    formulas: tuple[Formula, ...]
    letters: tuple[str, ...]

    def modal_opcodes(self) -> frozenset[int]:
        return frozenset(op for op, _, _ in self.ops if op in _MODAL_KINDS)

    @cached_property
    def leaves(self) -> tuple[tuple[int, int, int], ...]:
        """(slot, opcode, letter position) for every constant or letter."""
        return tuple((s, op, a) for s, (op, a, _) in enumerate(self.ops)
                     if op in (_TOP, _BOT, _LETTER))

    @cached_property
    def stages(self):
        """Interior ops grouped by (operand depth, opcode) so each group can
        run as one vector operation; earlier groups never depend on later
        ones because depth strictly increases along any operand edge."""
        depth = [0] * len(self.ops)
        groups: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
        for s, (op, a, b) in enumerate(self.ops):
            if op in (_TOP, _BOT, _LETTER):
                continue
            d = depth[a] + 1 if op in (_BOX, _DIA, _TRI) else \
                max(depth[a], depth[b]) + 1
            depth[s] = d
            groups.setdefault((d, op), []).append((s, a, b))
        return tuple(
            (key[1],
             np.asarray([r[0] for r in rows], dtype=np.intp),
             np.asarray([r[1] for r in rows], dtype=np.intp),
             np.asarray([r[2] for r in rows], dtype=np.intp))
            for key, rows in sorted(groups.items()))

    @cached_property
    def root_index(self) -> np.ndarray:
        return np.asarray(self.roots, dtype=np.intp)


def compile_formulas(formulas) -> Program:
    """Share every structurally shared subterm: enumeration corpora reuse
    subformula objects, so keying by identity gives one slot per node."""
    formulas = tuple(formulas)
    ops: list[tuple[int, int, int]] = []
    slot: dict[int, int] = {}
    letters: list[str] = []
    lpos: dict[str, int] = {}

    def visit(f: Formula) -> int:
        s = slot.get(id(f))
        if s is not None:
            return s
        if isinstance(f, Top):
            entry = (_TOP, 0, 0)
        elif isinstance(f, Bot):
            entry = (_BOT, 0, 0)
        elif isinstance(f, Letter):
            li = lpos.get(f.name)
            if li is None:
                li = lpos[f.name] = len(letters)
                letters.append(f.name)
            entry = (_LETTER, li, 0)
        elif isinstance(f, And):
            entry = (_AND, visit(f.left), visit(f.right))
        elif isinstance(f, Or):
            entry = (_OR, visit(f.left), visit(f.right))
        elif isinstance(f, Imp):
            entry = (_IMP, visit(f.left), visit(f.right))
        elif isinstance(f, Box):
            entry = (_BOX, visit(f.child), 0)
        elif isinstance(f, Dia):
            entry = (_DIA, visit(f.child), 0)
        elif isinstance(f, Tri):
            entry = (_TRI, visit(f.child), 0)
        elif isinstance(f, Sto):
            entry = (_STO, visit(f.left), visit(f.right))
        else:
            raise TypeError(f"unknown formula node {type(f).__name__}")
        s = len(ops)
        ops.append(entry)
        slot[id(f)] = s
        return s

    roots = tuple(visit(f) for f in formulas)
    return Program(tuple(ops), roots, formulas, tuple(letters))


def _grid_columns(values, names):
    """The full product grid over `values` per name, rightmost name fastest,
    as one numpy column per name."""
    cols = {n: [] for n in names}
    for combo in itertools.product(values, repeat=len(names)):
        for n, v in zip(names, combo):
            cols[n].append(v)
    return {n: np.asarray(v, dtype=np.int64) for n, v in cols.items()}


class FrameEvaluator:
    """Kripke clauses over all valuations of a frame at once.

    Valuations run over the product grid upsets^letters in canonical order
    (ascending upset masks, rightmost letter fastest), or over explicit
    columns passed as `grid`. The per-mask clause tables cover all 2^size
    masks, not only upsets, because intermediate arguments of -> need not be
    upsets."""

    def __init__(self, frame: Frame, letters=("p", "q"), *,
                 grid: dict[str, np.ndarray] | None = None,
                 caps: Caps = DEFAULT_CAPS):
        self.frame = frame
        self.full = frame.base.full_mask
        if grid is None:
            names = tuple(sorted(letters))
            us = upsets(frame.base, caps=caps)
            guard("valuation grid", len(us) ** len(names),
                  caps.max_valuations)
            grid = _grid_columns(us, names)
        self.grid = grid
        self.n_val = len(next(iter(grid.values()))) if grid else 1
        width = 1 << frame.size
        guard("per-mask clause tables", width, caps.max_subset_scan)
        n = frame.size
        self._imp_t = self._forall_table(frame.base.up, width, n)
        if frame.kind in ("box", "si"):
            self._rel_t = self._forall_table(frame.rel, width, n)
        elif frame.kind == "im":
            self._tri_t = np.asarray(
                [sum(1 << x for x in range(n) if im_member(frame, x, m))
                 for m in range(width)], dtype=np.int64)
        else:
            self._cbox_t = np.asarray(
                [sum(1 << x for x in range(n) if m in frame.nbox[x])
                 for m in range(width)], dtype=np.int64)
            self._cdia_t = np.asarray(
                [sum(1 << x for x in range(n)
                     if (self.full ^ m) not in frame.ndia[x])
                 for m in range(width)], dtype=np.int64)
        self._memo: dict[int, tuple[Formula, np.ndarray]] = {}

    @staticmethod
    def _forall_table(rows, width: int, n: int) -> np.ndarray:
        """tbl[m] = bitmask of states whose row avoids every bit of m."""
        return np.asarray(
            [sum(1 << x for x in range(n) if rows[x] & m == 0)
             for m in range(width)], dtype=np.int64)

    def _check_kinds(self, program: Program) -> None:
        for op in program.modal_opcodes():
            if self.frame.kind not in _MODAL_KINDS[op]:
                raise KindMismatch(
                    f"opcode for {_MODAL_KINDS[op]} frames used on a "
                    f"{self.frame.kind} frame")

    def run(self, program: Program) -> np.ndarray:
        """Execute over the grid; row per slot, column per valuation. Stage
        groups make each connective a handful of whole-matrix operations
        instead of one call per formula node."""
        self._check_kinds(program)
        full = self.full
        grid = self.grid
        names = program.letters
        V = np.empty((len(program.ops), self.n_val), dtype=np.int64)
        for s, op, a in program.leaves:
            if op == _LETTER:
                try:
                    V[s] = grid[names[a]]
                except KeyError:
                    raise MissingLetterError(names[a]) from None
            else:
                V[s] = full if op == _TOP else 0
        imp_t = self._imp_t
        for op, s, a, b in program.stages:
            if op == _AND:
                V[s] = V[a] & V[b]
            elif op == _OR:
                V[s] = V[a] | V[b]
            elif op == _IMP:
                V[s] = imp_t[V[a] & ~V[b] & full]
            elif op == _BOX:
                if self.frame.kind == "box":
                    V[s] = self._rel_t[~V[a] & full]
                else:
                    V[s] = self._cbox_t[V[a]]
            elif op == _DIA:
                V[s] = self._cdia_t[V[a]]
            elif op == _TRI:
                V[s] = self._tri_t[V[a]]
            else:
                V[s] = self._rel_t[V[a] & ~V[b] & full]
        return V

    def truth_matrix(self, program: Program) -> np.ndarray:
        """Row per input formula, column per valuation."""
        return self.run(program)[program.root_index]

    def valid_vector(self, program: Program) -> np.ndarray:
        return (self.truth_matrix(program) == self.full).all(axis=1)

    def array(self, f: Formula) -> np.ndarray:
        """Single-formula convenience; memoized by object identity."""
        hit = self._memo.get(id(f))
        if hit is not None:
            return hit[1]
        out = self.run(compile_formulas((f,)))[-1]
        self._memo[id(f)] = (f, out)
        return out

    def valid(self, f: Formula) -> bool:
        return bool((self.array(f) == self.full).all())


class AlgebraEvaluator:
    """Operation-table evaluation over all assignments at once.

    Assignments are element indices per letter over the product grid
    size^letters in ascending element order, matching FrameEvaluator's grid
    when the algebra is the frame's complex algebra (elements are the upsets
    in ascending mask order)."""

    def __init__(self, alg: ModalAlgebra, letters=("p", "q"), *,
                 caps: Caps = DEFAULT_CAPS):
        self.alg = alg
        b = alg.base
        names = tuple(sorted(letters))
        guard("assignment grid", b.size ** len(names), caps.max_valuations)
        self.grid = _grid_columns(range(b.size), names)
        self.n_val = b.size ** len(names)
        self._meet = np.asarray(b.meet, dtype=np.int64)
        self._join = np.asarray(b.join, dtype=np.int64)
        self._imp = np.asarray(b.imp, dtype=np.int64)
        self._unary = tuple(np.asarray(t, dtype=np.int64)
                            for t in alg.unary_ops)
        self._binary = (None if alg.binary_op is None
                        else np.asarray(alg.binary_op, dtype=np.int64))
        self._memo: dict[int, tuple[Formula, np.ndarray]] = {}

    def _check_kinds(self, program: Program) -> None:
        for op in program.modal_opcodes():
            if self.alg.kind not in _MODAL_KINDS[op]:
                raise KindMismatch(
                    f"opcode for {_MODAL_KINDS[op]} algebras used on a "
                    f"{self.alg.kind} algebra")

    def run(self, program: Program) -> np.ndarray:
        self._check_kinds(program)
        b = self.alg.base
        grid = self.grid
        names = program.letters
        V = np.empty((len(program.ops), self.n_val), dtype=np.int64)
        for s, op, a in program.leaves:
            if op == _LETTER:
                try:
                    V[s] = grid[names[a]]
                except KeyError:
                    raise MissingLetterError(names[a]) from None
            else:
                V[s] = b.top if op == _TOP else b.bottom
        for op, s, a, c in program.stages:
            if op == _AND:
                V[s] = self._meet[V[a], V[c]]
            elif op == _OR:
                V[s] = self._join[V[a], V[c]]
            elif op == _IMP:
                V[s] = self._imp[V[a], V[c]]
            elif op in (_BOX, _TRI):
                V[s] = self._unary[0][V[a]]
            elif op == _DIA:
                V[s] = self._unary[1][V[a]]
            else:
                V[s] = self._binary[V[a], V[c]]
        return V

    def value_matrix(self, program: Program) -> np.ndarray:
        return self.run(program)[program.root_index]

    def valid_vector(self, program: Program) -> np.ndarray:
        return (self.value_matrix(program) == self.alg.base.top).all(axis=1)

    def array(self, f: Formula) -> np.ndarray:
        hit = self._memo.get(id(f))
        if hit is not None:
            return hit[1]
        out = self.run(compile_formulas((f,)))[-1]
        self._memo[id(f)] = (f, out)
        return out

    def valid(self, f: Formula) -> bool:
        return bool((self.array(f) == self.alg.base.top).all())


def _as_program(formulas) -> Program:
    return formulas if isinstance(formulas, Program) else compile_formulas(formulas)


def frame_algebra_agreement(frame: Frame, formulas, *,
                            caps: Caps = DEFAULT_CAPS):
    """First (formula, valuation position) where the frame route and the
    complex algebra route disagree on the truth set, or None.

    Compares the full truth matrices, not just validity, so agreement
    implies the validity equivalence as a corollary. Valuation positions
    index the canonical grid (all_valuations order)."""
    program = _as_program(formulas)
    alg = complex_algebra(frame, caps=caps)
    fe = FrameEvaluator(frame, caps=caps)
    ae = AlgebraEvaluator(alg, caps=caps)
    labels = np.asarray(alg.base.labels, dtype=np.int64)
    fm = fe.truth_matrix(program)
    am = labels[ae.value_matrix(program)]
    bad = np.argwhere(fm != am)
    if bad.size:
        fi, vi = bad[0]
        return (program.formulas[int(fi)], int(vi))
    return None


def pfe_truth_lemma(frame: Frame, formulas, *, transform: str = "tau",
                    caps: Caps = DEFAULT_CAPS):
    """Check both prime filter extension clauses over the full grid:
    membership (a prime filter satisfies a formula iff it contains the truth
    set) and the unit map clause (a state satisfies a formula iff its point
    filter does). Returns the first (formula, valuation position, clause) or
    None."""
    from .duality import _pfe_with_space, pfe_unit

    program = _as_program(formulas)
    pe, space, alg = _pfe_with_space(frame, transform, caps)
    fe = FrameEvaluator(frame, caps=caps)
    # theta transport per base truth mask, as a lookup over raw masks; truth
    # sets are always upsets, so only upset positions are populated.
    transport = np.zeros(1 << frame.size, dtype=np.int64)
    for i, m in enumerate(alg.base.labels):
        transport[m] = space.theta[i]
    pe_grid = {name: transport[col] for name, col in fe.grid.items()}
    pf = FrameEvaluator(pe, grid=pe_grid, caps=caps)
    base = fe.truth_matrix(program)
    over = pf.truth_matrix(program)
    bad = np.argwhere(over != transport[base])
    if bad.size:
        fi, vi = bad[0]
        return (program.formulas[int(fi)], int(vi), "membership")
    # unit clause folded into one gather: project a pe truth mask back to
    # base states through the point-filter map.
    eta_map = pfe_unit(frame, space, alg)
    proj = np.asarray(
        [sum(((m >> eta_map[x]) & 1) << x for x in range(frame.size))
         for m in range(1 << pe.size)], dtype=np.int64)
    bad = np.argwhere(base != proj[over])
    if bad.size:
        fi, vi = bad[0]
        return (program.formulas[int(fi)], int(vi), "unit")
    return None
