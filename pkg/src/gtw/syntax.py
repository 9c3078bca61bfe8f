"""Formula ASTs, the ASCII parser and printer, and rank-1 classification.

Grammar: atoms `T`, `F`, identifiers; prefix `box`, `dia`, `tri`; `&` binds
tighter than `|`, which binds tighter than the arrows `->`, `~>`, `<->`.
Arrows are right-associative at equal precedence and may not be chained with
a different arrow without parentheses. `a <-> b` is parsed as the conjunction
of the two implications; `~>` is strict implication and carries its own AST
node. Which modal connectives are admitted depends on the signature kind.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .errors import ParseError, SignatureError

KINDS = ("box", "im", "cin", "si")


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Letter(Formula):
    name: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    child: Formula


@dataclass(frozen=True)
class Dia(Formula):
    child: Formula


@dataclass(frozen=True)
class Tri(Formula):
    child: Formula


@dataclass(frozen=True)
class Sto(Formula):
    left: Formula
    right: Formula


_UNARY_BY_KIND = {"box": (Box,), "im": (Tri,), "cin": (Box, Dia), "si": ()}
_PREFIX_WORD = {Box: "box", Dia: "dia", Tri: "tri"}


@dataclass(frozen=True)
class Signature:
    """Fixes which modal connectives a formula may use."""

    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def unary(self) -> tuple:
        return _UNARY_BY_KIND[self.kind]

    @property
    def has_sto(self) -> bool:
        return self.kind == "si"

    def admits(self, node_type) -> bool:
        if node_type is Sto:
            return self.has_sto
        if node_type in (Box, Dia, Tri):
            return node_type in self.unary
        return True


@dataclass(frozen=True)
class AxiomPair:
    """The two sides of an axiom lhs <-> rhs, kept separate."""

    lhs: Formula
    rhs: Formula


def validate_formula(f: Formula, sig: Signature) -> None:
    """Raise SignatureError if f uses a modality outside sig."""
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Box, Dia, Tri)):
            if not sig.admits(type(g)):
                raise SignatureError(
                    f"{_PREFIX_WORD[type(g)]} not in signature {sig.kind}")
            stack.append(g.child)
        elif isinstance(g, Sto):
            if not sig.admits(Sto):
                raise SignatureError(f"~> not in signature {sig.kind}")
            stack.extend((g.left, g.right))
        elif isinstance(g, (And, Or, Imp)):
            stack.extend((g.left, g.right))


_TOKEN_RE = re.compile(r"\s*(<->|->|~>|[&|()]|[A-Za-z_][A-Za-z0-9_]*)")
_KEYWORDS = {"T", "F", "box", "dia", "tri"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or not m.group(1):
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}",
                             len(text) - len(stripped))
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.text = text
        self.sig = sig
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def arrow_chain(self):
        """The lowest level: a chain of `|`-terms joined by one arrow kind."""
        sides = [self.or_level()]
        ops = []
        while self.peek() in ("->", "~>", "<->"):
            op, pos = self.take()
            if ops and op != ops[0][0]:
                raise ParseError("mixed arrow chain requires parentheses", pos)
            if op == "~>" and not self.sig.has_sto:
                raise SignatureError(f"~> not in signature {self.sig.kind}")
            ops.append((op, pos))
            sides.append(self.or_level())
        return sides, ops

    def arrows(self) -> Formula:
        sides, ops = self.arrow_chain()
        out = sides[-1]
        for left in reversed(sides[:-1]):
            op = ops[0][0]
            if op == "->":
                out = Imp(left, out)
            elif op == "~>":
                out = Sto(left, out)
            else:
                out = And(Imp(left, out), Imp(out, left))
        return out

    def or_level(self) -> Formula:
        out = self.and_level()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.and_level())
        return out

    def and_level(self) -> Formula:
        out = self.prefix()
        while self.peek() == "&":
            self.take()
            out = And(out, self.prefix())
        return out

    def prefix(self) -> Formula:
        tok = self.peek()
        if tok in ("box", "dia", "tri"):
            _, pos = self.take()
            node = {"box": Box, "dia": Dia, "tri": Tri}[tok]
            if not self.sig.admits(node):
                raise SignatureError(f"{tok} not in signature {self.sig.kind}")
            return node(self.prefix())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.pos())
        if tok == "(":
            self.take()
            out = self.arrows()
            if self.peek() != ")":
                raise ParseError("expected ')'", self.pos())
            self.take()
            return out
        if tok == "T":
            self.take()
            return Top()
        if tok == "F":
            self.take()
            return Bot()
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in _KEYWORDS:
            self.take()
            return Letter(tok)
        raise ParseError(f"unexpected token {tok!r}", self.pos())


def parse(text: str, sig: Signature) -> Formula:
    p = _Parser(text, sig)
    out = p.arrows()
    if p.peek() is not None:
        raise ParseError(f"unexpected token {p.peek()!r}", p.pos())
    return out


def parse_axiom_pair(text: str, sig: Signature) -> AxiomPair:
    """Parse `lhs <-> rhs` into its two sides without desugaring."""
    p = _Parser(text, sig)
    sides, ops = p.arrow_chain()
    if p.peek() is not None:
        raise ParseError(f"unexpected token {p.peek()!r}", p.pos())
    if len(ops) != 1 or ops[0][0] != "<->":
        raise ParseError("axiom must have exactly one top-level '<->'",
                         ops[0][1] if ops else len(text))
    return AxiomPair(sides[0], sides[1])


# precedence levels for the printer: atoms 4, prefix 3, & 2, | 1, arrows 0
def _level(f: Formula) -> int:
    if isinstance(f, (Top, Bot, Letter)):
        return 4
    if isinstance(f, (Box, Dia, Tri)):
        return 3
    if isinstance(f, And):
        return 2
    if isinstance(f, Or):
        return 1
    return 0


def print_formula(f: Formula) -> str:
    """Render f so that parse(print_formula(f), sig) == f."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, Letter):
        return f.name
    if isinstance(f, (Box, Dia, Tri)):
        inner = print_formula(f.child)
        if _level(f.child) < 3:
            inner = f"({inner})"
        return f"{_PREFIX_WORD[type(f)]} {inner}"
    if isinstance(f, (And, Or)):
        lvl = _level(f)
        sep = " & " if isinstance(f, And) else " | "
        left = print_formula(f.left)
        if _level(f.left) < lvl:
            left = f"({left})"
        right = print_formula(f.right)
        if _level(f.right) <= lvl:
            right = f"({right})"
        return left + sep + right
    # arrows: right-associative, so the left child needs parentheses when it
    # is itself an arrow, and the right child only when its arrow op differs
    sep = " -> " if isinstance(f, Imp) else " ~> "
    left = print_formula(f.left)
    if _level(f.left) == 0:
        left = f"({left})"
    right = print_formula(f.right)
    if _level(f.right) == 0 and type(f.right) is not type(f):
        right = f"({right})"
    return left + sep + right


def letters(f: Formula) -> frozenset[str]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Letter):
            out.add(g.name)
        elif isinstance(g, (And, Or, Imp, Sto)):
            stack.extend((g.left, g.right))
        elif isinstance(g, (Box, Dia, Tri)):
            stack.append(g.child)
    return frozenset(out)


def substitute(f: Formula, mapping: dict[str, Formula]) -> Formula:
    """Simultaneous replacement of letters; unmapped letters stay."""
    if isinstance(f, Letter):
        return mapping.get(f.name, f)
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, (Box, Dia, Tri)):
        return type(f)(substitute(f.child, mapping))
    return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))


def is_rank1(f: Formula, _depth: int = 0) -> bool:
    """No intuitionistic implication, and every letter occurrence in the
    scope of exactly one modal operator."""
    if isinstance(f, (Top, Bot)):
        return True
    if isinstance(f, Letter):
        return _depth == 1
    if isinstance(f, Imp):
        return False
    if isinstance(f, (And, Or)):
        return is_rank1(f.left, _depth) and is_rank1(f.right, _depth)
    if isinstance(f, (Box, Dia, Tri)):
        return is_rank1(f.child, _depth + 1)
    return is_rank1(f.left, _depth + 1) and is_rank1(f.right, _depth + 1)


def is_rank1_axiom(ax: AxiomPair) -> bool:
    return is_rank1(ax.lhs) and is_rank1(ax.rhs)


def enumerate_formulas(sig: Signature, max_height: int,
                       letter_names: tuple[str, ...] = ("p", "q")) -> tuple[Formula, ...]:
    """All formulas of tree height <= max_height over the given letters.

    Each formula appears exactly once; the order is deterministic (atoms
    first, then unary applications, then binary, each over the previous
    level in order).
    """
    atoms = [Top(), Bot()] + [Letter(n) for n in letter_names]
    level = list(atoms)
    binaries = (And, Or, Imp) + ((Sto,) if sig.has_sto else ())
    for _ in range(max_height):
        nxt = list(atoms)
        for u in sig.unary:
            nxt.extend(u(t) for t in level)
        for b in binaries:
            nxt.extend(b(l, r) for l in level for r in level)
        level = nxt
    return tuple(level)


def random_formula(rng: random.Random, sig: Signature, height: int,
                   letter_names: tuple[str, ...] = ("p", "q")) -> Formula:
    """A random formula of tree height <= height, deterministic given rng."""
    atoms = [Top(), Bot()] + [Letter(n) for n in letter_names]
    if height <= 0:
        return rng.choice(atoms)
    unaries = sig.unary
    binaries = (And, Or, Imp) + ((Sto,) if sig.has_sto else ())
    roll = rng.random()
    if roll < 0.2:
        return rng.choice(atoms)
    if roll < 0.45 and unaries:
        return rng.choice(unaries)(random_formula(rng, sig, height - 1, letter_names))
    b = rng.choice(binaries)
    return b(random_formula(rng, sig, height - 1, letter_names),
             random_formula(rng, sig, height - 1, letter_names))
