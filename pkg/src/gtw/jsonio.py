"""JSON readers and writers for frames, valuations, formulas, algebras,
and audit reports.

Writers emit plain dicts of JSON types; dumps() renders them with sorted
keys and a trailing newline, so identical inputs produce identical bytes.
Readers validate shapes and ranges and report problems with a JSON path;
structural laws (frame conditions, algebra equations) are left to the
constructors, so a well-formed document describing a lawless frame raises
FrameConditionError, not FormatError.
"""

from __future__ import annotations

import json

from .algebras import ModalAlgebra, validate_modal_algebra
from .audit import AuditReport, SectionResult
from .caps import Caps, DEFAULT_CAPS
from .errors import CycleError, FormatError
from .frames import (
    Frame,
    Valuation,
    make_box_frame,
    make_cin_frame,
    make_im_frame,
    make_si_frame,
)
from .heyting import FinHA
from .order import iter_bits, validate_poset
from .syntax import (
    And,
    Bot,
    Box,
    Dia,
    Formula,
    Imp,
    Letter,
    Or,
    Sto,
    Top,
    Tri,
    KINDS,
)

__all__ = [
    "dumps",
    "frame_to_json", "frame_from_json",
    "valuation_to_json", "valuation_from_json",
    "formula_to_json", "formula_from_json",
    "algebra_to_json", "algebra_from_json",
    "map_graph_from_json",
    "report_from_json",
]

_STRUCTURE_FIELDS = {"box": ("rel",), "si": ("rel",), "im": ("nbhd",),
                     "cin": ("nbox", "ndia")}
_FRAME_FIELDS = {"kind", "size", "leq", "rel", "nbhd", "nbox", "ndia"}


def dumps(data) -> str:
    """Canonical rendering: sorted keys, two-space indent, one newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _need(cond: bool, msg: str, path: str) -> None:
    if not cond:
        raise FormatError(msg, path)


def _int_at(value, path: str, lo: int = 0, hi: int | None = None) -> int:
    _need(isinstance(value, int) and not isinstance(value, bool),
          "expected an integer", path)
    _need(value >= lo, f"expected a value >= {lo}", path)
    if hi is not None:
        _need(value < hi, f"expected a value < {hi}", path)
    return value


def _list_at(value, path: str) -> list:
    _need(isinstance(value, list), "expected a list", path)
    return value


def _states(mask: int) -> list[int]:
    return list(iter_bits(mask))


def _mask_at(value, size: int, path: str) -> int:
    out = 0
    for k, s in enumerate(_list_at(value, path)):
        out |= 1 << _int_at(s, f"{path}[{k}]", hi=size)
    return out


def _pairs_at(value, size: int, path: str) -> list[tuple[int, int]]:
    out = []
    for k, pair in enumerate(_list_at(value, path)):
        p = f"{path}[{k}]"
        _need(isinstance(pair, list) and len(pair) == 2,
              "expected a [from, to] pair", p)
        out.append((_int_at(pair[0], f"{p}[0]", hi=size),
                    _int_at(pair[1], f"{p}[1]", hi=size)))
    return out


# --- frames ---


def frame_to_json(frame: Frame) -> dict:
    """leq lists the cover pairs (the reader closes them transitively);
    relations are pair lists and neighborhood families are per-state lists
    of member sets, each a sorted state list."""
    out = {"kind": frame.kind, "size": frame.size,
           "leq": [list(c) for c in frame.base.covers]}
    if frame.kind in ("box", "si"):
        out["rel"] = [[x, y] for x in range(frame.size)
                      for y in iter_bits(frame.rel[x])]
    elif frame.kind == "im":
        out["nbhd"] = [[_states(m) for m in sorted(fam)]
                       for fam in frame.nbhd]
    else:
        out["nbox"] = [[_states(m) for m in sorted(fam)]
                       for fam in frame.nbox]
        out["ndia"] = [[_states(m) for m in sorted(fam)]
                       for fam in frame.ndia]
    return out


def _families_at(value, size: int, n_states: int, path: str):
    fams = _list_at(value, path)
    _need(len(fams) == n_states, f"expected one family per state ({n_states})",
          path)
    return [[_mask_at(m, size, f"{path}[{x}][{k}]")
             for k, m in enumerate(_list_at(fam, f"{path}[{x}]"))]
            for x, fam in enumerate(fams)]


def frame_from_json(data, *, caps: Caps = DEFAULT_CAPS) -> Frame:
    _need(isinstance(data, dict), "expected an object", "$")
    extra = set(data) - _FRAME_FIELDS
    _need(not extra, f"unknown fields {sorted(extra)}", "$")
    kind = data.get("kind")
    _need(kind in KINDS, f"kind must be one of {'/'.join(KINDS)}", "$.kind")
    size = _int_at(data.get("size"), "$.size", lo=1)
    for field in _STRUCTURE_FIELDS[kind]:
        _need(field in data, f"kind {kind} needs field {field!r}", "$")
    for other in _FRAME_FIELDS - {"kind", "size", "leq"} - set(_STRUCTURE_FIELDS[kind]):
        _need(other not in data, f"field {other!r} does not belong to kind {kind}",
              f"$.{other}")
    pairs = _pairs_at(data.get("leq", []), size, "$.leq")
    try:
        base = validate_poset(size, pairs)
    except CycleError as e:
        raise FormatError(str(e), "$.leq") from None
    if kind in ("box", "si"):
        rel = _pairs_at(data["rel"], size, "$.rel")
        make = make_box_frame if kind == "box" else make_si_frame
        return make(base, rel, caps=caps)
    if kind == "im":
        return make_im_frame(base, _families_at(data["nbhd"], size, size, "$.nbhd"),
                             caps=caps)
    return make_cin_frame(base,
                          _families_at(data["nbox"], size, size, "$.nbox"),
                          _families_at(data["ndia"], size, size, "$.ndia"),
                          caps=caps)


# --- valuations ---


def valuation_to_json(v: Valuation) -> dict:
    return {name: _states(mask) for name, mask in zip(v.letters, v.masks)}


def valuation_from_json(data, frame: Frame, *,
                        caps: Caps = DEFAULT_CAPS) -> Valuation:
    _need(isinstance(data, dict), "expected an object of letters", "$")
    out = {}
    for name, states in data.items():
        _need(isinstance(name, str) and name.isidentifier(),
              "letter names must be identifiers", f"$.{name}")
        mask = _mask_at(states, frame.size, f"$.{name}")
        _need(frame.base.is_upset(mask),
              "letter denotations must be upward closed", f"$.{name}")
        out[name] = mask
    return Valuation.from_dict(out)


# --- formulas ---


_NODE_OPS = {Top: "top", Bot: "bot", Letter: "letter", And: "and", Or: "or",
             Imp: "imp", Box: "box", Dia: "dia", Tri: "tri", Sto: "sto"}
_OP_NODES = {v: k for k, v in _NODE_OPS.items()}


def formula_to_json(f: Formula) -> dict:
    op = _NODE_OPS[type(f)]
    if isinstance(f, Letter):
        return {"op": op, "name": f.name}
    if isinstance(f, (Top, Bot)):
        return {"op": op}
    if isinstance(f, (Box, Dia, Tri)):
        return {"op": op, "child": formula_to_json(f.child)}
    return {"op": op, "left": formula_to_json(f.left),
            "right": formula_to_json(f.right)}


def formula_from_json(data, path: str = "$") -> Formula:
    _need(isinstance(data, dict), "expected a formula object", path)
    op = data.get("op")
    node = _OP_NODES.get(op)
    _need(node is not None, f"unknown op {op!r}", f"{path}.op")
    if node is Letter:
        name = data.get("name")
        _need(isinstance(name, str) and name.isidentifier(),
              "letter needs an identifier name", f"{path}.name")
        return Letter(name)
    if node in (Top, Bot):
        return node()
    if node in (Box, Dia, Tri):
        _need("child" in data, f"{op} needs a child", path)
        return node(formula_from_json(data["child"], f"{path}.child"))
    _need("left" in data and "right" in data,
          f"{op} needs left and right", path)
    return node(formula_from_json(data["left"], f"{path}.left"),
                formula_from_json(data["right"], f"{path}.right"))


# --- algebras ---


def algebra_to_json(alg: ModalAlgebra) -> dict:
    b = alg.base
    return {
        "kind": alg.kind,
        "size": b.size,
        "bottom": b.bottom,
        "top": b.top,
        "meet": [list(r) for r in b.meet],
        "join": [list(r) for r in b.join],
        "imp": [list(r) for r in b.imp],
        "unary_ops": [list(t) for t in alg.unary_ops],
        "binary_op": (None if alg.binary_op is None
                      else [list(r) for r in alg.binary_op]),
        "labels": (None if b.labels is None
                   else [_states(m) for m in b.labels]),
    }


def _table_at(value, size: int, path: str) -> tuple[tuple[int, ...], ...]:
    rows = _list_at(value, path)
    _need(len(rows) == size, f"expected {size} rows", path)
    out = []
    for i, row in enumerate(rows):
        r = _list_at(row, f"{path}[{i}]")
        _need(len(r) == size, f"expected {size} entries", f"{path}[{i}]")
        out.append(tuple(_int_at(v, f"{path}[{i}][{j}]", hi=size)
                         for j, v in enumerate(r)))
    return tuple(out)


def algebra_from_json(data, *, caps: Caps = DEFAULT_CAPS) -> ModalAlgebra:
    _need(isinstance(data, dict), "expected an object", "$")
    kind = data.get("kind")
    _need(kind in KINDS, f"kind must be one of {'/'.join(KINDS)}", "$.kind")
    size = _int_at(data.get("size"), "$.size", lo=2)
    meet = _table_at(data.get("meet"), size, "$.meet")
    join = _table_at(data.get("join"), size, "$.join")
    imp = _table_at(data.get("imp"), size, "$.imp")
    bottom = _int_at(data.get("bottom"), "$.bottom", hi=size)
    top = _int_at(data.get("top"), "$.top", hi=size)
    le = tuple(sum(1 << j for j in range(size) if meet[i][j] == i)
               for i in range(size))
    labels = data.get("labels")
    masks = None
    if labels is not None:
        masks = tuple(_mask_at(m, 64, f"$.labels[{k}]")
                      for k, m in enumerate(_list_at(labels, "$.labels")))
    base = FinHA(size, le, meet, join, bottom, top, labels=masks, imp=imp)
    unary = tuple(tuple(_int_at(v, f"$.unary_ops[{k}][{j}]", hi=size)
                        for j, v in enumerate(_list_at(t, f"$.unary_ops[{k}]")))
                  for k, t in enumerate(_list_at(data.get("unary_ops", []),
                                                 "$.unary_ops")))
    for k, t in enumerate(unary):
        _need(len(t) == size, f"expected {size} entries", f"$.unary_ops[{k}]")
    binop = data.get("binary_op")
    binary = None if binop is None else _table_at(binop, size, "$.binary_op")
    return validate_modal_algebra(
        ModalAlgebra(kind, base, unary_ops=unary, binary_op=binary), caps=caps)


# --- maps and reports ---


def map_graph_from_json(data) -> tuple[int, ...]:
    _need(isinstance(data, dict) and "graph" in data,
          'expected an object with a "graph" field', "$")
    return tuple(_int_at(v, f"$.graph[{k}]")
                 for k, v in enumerate(_list_at(data["graph"], "$.graph")))


def report_from_json(data) -> AuditReport:
    _need(isinstance(data, dict), "expected an object", "$")
    for field in ("kind", "universe_size", "members", "sections"):
        _need(field in data, f"missing field {field!r}", "$")
    sections = []
    for i, s in enumerate(_list_at(data["sections"], "$.sections")):
        p = f"$.sections[{i}]"
        _need(isinstance(s, dict), "expected an object", p)
        for field in ("name", "checked", "skipped", "passed", "complete"):
            _need(field in s, f"missing field {field!r}", p)
        sections.append(SectionResult(
            s["name"], _int_at(s["checked"], f"{p}.checked"),
            _int_at(s["skipped"], f"{p}.skipped"), bool(s["passed"]),
            bool(s["complete"]), s.get("witness"), s.get("note")))
    members = tuple(_int_at(m, f"$.members[{k}]")
                    for k, m in enumerate(_list_at(data["members"], "$.members")))
    return AuditReport(data["kind"], _int_at(data["universe_size"],
                                             "$.universe_size"),
                       members, tuple(sections))
