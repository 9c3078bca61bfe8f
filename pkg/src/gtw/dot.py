"""Graphviz rendering of frames.

One node per state, solid edges for order covers (drawn bottom-up), and
dashed edges for the modal structure.  Relational structure points at
states directly; neighborhood structure goes through one box-shaped node
per state whose label lists the family.  Output is deterministic.
"""

from __future__ import annotations

from .frames import Frame
from .order import iter_bits

__all__ = ["frame_to_dot"]


def _set_label(mask: int) -> str:
    return "{" + ",".join(str(s) for s in iter_bits(mask)) + "}"


def _family_label(fam: frozenset) -> str:
    return "{" + ", ".join(_set_label(m) for m in sorted(fam)) + "}"


def frame_to_dot(frame: Frame) -> str:
    lines = ["digraph frame {", "  rankdir=BT;",
             '  node [shape=circle, fontsize=11];']
    for x in range(frame.size):
        lines.append(f'  s{x} [label="{x}"];')
    for i, j in frame.base.covers:
        lines.append(f"  s{i} -> s{j};")
    if frame.kind in ("box", "si"):
        tag = "R" if frame.kind == "box" else "Rs"
        for x in range(frame.size):
            for y in iter_bits(frame.rel[x]):
                lines.append(f'  s{x} -> s{y} [style=dashed, label="{tag}"];')
    elif frame.kind == "im":
        for x, fam in enumerate(frame.nbhd):
            lines.append(f'  n{x} [shape=box, label="{_family_label(fam)}"];')
            lines.append(f'  s{x} -> n{x} [style=dashed, label="N"];')
    else:
        for x in range(frame.size):
            lines.append(
                f'  nb{x} [shape=box, label="{_family_label(frame.nbox[x])}"];')
            lines.append(f'  s{x} -> nb{x} [style=dashed, label="Nbox"];')
            lines.append(
                f'  nd{x} [shape=box, label="{_family_label(frame.ndia[x])}"];')
            lines.append(f'  s{x} -> nd{x} [style=dashed, label="Ndia"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
