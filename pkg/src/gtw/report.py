"""File output for audit reports.

write_report drops three artifacts into a directory: the full report as
JSON, a per-section CSV, and a PNG summarizing section outcomes.  All
three are byte-deterministic for a given report, so repeated runs can be
compared with a plain file diff; nothing time- or host-dependent is
written.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .audit import AuditReport
from .jsonio import dumps

__all__ = ["write_report"]

_CSV_FIELDS = ("section", "checked", "skipped", "passed", "complete", "note")


def write_report(report: AuditReport, outdir) -> dict[str, Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "audit.json", "csv": out / "sections.csv",
             "png": out / "sections.png"}

    paths["json"].write_text(dumps(report.as_json()))

    with paths["csv"].open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for s in report.sections:
            writer.writerow([s.name, s.checked, s.skipped,
                             str(s.passed).lower(), str(s.complete).lower(),
                             s.note or ""])

    _render_png(report, paths["png"])
    return paths


def _render_png(report: AuditReport, path: Path) -> None:
    names = [s.name for s in report.sections]
    checked = [s.checked for s in report.sections]
    colors = ["#2a7e43" if s.passed else "#b03a2e" for s in report.sections]
    fig, ax = plt.subplots(figsize=(7.0, 0.6 * len(names) + 1.6), dpi=100)
    ypos = range(len(names))
    ax.barh(ypos, checked, color=colors)
    for y, s in zip(ypos, report.sections):
        note = "" if s.complete else " (partial)"
        ax.text(s.checked, y, f" {s.checked}{note}", va="center", fontsize=9)
    ax.set_yticks(list(ypos), names)
    ax.invert_yaxis()
    ax.set_xlabel("instances checked")
    verdict = "passed" if report.passed else "failed"
    ax.set_title(f"closure audit over {report.kind} universe "
                 f"({report.universe_size} frames): {verdict}")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": "gtw"})
    plt.close(fig)
