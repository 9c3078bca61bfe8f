"""File outputs of the audit report writer."""

import json

from gtw.audit import AuditReport, SectionResult
from gtw.report import write_report


def _demo_report():
    return AuditReport("box", 16, (0, 3), (
        SectionResult("disjoint_unions", 3, 0, True, True),
        SectionResult("generated_subframes", 5, 1, True, True,
                      note="one oversized mask skipped"),
        SectionResult("p_morphic_images", 2, 0, False, True,
                      witness={"source": 0}),
        SectionResult("pfe_closure_reflection", 16, 0, True, False,
                      note="budget exhausted"),
    ))


def test_write_report_files(tmp_path):
    paths = write_report(_demo_report(), tmp_path / "out")
    assert sorted(p.name for p in paths.values()) == [
        "audit.json", "sections.csv", "sections.png"]
    doc = json.loads(paths["json"].read_text())
    assert doc["passed"] is False
    assert doc["members"] == [0, 3]
    csv_lines = paths["csv"].read_text().splitlines()
    assert csv_lines[0] == "section,checked,skipped,passed,complete,note"
    assert csv_lines[3] == "p_morphic_images,2,0,false,true,"
    assert csv_lines[4].startswith("pfe_closure_reflection,16,0,true,false,")
    png = paths["png"].read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_write_report_is_deterministic(tmp_path):
    a = write_report(_demo_report(), tmp_path / "a")
    b = write_report(_demo_report(), tmp_path / "b")
    for key in ("json", "csv", "png"):
        assert a[key].read_bytes() == b[key].read_bytes()
