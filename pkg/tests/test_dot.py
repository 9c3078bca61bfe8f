"""Shape and determinism checks for the Graphviz renderer."""

from gtw.dot import frame_to_dot
from gtw.universe import build_universe


def test_box_dot(b1):
    text = frame_to_dot(b1)
    assert text.startswith("digraph frame {\n  rankdir=BT;")
    assert '  s0 [label="0"];' in text
    assert "  s0 -> s1;" in text
    assert '  s0 -> s1 [style=dashed, label="R"];' in text
    assert '  s1 -> s1 [style=dashed, label="R"];' in text
    assert text.endswith("}\n")


def test_si_dot(si_c2):
    assert 'label="Rs"' in frame_to_dot(si_c2)


def test_im_dot(im_c2):
    text = frame_to_dot(im_c2)
    assert '  n0 [shape=box, label="{{1}}"];' in text
    assert '  s0 -> n0 [style=dashed, label="N"];' in text


def test_cin_dot(cin_point):
    text = frame_to_dot(cin_point)
    assert 'label="Nbox"' in text and 'label="Ndia"' in text
    assert "nb0" in text and "nd0" in text


def test_family_labels_sorted():
    frame = next(f for f in build_universe("im", 2).frames
                 if len(f.nbhd[0]) >= 2)
    text = frame_to_dot(frame)
    fams = sorted(frame.nbhd[0])
    label = "{" + ", ".join(
        "{" + ",".join(str(s) for s in range(2) if m >> s & 1) + "}"
        for m in fams) + "}"
    assert f'n0 [shape=box, label="{label}"];' in text


def test_deterministic(b1, im_c2, cin_point, si_c2):
    for f in (b1, im_c2, cin_point, si_c2):
        assert frame_to_dot(f) == frame_to_dot(f)
