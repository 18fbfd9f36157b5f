import xml.etree.ElementTree as ET

import pytest

from pinnlab.svg import write_svg_plot

NS = "{http://www.w3.org/2000/svg}"


def _parse(path):
    return ET.parse(path).getroot()


def test_two_series_get_distinct_strokes(tmp_path):
    p = write_svg_plot(
        [{"label": "a", "x": [1, 2, 3], "y": [1, 4, 9]},
         {"label": "b & c", "x": [1, 2, 3], "y": [2, 3, 4]}],
        "linear", tmp_path / "p.svg", title="t <1>")
    root = _parse(p)
    lines = root.findall(f"{NS}polyline")
    assert len(lines) == 2
    assert lines[0].get("stroke") != lines[1].get("stroke")
    texts = [t.text for t in root.iter(f"{NS}text")]
    assert "b & c" in texts and "t <1>" in texts


def test_single_point_is_a_marker(tmp_path):
    root = _parse(write_svg_plot([{"label": "p", "x": [0.5], "y": [2.0]}], "linear", tmp_path / "s.svg"))
    assert len(root.findall(f"{NS}circle")) == 1
    assert not root.findall(f"{NS}polyline")


def test_markers_only(tmp_path):
    root = _parse(write_svg_plot([{"label": "p", "x": [1, 2, 3], "y": [3, 1, 2], "markers_only": True}],
                                 "loglog", tmp_path / "m.svg"))
    assert len(root.findall(f"{NS}circle")) == 3


def test_loglog_rejects_non_positive(tmp_path):
    with pytest.raises(ValueError):
        write_svg_plot([{"label": "a", "x": [1, 2], "y": [0, 1]}], "loglog", tmp_path / "x.svg")


def test_bad_input(tmp_path):
    with pytest.raises(ValueError):
        write_svg_plot([], "linear", tmp_path / "x.svg")
    with pytest.raises(ValueError):
        write_svg_plot([{"label": "a", "x": [1], "y": [1]}], "semilog", tmp_path / "x.svg")
    with pytest.raises(ValueError):
        write_svg_plot([{"label": "a", "x": [1, 2], "y": [1]}], "linear", tmp_path / "x.svg")
