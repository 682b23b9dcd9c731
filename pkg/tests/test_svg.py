import xml.dom.minidom

import numpy as np

from quakeresid import (Grid, IntensityField, SeededStream, k_curve_svg,
                        parse_catalog, point_map_svg, raw_residuals,
                        residual_map_svg, superpose, wk_confidence_bands)
from quakeresid.secondorder import KCurve, radii_grid


def _curve(with_bands=True):
    radii = radii_grid([0.1, 0.2, 0.3])
    k = np.pi * radii ** 2 * np.array([0.8, 1.1, 1.0])
    bands = wk_confidence_bands(radii, 1.0, 50.0) if with_bands else None
    return KCurve(radii, k, "weighted", bands=bands)


def _rset():
    g = Grid.regular(0, 1, 0, 1, 0.5, 0.5)
    fld = IntensityField(g, np.array([[8.0, 1.0], [1.0, 1.0]]))
    cat = parse_catalog("time,lon,lat,depth,mag\n"
                        "2006-01-01T00:00:00Z,0.3,0.3,5,4.0\n")
    return superpose(cat, fld, SeededStream(1, 0))


def _rmap():
    g = Grid.regular(0, 1, 0, 1, 0.5, 0.5)
    fld = IntensityField(g, np.array([[2.0, 4.0], [4.0, 0.0]]))
    cat = parse_catalog("time,lon,lat,depth,mag\n"
                        "2006-01-01T00:00:00Z,0.3,0.3,5,4.0\n")
    return raw_residuals(fld, cat)


def test_curve_svg_well_formed_with_fixed_viewbox():
    text = k_curve_svg(_curve(), "test curve")
    doc = xml.dom.minidom.parseString(text)
    svg = doc.documentElement
    assert svg.tagName == "svg"
    assert svg.getAttribute("viewBox") == "0 0 800 600"
    assert "stroke-dasharray" in text      # dashed bands present
    assert "polyline" in text


def test_curve_svg_without_bands():
    text = k_curve_svg(_curve(with_bands=False), "no bands")
    xml.dom.minidom.parseString(text)
    assert text.count("polyline") >= 1


def test_point_map_distinct_glyphs():
    text = point_map_svg(_rset(), "points")
    xml.dom.minidom.parseString(text)
    assert "<circle" in text    # retained events
    assert "<path" in text      # simulated points


def test_residual_map_hatches_sentinels():
    text = residual_map_svg(_rmap(), "resid", events=np.array([[0.3, 0.3]]))
    xml.dom.minidom.parseString(text)
    assert text.count("<rect") >= 5    # background + four pixels
    assert "url(#hatch)" not in text   # all values finite here


def test_svg_deterministic():
    assert k_curve_svg(_curve(), "t") == k_curve_svg(_curve(), "t")
    assert point_map_svg(_rset(), "p") == point_map_svg(_rset(), "p")


def test_title_escaped():
    text = k_curve_svg(_curve(), "a < b & c")
    xml.dom.minidom.parseString(text)
    assert "a &lt; b &amp; c" in text
