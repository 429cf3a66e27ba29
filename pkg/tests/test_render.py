import hashlib
import io
import logging
import math
import random

import numpy as np
import pytest
from fuzzmodels import fuzz_model
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import greedy_oracle
from PIL import Image

from infoglyph.assets import AssetStore
from infoglyph.model import (Align, BarChart, Color, Dimensions, FontSpec, PieChart, Picturegraph, PieStyle, Point,
                             RasterImage, TextElement)
from infoglyph.parser import parse_model
from infoglyph.render import (RenderError, layout_bars, layout_picturegraph, layout_pie, place_text, render,
                              render_png, render_surface, wrap_text)
from infoglyph.render.charts import filled_columns, inner_radius, percent_label, tint_icon
from infoglyph.render.png import SIGNATURE, encode_png
from infoglyph.render.raster import Rect, Surface, arc_points, coverage
from infoglyph.render.text import default_lineheight

NINETEEN = "19% reduction in carbon dioxide equivalent emissions"
F15 = FontSpec(15, "Helvetica")
RED, GREEN, BLUE = Color(255, 0, 0), Color(0, 255, 0), Color(0, 0, 255)


def _pie(data, colors=(RED, GREEN, BLUE), **kw):
    return PieChart("piechart1", Point(100, 100), 80, tuple(colors), tuple(data), **kw)


# -- text -------------------------------------------------------------------

def test_wrap_nineteen_percent(catalog):
    lines = wrap_text(NINETEEN, F15, 145, catalog)
    assert len(lines) >= 2
    assert all(line.advance <= 145 for line in lines)
    assert [line.text.split() for line in lines] == greedy_oracle(
        NINETEEN.split(), lambda s: catalog.measure(s, F15) <= 145)
    assert [line.baseline.y for line in lines] == [i * default_lineheight(F15) for i in range(len(lines))]


def test_short_value_is_one_unchanged_line(catalog):
    lines = wrap_text("Total waste", F15, 500, catalog)
    assert [line.text for line in lines] == ["Total waste"]


def test_overlong_word_warns(catalog, caplog):
    with caplog.at_level(logging.WARNING):
        lines = wrap_text("Sustainability", FontSpec(40, "A"), 20, catalog)
    assert [line.text for line in lines] == ["Sustainability"]
    assert "wider than maxwidth" in caplog.text


def test_explicit_newline_and_lineheight(catalog):
    lines = wrap_text("a\nb c", F15, None, catalog, lineheight=21)
    assert [(line.text, line.baseline.y) for line in lines] == [("a", 0), ("b c", 21)]


def test_wrap_rejects_zero_width(catalog):
    with pytest.raises(ValueError):
        wrap_text("x", F15, 0, catalog)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from(["CO2", "waste", "of", "reduction", "19%", "Sustainability", "€"]),
                min_size=1, max_size=14),
       st.integers(1, 400))
def test_wrap_properties(catalog, words, maxwidth):
    text = " ".join(words)
    lines = wrap_text(text, F15, maxwidth, catalog)
    assert " ".join(line.text for line in lines) == text
    for line in lines:
        assert line.advance <= maxwidth or len(line.text.split()) == 1
    assert len(wrap_text(text, F15, None, catalog)) == 1
    assert len(wrap_text(text, F15, max(1, maxwidth // 2), catalog)) >= len(lines)


def _text(align, x=400, y=50, value="x"):
    return TextElement("text1", value, F15, Point(x, y), align=align)


def test_place_center_single_line():
    from infoglyph.render.text import LineBox
    placed = place_text(_text(Align.CENTER), [LineBox("x", Point(0, 0), 100)])
    assert (placed[0].baseline.x, placed[0].baseline.y) == (350, 50)


def test_place_left_and_center_lines(catalog):
    lines = wrap_text("short\na considerably longer line", F15, None, catalog)
    left = place_text(_text(Align.LEFT), lines)
    assert {line.baseline.x for line in left} == {400}
    centred = place_text(_text(Align.CENTER), lines)
    assert [line.baseline.x + line.advance // 2 for line in centred] == [400, 400]
    assert centred[0].advance != centred[1].advance


def test_centered_text_pixels_straddle_anchor(catalog):
    model = parse_model("bgsize: 200x40\nhead: off\nfoot: off\ntext1:\n  font: 20px A\n  value: 'HOH'\n"
                        "  align: center\n  position: 100x30\n")
    px = np.frombuffer(render(model, AssetStore("/nonexistent"), catalog).pixels, np.uint8).reshape(40, 200, 4)
    ink = np.where((px[..., :3] < 128).any(axis=2).any(axis=0))[0]
    assert abs((ink.min() + ink.max()) / 2 - 100) <= 2


# -- charts -----------------------------------------------------------------

def test_pie_scope_shares():
    slices = layout_pie(_pie([("Scope1", 76.25), ("Scope2", 46.33), ("Scope3", 61.31)]))
    assert [s.fraction for s in slices] == pytest.approx([0.4146, 0.2519, 0.3334], abs=1e-3)
    assert [percent_label(s.fraction) for s in slices] == ["41%", "25%", "33%"]
    assert math.fsum(s.end_angle - s.start_angle for s in slices) == pytest.approx(2 * math.pi, abs=1e-9)
    assert slices[0].start_angle == -math.pi / 2
    assert all(a.end_angle == b.start_angle for a, b in zip(slices, slices[1:]))


def test_pie_single_and_equal():
    (only,) = layout_pie(_pie([("A", 5)]))
    assert only.end_angle - only.start_angle == 2 * math.pi and only.fraction == 1
    a, b = layout_pie(_pie([("a", 3), ("b", 3)]))
    assert a.end_angle - a.start_angle == math.pi and b.end_angle - b.start_angle == math.pi


@settings(max_examples=300)
@given(st.lists(st.sampled_from([0.0, 0.1, 0.2, 0.3, 1e-300, 7.0, 1e15]), min_size=2, max_size=30)
       .filter(lambda v: sum(v) > 0))
def test_pie_extents_never_negative(values):
    slices = layout_pie(_pie([(str(i), v) for i, v in enumerate(values + [0.0])]))
    assert all(s.end_angle >= s.start_angle for s in slices)
    assert slices[-1].end_angle - slices[-1].start_angle >= 0


def test_pie_zero_sum_is_error():
    with pytest.raises(ValueError):
        layout_pie(_pie([("a", 0)]))


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=12).filter(lambda v: sum(v) > 0), st.randoms())
def test_pie_color_permutation_keeps_geometry(values, rnd):
    data = [(f"d{i}", v) for i, v in enumerate(values)]
    colors = [RED, GREEN, BLUE]
    shuffled = colors[:]
    rnd.shuffle(shuffled)
    one, two = layout_pie(_pie(data, colors)), layout_pie(_pie(data, shuffled))
    assert [(s.start_angle, s.end_angle, s.fraction) for s in one] == \
           [(s.start_angle, s.end_angle, s.fraction) for s in two]


def test_donut_inner_radius_and_labels():
    assert inner_radius(_pie([("a", 1)], style=PieStyle.DONUT)) == 40
    assert inner_radius(_pie([("a", 1)])) == 0
    assert percent_label(0.125) == "13%" and percent_label(0.124) == "12%"


def test_donut_centre_is_background(catalog):
    src = ("bgsize: 200x200\nbgcolor: ffffff\nhead: off\nfoot: off\npiechart1:\n  position: 100x100\n"
           "  size: 80\n  type: donut\n  colors: ff0000\n  data:\n    a: 1\n")
    px = np.frombuffer(render(parse_model(src), AssetStore("/x"), catalog).pixels, np.uint8).reshape(200, 200, 4)
    assert tuple(px[100, 100]) == (255, 255, 255, 255)
    assert tuple(px[100, 100 + 60]) == (255, 0, 0, 255)
    assert tuple(px[100, 100 + 85]) == (255, 255, 255, 255)


def _bars(data, h=100, w=90):
    return BarChart("barchart1", Point(10, 10), Dimensions(w, h), (RED,), tuple(data))


def _heights(bars):
    return [b.rect.y1 - b.rect.y0 for b in bars]


def test_bar_heights():
    assert _heights(layout_bars(_bars([("a", 1), ("b", 2)]))) == [50, 100]
    assert _heights(layout_bars(_bars([("a", 4), ("b", 4), ("c", 4)]))) == [100] * 3
    assert _heights(layout_bars(_bars([("x", 3), ("y", 1), ("z", 2)], h=90))) == [90, 30, 60]


def test_bar_columns_tile_plot():
    bars = layout_bars(_bars([("a", 1), ("b", 1), ("c", 1)], w=90))
    assert [(b.rect.x0, b.rect.x1) for b in bars] == [(10, 28), (46, 64), (82, 100)]
    assert {b.rect.y1 for b in bars} == {110}


def test_bars_reject_empty_or_zero():
    with pytest.raises(ValueError):
        layout_bars(_bars([("a", 0)]))


@settings(max_examples=100)
@given(st.lists(st.floats(0.01, 1e4), min_size=1, max_size=10), st.integers(1, 500))
def test_bar_height_ratios(values, h):
    bars = layout_bars(_bars([(str(i), v) for i, v in enumerate(values)], h=h, w=500))
    top = max(values)
    for bar, v in zip(bars, values):
        assert abs((bar.rect.y1 - bar.rect.y0) - v / top * h) <= 0.5 + 1e-9


def _graph(total, value, columns=10, icon=(20, 20), spacing=0):
    return Picturegraph("pg", Point(30, 40), "icon.png", Dimensions(*icon), total, value, columns, spacing)


def test_picturegraph_fills():
    assert [s.fill for s in layout_picturegraph(_graph(10, 10))] == [1.0] * 10
    assert [s.fill for s in layout_picturegraph(_graph(10, 7.5, columns=5))] == [1] * 7 + [0.5, 0, 0]


def test_picturegraph_pitch():
    slots = layout_picturegraph(_graph(10, 3, columns=5, spacing=4))
    assert (slots[6].rect.x0, slots[6].rect.y0) == (30 + 24, 40 + 24)
    assert slots[6].rect.width == 20


def test_tint_keeps_alpha_mask():
    icon = np.zeros((2, 4, 4), np.uint8)
    icon[..., 3] = [[255, 0, 255, 128], [255, 255, 0, 255]]
    out = tint_icon(icon, 0.5, RED, BLUE)
    assert filled_columns(0.5, 4) == 2
    assert (out[:, :2, :3] == RED.rgba[:3]).all() and (out[:, 2:, :3] == BLUE.rgba[:3]).all()
    assert (out[..., 3] == icon[..., 3]).all()


# -- raster and png --------------------------------------------------------

def test_axis_aligned_square_coverage_is_exact():
    area, mask = coverage([[(2, 3), (7, 3), (7, 5), (2, 5)]])
    assert area == Rect(2, 3, 7, 5) and (mask == 255).all()
    area, mask = coverage([[(0, 0), (1.5, 0), (1.5, 1), (0, 1)]])
    assert list(mask[0]) == [255, 128]


def test_half_alpha_over_white():
    s = Surface(1, 1)
    s.fill_rect(s.bounds, Color(255, 255, 255))
    s.fill_rect(s.bounds, Color(0, 0, 0, 128))
    assert tuple(s.pixels[0, 0]) == (127, 127, 127, 255)


def test_arc_closes_circle():
    pts = arc_points(0, 0, 10, 0, 2 * math.pi)
    assert pts[0] == pytest.approx(pts[-1])
    assert all(math.hypot(x, y) == pytest.approx(10) for x, y in pts)


def test_png_signature_and_round_trip():
    white = RasterImage(1, 1, bytes([255, 255, 255, 255]))
    data = encode_png(white)
    assert data[:8] == SIGNATURE == bytes.fromhex("89504E470D0A1A0A")
    rng = np.random.default_rng(3)
    px = rng.integers(0, 256, (13, 17, 4), dtype=np.uint8)
    img = RasterImage(17, 13, px.tobytes())
    with Image.open(io.BytesIO(encode_png(img))) as back:
        assert back.mode == "RGBA" and back.size == (17, 13)
        assert back.tobytes() == img.pixels
    assert encode_png(img) == encode_png(img)


# -- whole documents ---------------------------------------------------------

def test_one_pixel_white(catalog, store):
    model = parse_model("bgcolor: ffffff\nbgsize: 1x1\nhead: off\nfoot: off")
    assert render(model, store, catalog).pixels == bytes([255, 255, 255, 255])


def test_cookcounty_box_corner(catalog, store, specimen_models):
    img = render(specimen_models["cookcounty"], store, catalog)
    assert (img.width, img.height) == (645, 834)
    assert img.pixel(5, 5) == (0x38, 0xBE, 0xAC, 255)


def test_homedepot_renders_identically_twice(catalog, tmp_path, specimen_models):
    model = specimen_models["homedepot"]
    first = render_png(model, AssetStore(tmp_path / "a"), catalog)
    second = render_png(model, AssetStore(tmp_path / "b"), catalog)
    assert hashlib.sha256(first).digest() == hashlib.sha256(second).digest()


def test_unbound_placeholder_is_render_error(catalog, store):
    src = ("bgsize: 50x50\nhead: off\nfoot: off\npiechart1:\n  position: 25x25\n  size: 10\n  colors: 0\n"
           "  data:\n    a: '{{x}}'\n")
    with pytest.raises(RenderError, match="unbound"):
        render(parse_model(src), store, catalog)


def test_fuzzed_geometry_stays_inside_canvas(catalog, store):
    logging.disable(logging.WARNING)
    try:
        rng = random.Random(99)
        for _ in range(60):
            surface = render_surface(fuzz_model(rng), store, catalog, guard=12)
            assert surface.guard_intact()
    finally:
        logging.disable(logging.NOTSET)


def test_guard_detects_stray_write():
    s = Surface(4, 4, guard=2)
    assert s.guard_intact()
    s._buf[0, 0, 0] = 0
    assert not s.guard_intact()

