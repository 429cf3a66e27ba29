"""Geometry and drawing for pie/donut charts, bar charts and picturegraphs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..assets import scale_bilinear
from ..model import BLACK, WHITE, BarChart, Color, FontSpec, PieChart, PieStyle, Picturegraph
from .fonts import FontCatalog
from .raster import Rect, Surface, arc_points
from .text import draw_line

START_ANGLE = -math.pi / 2  # 12 o'clock; angles grow clockwise on screen (y down)
LABEL_FAMILY = "sans-serif"


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class Slice:
    start_angle: float
    end_angle: float
    color: Color
    label: str
    fraction: float

    @property
    def mid_angle(self) -> float:
        return (self.start_angle + self.end_angle) / 2


def _numbers(data) -> list[float]:
    values = []
    for label, v in data:
        if isinstance(v, str):
            raise ChartError(f"datum {label!r} is unbound ({v}); bind the model first")
        values.append(float(v))
    return values


def layout_pie(chart: PieChart) -> list[Slice]:
    """Slices in data order, clockwise from 12 o'clock.

    The last slice ends exactly at START_ANGLE + 2π, so extents always sum to
    a full turn. Zero-valued data yield zero-width slices.
    """
    values = _numbers(chart.data)
    total = math.fsum(values)
    if total <= 0:
        raise ChartError(f"{chart.id}: pie data sum to zero")
    slices = []
    start = START_ANGLE
    for i, ((label, _), v) in enumerate(zip(chart.data, values)):
        if i == len(values) - 1:
            end = START_ANGLE + 2 * math.pi
        else:
            # correctly rounded prefix sums are monotone and never exceed the total
            end = max(start, START_ANGLE + 2 * math.pi * (math.fsum(values[:i + 1]) / total))
        slices.append(Slice(start, end, chart.color_for(i), label, v / total))
        start = end
    return slices


def percent_label(fraction: float) -> str:
    """Share as an integer percent, rounded half up."""
    return f"{math.floor(fraction * 100 + 0.5)}%"


def inner_radius(chart: PieChart) -> float:
    return chart.radius / 2 if chart.style is PieStyle.DONUT else 0.0


def slice_contours(cx: float, cy: float, r_out: float, r_in: float, s: Slice) -> list[list[tuple[float, float]]]:
    extent = s.end_angle - s.start_angle
    if extent <= 0:
        return []
    if extent >= 2 * math.pi - 1e-12:
        outer = arc_points(cx, cy, r_out, s.start_angle, s.end_angle)[:-1]
        if r_in <= 0:
            return [outer]
        inner = arc_points(cx, cy, r_in, s.end_angle, s.start_angle)[:-1]  # reversed: a hole
        return [outer, inner]
    outer = arc_points(cx, cy, r_out, s.start_angle, s.end_angle)
    if r_in <= 0:
        return [[(cx, cy)] + outer]
    return [outer + arc_points(cx, cy, r_in, s.end_angle, s.start_angle)]


def label_font(size: int, bold: bool = False) -> FontSpec:
    return FontSpec(max(1, size), LABEL_FAMILY, "bold" if bold else "normal")


def draw_pie(surface: Surface, chart: PieChart, catalog: FontCatalog) -> list[Slice]:
    slices = layout_pie(chart)
    cx, cy = chart.position.x, chart.position.y
    r = chart.radius
    if chart.background is not None:
        surface.fill_contours([arc_points(cx, cy, r + chart.padding, 0, 2 * math.pi)[:-1]], chart.background)
    r_in = inner_radius(chart)
    for s in slices:
        contours = slice_contours(cx, cy, r, r_in, s)
        if contours:
            surface.fill_contours(contours, s.color)
    if chart.show_percentage:
        font = label_font(max(10, r // 6), bold=True)
        for s in slices:
            if s.fraction <= 0:
                continue
            text = percent_label(s.fraction)
            lx = cx + 0.75 * r * math.cos(s.mid_angle)
            ly = cy + 0.75 * r * math.sin(s.mid_angle)
            adv = catalog.measure(text, font)
            # Centre the label box (advance x cap height ~ 0.7 size) on the point.
            draw_line(surface, catalog, text, font, math.floor(lx - adv / 2 + 0.5),
                      math.floor(ly + 0.35 * font.size + 0.5), WHITE)
    outer = r + chart.padding
    if chart.show_title and chart.title:
        font = label_font(max(12, r // 5), bold=True)
        adv = catalog.measure(chart.title, font)
        draw_line(surface, catalog, chart.title, font, cx - adv // 2, cy - outer - font.size // 2, BLACK)
    if chart.show_legend:
        font = label_font(max(10, r // 7))
        step = font.size + 6
        x = cx + outer + 16
        y = cy - (len(slices) * step) // 2
        for i, s in enumerate(slices):
            top = y + i * step
            surface.fill_rect(Rect(x, top, x + font.size, top + font.size), s.color)
            draw_line(surface, catalog, f"{s.label} ({percent_label(s.fraction)})", font,
                      x + font.size + 6, top + font.size - font.size // 6, BLACK)
    return slices


@dataclass(frozen=True)
class Bar:
    rect: Rect
    color: Color
    label: str


def layout_bars(chart: BarChart) -> list[Bar]:
    """Vertical bars, bottom-aligned, width W/(2n-1) with equal gaps.

    Bar i spans x from floor(2i * w) to floor((2i + 1) * w) where
    w = plot width / (2n - 1), so bars tile the plot exactly and the last
    bar ends on the right edge.
    """
    values = _numbers(chart.data)
    if not values:
        raise ChartError(f"{chart.id}: no data")
    top = max(values)
    if top <= 0:
        raise ChartError(f"{chart.id}: bar data are all zero")
    n = len(values)
    px, py = chart.position.x, chart.position.y
    W, H = chart.size.width, chart.size.height
    bottom = py + H
    bars = []
    for i, ((label, _), v) in enumerate(zip(chart.data, values)):
        x0 = px + (2 * i * W) // (2 * n - 1)
        x1 = px + ((2 * i + 1) * W) // (2 * n - 1)
        h = math.floor(v / top * H + 0.5)
        bars.append(Bar(Rect(x0, bottom - h, x1, bottom), chart.color_for(i), label))
    return bars


def format_value(v: float) -> str:
    text = f"{v:.6f}".rstrip("0").rstrip(".")
    return text if text != "-0" else "0"


def draw_bars(surface: Surface, chart: BarChart, catalog: FontCatalog) -> list[Bar]:
    bars = layout_bars(chart)
    if chart.background is not None:
        p = chart.position
        surface.fill_rect(Rect(p.x, p.y, p.x + chart.size.width, p.y + chart.size.height), chart.background)
    font = label_font(12)
    bottom = chart.position.y + chart.size.height
    for bar, (_, v) in zip(bars, chart.data):
        surface.fill_rect(bar.rect, bar.color)
        mid = (bar.rect.x0 + bar.rect.x1) // 2
        adv = catalog.measure(bar.label, font)
        draw_line(surface, catalog, bar.label, font, mid - adv // 2, bottom + font.size + 4, BLACK)
        if chart.show_values:
            text = format_value(float(v))
            adv = catalog.measure(text, font)
            draw_line(surface, catalog, text, font, mid - adv // 2, bar.rect.y0 - 4, BLACK)
    return bars


@dataclass(frozen=True)
class IconSlot:
    rect: Rect
    fill: float


def layout_picturegraph(pg: Picturegraph) -> list[IconSlot]:
    """``total`` slots row-major, ``columns`` per row, pitch icon size + spacing."""
    if isinstance(pg.value, str):
        raise ChartError(f"{pg.id}: value is unbound ({pg.value}); bind the model first")
    w, h = pg.icon_size.width, pg.icon_size.height
    slots = []
    for i in range(pg.total):
        row, col = divmod(i, pg.columns)
        x = pg.position.x + col * (w + pg.spacing)
        y = pg.position.y + row * (h + pg.spacing)
        slots.append(IconSlot(Rect(x, y, x + w, y + h), min(1.0, max(0.0, pg.value - i))))
    return slots


def filled_columns(fill: float, width: int) -> int:
    """Icon columns tinted with the fill colour, rounded half up."""
    return math.floor(fill * width + 0.5)


def tint_icon(icon: np.ndarray, fill: float, fill_color: Color, empty_color: Color,
              x_offset: int = 0, full_width: int | None = None) -> np.ndarray:
    """Recolour an icon: alpha kept as the mask, left part fill colour, rest empty colour.

    ``icon`` may be a window starting ``x_offset`` columns into an icon that
    is ``full_width`` wide; the fill boundary is computed on the full icon.
    """
    w = icon.shape[1]
    k = filled_columns(fill, full_width if full_width is not None else w) - x_offset
    k = min(max(k, 0), w)
    out = np.empty_like(icon)
    out[:, :k, :3] = fill_color.rgba[:3]
    out[:, k:, :3] = empty_color.rgba[:3]
    a = icon[..., 3].astype(np.int32)
    out[:, :k, 3] = (a[:, :k] * fill_color.a + 127) // 255
    out[:, k:, 3] = (a[:, k:] * empty_color.a + 127) // 255
    return out


def draw_picturegraph(surface: Surface, pg: Picturegraph, icon: np.ndarray) -> list[IconSlot]:
    slots = layout_picturegraph(pg)
    w, h = pg.icon_size.width, pg.icon_size.height
    for s in slots:
        vis = s.rect.intersect(surface.bounds)
        if vis.empty:
            continue
        region = (vis.x0 - s.rect.x0, vis.y0 - s.rect.y0, vis.x1 - s.rect.x0, vis.y1 - s.rect.y0)
        part = scale_bilinear(icon, w, h, region)
        surface.blit(vis.x0, vis.y0, tint_icon(part, s.fill, pg.fill_color, pg.empty_color, region[0], w))
    return slots
