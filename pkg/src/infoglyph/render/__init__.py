"""Deterministic rasterization of a bound model.

Paint order: canvas background, head section, body elements in source
order, foot section. Within a section: its background, title, subtitle,
text, then its child elements. Everything is clipped to the canvas.
"""

from __future__ import annotations

import numpy as np

from ..assets import AssetStore, Policy, prefetch, scale_bilinear, to_array
from ..model import (Background, BackgroundKind, BarChart, Box, ImageElement, InfographicModel, PieChart,
                     Picturegraph, RasterImage, Section, TextElement)
from .charts import (Bar, ChartError, IconSlot, Slice, draw_bars, draw_picturegraph, draw_pie, layout_bars,
                     layout_picturegraph, layout_pie, percent_label)
from .fonts import FontCatalog
from .png import encode_png
from .raster import Rect, Surface
from .text import LineBox, Position, default_lineheight, draw_text, place_text, wrap_text

__all__ = [
    "Bar", "ChartError", "FontCatalog", "IconSlot", "LineBox", "Position", "Rect", "RenderError", "Slice",
    "Surface", "default_lineheight", "encode_png", "layout_bars", "layout_picturegraph", "layout_pie",
    "percent_label", "place_text", "render", "render_png", "render_surface", "wrap_text",
]


class RenderError(ValueError):
    """The model cannot be drawn as given (for example, unbound chart data)."""


class _Painter:
    def __init__(self, surface: Surface, images: dict[str, RasterImage], fonts: FontCatalog):
        self.s = surface
        self.images = images
        self.fonts = fonts
        self._arrays: dict[str, np.ndarray] = {}

    def image(self, url: str) -> np.ndarray:
        if url not in self._arrays:
            self._arrays[url] = to_array(self.images[url])
        return self._arrays[url]

    def stretch(self, url: str, rect: Rect) -> None:
        vis = rect.intersect(self.s.bounds)
        if vis.empty:
            return
        region = (vis.x0 - rect.x0, vis.y0 - rect.y0, vis.x1 - rect.x0, vis.y1 - rect.y0)
        self.s.blit(vis.x0, vis.y0, scale_bilinear(self.image(url), rect.width, rect.height, region))

    def tile(self, url: str, rect: Rect) -> None:
        vis = rect.intersect(self.s.bounds)
        if vis.empty:
            return
        src = self.image(url)
        th, tw = src.shape[:2]
        rows = (np.arange(vis.y0, vis.y1) - rect.y0) % th
        cols = (np.arange(vis.x0, vis.x1) - rect.x0) % tw
        self.s.blit(vis.x0, vis.y0, src[rows][:, cols])

    def background(self, bg: Background | None, rect: Rect) -> None:
        if bg is None or rect.empty:
            return
        if bg.kind is BackgroundKind.COLOR:
            self.s.fill_rect(rect, bg.color)
        elif bg.kind is BackgroundKind.IMAGE:
            self.stretch(bg.source, rect)
        else:
            self.tile(bg.source, rect)

    def element(self, el) -> None:
        if isinstance(el, Box):
            p = el.position
            self.background(el.background, Rect(p.x, p.y, p.x + el.size.width, p.y + el.size.height))
        elif isinstance(el, ImageElement):
            p = el.position
            self.stretch(el.source, Rect(p.x, p.y, p.x + el.size.width, p.y + el.size.height))
        elif isinstance(el, TextElement):
            draw_text(self.s, el, self.fonts)
        elif isinstance(el, PieChart):
            draw_pie(self.s, el, self.fonts)
        elif isinstance(el, BarChart):
            draw_bars(self.s, el, self.fonts)
        elif isinstance(el, Picturegraph):
            draw_picturegraph(self.s, el, self.image(el.icon_source))

    def section(self, section: Section | None) -> None:
        if section is None:
            return
        x = section.position.x if section.position else 0
        y = section.position.y if section.position else 0
        w = section.size.width if section.size else self.s.width - x
        h = section.size.height if section.size else self.s.height - y
        self.background(section.background, Rect(x, y, x + w, y + h))
        for t in section.texts():
            self.element(t)
        for child in section.children:
            self.element(child)


def render_surface(model: InfographicModel, store: AssetStore, fonts: FontCatalog,
                   policy: Policy = Policy.OFFLINE, guard: int = 0) -> Surface:
    """Render into a fresh :class:`Surface` (optionally with a guard band)."""
    images = prefetch(model, store, policy)
    surface = Surface(model.canvas.width, model.canvas.height, guard)
    painter = _Painter(surface, images, fonts)
    try:
        painter.background(model.background, surface.bounds)
        painter.section(model.head)
        for el in model.body:
            painter.element(el)
        painter.section(model.foot)
    except ChartError as e:
        raise RenderError(str(e)) from None
    return surface


def render(model: InfographicModel, store: AssetStore, fonts: FontCatalog,
           policy: Policy = Policy.OFFLINE) -> RasterImage:
    surface = render_surface(model, store, fonts, policy)
    return RasterImage(surface.width, surface.height, surface.pixels.tobytes())


def render_png(model: InfographicModel, store: AssetStore, fonts: FontCatalog,
               policy: Policy = Policy.OFFLINE) -> bytes:
    return encode_png(render(model, store, fonts, policy))
