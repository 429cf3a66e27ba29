"""Line breaking and placement of text elements.

``wrap_text`` yields lines whose baselines are relative to the element's
anchor (the first baseline sits at y = 0); ``place_text`` moves them to the
element's position and applies alignment.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from ..model import Align, FontSpec, Point, TextElement
from .fonts import MAX_CACHED_SIZE, FontCatalog
from .raster import Surface

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Position:
    """Like :class:`Point` but unchecked: placed text may start left of or above the canvas."""

    x: int
    y: int


@dataclass(frozen=True)
class LineBox:
    text: str
    baseline: Point | Position
    advance: int


def default_lineheight(font: FontSpec) -> int:
    return (font.size * 6 + 2) // 5  # 1.2 x size, rounded half up


def _paragraphs(value: str) -> list[str]:
    return value.replace("\r\n", "\n").split("\n")


def greedy_lines(words: list[str], fits) -> list[list[str]]:
    """First-fit grouping of ``words``: each line takes words while ``fits(candidate)`` holds.

    A word that does not fit on an empty line gets a line to itself.
    """
    lines: list[list[str]] = []
    current: list[str] = []
    for word in words:
        if current and fits(" ".join(current + [word])):
            current.append(word)
        elif current:
            lines.append(current)
            current = [word]
        else:
            current = [word]
    if current:
        lines.append(current)
    return lines


def wrap_text(value: str, font: FontSpec, maxwidth: int | None, catalog: FontCatalog,
              lineheight: int | None = None) -> list[LineBox]:
    """Break ``value`` into lines no wider than ``maxwidth`` pixels.

    Explicit newlines always break. Without ``maxwidth`` nothing else does.
    With it, words (runs of non-whitespace) are packed greedily and joined
    by single spaces. A word wider than ``maxwidth`` on its own is kept
    whole on its own line, with a warning.
    """
    if maxwidth is not None and maxwidth < 1:
        raise ValueError("maxwidth must be >= 1")
    step = lineheight or default_lineheight(font)
    texts: list[str] = []
    for para in _paragraphs(value):
        if maxwidth is None:
            texts.append(para)
            continue
        words = para.split()
        if not words:
            texts.append("")
            continue
        for group in greedy_lines(words, lambda s: catalog.measure(s, font) <= maxwidth):
            line = " ".join(group)
            if len(group) == 1 and catalog.measure(line, font) > maxwidth:
                log.warning("word %r is wider than maxwidth %d; it overflows its line", line, maxwidth)
            texts.append(line)
    return [LineBox(t, Point(0, i * step), catalog.measure(t, font)) for i, t in enumerate(texts)]


def place_text(element: TextElement, lines: list[LineBox]) -> list[LineBox]:
    """Anchor lines at the element position: first baseline at position.y.

    Left alignment puts each line's left edge at position.x; centre
    alignment puts each line's midpoint there (left edge x - advance // 2).
    Placed baselines are :class:`Position` since they may be negative.
    """
    x, y = element.position.x, element.position.y
    out = []
    for line in lines:
        left = x - line.advance // 2 if element.align is Align.CENTER else x
        out.append(replace(line, baseline=Position(left, y + line.baseline.y)))
    return out


def layout_element(element: TextElement, catalog: FontCatalog) -> list[LineBox]:
    lines = wrap_text(element.value, element.font, element.maxwidth, catalog, element.lineheight)
    return place_text(element, lines)


def draw_line(surface: Surface, catalog: FontCatalog, text: str, font: FontSpec, x: int, y: int, color) -> None:
    """Draw one line with its pen starting at (x, baseline y)."""
    glyphs, _ = catalog.shape(text, font)
    for g in glyphs:
        ox = x + g.x
        if font.size > MAX_CACHED_SIZE:
            outline = g.face.contours(g.glyph, font.size)
            surface.fill_contours([[(ox + px, y + py) for px, py in c] for c in outline], color)
            continue
        bmp = g.face.bitmap(g.glyph, font.size)
        if bmp.mask.size:
            surface.fill_mask(ox + bmp.left, y + bmp.top, bmp.mask, color)


def draw_text(surface: Surface, element: TextElement, catalog: FontCatalog) -> list[LineBox]:
    placed = layout_element(element, catalog)
    for line in placed:
        if line.text:
            draw_line(surface, catalog, line.text, element.font, line.baseline.x, line.baseline.y, element.color)
    return placed
