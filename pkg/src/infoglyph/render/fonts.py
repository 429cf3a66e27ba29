"""Font catalog, text measurement and glyph rasterization.

A catalog maps family names to font files through ``fonts.tsv`` alias
tables (``family<TAB>file``, a ``family bold`` row for the bold face).
Families the catalog does not know fall back to the bundled DejaVu Sans.

Metrics are unhinted and kerning is not applied. The pen advances in font
units; each glyph origin and the total line advance are rounded half up to
whole pixels, so measurement and drawing agree exactly.
"""

from __future__ import annotations

import logging
import math
import threading
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fontTools.pens.basePen import BasePen
from fontTools.ttLib import TTFont

from ..model import FontSpec
from .raster import Contour, coverage

log = logging.getLogger(__name__)

BUNDLED_DIR = Path(__file__).resolve().parent.parent / "fonts"
ALIAS_FILE = "fonts.tsv"
CURVE_STEPS = 8  # line segments per Bézier piece
MAX_CACHED_SIZE = 256  # larger glyphs are rasterized clipped, straight onto the canvas


def _round(x: float) -> int:
    return math.floor(x + 0.5)


class _FlattenPen(BasePen):
    """Collects glyph outlines as polygons, scaled to pixels with y pointing down."""

    def __init__(self, glyph_set, scale: float):
        super().__init__(glyph_set)
        self.scale = scale
        self.contours: list[Contour] = []
        self._cur: Contour = []

    def _pt(self, p) -> tuple[float, float]:
        return (p[0] * self.scale, -p[1] * self.scale)

    def _moveTo(self, p):
        self._flush()
        self._cur = [self._pt(p)]
        self._last = p

    def _lineTo(self, p):
        self._cur.append(self._pt(p))
        self._last = p

    def _curveToOne(self, p1, p2, p3):
        p0 = self._last
        for i in range(1, CURVE_STEPS + 1):
            t = i / CURVE_STEPS
            u = 1 - t
            x = u * u * u * p0[0] + 3 * u * u * t * p1[0] + 3 * u * t * t * p2[0] + t * t * t * p3[0]
            y = u * u * u * p0[1] + 3 * u * u * t * p1[1] + 3 * u * t * t * p2[1] + t * t * t * p3[1]
            self._cur.append(self._pt((x, y)))
        self._last = p3

    def _qCurveToOne(self, p1, p2):
        p0 = self._last
        for i in range(1, CURVE_STEPS + 1):
            t = i / CURVE_STEPS
            u = 1 - t
            x = u * u * p0[0] + 2 * u * t * p1[0] + t * t * p2[0]
            y = u * u * p0[1] + 2 * u * t * p1[1] + t * t * p2[1]
            self._cur.append(self._pt((x, y)))
        self._last = p2

    def _closePath(self):
        self._flush()

    def _endPath(self):
        self._flush()

    def _flush(self):
        if len(self._cur) > 2:
            self.contours.append(self._cur)
        self._cur = []


@dataclass(frozen=True)
class GlyphBitmap:
    """Coverage mask of one glyph; (left, top) is its offset from the pen origin on the baseline."""

    left: int
    top: int
    mask: np.ndarray


class Face:
    """One font file, loaded lazily, with a per-size glyph bitmap cache."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._font = TTFont(str(self.path), lazy=True)
        self._cmap = self._font.getBestCmap() or {}
        self._glyphs = self._font.getGlyphSet()
        self._hmtx = self._font["hmtx"]
        self.units_per_em = self._font["head"].unitsPerEm
        self._bitmaps: dict[tuple[str, int], GlyphBitmap] = {}
        self._lock = threading.Lock()

    def glyph_name(self, char: str) -> str | None:
        return self._cmap.get(ord(char))

    def advance_units(self, glyph: str) -> int:
        return self._hmtx[glyph][0]

    def contours(self, glyph: str, size: int) -> list[Contour]:
        """Outline in pixels relative to the pen origin on the baseline, y down."""
        with self._lock:
            pen = _FlattenPen(self._glyphs, size / self.units_per_em)
            self._glyphs[glyph].draw(pen)
        return pen.contours

    def bitmap(self, glyph: str, size: int) -> GlyphBitmap:
        key = (glyph, size)
        with self._lock:
            hit = self._bitmaps.get(key)
        if hit is not None:
            return hit
        area, mask = coverage(self.contours(glyph, size))
        bmp = GlyphBitmap(area.x0, area.y0, mask)
        with self._lock:
            self._bitmaps[key] = bmp
        return bmp


@dataclass(frozen=True)
class PlacedGlyph:
    face: Face
    glyph: str
    x: int  # pen origin, pixels from the line start


class FontCatalog:
    """Family-name resolution over alias tables, with a bundled fallback face."""

    def __init__(self, directories: list[str | Path] = ()):
        self.aliases: dict[str, Path] = {}
        for d in list(directories) + [BUNDLED_DIR]:
            self._load_aliases(Path(d))
        self._faces: dict[Path, Face] = {}
        self._lock = threading.Lock()
        self.fallback_regular = BUNDLED_DIR / "DejaVuSans.ttf"
        self.fallback_bold = BUNDLED_DIR / "DejaVuSans-Bold.ttf"
        self._warned: set[str] = set()

    def _load_aliases(self, directory: Path) -> None:
        table = directory / ALIAS_FILE
        if not table.is_file():
            return
        for line in table.read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            family, sep, file = line.partition("\t")
            if not sep:
                continue
            key = family.strip().lower()
            path = (directory / file.strip()).resolve()
            if key not in self.aliases and path.is_file():  # earlier directories win
                self.aliases[key] = path

    def face(self, path: Path) -> Face:
        with self._lock:
            f = self._faces.get(path)
            if f is None:
                f = self._faces[path] = Face(path)
            return f

    def resolve(self, font: FontSpec) -> Face:
        family = font.family.strip().lower()
        path = None
        if font.is_bold:
            path = self.aliases.get(f"{family} bold")
        if path is None:
            path = self.aliases.get(family)
        if path is None:
            path = self.fallback_bold if font.is_bold else self.fallback_regular
        return self.face(path)

    def _fallback_face(self, font: FontSpec) -> Face:
        return self.face(self.fallback_bold if font.is_bold else self.fallback_regular)

    def shape(self, text: str, font: FontSpec) -> tuple[list[PlacedGlyph], int]:
        """Glyphs with integer pen positions, and the line's total advance."""
        primary = self.resolve(font)
        placed: list[PlacedGlyph] = []
        pen = 0.0  # pixels, unrounded
        for ch in text:
            if ch == "\t":
                ch = " "
            elif unicodedata.category(ch) in ("Cc", "Cf"):
                continue
            face = primary
            glyph = face.glyph_name(ch)
            if glyph is None:
                face = self._fallback_face(font)
                glyph = face.glyph_name(ch)
            if glyph is None:
                glyph = ".notdef"
                if ch not in self._warned:
                    self._warned.add(ch)
                    log.warning("no glyph for U+%04X in %s or the fallback font; drawing a replacement", ord(ch),
                                font.family)
            placed.append(PlacedGlyph(face, glyph, _round(pen)))
            pen += face.advance_units(glyph) * font.size / face.units_per_em
        return placed, _round(pen)

    def measure(self, text: str, font: FontSpec) -> int:
        """Advance width of ``text`` in whole pixels."""
        return self.shape(text, font)[1]
