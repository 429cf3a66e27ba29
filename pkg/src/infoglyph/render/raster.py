"""Coverage rasterization and compositing on an RGBA canvas.

Shapes are lists of closed contours in pixel coordinates (y down) filled
with the nonzero winding rule. Coverage is estimated on a fixed 4x4 grid of
sample points per pixel, giving alpha in steps of 255/16; there is no
hinting and no dependence on anything but the input geometry.

Compositing is integer source-over::

    out = (src * a + dst * (255 - a) + 127) // 255

with ``a`` the source alpha already multiplied by coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import Color

SS = 4  # samples per pixel along each axis
MAX_ARC_STEPS = 4096  # per arc; only radii above ~1300 px hit it

Contour = list[tuple[float, float]]


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def empty(self) -> bool:
        return self.x1 <= self.x0 or self.y1 <= self.y0

    @property
    def width(self) -> int:
        return max(0, self.x1 - self.x0)

    @property
    def height(self) -> int:
        return max(0, self.y1 - self.y0)

    def intersect(self, other: "Rect") -> "Rect":
        return Rect(max(self.x0, other.x0), max(self.y0, other.y0), min(self.x1, other.x1), min(self.y1, other.y1))


def contour_bounds(contours: list[Contour]) -> Rect:
    xs = [x for c in contours for x, _ in c]
    ys = [y for c in contours for _, y in c]
    if not xs:
        return Rect(0, 0, 0, 0)
    return Rect(math.floor(min(xs)), math.floor(min(ys)), math.ceil(max(xs)), math.ceil(max(ys)))


def coverage(contours: list[Contour], clip: Rect | None = None) -> tuple[Rect, np.ndarray]:
    """Alpha coverage (uint8, 0..255) of the contours over their bounds ∩ ``clip``.

    Returns the rectangle the mask covers and the mask itself. Parts of the
    shape outside ``clip`` are never sampled, so cost tracks the visible area.
    """
    area = contour_bounds(contours)
    if clip is not None:
        area = area.intersect(clip)
    if area.empty:
        return area, np.zeros((0, 0), dtype=np.uint8)
    edges = []
    for c in contours:
        if len(c) < 2:
            continue
        pts = np.asarray(c, dtype=np.float64)
        nxt = np.roll(pts, -1, axis=0)
        edges.append(np.hstack([pts, nxt]))
    if not edges:
        return area, np.zeros((area.height, area.width), dtype=np.uint8)
    e = np.vstack(edges)
    x0, y0, x1, y1 = e[:, 0], e[:, 1], e[:, 2], e[:, 3]
    horizontal = y0 == y1
    x0, y0, x1, y1 = x0[~horizontal], y0[~horizontal], x1[~horizontal], y1[~horizontal]
    direction = np.where(y1 > y0, 1, -1).astype(np.int32)
    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)

    h_s = area.height * SS
    w_s = area.width * SS
    # Sample row k (relative to area) has centre y = area.y0 + (k + 0.5) / SS.
    # An edge covers rows whose centre lies in [ylo, yhi).
    k0 = np.ceil((ylo - area.y0) * SS - 0.5).astype(np.int64)
    k1 = np.ceil((yhi - area.y0) * SS - 0.5).astype(np.int64)
    k0 = np.clip(k0, 0, h_s)
    k1 = np.clip(k1, 0, h_s)
    counts = k1 - k0
    keep = counts > 0
    if not keep.any():
        return area, np.zeros((area.height, area.width), dtype=np.uint8)
    x0, y0, x1, y1, direction, k0, counts = (a[keep] for a in (x0, y0, x1, y1, direction, k0, counts))
    idx = np.repeat(np.arange(len(k0)), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    rows = k0[idx] + (np.arange(idx.size) - starts)
    yc = area.y0 + (rows + 0.5) / SS
    t = (yc - y0[idx]) / (y1[idx] - y0[idx])
    xc = x0[idx] + t * (x1[idx] - x0[idx])
    # Sample column i has centre x = area.x0 + (i + 0.5) / SS; it lies right of
    # the crossing iff i >= ceil((xc - area.x0) * SS - 0.5).
    cols = np.ceil((xc - area.x0) * SS - 0.5)
    cols = np.clip(cols, 0, w_s).astype(np.int64)
    flat = rows * (w_s + 1) + cols
    acc = np.bincount(flat, weights=direction[idx], minlength=h_s * (w_s + 1))
    acc = acc.astype(np.int32).reshape(h_s, w_s + 1)
    inside = np.cumsum(acc[:, :w_s], axis=1) != 0
    hits = inside.reshape(area.height, SS, area.width, SS).sum(axis=(1, 3), dtype=np.int32)
    alpha = (hits * 255 + (SS * SS) // 2) // (SS * SS)
    return area, alpha.astype(np.uint8)


def arc_points(cx: float, cy: float, r: float, start: float, end: float) -> Contour:
    """Points along a circular arc, angles in radians, clockwise on screen for end > start."""
    sweep = abs(end - start)
    steps = max(2, math.ceil(sweep * max(r, 1.0) / 2.0), math.ceil(sweep / (math.pi / 90)))
    steps = min(steps, MAX_ARC_STEPS)
    return [(cx + r * math.cos(start + (end - start) * i / steps), cy + r * math.sin(start + (end - start) * i / steps))
            for i in range(steps + 1)]


class Surface:
    """An RGBA canvas with an optional guard band of ``guard`` pixels on every side.

    Drawing is clipped to the canvas; the guard band exists only so tests can
    prove that nothing is ever written outside it.
    """

    GUARD_FILL = np.array([0xDE, 0xAD, 0xBE, 0xEF], dtype=np.uint8)

    def __init__(self, width: int, height: int, guard: int = 0):
        self.width = width
        self.height = height
        self.guard = guard
        self._buf = np.empty((height + 2 * guard, width + 2 * guard, 4), dtype=np.uint8)
        self._buf[:] = self.GUARD_FILL
        self.pixels = self._buf[guard:guard + height, guard:guard + width]
        self.pixels[:] = 0
        self.bounds = Rect(0, 0, width, height)

    def guard_intact(self) -> bool:
        g = self.guard
        if g == 0:
            return True
        mask = np.ones(self._buf.shape[:2], dtype=bool)
        mask[g:g + self.height, g:g + self.width] = False
        return bool((self._buf[mask] == self.GUARD_FILL).all())

    def _composite(self, rect: Rect, rgb: np.ndarray, alpha: np.ndarray) -> None:
        """Source-over ``rgb`` (h, w, 3 or 3,) with per-pixel ``alpha`` (h, w) into ``rect``."""
        dst = self.pixels[rect.y0:rect.y1, rect.x0:rect.x1]
        a = alpha.astype(np.int32)[..., None]
        src = np.asarray(rgb, dtype=np.int32)
        d = dst.astype(np.int32)
        out_rgb = (src * a + d[..., :3] * (255 - a) + 127) // 255
        out_a = (a[..., 0] * 255 + d[..., 3] * (255 - a[..., 0]) + 127) // 255
        dst[..., :3] = out_rgb
        dst[..., 3] = out_a

    def fill_rect(self, rect: Rect, color: Color) -> None:
        r = rect.intersect(self.bounds)
        if r.empty or color.a == 0:
            return
        if color.a == 255:
            self.pixels[r.y0:r.y1, r.x0:r.x1] = color.rgba
            return
        self._composite(r, np.array(color.rgba[:3]), np.full((r.height, r.width), color.a, dtype=np.int32))

    def fill_mask(self, x: int, y: int, mask: np.ndarray, color: Color) -> None:
        """Paint ``color`` through an alpha ``mask`` whose top-left lands at (x, y)."""
        h, w = mask.shape
        r = Rect(x, y, x + w, y + h).intersect(self.bounds)
        if r.empty or color.a == 0:
            return
        m = mask[r.y0 - y:r.y1 - y, r.x0 - x:r.x1 - x].astype(np.int32)
        if color.a != 255:
            m = (m * color.a + 127) // 255
        self._composite(r, np.array(color.rgba[:3]), m)

    def fill_contours(self, contours: list[Contour], color: Color) -> None:
        area, mask = coverage(contours, self.bounds)
        if not area.empty:
            self.fill_mask(area.x0, area.y0, mask, color)

    def blit(self, x: int, y: int, rgba: np.ndarray) -> None:
        """Source-over an (h, w, 4) uint8 image with its top-left at (x, y)."""
        h, w = rgba.shape[:2]
        r = Rect(x, y, x + w, y + h).intersect(self.bounds)
        if r.empty:
            return
        src = rgba[r.y0 - y:r.y1 - y, r.x0 - x:r.x1 - x]
        self._composite(r, src[..., :3], src[..., 3])
