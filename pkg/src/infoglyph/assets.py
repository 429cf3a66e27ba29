"""Fetching, caching and decoding of the images a model refers to.

The cache is a flat directory: ``<root>/<cache_key>.<ext>`` holds the raw
bytes exactly as downloaded and ``<root>/manifest.tsv`` lists one
``url<TAB>file`` line per entry. Keys depend only on the URL string, so a
warm cache makes rendering independent of the network.
"""

from __future__ import annotations

import hashlib
import io
import logging
import threading
import urllib.error
import urllib.parse
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
from PIL import Image, UnidentifiedImageError

from .model import (BackgroundKind, Box, Dimensions, ImageElement, InfographicModel, Picturegraph,
                    RasterImage, Section)

log = logging.getLogger(__name__)

MANIFEST = "manifest.tsv"
HTTP_TIMEOUT = 30.0


class AssetError(Exception):
    """An asset could not be obtained or decoded."""

    def __init__(self, url: str, reason: str):
        super().__init__(f"{url}: {reason}")
        self.url = url
        self.reason = reason


class Policy(str, Enum):
    OFFLINE = "offline"
    ONLINE = "online"


def cache_key(url: str) -> str:
    """Hex SHA-256 of the URL's UTF-8 bytes."""
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


def _sniff(data: bytes) -> str | None:
    if data.startswith(b"\x89PNG\r\n\x1a\n"):
        return "png"
    if data.startswith(b"\xff\xd8\xff"):
        return "jpg"
    return None


def decode(data: bytes, url: str = "<bytes>") -> RasterImage:
    """Decode PNG or JPEG bytes to RGBA. Multi-frame inputs yield frame 0."""
    if _sniff(data) is None:
        raise AssetError(url, "unsupported format (expected PNG or JPEG)")
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.seek(0)
            rgba = im.convert("RGBA")
            return RasterImage(rgba.width, rgba.height, rgba.tobytes())
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise AssetError(url, f"cannot decode image: {e}") from None


def _local_path(url: str) -> Path | None:
    """Filesystem path for ``file:`` URLs and bare paths; None for remote URLs."""
    parts = urllib.parse.urlsplit(url)
    if parts.scheme == "file":
        if parts.netloc in ("", "localhost"):
            path = parts.path
        else:
            path = f"//{parts.netloc}{parts.path}"
        return Path(urllib.request.url2pathname(path)) if path.startswith("/") else Path(urllib.parse.unquote(path))
    if parts.scheme in ("http", "https"):
        return None
    if len(parts.scheme) > 1:  # some other scheme; a one-letter scheme is a drive letter
        return None
    return Path(url)


def _http_get(url: str) -> bytes:
    # urllib picks up http_proxy / https_proxy / no_proxy from the environment.
    req = urllib.request.Request(url, headers={"User-Agent": "infoglyph"})
    with urllib.request.urlopen(req, timeout=HTTP_TIMEOUT) as resp:
        return resp.read()


class AssetStore:
    """A directory of cached asset bytes plus an in-memory table of decoded images.

    ``opener`` performs the network GET; ``requests`` counts how often it ran.
    """

    def __init__(self, root: str | Path, opener: Callable[[str], bytes] = _http_get):
        self.root = Path(root)
        self.entries: dict[str, RasterImage] = {}
        self.requests = 0
        self._opener = opener
        self._lock = threading.Lock()

    def cached_path(self, url: str) -> Path | None:
        key = cache_key(url)
        for ext in ("png", "jpg"):
            p = self.root / f"{key}.{ext}"
            if p.is_file():
                return p
        return None

    def put(self, url: str, data: bytes) -> Path:
        """Store raw bytes for ``url``; returns the file written."""
        if any(c in url for c in "\t\r\n"):
            raise AssetError(url, "URL contains a tab or newline")
        ext = _sniff(data)
        if ext is None:
            raise AssetError(url, "unsupported format (expected PNG or JPEG)")
        key = cache_key(url)
        with self._lock:
            self.root.mkdir(parents=True, exist_ok=True)
            path = self.root / f"{key}.{ext}"
            tmp = path.with_suffix(".part")
            tmp.write_bytes(data)
            tmp.replace(path)
            for other in ("png", "jpg"):
                if other != ext:
                    (self.root / f"{key}.{other}").unlink(missing_ok=True)
            with open(self.root / MANIFEST, "a", encoding="utf-8") as fh:
                fh.write(f"{url}\t{path.name}\n")
            self.entries.pop(key, None)
        return path

    def manifest(self) -> dict[str, str]:
        """url -> file name, later lines overriding earlier ones."""
        path = self.root / MANIFEST
        out: dict[str, str] = {}
        if path.is_file():
            for line in path.read_text(encoding="utf-8").splitlines():
                url, sep, name = line.partition("\t")
                if sep:
                    out[url] = name
        return out

    def fetch(self, url: str, policy: Policy = Policy.OFFLINE) -> RasterImage:
        return fetch(url, self, policy)


def fetch(url: str, store: AssetStore, policy: Policy = Policy.OFFLINE) -> RasterImage:
    """Return the decoded image for ``url``, downloading on a miss when online."""
    if not url:
        raise AssetError(url, "empty URL")
    policy = Policy(policy)
    key = cache_key(url)
    with store._lock:
        hit = store.entries.get(key)
    if hit is not None:
        return hit

    local = _local_path(url)
    if local is not None:
        try:
            data = local.read_bytes()
        except OSError as e:
            raise AssetError(url, f"cannot read file: {e.strerror or e}") from None
    else:
        cached = store.cached_path(url)
        if cached is not None:
            data = cached.read_bytes()
        elif policy is Policy.OFFLINE:
            raise AssetError(url, "not in cache and fetching is offline")
        else:
            with store._lock:
                store.requests += 1
            try:
                data = store._opener(url)
            except (urllib.error.URLError, OSError, ValueError) as e:
                raise AssetError(url, f"network failure: {e}") from None
            if _sniff(data) is None:
                raise AssetError(url, "unsupported format (expected PNG or JPEG)")
            store.put(url, data)
    image = decode(data, url)
    with store._lock:
        store.entries[key] = image
    return image


@dataclass(frozen=True)
class AssetUse:
    """One reference to an asset: where it is drawn and at what size, if known."""

    url: str
    kind: str  # "image", "bgimage", "bgpattern" or "icon"
    size: Dimensions | None


def _background_use(bg, size: Dimensions | None) -> Iterator[AssetUse]:
    if bg is None or bg.kind is BackgroundKind.COLOR:
        return
    if bg.kind is BackgroundKind.IMAGE:
        yield AssetUse(bg.source, "bgimage", size)
    else:
        yield AssetUse(bg.source, "bgpattern", None)


def _element_uses(el) -> Iterator[AssetUse]:
    if isinstance(el, ImageElement):
        yield AssetUse(el.source, "image", el.size)
    elif isinstance(el, Box):
        yield from _background_use(el.background, el.size)
    elif isinstance(el, Picturegraph):
        yield AssetUse(el.icon_source, "icon", el.icon_size)


def _section_uses(section: Section | None, canvas: Dimensions) -> Iterator[AssetUse]:
    if section is None:
        return
    yield from _background_use(section.background, section.size or canvas)
    for child in section.children:
        yield from _element_uses(child)


def asset_uses(model: InfographicModel) -> Iterator[AssetUse]:
    """Every asset reference in paint order."""
    yield from _background_use(model.background, model.canvas)
    yield from _section_uses(model.head, model.canvas)
    for el in model.body:
        yield from _element_uses(el)
    yield from _section_uses(model.foot, model.canvas)


def prefetch(model: InfographicModel, store: AssetStore, policy: Policy = Policy.OFFLINE,
             workers: int = 4) -> dict[str, RasterImage]:
    """Fetch every distinct asset of ``model``; the first failure (in paint order) is raised."""
    urls = list(dict.fromkeys(u.url for u in asset_uses(model)))
    if not urls:
        return {}
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(urls)))) as pool:
        futures = [pool.submit(fetch, u, store, policy) for u in urls]
    return {u: f.result() for u, f in zip(urls, futures)}


def to_array(image: RasterImage) -> np.ndarray:
    return np.frombuffer(image.pixels, dtype=np.uint8).reshape(image.height, image.width, 4)


def _axis(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Pixel-centre mapping, edges clamped.
    pos = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def scale_bilinear(pixels: np.ndarray, width: int, height: int,
                   region: tuple[int, int, int, int] | None = None) -> np.ndarray:
    """Resize an (h, w, 4) uint8 RGBA array with bilinear filtering.

    Interpolation runs on premultiplied colour so transparent pixels do not
    bleed their RGB into neighbours. Results round half up. ``region``
    (x0, y0, x1, y1) selects a window of the output so that only visible
    pixels of a large scaled image are computed; the values are identical
    to the same window of the full result.
    """
    h_in, w_in = pixels.shape[:2]
    rx0, ry0, rx1, ry1 = region if region is not None else (0, 0, width, height)
    if (w_in, h_in) == (width, height):
        return pixels[ry0:ry1, rx0:rx1].copy()
    y0, y1, fy = (a[ry0:ry1] for a in _axis(height, h_in))
    x0, x1, fx = (a[rx0:rx1] for a in _axis(width, w_in))
    rows = np.unique(np.concatenate([y0, y1]))
    cols = np.unique(np.concatenate([x0, x1]))
    src = pixels[rows][:, cols].astype(np.float64)
    y0, y1 = np.searchsorted(rows, y0), np.searchsorted(rows, y1)
    x0, x1 = np.searchsorted(cols, x0), np.searchsorted(cols, x1)
    alpha = src[..., 3:4] / 255.0
    src[..., :3] *= alpha
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    a = out[..., 3:4]
    with np.errstate(invalid="ignore", divide="ignore"):
        rgb = np.where(a > 0, out[..., :3] * 255.0 / np.where(a > 0, a, 1.0), 0.0)
    out[..., :3] = rgb
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
