"""Regenerate the stand-in images for the bundled specimens.

Each distinct asset URL in a specimen gets a flat tinted PNG with a
darker frame and diagonals, sized from the first place the URL is drawn.
Patterns get a small checker tile. Output: fixtures/assets/*.png and
fixtures/assets/urls.tsv (url, file, width, height).
"""

import hashlib
import re

from PIL import Image, ImageDraw

from infoglyph.assets import asset_uses
from infoglyph.fixtures import FIXTURE_DIR, SPECIMENS
from infoglyph.parser import parse_model

OUT = FIXTURE_DIR / "assets"
PATTERN_TILE = (32, 32)


def tint(url: str) -> tuple[int, int, int]:
    d = hashlib.sha256(url.encode()).digest()
    return tuple(150 + b % 90 for b in d[:3])


def file_name(url: str, taken: set[str]) -> str:
    stem = re.sub(r"[^A-Za-z0-9_-]+", "_", url.rsplit("/", 1)[-1].rsplit(".", 1)[0]).strip("_") or "asset"
    name = f"{stem}.png"
    n = 2
    while name in taken:
        name = f"{stem}-{n}.png"
        n += 1
    taken.add(name)
    return name


def draw(url: str, kind: str, size: tuple[int, int]) -> Image.Image:
    w, h = size
    r, g, b = tint(url)
    if kind == "bgpattern":
        im = Image.new("RGBA", size, (r, g, b, 255))
        d = ImageDraw.Draw(im)
        d.rectangle([0, 0, w // 2 - 1, h // 2 - 1], fill=(r - 40, g - 40, b - 40, 255))
        d.rectangle([w // 2, h // 2, w - 1, h - 1], fill=(r - 40, g - 40, b - 40, 255))
        return im
    im = Image.new("RGBA", size, (r, g, b, 255))
    d = ImageDraw.Draw(im)
    dark = (r - 90, g - 90, b - 90, 255)
    d.line([0, 0, w - 1, h - 1], fill=dark)
    d.line([0, h - 1, w - 1, 0], fill=dark)
    d.rectangle([0, 0, w - 1, h - 1], outline=dark)
    return im


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for old in OUT.glob("*.png"):
        old.unlink()
    seen: dict[str, str] = {}
    taken: set[str] = set()
    rows = []
    for name in SPECIMENS:
        model = parse_model((FIXTURE_DIR / f"{name}.yaml").read_text(encoding="utf-8"))
        for use in asset_uses(model):
            if use.url in seen:
                continue
            size = PATTERN_TILE if use.kind == "bgpattern" else (use.size.width, use.size.height)
            fname = file_name(use.url, taken)
            draw(use.url, use.kind, size).save(OUT / fname, optimize=True)
            seen[use.url] = fname
            rows.append(f"{use.url}\t{fname}\t{size[0]}\t{size[1]}")
    (OUT / "urls.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"{len(rows)} assets written to {OUT}")


if __name__ == "__main__":
    main()
