"""Re-render every specimen into tests/goldens/ and rewrite digests.tsv.

Run after an intentional rendering change:

    python3 scripts/update_goldens.py
"""

from __future__ import annotations

import hashlib
import logging
import sys
import tempfile
from pathlib import Path

from infoglyph.assets import AssetStore
from infoglyph.fixtures import SPECIMENS, load_specimen
from infoglyph.parser import parse_model
from infoglyph.render import FontCatalog, render
from infoglyph.render.png import encode_png

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "goldens"


def main() -> int:
    logging.disable(logging.WARNING)
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    catalog = FontCatalog()
    lines = ["name\tpng_sha256\tpixels_sha256"]
    with tempfile.TemporaryDirectory() as cache:
        store = AssetStore(cache)
        for name in SPECIMENS:
            image = render(parse_model(load_specimen(name)), store, catalog)
            png = encode_png(image)
            (GOLDEN_DIR / f"{name}.png").write_bytes(png)
            lines.append(f"{name}\t{hashlib.sha256(png).hexdigest()}\t{hashlib.sha256(image.pixels).hexdigest()}")
            print(lines[-1])
    (GOLDEN_DIR / "digests.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
