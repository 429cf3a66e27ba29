"""The ten bundled specimen models, their stand-in images and a sample account."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent
ASSET_DIR = FIXTURE_DIR / "assets"
ACCOUNT_PATH = FIXTURE_DIR / "account.yaml"

SPECIMENS = ("alcoa", "autodesk", "cookcounty", "crocs", "firsthorizon",
             "gsi", "lenovo", "homedepot", "trinseo", "vanderbilt")


class UnknownSpecimen(KeyError):
    pass


def specimen_path(name: str) -> Path:
    if name not in SPECIMENS:
        raise UnknownSpecimen(f"unknown specimen {name!r}; expected one of {', '.join(SPECIMENS)}")
    return FIXTURE_DIR / f"{name}.yaml"


@lru_cache(maxsize=None)
def asset_map() -> dict[str, Path]:
    """Original asset URL -> bundled stand-in file."""
    out = {}
    for line in (ASSET_DIR / "urls.tsv").read_text(encoding="utf-8").splitlines():
        url, name = line.split("\t")[:2]
        out[url] = ASSET_DIR / name
    return out


def load_specimen(name: str, *, local_assets: bool = True) -> str:
    """DSL text of a specimen.

    With ``local_assets`` (the default) every remote asset URL is replaced by
    a ``file:`` URL of its bundled stand-in, so the model renders offline.
    """
    text = specimen_path(name).read_text(encoding="utf-8")
    if local_assets:
        for url in sorted(asset_map(), key=len, reverse=True):
            text = text.replace(url, asset_map()[url].as_uri())
    return text


def load_account_text() -> str:
    return ACCOUNT_PATH.read_text(encoding="utf-8")


def seed_cache(store) -> int:
    """Put every stand-in into ``store`` under its original URL; returns the count.

    Afterwards the untouched specimens render with an offline policy.
    """
    n = 0
    for url, path in asset_map().items():
        if store.cached_path(url) is None:
            store.put(url, path.read_bytes())
            n += 1
    return n
