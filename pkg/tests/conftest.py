from __future__ import annotations

import pytest

from infoglyph.assets import AssetStore
from infoglyph.fixtures import SPECIMENS, load_specimen
from infoglyph.parser import parse_model
from infoglyph.render import FontCatalog

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def catalog() -> FontCatalog:
    return FontCatalog()


@pytest.fixture(scope="session")
def specimen_models():
    return {name: parse_model(load_specimen(name)) for name in SPECIMENS}


@pytest.fixture
def store(tmp_path) -> AssetStore:
    return AssetStore(tmp_path / "cache")
