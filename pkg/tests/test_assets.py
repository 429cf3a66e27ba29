import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from infoglyph.assets import (AssetError, AssetStore, AssetUse, Policy, asset_uses, cache_key, decode, fetch,
                              prefetch, scale_bilinear, to_array)
from infoglyph.fixtures import SPECIMENS, asset_map, load_specimen, seed_cache
from infoglyph.parser import parse_model


def _png(w, h, color=(200, 30, 40, 255)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGBA", (w, h), color).save(buf, "PNG")
    return buf.getvalue()


class FakeNet:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.calls: list[str] = []

    def __call__(self, url):
        self.calls.append(url)
        return self.payload


def test_file_url_reads_directly(tmp_path, store):
    p = tmp_path / "sq.png"
    p.write_bytes(_png(16, 16))
    img = fetch(p.as_uri(), store)
    assert (img.width, img.height) == (16, 16)
    assert img.pixel(3, 9) == (200, 30, 40, 255)
    assert fetch(str(p), AssetStore(tmp_path / "other")).width == 16
    assert not (tmp_path / "cache").exists()


def test_second_fetch_makes_no_request(tmp_path):
    net = FakeNet(_png(4, 3))
    url = "https://example.org/a/logo.png"
    s = AssetStore(tmp_path / "c", opener=net)
    first = fetch(url, s, Policy.ONLINE)
    assert s.requests == 1 and net.calls == [url]
    assert fetch(url, s, Policy.ONLINE) == first
    assert s.requests == 1
    # a fresh store over the same directory hits the disk cache, even offline
    s2 = AssetStore(tmp_path / "c", opener=net)
    assert fetch(url, s2, Policy.OFFLINE) == first
    assert s2.requests == 0 and len(net.calls) == 1
    assert s2.manifest() == {url: f"{cache_key(url)}.png"}


def test_offline_miss_names_url(store):
    url = "https://example.org/missing.png"
    with pytest.raises(AssetError) as exc:
        fetch(url, store, Policy.OFFLINE)
    assert exc.value.url == url and url in str(exc.value)
    assert store.requests == 0


def test_network_failure_and_bad_payload(tmp_path):
    def broken(url):
        raise OSError("connection refused")

    with pytest.raises(AssetError, match="network"):
        fetch("http://x.invalid/a.png", AssetStore(tmp_path / "a", opener=broken), Policy.ONLINE)
    s = AssetStore(tmp_path / "b", opener=FakeNet(b"<html>nope</html>"))
    with pytest.raises(AssetError, match="unsupported"):
        fetch("http://x.invalid/b.png", s, Policy.ONLINE)
    assert s.cached_path("http://x.invalid/b.png") is None


def test_missing_local_file(tmp_path, store):
    with pytest.raises(AssetError, match="cannot read"):
        fetch((tmp_path / "nope.png").as_uri(), store)


@given(st.text(min_size=1, max_size=60))
def test_cache_key_is_hex_sha256(url):
    k = cache_key(url)
    assert len(k) == 64 and all(c in "0123456789abcdef" for c in k)
    assert cache_key(url) == k
    assert cache_key(url + "x") != k


def test_put_rejects_tab_in_url(store):
    with pytest.raises(AssetError):
        store.put("a\tb", _png(1, 1))


def test_manifest_later_line_wins(store):
    url = "https://example.org/u"
    store.put(url, _png(1, 1))
    buf = io.BytesIO()
    Image.new("RGB", (2, 2), (1, 2, 3)).save(buf, "JPEG")
    store.put(url, buf.getvalue())
    assert store.manifest()[url] == f"{cache_key(url)}.jpg"
    assert len((store.root / "manifest.tsv").read_text().splitlines()) == 2
    assert store.cached_path(url).suffix == ".jpg"
    assert fetch(url, AssetStore(store.root)).width == 2


def test_jpeg_decodes_opaque():
    buf = io.BytesIO()
    Image.new("RGB", (8, 5), (10, 120, 240)).save(buf, "JPEG", quality=95)
    img = decode(buf.getvalue())
    assert (img.width, img.height) == (8, 5)
    r, g, b, a = img.pixel(4, 2)
    assert a == 255 and abs(r - 10) <= 3 and abs(g - 120) <= 3 and abs(b - 240) <= 3


def test_animated_png_uses_first_frame():
    frames = [Image.new("RGBA", (3, 3), c) for c in ((255, 0, 0, 255), (0, 0, 255, 255))]
    buf = io.BytesIO()
    frames[0].save(buf, "PNG", save_all=True, append_images=frames[1:])
    assert decode(buf.getvalue()).pixel(1, 1) == (255, 0, 0, 255)


def test_gif_is_rejected():
    buf = io.BytesIO()
    Image.new("RGB", (2, 2)).save(buf, "GIF")
    with pytest.raises(AssetError, match="unsupported"):
        decode(buf.getvalue(), "x.gif")


def test_asset_uses_paint_order():
    src = ("bgsize: 50x50\nbgimage: file:///bg.png\nhead:\n  bgcolor: ffffff\n  image1:\n    src: file:///h.png\n"
           "    position: 0x0\n    size: 5x5\nfoot:\n  bgpattern: file:///f.png\n"
           "box1:\n  position: 0x0\n  size: 10x10\n  bgimage: file:///b.png\n")
    uses = list(asset_uses(parse_model(src)))
    assert [u.url for u in uses] == ["file:///bg.png", "file:///h.png", "file:///b.png", "file:///f.png"]
    assert uses[0] == AssetUse("file:///bg.png", "bgimage", parse_model(src).canvas)
    assert uses[-1].kind == "bgpattern" and uses[-1].size is None


def test_prefetch_all_specimens_offline(store):
    for name in SPECIMENS:
        model = parse_model(load_specimen(name))
        got = prefetch(model, store, Policy.OFFLINE)
        assert set(got) == {u.url for u in asset_uses(model)}
    assert store.requests == 0


def test_seeded_cache_serves_original_urls(store):
    assert seed_cache(store) == len(asset_map())
    assert seed_cache(store) == 0
    model = parse_model(load_specimen("trinseo", local_assets=False))
    assert prefetch(model, store, Policy.OFFLINE)
    assert store.requests == 0


def test_scale_identity_and_constant():
    rng = np.random.default_rng(1)
    px = rng.integers(0, 256, (5, 7, 4), dtype=np.uint8)
    assert np.array_equal(scale_bilinear(px, 7, 5), px)
    flat = np.full((3, 3, 4), (9, 80, 200, 255), np.uint8)
    assert (scale_bilinear(flat, 11, 4) == (9, 80, 200, 255)).all()


def test_scale_two_to_four_interpolates():
    px = np.zeros((1, 2, 4), np.uint8)
    px[..., 3] = 255
    px[0, 1, :3] = 255
    row = scale_bilinear(px, 4, 1)[0, :, 0]
    assert list(row) == [0, 64, 191, 255]


def test_scale_transparent_neighbour_does_not_bleed():
    px = np.array([[[255, 0, 0, 255], [0, 255, 0, 0]]], np.uint8)
    out = scale_bilinear(px, 4, 1)
    assert (out[0, :, 1][out[0, :, 3] > 0] == 0).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 40), st.integers(1, 40), st.data())
def test_scale_region_matches_full(wi, hi, wo, ho, data):
    px = np.random.default_rng(wi * 100 + hi).integers(0, 256, (hi, wi, 4), dtype=np.uint8)
    x0 = data.draw(st.integers(0, wo - 1))
    x1 = data.draw(st.integers(x0 + 1, wo))
    y0 = data.draw(st.integers(0, ho - 1))
    y1 = data.draw(st.integers(y0 + 1, ho))
    full = scale_bilinear(px, wo, ho)
    assert full.shape == (ho, wo, 4)
    assert np.array_equal(scale_bilinear(px, wo, ho, (x0, y0, x1, y1)), full[y0:y1, x0:x1])


def test_to_array_shape():
    img = decode(_png(3, 2))
    assert to_array(img).shape == (2, 3, 4)
