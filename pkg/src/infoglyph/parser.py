"""Parser, validator and canonical serializer for the infographic DSL.

The DSL is a small indentation-based ``key: value`` language (a YAML
subset). Parsing happens in two passes: :func:`_build_tree` turns lines into
a tree of :class:`_Node`, then :class:`_Interpreter` maps that tree onto the
domain types in :mod:`infoglyph.model`.

:func:`parse` is total: for any input it returns ``(model_or_None,
diagnostics)``. :func:`parse_model` is the convenience wrapper that raises
:class:`ParseError` when the source has errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Callable, Iterable, Iterator

from .model import (
    Align,
    Background,
    BackgroundKind,
    BarChart,
    Box,
    Color,
    Dimensions,
    Element,
    FontSpec,
    ImageElement,
    InfographicModel,
    ModelError,
    PieChart,
    PieStyle,
    Picturegraph,
    Point,
    Role,
    Section,
    SectionKind,
    TextElement,
    WHITE,
)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    line: int
    key_path: str
    message: str

    def __str__(self) -> str:
        where = f" {self.key_path}:" if self.key_path else ""
        return f"line {self.line}: {self.severity.value}:{where} {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR


class ParseError(ValueError):
    """The source contains at least one error diagnostic."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        errors = [d for d in self.diagnostics if d.is_error]
        summary = "; ".join(str(d) for d in errors[:3])
        more = f" (+{len(errors) - 3} more)" if len(errors) > 3 else ""
        super().__init__(f"{len(errors)} error(s): {summary}{more}")


class TokenError(ValueError):
    """A scalar token does not match its grammar."""


# --------------------------------------------------------------------------
# Token grammars

NAMED_COLORS = {
    "black": (0, 0, 0),
    "silver": (192, 192, 192),
    "gray": (128, 128, 128),
    "white": (255, 255, 255),
    "maroon": (128, 0, 0),
    "red": (255, 0, 0),
    "purple": (128, 0, 128),
    "fuchsia": (255, 0, 255),
    "green": (0, 128, 0),
    "lime": (0, 255, 0),
    "olive": (128, 128, 0),
    "yellow": (255, 255, 0),
    "navy": (0, 0, 128),
    "blue": (0, 0, 255),
    "teal": (0, 128, 128),
    "aqua": (0, 255, 255),
}

_HEX_RE = re.compile(r"^[0-9a-fA-F]{6}$")
_PAIR_RE = re.compile(r"^(\d+)x(\d+)$")
_FONT_RE = re.compile(r"^(?:(bold|normal|[1-9]00)\s+)?(\d+)px\s+(\S.*)$")
_DECIMAL_RE = re.compile(r"^(\d*)(?:[.,](\d*))?$")
_INT_RE = re.compile(r"^\d+$")
PLACEHOLDER_RE = re.compile(r"\{\{\s*([A-Za-z_][A-Za-z0-9_.]*)\s*(?:\|\s*(\d+)\s*)?\}\}")


def _strip_quotes(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "\"'":
        return token[1:-1].strip()
    return token


def parse_color(token: str) -> Color:
    """Parse ``9dd191``, a CSS basic color name, or the shorthand ``0``."""
    t = _strip_quotes(token)
    if not t:
        raise TokenError("empty color; expected 6 hex digits or a color name")
    if _HEX_RE.match(t):
        return Color(int(t[0:2], 16), int(t[2:4], 16), int(t[4:6], 16))
    if t == "0":
        return Color(0, 0, 0)
    rgb = NAMED_COLORS.get(t.lower())
    if rgb is None:
        raise TokenError(f"bad color {token!r}; expected 6 hex digits (e.g. 9dd191), a basic color name, or 0")
    return Color(*rgb)


def _parse_pair(token: str, what: str) -> tuple[int, int]:
    t = _strip_quotes(token)
    m = _PAIR_RE.match(t)
    if not m:
        raise TokenError(f"bad {what} {token!r}; expected <int>x<int>, e.g. 1190x650")
    return int(m.group(1)), int(m.group(2))


def parse_dimensions(token: str) -> Dimensions:
    w, h = _parse_pair(token, "dimensions")
    if w < 1 or h < 1:
        raise TokenError(f"bad dimensions {token!r}; width and height must be >= 1")
    return Dimensions(w, h)


def parse_point(token: str) -> Point:
    x, y = _parse_pair(token, "position")
    return Point(x, y)


def parse_font(token: str) -> FontSpec:
    """Parse ``[<weight>] <size>px <family...>``; weight defaults to normal."""
    t = " ".join(_strip_quotes(token).split())
    m = _FONT_RE.match(t)
    if not m:
        raise TokenError(f"bad font {token!r}; expected [bold|100..900] <size>px <family>, e.g. bold 18px Verdana")
    weight_tok, size, family = m.groups()
    if weight_tok is None or weight_tok == "normal":
        weight: str | int = "normal"
    elif weight_tok == "bold":
        weight = "bold"
    else:
        weight = int(weight_tok)
    if int(size) < 1:
        raise TokenError(f"bad font {token!r}; size must be >= 1px")
    return FontSpec(size=int(size), family=family.strip(), weight=weight)


def parse_decimal(token: str) -> Decimal:
    """Parse ``76,25`` or ``76.25``; a comma is a decimal separator."""
    t = _strip_quotes(token)
    m = _DECIMAL_RE.match(t)
    if not t or not m or not (m.group(1) or m.group(2)):
        raise TokenError(f"bad number {token!r}; expected digits with at most one ',' or '.' separator")
    whole, frac = m.group(1) or "0", m.group(2) or ""
    return Decimal(f"{whole}.{frac}" if frac else whole)


def parse_int(token: str, minimum: int = 0) -> int:
    t = _strip_quotes(token)
    if not _INT_RE.match(t):
        raise TokenError(f"bad integer {token!r}; expected base-10 digits")
    n = int(t)
    if n < minimum:
        raise TokenError(f"bad integer {token!r}; must be >= {minimum}")
    return n


_BOOLS = {"on": True, "true": True, "yes": True, "off": False, "false": False, "no": False}


def parse_bool(token: str) -> bool:
    t = _strip_quotes(token).lower()
    if t not in _BOOLS:
        raise TokenError(f"bad switch {token!r}; expected on/off")
    return _BOOLS[t]


def parse_colors(token: str) -> tuple[Color, ...]:
    parts = [p for p in _strip_quotes(token).split(",")]
    if not any(p.strip() for p in parts):
        raise TokenError("empty color list")
    return tuple(parse_color(p.strip()) for p in parts)


def has_placeholder(text: str) -> bool:
    return "{{" in text


# --------------------------------------------------------------------------
# Pass 1: lines to tree


@dataclass
class _Node:
    key: str
    line: int
    indent: int
    value: str | None = None  # unquoted scalar; None for a mapping node
    quoted: bool = False
    children: list["_Node"] = field(default_factory=list)
    child_indent: int | None = None

    @property
    def is_off(self) -> bool:
        return self.value is not None and self.value.strip().lower() == "off" and not self.children


_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "$": "$"}


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text) and text[i + 1] in _ESCAPES:
            out.append(_ESCAPES[text[i + 1]])
            i += 2
            continue
        out.append(c)
        i += 1
    return "".join(out)


def _scan_double_quoted(s: str, start: int) -> int:
    """Index of the closing quote of a double-quoted scalar opening at ``start``, or -1."""
    i = start + 1
    while i < len(s):
        if s[i] == "\\":
            i += 2
            continue
        if s[i] == '"':
            return i
        i += 1
    return -1


def _scan_single_quoted(s: str, start: int) -> int:
    i = start + 1
    while i < len(s):
        if s[i] == "'":
            if i + 1 < len(s) and s[i + 1] == "'":
                i += 2
                continue
            return i
        i += 1
    return -1


def _parse_scalar(raw: str) -> tuple[str, bool]:
    """Return (value, quoted). Raises TokenError on a malformed quoted scalar."""
    raw = raw.strip()
    if raw.startswith('"'):
        end = _scan_double_quoted(raw, 0)
        if end < 0:
            raise TokenError(f"unterminated double-quoted value {raw!r}")
        if raw[end + 1:].strip():
            raise TokenError(f"unexpected text after closing quote in {raw!r}")
        return _unescape(raw[1:end]), True
    if raw.startswith("'"):
        end = _scan_single_quoted(raw, 0)
        if end < 0:
            raise TokenError(f"unterminated single-quoted value {raw!r}")
        if raw[end + 1:].strip():
            raise TokenError(f"unexpected text after closing quote in {raw!r}")
        return raw[1:end].replace("''", "'"), True
    return raw.replace("\\$", "$"), False


def _split_key(text: str) -> tuple[str, str | None]:
    """Split ``key: value`` into (key, raw value or None). Raises TokenError."""
    if text[0] in "\"'":
        end = _scan_double_quoted(text, 0) if text[0] == '"' else _scan_single_quoted(text, 0)
        if end < 0:
            raise TokenError(f"unterminated quoted key in {text!r}")
        key = _parse_scalar(text[:end + 1])[0]
        rest = text[end + 1:].lstrip()
        if not rest.startswith(":"):
            raise TokenError(f"expected ':' after key in {text!r}")
        value = rest[1:].strip()
        return key, value or None
    m = re.search(r":(\s|$)", text)
    if not m:
        raise TokenError(f"expected 'key: value', got {text!r}")
    key = text[:m.start()].strip()
    if not key:
        raise TokenError(f"empty key in {text!r}")
    value = text[m.end():].strip()
    return key, value or None


def _build_tree(source: str, diags: list[Diagnostic]) -> _Node:
    root = _Node(key="", line=0, indent=-1)
    stack = [root]
    for lineno, line in enumerate(source.split("\n"), start=1):
        line = line.rstrip()
        stripped = line.lstrip(" ")
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(line) - len(stripped)
        if stripped[0] == "\t" or "\t" in line[:indent + 1]:
            diags.append(Diagnostic(Severity.ERROR, lineno, "", "tab characters are not allowed in indentation"))
            continue
        try:
            key, raw = _split_key(stripped)
            value, quoted = _parse_scalar(raw) if raw is not None else (None, False)
        except TokenError as e:
            diags.append(Diagnostic(Severity.ERROR, lineno, "", str(e)))
            continue
        while stack[-1].indent >= indent:
            stack.pop()
        parent = stack[-1]
        path = _path(stack[1:] + [_Node(key, lineno, indent)])
        if parent is not root and parent.value is not None:
            diags.append(Diagnostic(Severity.ERROR, lineno, path,
                                    f"unexpected indentation under scalar key {parent.key!r}"))
            continue
        if parent.child_indent is None:
            parent.child_indent = indent
        elif parent.child_indent != indent:
            diags.append(Diagnostic(Severity.ERROR, lineno, path,
                                    f"inconsistent indentation: expected {parent.child_indent} spaces, got {indent}"))
            continue
        node = _Node(key=key, line=lineno, indent=indent, value=value, quoted=quoted)
        parent.children.append(node)
        stack.append(node)
    return root


def _path(nodes: Iterable[_Node]) -> str:
    return ".".join(n.key for n in nodes)


# --------------------------------------------------------------------------
# Pass 2: tree to model

_ELEMENT_RE = re.compile(r"^(box|image|text|titletext|piechart|barchart|picturegraph)(\d+)$")
BGSIZE_ALIASES = ("bgszize", "bgsiz\u0435", "bgsizes")  # misspellings found in real listings; the second has a Cyrillic 'е'
_MISSING = object()


class _Fields:
    """Subkeys of one mapping node: last duplicate wins, unknown keys are reported."""

    def __init__(self, node: _Node, path: str, diags: list[Diagnostic]):
        self.node = node
        self.path = path
        self.diags = diags
        self.by_key: dict[str, _Node] = {}
        self.ok = True
        for child in node.children:
            if child.key in self.by_key:
                self.warn(child, f"duplicate subkey {child.key!r}; the last one wins")
            self.by_key[child.key] = child
        self.used: set[str] = set()

    def sub(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def error(self, node: _Node, message: str, key: str | None = None) -> None:
        self.ok = False
        kp = self.sub(key if key is not None else node.key) if node is not self.node else self.path
        self.diags.append(Diagnostic(Severity.ERROR, node.line, kp, message))

    def warn(self, node: _Node, message: str) -> None:
        self.diags.append(Diagnostic(Severity.WARNING, node.line, self.sub(node.key), message))

    def has(self, key: str) -> bool:
        return key in self.by_key

    def node_for(self, key: str) -> _Node | None:
        self.used.add(key)
        return self.by_key.get(key)

    def get(self, key: str, conv: Callable[[str], object], *, required: bool = False, default=None,
            optional_off: bool = True):
        node = self.node_for(key)
        if node is None:
            if required:
                self.error(self.node, f"missing mandatory subkey {key!r}")
                return _MISSING
            return default
        if node.children:
            self.error(node, "expected a scalar value, found a nested block")
            return _MISSING if required else default
        raw = node.value if node.value is not None else ""
        if optional_off and not required and node.is_off:
            return default
        try:
            return conv(raw)
        except (TokenError, ModelError) as e:
            self.error(node, str(e))
            return _MISSING if required else default

    def finish(self) -> None:
        for key, node in self.by_key.items():
            if key not in self.used:
                self.error(node, f"unknown key {key!r}")


def _text(raw: str) -> str:
    return raw


class _Interpreter:
    def __init__(self, diags: list[Diagnostic]):
        self.diags = diags
        self.ids: dict[str, int] = {}

    # -- helpers --------------------------------------------------------

    def _claim_id(self, node: _Node, path: str, ident: str) -> bool:
        if ident in self.ids:
            self.diags.append(Diagnostic(Severity.ERROR, node.line, path,
                                         f"duplicate element id {ident!r} (first defined on line {self.ids[ident]})"))
            return False
        self.ids[ident] = node.line
        return True

    def _build(self, f: _Fields, ctor, **kwargs):
        f.finish()
        if not f.ok or any(v is _MISSING for v in kwargs.values()):
            return None
        try:
            return ctor(**kwargs)
        except ModelError as e:
            self.diags.append(Diagnostic(Severity.ERROR, f.node.line, f.sub(e.field), e.message))
            return None

    def _background(self, f: _Fields) -> Background | None:
        found: list[tuple[_Node, Background | None]] = []
        for key, kind in (("bgcolor", BackgroundKind.COLOR), ("bgimage", BackgroundKind.IMAGE),
                          ("bgpattern", BackgroundKind.PATTERN)):
            node = f.node_for(key)
            if node is None:
                continue
            if kind is BackgroundKind.COLOR:
                color = f.get(key, parse_color)
                found.append((node, Background.of_color(color) if isinstance(color, Color) else None))
            else:
                src = f.get(key, _text)
                found.append((node, Background(kind, source=src) if src else None))
        found = [(n, bg) for n, bg in found if bg is not None]
        if len(found) > 1:
            found.sort(key=lambda t: t[0].line)
            f.warn(found[-1][0], "several background keys given; the last one wins")
        return found[-1][1] if found else None

    # -- elements -------------------------------------------------------

    def element(self, node: _Node, path: str) -> Element | None:
        m = _ELEMENT_RE.match(node.key)
        assert m is not None
        kind = m.group(1)
        if node.is_off:
            return None
        if node.value is not None:
            self.diags.append(Diagnostic(Severity.ERROR, node.line, path, f"{kind} needs a block of properties"))
            return None
        ok = self._claim_id(node, path, node.key)
        f = _Fields(node, path, self.diags)
        builder = getattr(self, f"_{kind}")
        el = builder(node.key, f)
        return el if ok else None

    def _box(self, ident: str, f: _Fields) -> Box | None:
        position = f.get("position", parse_point, required=True)
        size = f.get("size", parse_dimensions, required=True)
        background = self._background(f)
        if background is None and f.ok:
            f.error(f.node, "missing mandatory subkey 'bgcolor' (or bgimage/bgpattern)")
        return self._build(f, Box, id=ident, position=position, size=size, background=background)

    def _image(self, ident: str, f: _Fields) -> ImageElement | None:
        return self._build(f, ImageElement, id=ident,
                           position=f.get("position", parse_point, required=True),
                           size=f.get("size", parse_dimensions, required=True),
                           source=f.get("src", _text, required=True))

    def _text_element(self, ident: str, f: _Fields, role: Role) -> TextElement | None:
        value = f.get("value", _text, required=True, optional_off=False)
        align = f.get("align", _align, default=Align.LEFT)
        return self._build(f, TextElement, id=ident, role=role, value=value,
                           font=f.get("font", parse_font, required=True),
                           position=f.get("position", parse_point, required=True),
                           color=f.get("color", parse_color, default=Color(0, 0, 0)),
                           align=align,
                           maxwidth=f.get("maxwidth", lambda t: parse_int(t, 1)),
                           lineheight=f.get("lineheight", lambda t: parse_int(t, 1)))

    def _text(self, ident: str, f: _Fields) -> TextElement | None:
        return self._text_element(ident, f, Role.BODY)

    def _titletext(self, ident: str, f: _Fields) -> TextElement | None:
        return self._text_element(ident, f, Role.TITLE)

    def _data(self, f: _Fields, key: str = "data") -> tuple | object:
        node = f.node_for(key)
        if node is None:
            f.error(f.node, f"missing mandatory subkey {key!r}")
            return _MISSING
        if node.value is not None:
            f.error(node, "data needs a block of 'label: value' lines")
            return _MISSING
        out = []
        for child in node.children:
            if child.children or child.value is None:
                f.error(child, "expected 'label: value'", key=f"{key}.{child.key}")
                continue
            try:
                out.append((child.key, _datum(child.value)))
            except TokenError as e:
                f.error(child, str(e), key=f"{key}.{child.key}")
        if not out and f.ok:
            f.error(node, "data must not be empty")
        return tuple(out)

    def _piechart(self, ident: str, f: _Fields) -> PieChart | None:
        return self._build(f, PieChart, id=ident,
                           colors=f.get("colors", parse_colors, required=True),
                           position=f.get("position", parse_point, required=True),
                           style=f.get("type", _pie_style, default=PieStyle.PIE),
                           radius=f.get("size", lambda t: parse_int(t, 1), required=True),
                           padding=f.get("padding", parse_int, default=0),
                           title=f.get("title", _text, default=""),
                           background=f.get("bgcolor", parse_color),
                           show_percentage=f.get("showpercentage", parse_bool, default=False, optional_off=False),
                           show_title=f.get("showtitle", parse_bool, default=False, optional_off=False),
                           show_legend=f.get("showlegend", parse_bool, default=False, optional_off=False),
                           data=self._data(f))

    def _barchart(self, ident: str, f: _Fields) -> BarChart | None:
        return self._build(f, BarChart, id=ident,
                           colors=f.get("colors", parse_colors, required=True),
                           position=f.get("position", parse_point, required=True),
                           size=f.get("size", parse_dimensions, required=True),
                           background=f.get("bgcolor", parse_color),
                           show_values=f.get("showvalues", parse_bool, default=False, optional_off=False),
                           data=self._data(f))

    def _picturegraph(self, ident: str, f: _Fields) -> Picturegraph | None:
        return self._build(f, Picturegraph, id=ident,
                           position=f.get("position", parse_point, required=True),
                           icon_source=f.get("icon", _text, required=True),
                           icon_size=f.get("iconsize", parse_dimensions, required=True),
                           columns=f.get("columns", lambda t: parse_int(t, 1), default=10),
                           spacing=f.get("spacing", parse_int, default=0),
                           total=f.get("total", lambda t: parse_int(t, 1), required=True),
                           value=f.get("value", _datum, required=True),
                           fill_color=f.get("fillcolor", parse_color, default=Color(0, 0, 0)),
                           empty_color=f.get("emptycolor", parse_color, default=Color(204, 204, 204)))

    # -- sections -------------------------------------------------------

    def section(self, node: _Node, kind: SectionKind) -> Section | None:
        path = kind.value
        if node.is_off:
            return None
        if node.value is not None:
            self.diags.append(Diagnostic(Severity.ERROR, node.line, path, f"{path} must be 'off' or a block"))
            return None
        f = _Fields(node, path, self.diags)
        position = f.get("position", parse_point)
        size = f.get("size", parse_dimensions)
        background = self._background(f)
        texts = {}
        for key, role in (("title", Role.TITLE), ("subtitle", Role.SUBTITLE), ("text", Role.BODY)):
            sub = f.node_for(key)
            if sub is None or sub.is_off:
                texts[key] = None
                continue
            if sub.value is not None:
                f.error(sub, f"{key} must be 'off' or a block")
                continue
            tf = _Fields(sub, f.sub(key), self.diags)
            texts[key] = self._text_element(f"{kind.value}.{key}", tf, role)
            if texts[key] is None:
                f.ok = False
        children = []
        for child in node.children:
            if _ELEMENT_RE.match(child.key):
                f.used.add(child.key)
                el = self.element(child, f.sub(child.key))
                if el is not None:
                    children.append(el)
        return self._build(f, Section, kind=kind, position=position, size=size, background=background,
                           title=texts.get("title"), subtitle=texts.get("subtitle"), text=texts.get("text"),
                           children=tuple(children))

    # -- document -------------------------------------------------------

    def document(self, root: _Node) -> InfographicModel | None:
        f = _Fields(root, "", self.diags)
        canvas = None
        size_node = None
        for key in ("bgsize",) + BGSIZE_ALIASES:
            node = f.node_for(key)
            if node is None:
                continue
            if key != "bgsize":
                self.diags.append(Diagnostic(Severity.WARNING, node.line, key,
                                             f"{key!r} is a misspelling of 'bgsize'; accepted as an alias"))
            if size_node is not None and node.line < size_node.line:
                continue
            size_node = node
        if size_node is None:
            self.diags.append(Diagnostic(Severity.ERROR, 1, "bgsize", "missing mandatory key 'bgsize'"))
            f.ok = False
        else:
            try:
                if size_node.children or size_node.value is None:
                    raise TokenError("expected <int>x<int>")
                canvas = parse_dimensions(size_node.value)
            except TokenError as e:
                f.error(size_node, str(e))
        background = self._background(f) or Background.of_color(WHITE)
        head = foot = None
        body: list[Element] = []
        for node in root.children:
            if node.key in ("head", "foot"):
                f.used.add(node.key)
                kind = SectionKind(node.key)
                section = self.section(node, kind)
                if kind is SectionKind.HEAD:
                    head = section
                else:
                    foot = section
            elif _ELEMENT_RE.match(node.key):
                f.used.add(node.key)
                el = self.element(node, node.key)
                if el is not None:
                    body.append(el)
        f.finish()
        if canvas is None or any(d.is_error for d in self.diags):
            return None
        try:
            return InfographicModel(canvas=canvas, background=background, head=head, foot=foot, body=tuple(body))
        except ModelError as e:
            self.diags.append(Diagnostic(Severity.ERROR, 1, e.field, e.message))
            return None


def _align(token: str) -> Align:
    t = _strip_quotes(token).lower()
    try:
        return Align(t)
    except ValueError:
        raise TokenError(f"bad align {token!r}; expected left or center") from None


def _pie_style(token: str) -> PieStyle:
    t = _strip_quotes(token).lower()
    try:
        return PieStyle(t)
    except ValueError:
        raise TokenError(f"bad chart type {token!r}; expected pie or donut") from None


def _datum(token: str) -> float | str:
    t = token.strip()
    m = PLACEHOLDER_RE.fullmatch(t)
    if m:
        return t
    return float(parse_decimal(t))


# --------------------------------------------------------------------------
# Public entry points


def parse(source: str | bytes) -> tuple[InfographicModel | None, list[Diagnostic]]:
    """Parse DSL source. Never raises; the model is None iff there are errors."""
    diags: list[Diagnostic] = []
    if isinstance(source, (bytes, bytearray, memoryview)):
        raw = bytes(source)
        try:
            source = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            line = raw[:e.start].count(b"\n") + 1
            return None, [Diagnostic(Severity.ERROR, line, "", f"invalid UTF-8 at byte {e.start}")]
    source = source.lstrip("\ufeff").replace("\r\n", "\n").replace("\r", "\n")
    if "\x00" in source:
        line = source[:source.index("\x00")].count("\n") + 1
        return None, [Diagnostic(Severity.ERROR, line, "", "NUL character in source")]
    try:
        root = _build_tree(source, diags)
        model = _Interpreter(diags).document(root)
    except RecursionError:  # pathological nesting
        diags.append(Diagnostic(Severity.ERROR, 1, "", "document nested too deeply"))
        model = None
    if any(d.is_error for d in diags):
        model = None
    return model, sorted(diags, key=lambda d: d.line)


def parse_model(source: str | bytes) -> InfographicModel:
    """Parse DSL source, raising :class:`ParseError` if it has errors."""
    model, diags = parse(source)
    if model is None:
        raise ParseError(diags)
    return model


# --------------------------------------------------------------------------
# Validation


def _element_extent(el: Element) -> tuple[int, int] | None:
    """Smallest x and y the element can occupy, or None when unknown."""
    if isinstance(el, PieChart):
        r = el.radius + el.padding
        return el.position.x - r, el.position.y - r
    if isinstance(el, TextElement):
        # Baseline anchored; centred text may extend left of x.
        left = el.position.x
        if el.align is Align.CENTER and el.maxwidth:
            left -= el.maxwidth // 2
        return left, el.position.y - el.font.size
    return el.position.x, el.position.y


def _walk(model: InfographicModel) -> Iterator[tuple[str, Element]]:
    for section in (model.head, model.foot):
        if section is None:
            continue
        for t in section.texts():
            yield section.kind.value, t
        for el in section.children:
            yield section.kind.value, el
    for el in model.body:
        yield "", el


def validate(model: InfographicModel) -> list[Diagnostic]:
    """Semantic checks on a parsed model. Diagnostics carry line 1 (no source)."""
    out: list[Diagnostic] = []

    def add(sev: Severity, path: str, msg: str) -> None:
        out.append(Diagnostic(sev, 1, path, msg))

    w, h = model.canvas.width, model.canvas.height
    for scope, el in _walk(model):
        path = f"{scope}.{el.id}" if scope and not el.id.startswith(scope + ".") else el.id
        extent = _element_extent(el)
        if extent is not None and (extent[0] >= w or extent[1] >= h):
            add(Severity.WARNING, path, f"element lies outside canvas ({w}x{h})")
        if isinstance(el, TextElement):
            if el.lineheight is not None and el.maxwidth is None:
                add(Severity.WARNING, path, "lineheight without maxwidth has no effect")
            if has_placeholder(el.value):
                add(Severity.WARNING, path, "unresolved placeholder; bind data before rendering")
        if isinstance(el, (PieChart, BarChart)):
            numeric = [v for _, v in el.data if not isinstance(v, str)]
            if any(isinstance(v, str) for _, v in el.data):
                add(Severity.WARNING, f"{path}.data", "unresolved placeholder; bind data before rendering")
            elif not any(v > 0 for v in numeric):
                add(Severity.ERROR, f"{path}.data", "all data values are zero")
            if isinstance(el, PieChart) and has_placeholder(el.title):
                add(Severity.WARNING, f"{path}.title", "unresolved placeholder; bind data before rendering")
        if isinstance(el, Picturegraph) and isinstance(el.value, str):
            add(Severity.WARNING, f"{path}.value", "unresolved placeholder; bind data before rendering")
    return out


# --------------------------------------------------------------------------
# Canonical serializer


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def _number(v: float) -> str:
    s = repr(float(v))
    if "e" in s or "E" in s:
        s = format(Decimal(s), "f")
    return s


def _datum_text(v: float | str) -> str:
    return _quote(v) if isinstance(v, str) else _number(v)


def _background_lines(bg: Background | None, pad: str) -> list[str]:
    if bg is None:
        return []
    if bg.kind is BackgroundKind.COLOR:
        return [f"{pad}bgcolor: {bg.color.hex}"]
    key = "bgimage" if bg.kind is BackgroundKind.IMAGE else "bgpattern"
    return [f"{pad}{key}: {_quote(bg.source)}"]


def _text_lines(t: TextElement, pad: str) -> list[str]:
    lines = [f"{pad}font: {t.font}", f"{pad}value: {_quote(t.value)}", f"{pad}position: {t.position}",
             f"{pad}color: {t.color.hex}"]
    if t.align is not Align.LEFT:
        lines.append(f"{pad}align: {t.align.value}")
    if t.maxwidth is not None:
        lines.append(f"{pad}maxwidth: {t.maxwidth}")
    if t.lineheight is not None:
        lines.append(f"{pad}lineheight: {t.lineheight}")
    return lines


def _onoff(flag: bool) -> str:
    return "on" if flag else "off"


def _element_lines(el: Element, pad: str) -> list[str]:
    p = pad + "  "
    lines = [f"{pad}{el.id}:"]
    if isinstance(el, Box):
        lines += [f"{p}position: {el.position}", f"{p}size: {el.size}"] + _background_lines(el.background, p)
    elif isinstance(el, ImageElement):
        lines += [f"{p}position: {el.position}", f"{p}size: {el.size}", f"{p}src: {_quote(el.source)}"]
    elif isinstance(el, TextElement):
        lines += _text_lines(el, p)
    elif isinstance(el, PieChart):
        lines += [f"{p}position: {el.position}", f"{p}type: {el.style.value}", f"{p}size: {el.radius}",
                  f"{p}padding: {el.padding}", f"{p}colors: {','.join(c.hex for c in el.colors)}"]
        if el.title:
            lines.append(f"{p}title: {_quote(el.title)}")
        if el.background is not None:
            lines.append(f"{p}bgcolor: {el.background.hex}")
        lines += [f"{p}showpercentage: {_onoff(el.show_percentage)}", f"{p}showtitle: {_onoff(el.show_title)}",
                  f"{p}showlegend: {_onoff(el.show_legend)}", f"{p}data:"]
        lines += [f"{p}  {_quote(label)}: {_datum_text(v)}" for label, v in el.data]
    elif isinstance(el, BarChart):
        lines += [f"{p}position: {el.position}", f"{p}size: {el.size}",
                  f"{p}colors: {','.join(c.hex for c in el.colors)}"]
        if el.background is not None:
            lines.append(f"{p}bgcolor: {el.background.hex}")
        lines += [f"{p}showvalues: {_onoff(el.show_values)}", f"{p}data:"]
        lines += [f"{p}  {_quote(label)}: {_datum_text(v)}" for label, v in el.data]
    elif isinstance(el, Picturegraph):
        lines += [f"{p}position: {el.position}", f"{p}icon: {_quote(el.icon_source)}", f"{p}iconsize: {el.icon_size}",
                  f"{p}columns: {el.columns}", f"{p}spacing: {el.spacing}", f"{p}total: {el.total}",
                  f"{p}value: {_datum_text(el.value)}", f"{p}fillcolor: {el.fill_color.hex}",
                  f"{p}emptycolor: {el.empty_color.hex}"]
    return lines


def _section_lines(section: Section | None, name: str) -> list[str]:
    if section is None:
        return [f"{name}: off"]
    lines = [f"{name}:"]
    if section.position is not None:
        lines.append(f"  position: {section.position}")
    if section.size is not None:
        lines.append(f"  size: {section.size}")
    lines += _background_lines(section.background, "  ")
    for key in ("title", "subtitle", "text"):
        t = getattr(section, key)
        if t is not None:
            lines.append(f"  {key}:")
            lines += _text_lines(t, "    ")
    for child in section.children:
        lines += _element_lines(child, "  ")
    return lines


def canonicalize(model: InfographicModel) -> str:
    """Serialize a model in canonical spelling; ``parse_model`` inverts it."""
    lines = _background_lines(model.background, "")
    lines.append(f"bgsize: {model.canvas}")
    lines += _section_lines(model.head, "head")
    lines += _section_lines(model.foot, "foot")
    for el in model.body:
        lines += _element_lines(el, "")
    return "\n".join(lines) + "\n"
