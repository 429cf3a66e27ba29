"""Domain types shared by the parser, binder, renderer and analyzer.

Every type is a frozen dataclass that validates itself on construction.
A violated invariant raises :class:`ModelError` naming the offending field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Iterator, Union


class ModelError(ValueError):
    """An invariant of a domain type was violated."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ModelError(field_name, message)


def _is_int(value: object) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class Dimensions:
    width: int
    height: int

    def __post_init__(self):
        _require(_is_int(self.width) and self.width >= 1, "width", f"must be an integer >= 1, got {self.width!r}")
        _require(_is_int(self.height) and self.height >= 1, "height", f"must be an integer >= 1, got {self.height!r}")

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class Point:
    x: int
    y: int

    def __post_init__(self):
        _require(_is_int(self.x) and self.x >= 0, "x", f"must be an integer >= 0, got {self.x!r}")
        _require(_is_int(self.y) and self.y >= 0, "y", f"must be an integer >= 0, got {self.y!r}")

    def __str__(self) -> str:
        return f"{self.x}x{self.y}"


@dataclass(frozen=True)
class Color:
    r: int
    g: int
    b: int
    a: int = 255

    def __post_init__(self):
        for name in ("r", "g", "b", "a"):
            v = getattr(self, name)
            _require(_is_int(v) and 0 <= v <= 255, name, f"must be an integer in 0..255, got {v!r}")

    @property
    def hex(self) -> str:
        """Six lowercase hex digits, alpha dropped."""
        return f"{self.r:02x}{self.g:02x}{self.b:02x}"

    @property
    def rgba(self) -> tuple[int, int, int, int]:
        return (self.r, self.g, self.b, self.a)


BLACK = Color(0, 0, 0)
WHITE = Color(255, 255, 255)


@dataclass(frozen=True)
class FontSpec:
    """A CSS-like font shorthand. ``weight`` is "normal", "bold" or 100..900."""

    size: int
    family: str
    weight: Union[str, int] = "normal"

    def __post_init__(self):
        _require(_is_int(self.size) and self.size >= 1, "size", f"must be an integer >= 1, got {self.size!r}")
        _require(isinstance(self.family, str) and self.family.strip() != "", "family", "must be non-empty")
        w = self.weight
        ok = w in ("normal", "bold") or (_is_int(w) and 100 <= w <= 900 and w % 100 == 0)
        _require(ok, "weight", f"must be normal, bold or 100..900 in hundreds, got {w!r}")

    @property
    def is_bold(self) -> bool:
        return self.weight == "bold" or (_is_int(self.weight) and self.weight >= 600)

    def __str__(self) -> str:
        prefix = "" if self.weight == "normal" else f"{self.weight} "
        return f"{prefix}{self.size}px {self.family}"


class BackgroundKind(str, Enum):
    COLOR = "color"
    IMAGE = "image"
    PATTERN = "pattern"


@dataclass(frozen=True)
class Background:
    kind: BackgroundKind
    color: Color | None = None
    source: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BackgroundKind(self.kind))
        if self.kind is BackgroundKind.COLOR:
            _require(self.color is not None, "color", "required for a color background")
            _require(self.source is None, "source", "must be absent for a color background")
        else:
            _require(bool(self.source), "source", f"required for a {self.kind.value} background")

    @classmethod
    def of_color(cls, color: Color) -> "Background":
        return cls(BackgroundKind.COLOR, color=color)


class Role(str, Enum):
    BODY = "body"
    TITLE = "title"
    SUBTITLE = "subtitle"


class Align(str, Enum):
    LEFT = "left"
    CENTER = "center"


_URL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")


def _valid_source(src: object) -> bool:
    if not isinstance(src, str) or not src.strip():
        return False
    return bool(_URL_RE.match(src)) or src.startswith(("/", "./", "../")) or "/" in src or "." in src


@dataclass(frozen=True)
class TextElement:
    id: str
    value: str
    font: FontSpec
    position: Point
    color: Color = BLACK
    role: Role = Role.BODY
    align: Align = Align.LEFT
    maxwidth: int | None = None
    lineheight: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "align", Align(self.align))
        _require(isinstance(self.value, str), "value", "must be a string")
        if self.maxwidth is not None:
            _require(_is_int(self.maxwidth) and self.maxwidth >= 1, "maxwidth", f"must be an integer >= 1, got {self.maxwidth!r}")
        if self.lineheight is not None:
            _require(_is_int(self.lineheight) and self.lineheight >= 1, "lineheight", f"must be an integer >= 1, got {self.lineheight!r}")


@dataclass(frozen=True)
class Box:
    id: str
    position: Point
    size: Dimensions
    background: Background


@dataclass(frozen=True)
class ImageElement:
    id: str
    position: Point
    size: Dimensions
    source: str

    def __post_init__(self):
        _require(_valid_source(self.source), "source", f"must be an absolute URL or a path, got {self.source!r}")


# Chart data values are floats once bound; before binding a datum may be a
# "{{name}}" placeholder string.
DataValue = Union[float, str]


def _check_data(data: tuple) -> tuple:
    data = tuple((str(label), value) for label, value in data)
    _require(len(data) > 0, "data", "must not be empty")
    for label, value in data:
        if isinstance(value, str):
            continue
        _require(isinstance(value, (int, float, Decimal)) and not isinstance(value, bool), "data", f"{label}: value must be a number")
        v = float(value)
        _require(v == v and v >= 0 and v != float("inf"), "data", f"{label}: value must be a finite number >= 0, got {value!r}")
    return tuple((label, value if isinstance(value, str) else float(value)) for label, value in data)


class PieStyle(str, Enum):
    PIE = "pie"
    DONUT = "donut"


@dataclass(frozen=True)
class PieChart:
    id: str
    position: Point
    radius: int
    colors: tuple[Color, ...]
    data: tuple[tuple[str, DataValue], ...]
    padding: int = 0
    style: PieStyle = PieStyle.PIE
    title: str = ""
    background: Color | None = None
    show_percentage: bool = False
    show_title: bool = False
    show_legend: bool = False

    def __post_init__(self):
        object.__setattr__(self, "style", PieStyle(self.style))
        object.__setattr__(self, "colors", tuple(self.colors))
        _require(_is_int(self.radius) and self.radius >= 1, "radius", f"must be an integer >= 1, got {self.radius!r}")
        _require(_is_int(self.padding) and self.padding >= 0, "padding", f"must be an integer >= 0, got {self.padding!r}")
        _require(len(self.colors) >= 1, "colors", "at least one color is required")
        object.__setattr__(self, "data", _check_data(self.data))

    def color_for(self, i: int) -> Color:
        return self.colors[i % len(self.colors)]


@dataclass(frozen=True)
class BarChart:
    id: str
    position: Point
    size: Dimensions
    colors: tuple[Color, ...]
    data: tuple[tuple[str, DataValue], ...]
    background: Color | None = None
    show_values: bool = False

    def __post_init__(self):
        object.__setattr__(self, "colors", tuple(self.colors))
        _require(len(self.colors) >= 1, "colors", "at least one color is required")
        object.__setattr__(self, "data", _check_data(self.data))

    def color_for(self, i: int) -> Color:
        return self.colors[i % len(self.colors)]


@dataclass(frozen=True)
class Picturegraph:
    id: str
    position: Point
    icon_source: str
    icon_size: Dimensions
    total: int
    value: DataValue
    columns: int = 10
    spacing: int = 0
    fill_color: Color = BLACK
    empty_color: Color = Color(204, 204, 204)

    def __post_init__(self):
        _require(_valid_source(self.icon_source), "icon_source", f"must be an absolute URL or a path, got {self.icon_source!r}")
        _require(_is_int(self.columns) and self.columns >= 1, "columns", f"must be an integer >= 1, got {self.columns!r}")
        _require(_is_int(self.spacing) and self.spacing >= 0, "spacing", f"must be an integer >= 0, got {self.spacing!r}")
        _require(_is_int(self.total) and self.total >= 1, "total", f"must be an integer >= 1, got {self.total!r}")
        if not isinstance(self.value, str):
            _require(isinstance(self.value, (int, float, Decimal)) and not isinstance(self.value, bool), "value", "must be a number")
            v = float(self.value)
            _require(0 <= v <= self.total, "value", f"must lie in [0, total={self.total}], got {self.value!r}")
            object.__setattr__(self, "value", v)


Element = Union[Box, TextElement, ImageElement, PieChart, BarChart, Picturegraph]
ELEMENT_TYPES = (Box, TextElement, ImageElement, PieChart, BarChart, Picturegraph)


class SectionKind(str, Enum):
    HEAD = "head"
    FOOT = "foot"


@dataclass(frozen=True)
class Section:
    kind: SectionKind
    position: Point | None = None
    size: Dimensions | None = None
    background: Background | None = None
    title: TextElement | None = None
    subtitle: TextElement | None = None
    text: TextElement | None = None
    children: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", SectionKind(self.kind))
        object.__setattr__(self, "children", tuple(self.children))
        for child in self.children:
            _require(isinstance(child, ELEMENT_TYPES), "children", f"not an element: {child!r}")

    def texts(self) -> Iterator[TextElement]:
        """Title, subtitle and text, in paint order, skipping absent ones."""
        for t in (self.title, self.subtitle, self.text):
            if t is not None:
                yield t


@dataclass(frozen=True)
class InfographicModel:
    canvas: Dimensions
    background: Background = Background.of_color(WHITE)
    head: Section | None = None
    foot: Section | None = None
    body: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if self.head is not None:
            _require(self.head.kind is SectionKind.HEAD, "head", "must be a head section")
        if self.foot is not None:
            _require(self.foot.kind is SectionKind.FOOT, "foot", "must be a foot section")
        for el in self.body:
            _require(isinstance(el, ELEMENT_TYPES), "body", f"not an element: {el!r}")
        seen: set[str] = set()
        for el in self.elements():
            _require(el.id not in seen, "body", f"duplicate element id {el.id!r}")
            seen.add(el.id)

    def elements(self) -> Iterator[Element]:
        """All id-carrying elements: head children, body, foot children."""
        for section in (self.head, self.foot):
            if section is not None:
                yield from section.children
        yield from self.body


@dataclass(frozen=True)
class Account:
    """Direct indicator values plus formulas for indirect indicators."""

    values: dict[str, Decimal] = field(default_factory=dict)
    formulas: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        values = {str(k): Decimal(str(v)) if not isinstance(v, Decimal) else v for k, v in self.values.items()}
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "formulas", {str(k): str(v) for k, v in self.formulas.items()})
        both = sorted(set(values) & set(self.formulas))
        _require(not both, "formulas", f"names defined both as value and formula: {', '.join(both)}")
        # Acyclicity is checked lazily by the binder, which owns the expression grammar.

    def __hash__(self):
        return hash((tuple(sorted(self.values.items())), tuple(sorted(self.formulas.items()))))

    def __contains__(self, name: str) -> bool:
        return name in self.values or name in self.formulas


# Component-type ids the census can compute, in table order.
CENSUS_IDS = ("C1", "C2", "C3", "C5", "C6", "C7", "C8", "C9", "C11", "C12", "C15", "C18", "C19", "C20", "C21")


@dataclass(frozen=True)
class Census:
    counts: dict[str, int]
    body_images: int = 0

    def __post_init__(self):
        for key, n in self.counts.items():
            _require(key in CENSUS_IDS, "counts", f"unknown component type {key!r}")
            _require(_is_int(n) and n >= 0, "counts", f"{key}: count must be an integer >= 0")
        object.__setattr__(self, "counts", {k: self.counts.get(k, 0) for k in CENSUS_IDS})

    def __getitem__(self, key: str) -> int:
        return self.counts[key]

    def __hash__(self):
        return hash((tuple(self.counts.items()), self.body_images))

    @property
    def sum(self) -> int:
        return sum(self.counts.values())

    @property
    def count(self) -> int:
        return sum(1 for n in self.counts.values() if n)


@dataclass(frozen=True)
class RasterImage:
    width: int
    height: int
    pixels: bytes = field(repr=False)

    def __post_init__(self):
        _require(_is_int(self.width) and self.width >= 1, "width", "must be an integer >= 1")
        _require(_is_int(self.height) and self.height >= 1, "height", "must be an integer >= 1")
        object.__setattr__(self, "pixels", bytes(self.pixels))
        _require(len(self.pixels) == self.width * self.height * 4, "pixels",
                 f"expected {self.width * self.height * 4} bytes, got {len(self.pixels)}")

    def pixel(self, x: int, y: int) -> tuple[int, int, int, int]:
        i = (y * self.width + x) * 4
        return tuple(self.pixels[i:i + 4])
