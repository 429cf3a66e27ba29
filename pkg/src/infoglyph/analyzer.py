"""Component-type census of models, in the layout of a per-infographic tally table."""

from __future__ import annotations

import csv
import io
from typing import Iterable

from .model import (CENSUS_IDS, BarChart, Box, Census, ImageElement, InfographicModel, PieChart, Picturegraph,
                    Role, TextElement)

COMPONENT_NAMES = {
    "C1": "Head section",
    "C2": "Title text",
    "C3": "Subtitle text",
    "C4": "Introduction text",
    "C5": "Logo",
    "C6": "Body section",
    "C7": "Box",
    "C8": "Box title text",
    "C9": "Body text",
    "C10": "Table",
    "C11": "Pie chart",
    "C12": "Bar chart",
    "C13": "Grouped bar chart",
    "C14": "Stacked bar chart",
    "C15": "Picturegraph",
    "C16": "Line chart",
    "C17": "Map chart",
    "C18": "Foot section",
    "C19": "Foot title text",
    "C20": "Foot text",
    "C21": "Logo",
    "C22": "Link to full report",
}

# Component types with no DSL construct; shown as "n/a" rather than 0.
NOT_COMPUTABLE = ("C4", "C10", "C13", "C14", "C16", "C17", "C22")
TABLE_ORDER = tuple(f"C{i}" for i in range(1, 23))
BODY_IMAGES_ROW = "body images"


def _count(elements: Iterable, kind) -> int:
    return sum(1 for el in elements if isinstance(el, kind))


def census(model: InfographicModel) -> Census:
    head, foot, body = model.head, model.foot, model.body
    boxes = _count(body, Box)
    for section in (head, foot):
        if section is not None:
            boxes += _count(section.children, Box)
    counts = {
        "C1": int(head is not None),
        "C2": int(head is not None and head.title is not None),
        "C3": int(head is not None and head.subtitle is not None),
        "C5": _count(head.children, ImageElement) if head else 0,
        "C6": 1,
        "C7": boxes,
        "C8": sum(1 for el in body if isinstance(el, TextElement) and el.role is Role.TITLE),
        "C9": sum(1 for el in body if isinstance(el, TextElement) and el.role is Role.BODY),
        "C11": _count(model.elements(), PieChart),
        "C12": _count(model.elements(), BarChart),
        "C15": _count(model.elements(), Picturegraph),
        "C18": int(foot is not None),
        "C19": int(foot is not None and foot.title is not None),
        "C20": int(foot is not None and (foot.text is not None or _count(foot.children, TextElement) > 0)),
        "C21": _count(foot.children, ImageElement) if foot else 0,
    }
    return Census(counts, body_images=_count(body, ImageElement))


def census_rows(models: list[tuple[str, InfographicModel]]) -> list[list[str]]:
    """Header plus one row per component type, the body-images row, Sum and Count."""
    if not models:
        raise ValueError("census_table needs at least one model")
    results = [census(m) for _, m in models]
    rows = [["Id", "Name"] + [name for name, _ in models]]
    for cid in TABLE_ORDER:
        if cid in NOT_COMPUTABLE:
            cells = ["n/a"] * len(results)
        else:
            cells = [str(c[cid]) for c in results]
        rows.append([cid, COMPONENT_NAMES[cid]] + cells)
    rows.append(["", BODY_IMAGES_ROW] + [str(c.body_images) for c in results])
    rows.append(["", "Sum"] + [str(c.sum) for c in results])
    rows.append(["", "Count"] + [str(c.count) for c in results])
    return rows


def census_table(models: list[tuple[str, InfographicModel]], fmt: str = "csv") -> str:
    """Census of several models as CSV (``fmt="csv"``) or TSV (``fmt="tsv"``).

    Columns follow input order. Sum and Count cover the component-type rows
    only, not the body-images row.
    """
    if fmt not in ("csv", "tsv"):
        raise ValueError(f"unknown format {fmt!r}; expected csv or tsv")
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
    writer.writerows(census_rows(models))
    return buf.getvalue()


__all__ = ["CENSUS_IDS", "COMPONENT_NAMES", "NOT_COMPUTABLE", "census", "census_rows", "census_table"]
