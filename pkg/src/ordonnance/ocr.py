"""OCR layout ingestion.

Parses the minimal line-level OCR JSON payload (text plus page-relative
bounding geometry, optionally word boxes) into an immutable document whose
lines are sorted into reading order: page ascending, then top, then left.

Payload schema::

    {"doc_id": str, "pages": int, "lines": [
        {"id": str, "page": int, "text": str,
         "bbox": {"left": f, "top": f, "width": f, "height": f},
         "words": [{"text": str, "bbox": {...}}]}]}

All coordinates are fractions of the page size in [0, 1]; values within
1e-6 of a bound are clamped. ``words`` is optional per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import EmptyDocument, GeometryError, SchemaError

_EPS = 1e-6


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in page-relative fractions."""

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"degenerate box: width={self.width}, height={self.height}")
        if self.left < 0 or self.top < 0:
            raise GeometryError(f"negative origin: left={self.left}, top={self.top}")
        if self.left + self.width > 1 + _EPS or self.top + self.height > 1 + _EPS:
            raise GeometryError("box extends beyond page bounds")

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height


@dataclass(frozen=True)
class OcrLine:
    line_id: str
    raw_text: str
    bbox: BoundingBox
    page: int
    words: tuple[tuple[str, BoundingBox], ...] = field(default=())


@dataclass(frozen=True)
class OcrDocument:
    doc_id: str
    pages: int
    lines: tuple[OcrLine, ...]


def reading_order_key(line: OcrLine) -> tuple[int, float, float]:
    """Sort key placing lines in reading order; stable for equal keys."""
    return (line.page, line.bbox.top, line.bbox.left)


def _clamp(value: float) -> float:
    if -_EPS <= value < 0:
        return 0.0
    if 1 < value <= 1 + _EPS:
        return 1.0
    return value


def _require(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{where}: missing required field {key!r}")
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{where}.{key}: expected number, got {type(value).__name__}")
        return float(value)
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"{where}.{key}: expected int, got bool")
    if not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _parse_bbox(obj: Any, where: str) -> BoundingBox:
    left = _require(obj, "left", float, where)
    top = _require(obj, "top", float, where)
    width = _require(obj, "width", float, where)
    height = _require(obj, "height", float, where)
    for name, v in (("left", left), ("top", top), ("width", width), ("height", height)):
        if v < -_EPS or v > 1 + _EPS:
            raise GeometryError(f"{where}.{name}: {v} outside [-1e-6, 1+1e-6]")
    if width <= 0 or height <= 0:
        raise GeometryError(f"{where}: non-positive extent (width={width}, height={height})")
    return BoundingBox(_clamp(left), _clamp(top), _clamp(width), _clamp(height))


def _parse_line(obj: Any, pages: int, idx: int) -> OcrLine:
    where = f"lines[{idx}]"
    line_id = _require(obj, "id", str, where)
    page = _require(obj, "page", int, where)
    if page < 1 or page > pages:
        raise SchemaError(f"{where}.page: {page} outside 1..{pages}")
    text = _require(obj, "text", str, where)
    if not text.strip():
        raise SchemaError(f"{where}.text: empty after whitespace trim")
    bbox = _parse_bbox(_require(obj, "bbox", dict, where), f"{where}.bbox")

    words: list[tuple[str, BoundingBox]] = []
    raw_words = obj.get("words", [])
    if not isinstance(raw_words, list):
        raise SchemaError(f"{where}.words: expected list")
    for w_idx, w in enumerate(raw_words):
        w_where = f"{where}.words[{w_idx}]"
        w_text = _require(w, "text", str, w_where)
        w_bbox = _parse_bbox(_require(w, "bbox", dict, w_where), f"{w_where}.bbox")
        words.append((w_text, w_bbox))
    if words:
        joined = " ".join(w for w, _ in words)
        if joined.split() != text.split():
            raise SchemaError(f"{where}: word texts do not reassemble the line text")
    return OcrLine(line_id=line_id, raw_text=text, bbox=bbox, page=page, words=tuple(words))


def parse_ocr_document(payload: bytes | str) -> OcrDocument:
    """Parse and validate an OCR JSON payload into reading order.

    Raises SchemaError for structural problems, GeometryError for bad
    boxes, EmptyDocument when there are no lines. Never drops a line
    silently.
    """
    try:
        data = json.loads(payload)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"payload is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("top-level payload must be a JSON object")

    doc_id = _require(data, "doc_id", str, "document")
    pages = _require(data, "pages", int, "document")
    if pages < 1:
        raise SchemaError(f"document.pages: {pages} is not positive")
    raw_lines = _require(data, "lines", list, "document")
    if not raw_lines:
        raise EmptyDocument(f"document {doc_id!r} has no lines")

    lines = [_parse_line(obj, pages, i) for i, obj in enumerate(raw_lines)]
    seen: set[str] = set()
    for line in lines:
        if line.line_id in seen:
            raise SchemaError(f"duplicate line id {line.line_id!r}")
        seen.add(line.line_id)
    lines.sort(key=reading_order_key)
    return OcrDocument(doc_id=doc_id, pages=pages, lines=tuple(lines))


def document_to_payload(doc: OcrDocument) -> dict:
    """Canonical plain-dict form of a document; parse(dumps(...)) is a fixed point."""
    return {
        "doc_id": doc.doc_id,
        "pages": doc.pages,
        "lines": [
            {
                "id": line.line_id,
                "page": line.page,
                "text": line.raw_text,
                "bbox": {
                    "left": line.bbox.left,
                    "top": line.bbox.top,
                    "width": line.bbox.width,
                    "height": line.bbox.height,
                },
                "words": [
                    {"text": w, "bbox": {"left": b.left, "top": b.top, "width": b.width, "height": b.height}}
                    for w, b in line.words
                ],
            }
            for line in doc.lines
        ],
    }
