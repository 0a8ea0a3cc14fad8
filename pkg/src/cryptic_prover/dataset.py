"""Reading and writing annotated puzzle files.

A puzzle file is a YAML stream; each document is one puzzle with ``title``,
``url``, ``author`` and a ``clues`` list.  Each clue entry carries:

* ``clue``     - surface text with the definition span(s) wrapped in braces
* ``pattern``  - the answer enumeration, as a string such as ``'8'`` or ``'3,4'``
* ``ad``       - ``A`` (across) or ``D`` (down); defaults to across
* ``answer``   - the gold answer, when known
* ``wordplay`` - community-notation wordplay annotation, when known

Unknown keys on a clue entry are preserved on round-trip but otherwise
ignored.  ``save_puzzles`` writes keys in a canonical order so that
load -> save -> load is a fixed point.

Clues get stable identifiers of the form ``<url-slug>#<index>`` so that
experiment records can be resumed and joined across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable
from urllib.parse import urlparse

import yaml

from cryptic_prover.core import Clue, DefinitionSpan, Direction, Pattern, PatternError

_DOC_KEYS = ("title", "url", "author", "clues")
_CLUE_KEYS = ("clue", "pattern", "ad", "answer", "wordplay")
_REQUIRED_CLUE_KEYS = ("clue", "pattern")


class SchemaError(ValueError):
    """A puzzle file does not match the expected shape."""


class UnbalancedBraces(ValueError):
    """A definition annotation has stray or nested braces."""


def extract_definition(annotated: str) -> tuple[list[DefinitionSpan], str]:
    """Split a brace-annotated clue into its spans and plain surface.

    Returned span offsets index into the plain surface, so re-inserting
    braces at those offsets reproduces ``annotated`` exactly (see
    ``insert_definition``).
    """
    spans: list[DefinitionSpan] = []
    plain: list[str] = []
    open_at: int | None = None
    for ch in annotated:
        if ch == "{":
            if open_at is not None:
                raise UnbalancedBraces(f"nested '{{' in {annotated!r}")
            open_at = len(plain)
        elif ch == "}":
            if open_at is None:
                raise UnbalancedBraces(f"unmatched '}}' in {annotated!r}")
            end = len(plain)
            text = "".join(plain[open_at:end])
            spans.append(DefinitionSpan(open_at, end, text))
            open_at = None
        else:
            plain.append(ch)
    if open_at is not None:
        raise UnbalancedBraces(f"unclosed '{{' in {annotated!r}")
    return spans, "".join(plain)


def insert_definition(spans: Iterable[DefinitionSpan], surface: str) -> str:
    """Inverse of ``extract_definition``: wrap each span in braces."""
    out = surface
    for span in sorted(spans, key=lambda s: s.start, reverse=True):
        out = out[: span.start] + "{" + out[span.start : span.end] + "}" + out[span.end :]
    return out


@dataclass(frozen=True)
class PuzzleDocument:
    title: str
    url: str
    author: str
    clues: tuple[Clue, ...]


def _url_slug(url: str) -> str:
    path = urlparse(url).path.rstrip("/")
    if "/" in path:
        slug = path.rsplit("/", 1)[1]
    else:
        slug = path
    return slug or urlparse(url).netloc or "puzzle"


def _clue_from_entry(entry: Any, index: int, slug: str, doc_title: str) -> Clue:
    where = f"clue {index} of {doc_title!r}"
    if not isinstance(entry, dict):
        raise SchemaError(f"{where}: expected a mapping, got {type(entry).__name__}")
    for key in _REQUIRED_CLUE_KEYS:
        if key not in entry:
            raise SchemaError(f"{where}: missing key {key!r}")
    annotated = entry["clue"]
    if not isinstance(annotated, str):
        raise SchemaError(f"{where}: 'clue' must be a string")
    try:
        spans, surface = extract_definition(annotated)
    except UnbalancedBraces as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    try:
        pattern = Pattern.parse(str(entry["pattern"]))
    except PatternError as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    ad = entry.get("ad", "A")
    try:
        direction = Direction.from_letter(ad)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    answer = entry.get("answer")
    if answer is not None and not isinstance(answer, str):
        raise SchemaError(f"{where}: 'answer' must be a string")
    wordplay = entry.get("wordplay")
    if wordplay is not None and not isinstance(wordplay, str):
        raise SchemaError(f"{where}: 'wordplay' must be a string")
    extras = tuple((k, v) for k, v in entry.items() if k not in _CLUE_KEYS)
    try:
        return Clue(
            surface=surface,
            pattern=pattern,
            direction=direction,
            gold_answer=answer,
            gold_definition=annotated if spans else None,
            gold_wordplay=wordplay,
            clue_id=f"{slug}#{index}",
            extras=extras,
        )
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def _document_from_mapping(raw: Any, doc_index: int) -> PuzzleDocument:
    if not isinstance(raw, dict):
        raise SchemaError(f"document {doc_index}: expected a mapping")
    for key in _DOC_KEYS:
        if key not in raw:
            raise SchemaError(f"document {doc_index}: missing key {key!r}")
    unknown = set(raw) - set(_DOC_KEYS)
    if unknown:
        raise SchemaError(f"document {doc_index}: extra key {sorted(unknown)[0]!r}")
    clues_raw = raw["clues"]
    if not isinstance(clues_raw, list):
        raise SchemaError(f"document {doc_index}: 'clues' must be a list")
    title = str(raw["title"])
    slug = _url_slug(str(raw["url"]))
    clues = tuple(
        _clue_from_entry(entry, i, slug, title) for i, entry in enumerate(clues_raw)
    )
    return PuzzleDocument(title=title, url=str(raw["url"]), author=str(raw["author"]), clues=clues)


def load_puzzles(path: str | Path) -> list[PuzzleDocument]:
    """Load every puzzle document from a YAML file."""
    with open(path, "r", encoding="utf-8") as fh:
        raw_docs = [d for d in yaml.safe_load_all(fh) if d is not None]
    return [_document_from_mapping(raw, i) for i, raw in enumerate(raw_docs)]


def _clue_to_mapping(clue: Clue) -> dict[str, Any]:
    out: dict[str, Any] = {
        "clue": clue.gold_definition if clue.gold_definition is not None else clue.surface,
        "pattern": clue.pattern.render(),
        "ad": clue.direction.letter,
    }
    if clue.gold_answer is not None:
        out["answer"] = clue.gold_answer
    if clue.gold_wordplay is not None:
        out["wordplay"] = clue.gold_wordplay
    for key, value in clue.extras:
        out[key] = value
    return out


def save_puzzles(path: str | Path, documents: Iterable[PuzzleDocument]) -> None:
    """Write puzzle documents as a YAML stream in canonical key order."""
    payload = [
        {
            "title": doc.title,
            "url": doc.url,
            "author": doc.author,
            "clues": [_clue_to_mapping(c) for c in doc.clues],
        }
        for doc in documents
    ]
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump_all(
            payload,
            fh,
            allow_unicode=True,
            sort_keys=False,
            default_flow_style=False,
        )
