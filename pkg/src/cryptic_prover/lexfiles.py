"""Loaders for the line-oriented lexicon files.

All files are UTF-8 text with ``#`` comment lines and blank lines ignored.
Two-column files are TAB-separated:

* ``abbreviations.tsv`` - ``short<TAB>phrase``
* ``thesaurus.tsv``     - ``phrase<TAB>candidate``
* ``indicators.tsv``    - ``ACTION<TAB>phrase`` (see ``ActionKind`` names)
* ``homophones.tsv``    - ``word<TAB>word``, unordered pairs
* ``wordlist.txt``      - one candidate per line

Matching is case-folded throughout, but the original display form of
abbreviation expansions is kept for hint rendering, in file order.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from cryptic_prover.core import ActionKind, normalize_letters


class LexiconFormatError(ValueError):
    """A lexicon file line does not have the expected columns."""


def seed_path(name: str) -> Path:
    """Path of a packaged seed data file, e.g. ``lexicon/thesaurus.tsv``."""
    return Path(str(resources.files("cryptic_prover").joinpath("data", name)))


def _data_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def _two_columns(path: str | Path) -> Iterator[tuple[str, str]]:
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise LexiconFormatError(f"{path}:{lineno}: expected two TAB-separated columns")
        yield parts[0].strip(), parts[1].strip()


def load_abbreviations(path: str | Path) -> dict[str, list[str]]:
    """Map case-folded short form to its expansions in display form, file order."""
    table: dict[str, list[str]] = {}
    for short, phrase in _two_columns(path):
        entries = table.setdefault(short.casefold(), [])
        if phrase not in entries:
            entries.append(phrase)
    return table


def invert_abbreviations(table: dict[str, list[str]]) -> dict[str, set[str]]:
    """Map case-folded phrase to the set of normalised short forms."""
    inverse: dict[str, set[str]] = {}
    for short, phrases in table.items():
        for phrase in phrases:
            inverse.setdefault(phrase.casefold(), set()).add(normalize_letters(short))
    return inverse


def load_thesaurus(path: str | Path) -> dict[str, list[str]]:
    """Map case-folded phrase to its candidates in display form, file order."""
    table: dict[str, list[str]] = {}
    for phrase, candidate in _two_columns(path):
        entries = table.setdefault(phrase.casefold(), [])
        if candidate not in entries:
            entries.append(candidate)
    return table


def load_indicators(paths: Iterable[str | Path]) -> dict[str, frozenset[ActionKind]]:
    """Map case-folded signifier phrase to the set of actions it can signify."""
    table: dict[str, set[ActionKind]] = {}
    for path in paths:
        for lineno, line in _data_lines(path):
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconFormatError(
                    f"{path}:{lineno}: expected ACTION<TAB>phrase"
                )
            try:
                action = ActionKind.from_name(parts[0].strip())
            except ValueError as exc:
                raise LexiconFormatError(f"{path}:{lineno}: {exc}") from None
            table.setdefault(parts[1].strip().casefold(), set()).add(action)
    return {phrase: frozenset(actions) for phrase, actions in table.items()}


def load_homophones(path: str | Path) -> set[frozenset[str]]:
    """Unordered homophone pairs, case-folded."""
    pairs = set()
    for left, right in _two_columns(path):
        pairs.add(frozenset((left.casefold(), right.casefold())))
    return pairs


def load_wordlist(path: str | Path) -> list[str]:
    """Candidate words as normalised letters, file order, duplicates dropped."""
    seen = set()
    words = []
    for _, line in _data_lines(path):
        word = normalize_letters(line)
        if word and word not in seen:
            seen.add(word)
            words.append(word)
    return words


@lru_cache(maxsize=1)
def seed_indicator_table() -> dict[str, frozenset[ActionKind]]:
    return load_indicators(
        [seed_path("lexicon/indicators.tsv"), seed_path("lexicon/indicators_extra.tsv")]
    )


@lru_cache(maxsize=1)
def seed_abbreviation_inverse() -> dict[str, set[str]]:
    return invert_abbreviations(load_abbreviations(seed_path("lexicon/abbreviations.tsv")))
