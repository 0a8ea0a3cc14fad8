"""Pick the close decoy answer: nearest pattern-fitting word to a definition.

The decoy used by the experiment is the wordlist entry that fits the
clue's letter pattern, is not the ground-truth answer, and sits closest
to the definition span under a pre-computed word embedding table.  The
table loads from the common text vector format (header ``<count>
<dimension>``, then ``word v1 ... vd`` per line), so published vector
exports work unmodified.

No embeddings are trained here.  For deterministic offline work the
module can also write a pseudo-embedding table whose vectors are pure
functions of the word (sha256-seeded), which is what the packaged
16-dimension fixture was generated from.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from cryptic_prover.core import Pattern, normalize_letters, pattern_matches

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z]+")


class FormatError(ValueError):
    """An embedding file line that cannot be read; carries the line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} at line {line}")
        self.line = line


class DimensionMismatch(ValueError):
    """Vectors of different lengths where equal lengths are required."""


class EmptyCandidateSet(LookupError):
    """No wordlist entry survives the pattern and exclusion filters."""


@dataclass(frozen=True)
class EmbeddingTable:
    """Case-folded word vectors, all of one dimension."""

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    source: str = ""

    def __post_init__(self):
        for word, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise DimensionMismatch(
                    f"vector for {word!r} has {vec.shape[0]} values, "
                    f"table dimension is {self.dimension}"
                )

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.vectors

    def vector(self, word: str):
        """The vector for one word, or None when out of vocabulary."""
        return self.vectors.get(word.casefold())

    def embed_phrase(self, phrase: str) -> np.ndarray:
        """Mean of the in-vocabulary token vectors; zero when none are."""
        found = [
            self.vectors[token]
            for token in _TOKEN.findall(phrase.casefold())
            if token in self.vectors
        ]
        if not found:
            return np.zeros(self.dimension)
        return np.mean(found, axis=0)


def load_embeddings(path: Union[str, Path]) -> EmbeddingTable:
    """Read a text vector file; duplicate words keep the first occurrence."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("missing '<count> <dimension>' header", line=1)
    header = lines[0].split()
    if len(header) != 2 or not all(part.isdigit() for part in header):
        raise FormatError("header must be '<count> <dimension>'", line=1)
    dimension = int(header[1])
    if dimension < 1:
        raise FormatError("dimension must be at least 1", line=1)

    vectors: dict[str, np.ndarray] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        word = parts[0].casefold()
        if len(parts) - 1 != dimension:
            raise DimensionMismatch(
                f"line {number}: expected {dimension} values for {word!r}, "
                f"got {len(parts) - 1}"
            )
        try:
            values = np.array([float(v) for v in parts[1:]])
        except ValueError:
            raise FormatError(f"non-numeric value for {word!r}", line=number) from None
        if word in vectors:
            log.warning("duplicate embedding for %r at line %d kept first", word, number)
            continue
        vectors[word] = values
    return EmbeddingTable(dimension=dimension, vectors=vectors, source=str(path))


def cosine(u, v) -> float:
    """Cosine similarity in [-1, 1]; a zero vector scores 0 by convention."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"cannot compare {u.shape[0]}-d with {v.shape[0]}-d")
    norm = np.linalg.norm(u) * np.linalg.norm(v)
    if norm == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / norm, -1.0, 1.0))


def closest_candidates(
    definition_span: str,
    pattern: Pattern,
    exclude: str,
    table: EmbeddingTable,
    wordlist: Iterable[str],
    k: int = 1,
) -> list[tuple[str, float]]:
    """The k pattern-fitting words nearest the span, best first.

    The excluded word (the ground truth) never appears.  Ties are broken
    lexicographically, so rankings are reproducible.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    banned = normalize_letters(exclude)
    pool = sorted(
        {
            normalize_letters(word)
            for word in wordlist
            if pattern_matches(word, pattern)
        }
    )
    if not pool:
        raise EmptyCandidateSet(
            f"no wordlist entry fits the pattern {pattern.render()!r}"
        )
    pool = [word for word in pool if word != banned]
    if not pool:
        raise EmptyCandidateSet(
            f"only the excluded word {banned!r} fits the pattern {pattern.render()!r}"
        )
    span_vec = table.embed_phrase(definition_span)
    ranked = sorted(
        ((word, cosine(span_vec, table.embed_phrase(word))) for word in pool),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


def embedding_synonym_fallback(
    table: EmbeddingTable, threshold: float = 0.55
) -> Callable[[str, str], bool]:
    """A pluggable is_synonym backend: cosine of pooled phrases >= threshold."""

    def fallback(phrase: str, candidate: str) -> bool:
        return cosine(table.embed_phrase(phrase), table.embed_phrase(candidate)) >= threshold

    return fallback


# -- deterministic pseudo-embeddings -------------------------------------------


def pseudo_embedding(word: str, dimension: int = 16) -> np.ndarray:
    """A reproducible vector in [-1, 1]^dimension, a pure function of the word.

    Each component hashes the folded word with its index, so values are
    stable across platforms, processes, and hash seeds.
    """
    folded = word.casefold()
    values = []
    for index in range(dimension):
        digest = hashlib.sha256(f"{folded}:{index}".encode("utf-8")).digest()
        raw = int.from_bytes(digest[:8], "big")
        values.append(raw / float(2**64 - 1) * 2.0 - 1.0)
    return np.array(values)


def write_pseudo_embeddings(
    words: Sequence[str], path: Union[str, Path], dimension: int = 16
) -> EmbeddingTable:
    """Write (and return) a pseudo-embedding table for the given words.

    Words are folded, deduplicated, and sorted, so the output file is
    byte-identical for any ordering of the same vocabulary.
    """
    vocabulary = sorted({word.casefold() for word in words if word.strip()})
    lines = [f"{len(vocabulary)} {dimension}"]
    for word in vocabulary:
        vec = pseudo_embedding(word, dimension)
        lines.append(word + " " + " ".join(f"{v:.6f}" for v in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return load_embeddings(path)
