"""The provability experiment: gold answers vs close decoys, scored three ways.

Each clue is tried with two candidate answers (its gold answer and the
nearest pattern-fitting decoy from the embedding table), each for a
number of samples, through the generate/verify/rewrite loop.  Every run
becomes one SolveRecord whose ``rewrites`` is the number of rewrites a
successful proof needed (0..5) or ``"FAIL"``.

Records aggregate per candidate three ways: number of completed proofs
(higher is better), fewest rewrites of any solve (lower is better, 6
when nothing solved), and mean rewrites with FAIL counted as 6 rather
than infinity.  ``classify`` compares the two candidates under one of
those methods; ``tabulate`` turns many comparisons into the win/draw/
loss percentage table.

Records persist as JSON lines, appended as each clue finishes, so an
interrupted run resumes without redoing finished work.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum, auto
from pathlib import Path
from statistics import fmean
from typing import Iterable, Optional, Sequence, Union

from cryptic_prover import dataset
from cryptic_prover.candidates import EmbeddingTable, EmptyCandidateSet, closest_candidates
from cryptic_prover.core import Clue, normalize_letters
from cryptic_prover.formalize import (
    MAX_GENERATOR_CALLS,
    ProofRequest,
    prove_with_rewrites,
    save_transcript,
)
from cryptic_prover.oracles import Lexicon

log = logging.getLogger(__name__)

FAIL = "FAIL"

Rewrites = Union[int, str]


class Method(Enum):
    COMPLETED_PROOFS = auto()
    FASTEST_SOLVE = auto()
    MEAN_SOLVE_TIME = auto()


class Outcome(Enum):
    TRUE_POS = auto()
    DRAW = auto()
    FALSE_NEG = auto()


class MissingCandidate(LookupError):
    """classify() needs records for both the gold answer and the decoy."""


@dataclass(frozen=True)
class SolveRecord:
    """One (clue, candidate, sample) trip through the rewrite loop."""

    clue_id: str
    candidate: str
    is_ground_truth: bool
    sample_index: int
    rewrites: Rewrites
    reason: str = ""

    def __post_init__(self):
        _check_rewrites(self.rewrites)
        if self.candidate != normalize_letters(self.candidate):
            raise ValueError(f"candidate must be normalized caps: {self.candidate!r}")
        if self.sample_index < 0:
            raise ValueError(f"sample_index must be >= 0, got {self.sample_index}")
        if self.reason and self.rewrites != FAIL:
            raise ValueError("only FAIL records carry a reason")

    def to_dict(self) -> dict:
        return {
            "clue_id": self.clue_id,
            "candidate": self.candidate,
            "is_ground_truth": self.is_ground_truth,
            "sample_index": self.sample_index,
            "rewrites": self.rewrites,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SolveRecord":
        return cls(
            clue_id=raw["clue_id"],
            candidate=raw["candidate"],
            is_ground_truth=raw["is_ground_truth"],
            sample_index=raw["sample_index"],
            rewrites=raw["rewrites"],
            reason=raw.get("reason", ""),
        )


@dataclass(frozen=True)
class QuestionComparison:
    clue_id: str
    method: Method
    outcome: Outcome


def _check_rewrites(value: Rewrites) -> None:
    if value == FAIL:
        return
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 5:
        raise ValueError(f"rewrites must be 0..5 or FAIL, got {value!r}")


def _rewrites_of(item) -> Rewrites:
    value = item.rewrites if isinstance(item, SolveRecord) else item
    _check_rewrites(value)
    return value


# -- scoring ---------------------------------------------------------------


def score_completed(records) -> int:
    """How many of the runs produced a verified proof."""
    values = [_rewrites_of(r) for r in records]
    if not values:
        raise ValueError("no records to score")
    return sum(1 for v in values if v != FAIL)


def score_fastest(records) -> int:
    """Fewest rewrites of any solved run; 6 when nothing solved."""
    values = [_rewrites_of(r) for r in records]
    if not values:
        raise ValueError("no records to score")
    solved = [v for v in values if v != FAIL]
    return min(solved) if solved else 6


def score_mean(records) -> float:
    """Mean rewrites with FAIL counted as 6 (rather than infinity)."""
    values = [_rewrites_of(r) for r in records]
    if not values:
        raise ValueError("no records to score")
    return fmean(6 if v == FAIL else v for v in values)


_SCORER = {
    Method.COMPLETED_PROOFS: score_completed,
    Method.FASTEST_SOLVE: score_fastest,
    Method.MEAN_SOLVE_TIME: score_mean,
}

# Completed proofs count up; the other two count rewrites, so down.
_HIGHER_IS_BETTER = {
    Method.COMPLETED_PROOFS: True,
    Method.FASTEST_SOLVE: False,
    Method.MEAN_SOLVE_TIME: False,
}


def classify(records: Sequence[SolveRecord], method: Method) -> QuestionComparison:
    """Did the gold answer beat the decoy on this clue, under this method?"""
    clue_ids = {r.clue_id for r in records}
    if len(clue_ids) != 1:
        raise ValueError(f"records span {sorted(clue_ids)!r}, expected one clue")
    truth = [r for r in records if r.is_ground_truth]
    decoy = [r for r in records if not r.is_ground_truth]
    if not truth or not decoy:
        raise MissingCandidate(
            f"clue {next(iter(clue_ids))!r} needs records for both candidates"
        )
    scorer = _SCORER[method]
    gold_score, decoy_score = scorer(truth), scorer(decoy)
    if not _HIGHER_IS_BETTER[method]:
        gold_score, decoy_score = -gold_score, -decoy_score
    if gold_score > decoy_score:
        outcome = Outcome.TRUE_POS
    elif gold_score == decoy_score:
        outcome = Outcome.DRAW
    else:
        outcome = Outcome.FALSE_NEG
    return QuestionComparison(next(iter(clue_ids)), method, outcome)


def compare_records(records: Sequence[SolveRecord]) -> list[QuestionComparison]:
    """All (clue, method) comparisons, sorted by clue id then method."""
    by_clue: dict[str, list[SolveRecord]] = {}
    for record in records:
        by_clue.setdefault(record.clue_id, []).append(record)
    comparisons = []
    for clue_id in sorted(by_clue):
        for method in Method:
            comparisons.append(classify(by_clue[clue_id], method))
    return comparisons


@dataclass(frozen=True)
class TableRow:
    method: Method
    true_pos: int
    draw: int
    false_neg: int
    comparisons: int

    def as_dict(self) -> dict:
        return {
            "method": self.method.name,
            "true_pos": self.true_pos,
            "draw": self.draw,
            "false_neg": self.false_neg,
            "comparisons": self.comparisons,
        }


def tabulate(comparisons: Sequence[QuestionComparison]) -> list[TableRow]:
    """Whole-number win/draw/loss percentages per method, rows sum 100 +/- 1."""
    if not comparisons:
        raise ValueError("no comparisons to tabulate")
    rows = []
    for method in Method:
        mine = [c for c in comparisons if c.method is method]
        if not mine:
            continue
        tally = {outcome: 0 for outcome in Outcome}
        for comparison in mine:
            tally[comparison.outcome] += 1
        total = len(mine)
        rows.append(
            TableRow(
                method=method,
                true_pos=round(100 * tally[Outcome.TRUE_POS] / total),
                draw=round(100 * tally[Outcome.DRAW] / total),
                false_neg=round(100 * tally[Outcome.FALSE_NEG] / total),
                comparisons=total,
            )
        )
    return rows


def render_table(rows: Sequence[TableRow]) -> str:
    width = max(len(row.method.name) for row in rows)
    lines = [f"{'method':<{width}}  true_pos  draw  false_neg"]
    for row in rows:
        lines.append(
            f"{row.method.name:<{width}}  {row.true_pos:>7}%  {row.draw:>3}%  "
            f"{row.false_neg:>8}%"
        )
    return "\n".join(lines) + "\n"


# -- annotation sources -----------------------------------------------------


def definition_span_text(clue: Clue) -> str:
    """The first marked definition span, or the whole surface when unmarked."""
    spans, plain = dataset.extract_definition(clue.gold_definition or clue.surface)
    if spans:
        return plain[spans[0].start : spans[0].end]
    return plain


def decoy_wordplay(clue: Clue, candidate: str) -> str:
    """The decoy's synthesized annotation: its letters glossed by the definition."""
    return f"{normalize_letters(candidate)} ({definition_span_text(clue)})"


class GoldAnnotationSource:
    """Reuse each clue's own annotation; synthesize one for decoys.

    Samples are identical by construction, which keeps the desk-scale
    experiment fully offline and deterministic.
    """

    def annotate(self, clue: Clue, candidate: str, sample_index: int) -> tuple[str, str]:
        definition = clue.gold_definition or clue.surface
        if normalize_letters(candidate) == normalize_letters(clue.gold_answer or ""):
            if not clue.gold_wordplay:
                raise LookupError(f"clue {clue.clue_id!r} has no gold wordplay")
            return definition, clue.gold_wordplay
        return definition, decoy_wordplay(clue, candidate)


class FileAnnotationSource:
    """Pre-generated annotations keyed by (clue_id, candidate, sample)."""

    def __init__(self, entries: Iterable[dict]):
        self._entries: dict[tuple[str, str, int], tuple[str, str]] = {}
        for entry in entries:
            key = (
                entry["clue_id"],
                normalize_letters(entry["candidate"]),
                entry["sample_index"],
            )
            self._entries[key] = (entry["definition"], entry["wordplay"])

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FileAnnotationSource":
        entries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                entries.append(json.loads(line))
        return cls(entries)

    def annotate(self, clue: Clue, candidate: str, sample_index: int) -> tuple[str, str]:
        key = (clue.clue_id, normalize_letters(candidate), sample_index)
        try:
            return self._entries[key]
        except KeyError:
            raise LookupError(f"no annotation for {key!r}") from None


# -- persistence ------------------------------------------------------------


def load_records(path: Union[str, Path]) -> list[SolveRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(SolveRecord.from_dict(json.loads(line)))
    return records


def _append_records(path: Union[str, Path], records: Iterable[SolveRecord]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


# -- the experiment ---------------------------------------------------------


def run_experiment(
    clues: Sequence[Clue],
    *,
    generator,
    lexicon: Lexicon,
    table: EmbeddingTable,
    wordlist: Iterable[str],
    samples_per_candidate: int = 5,
    annotations=None,
    results_path: Optional[Union[str, Path]] = None,
    transcripts_dir: Optional[Union[str, Path]] = None,
    resume: bool = False,
    max_workers: int = 1,
    max_generator_calls: int = MAX_GENERATOR_CALLS,
) -> list[SolveRecord]:
    """Run every (clue, candidate, sample) and return all SolveRecords.

    Emits exactly 2 x samples_per_candidate records per clue: problems
    along the way (no decoy available, unusable annotation, generator
    outage) become FAIL records carrying the reason, never lost work.
    With ``resume``, records already in ``results_path`` are kept and
    their runs skipped.  Ordering is deterministic for a deterministic
    generator; leave ``max_workers`` at 1 when byte-stable results
    files matter.
    """
    if samples_per_candidate < 1:
        raise ValueError("samples_per_candidate must be at least 1")
    ids = [clue.clue_id for clue in clues]
    if len(set(ids)) != len(ids) or "" in ids:
        raise ValueError("every clue needs a unique non-empty clue_id")
    for clue in clues:
        if not clue.gold_answer:
            raise ValueError(f"clue {clue.clue_id!r} has no gold answer")
    if annotations is None:
        annotations = GoldAnnotationSource()

    done: set[tuple[str, str, int]] = set()
    existing: list[SolveRecord] = []
    if results_path is not None:
        path = Path(results_path)
        if resume and path.exists():
            existing = load_records(path)
            done = {(r.clue_id, r.candidate, r.sample_index) for r in existing}
        else:
            path.write_text("", encoding="utf-8")
    if transcripts_dir is not None:
        Path(transcripts_dir).mkdir(parents=True, exist_ok=True)

    wordlist = tuple(wordlist)

    def solve_clue(clue: Clue) -> list[SolveRecord]:
        return _clue_records(
            clue,
            generator=generator,
            lexicon=lexicon,
            table=table,
            wordlist=wordlist,
            samples=samples_per_candidate,
            annotations=annotations,
            done=done,
            transcripts_dir=transcripts_dir,
            max_generator_calls=max_generator_calls,
        )

    records = list(existing)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            batches = pool.map(solve_clue, clues)
            for batch in batches:
                records.extend(batch)
                if results_path is not None:
                    _append_records(results_path, batch)
    else:
        for clue in clues:
            batch = solve_clue(clue)
            records.extend(batch)
            if results_path is not None:
                _append_records(results_path, batch)
    return records


def _clue_records(
    clue: Clue,
    *,
    generator,
    lexicon: Lexicon,
    table: EmbeddingTable,
    wordlist: tuple,
    samples: int,
    annotations,
    done: set,
    transcripts_dir,
    max_generator_calls: int,
) -> list[SolveRecord]:
    gold = normalize_letters(clue.gold_answer)
    try:
        ranked = closest_candidates(
            definition_span_text(clue), clue.pattern, gold, table, wordlist, k=1
        )
        decoy, decoy_error = ranked[0][0], ""
    except EmptyCandidateSet as error:
        decoy, decoy_error = "", f"decoy generation failed: {error}"
        log.warning("clue %s: %s", clue.clue_id, decoy_error)

    records = []
    for candidate, is_truth in ((gold, True), (decoy, False)):
        for sample in range(samples):
            if (clue.clue_id, candidate, sample) in done:
                continue
            if not is_truth and decoy_error:
                records.append(
                    SolveRecord(
                        clue_id=clue.clue_id,
                        candidate="",
                        is_ground_truth=False,
                        sample_index=sample,
                        rewrites=FAIL,
                        reason=decoy_error,
                    )
                )
                continue
            records.append(
                _solve_one(
                    clue,
                    candidate,
                    is_truth,
                    sample,
                    generator=generator,
                    lexicon=lexicon,
                    annotations=annotations,
                    transcripts_dir=transcripts_dir,
                    max_generator_calls=max_generator_calls,
                )
            )
    return records


def _solve_one(
    clue: Clue,
    candidate: str,
    is_truth: bool,
    sample: int,
    *,
    generator,
    lexicon: Lexicon,
    annotations,
    transcripts_dir,
    max_generator_calls: int,
) -> SolveRecord:
    try:
        definition, wordplay = annotations.annotate(clue, candidate, sample)
        request = ProofRequest(
            clue=clue,
            candidate_answer=candidate,
            definition=definition,
            wordplay=wordplay,
            sample_index=sample,
        )
        transcript = prove_with_rewrites(
            request, generator, lexicon, max_calls=max_generator_calls
        )
    except Exception as error:
        return SolveRecord(
            clue_id=clue.clue_id,
            candidate=candidate,
            is_ground_truth=is_truth,
            sample_index=sample,
            rewrites=FAIL,
            reason=f"{type(error).__name__}: {error}",
        )
    if transcripts_dir is not None:
        name = f"{_slug(clue.clue_id)}__{candidate or 'none'}__s{sample}.jsonl"
        save_transcript(transcript, Path(transcripts_dir) / name)
    return SolveRecord(
        clue_id=clue.clue_id,
        candidate=candidate,
        is_ground_truth=is_truth,
        sample_index=sample,
        rewrites=transcript.rewrites_used,
        reason=transcript.failure_reason,
    )


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in text).strip("-")
