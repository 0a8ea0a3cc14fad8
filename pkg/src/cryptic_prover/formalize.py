"""Turn annotated clues into proof scripts and drive the rewrite loop.

Two routes produce a proof for a (clue, candidate answer) pair:

* ``compile_wordplay`` walks a parsed wordplay tree and emits the
  corresponding assertions directly; it is deterministic and needs no
  model.  When the annotation's letters cannot account for the answer,
  it still emits the honest script, whose final equality then fails
  under verification.
* ``prove_with_rewrites`` asks a proof generator (anything with a
  ``generate(prompt) -> str`` method) to write the script, verifies the
  result, and on failure feeds the failure report back for another try.
  An initial draft plus at most five rewrites are allowed; after that
  the request is recorded as a failure.

Prompts are assembled from data files in a fixed order: rubric
preamble, annotated wordplay examples, the declarations of the checking
functions, worked formalisation examples, the completion instruction,
and finally the request itself (a proof header with its definition and
wordplay lines, to be completed).  A rewrite prompt appends the
previous script and the failure report, which itself ends with the
rewrite instruction.

Three generators ship with the package: ``CompilerBackedMock`` (reads
the request back out of the prompt and compiles it; optionally spoils
its first few answers, which exercises the loop), ``ScriptedReplayMock``
(plays back canned responses, e.g. from a saved transcript), and
``HttpChatGenerator`` (a chat-completion HTTP client, enabled only when
its API key environment variable is set).
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence, Union

import requests

from cryptic_prover import dataset, lexfiles, notation
from cryptic_prover.core import (
    ActionKind,
    Clue,
    Pattern,
    normalize_letters,
    pattern_matches,
)
from cryptic_prover.notation import (
    AbbrevOf,
    Anagram,
    Container,
    Deletion,
    DeletionKind,
    DoubleDefinition,
    Hidden,
    Homophone,
    Initials,
    Literal,
    Resolved,
    Reversal,
    SynonymOf,
    WordplayNode,
    resolve,
    surface_letters,
)
from cryptic_prover.oracles import Lexicon
from cryptic_prover.verifier import (
    AssertEquality,
    AssertPredicate,
    Call,
    Concat,
    Expr,
    ProofScript,
    ProofStatus,
    Statement,
    StringLit,
    VerificationOutcome,
    render_failure_report,
    render_proof,
    verify_text,
)


class UnsupportedNode(ValueError):
    """A wordplay construct with no proof-grammar counterpart."""


class GeneratorUnavailable(RuntimeError):
    """The proof generator cannot be reached (transport or config)."""


MAX_GENERATOR_CALLS = 6  # one draft plus five rewrites


@dataclass(frozen=True)
class ProofRequest:
    """Everything a generator needs to formalise one candidate answer."""

    clue: Clue
    candidate_answer: str
    definition: str
    wordplay: str
    sample_index: int = 0

    def __post_init__(self):
        if not pattern_matches(self.candidate_answer, self.clue.pattern):
            raise ValueError(
                f"candidate {self.candidate_answer!r} does not fit "
                f"pattern {self.clue.pattern.render()!r}"
            )


@dataclass(frozen=True)
class Attempt:
    prompt: str
    response: str
    outcome: VerificationOutcome


@dataclass(frozen=True)
class GeneratorTranscript:
    """Every attempt for one request, ending proved or failed.

    ``rewrites_used`` is the index of the proved attempt (0 means the
    first draft passed), or the string ``"FAIL"``.  A transcript may
    fail short of six attempts only when the generator itself became
    unavailable, in which case ``failure_reason`` says why.
    """

    attempts: tuple[Attempt, ...]
    rewrites_used: Union[int, str]
    failure_reason: str = ""

    def __post_init__(self):
        if isinstance(self.rewrites_used, int):
            if not 0 <= self.rewrites_used < MAX_GENERATOR_CALLS:
                raise ValueError(f"rewrites_used out of range: {self.rewrites_used}")
            if len(self.attempts) != self.rewrites_used + 1:
                raise ValueError("a solved transcript holds one attempt per call")
        elif self.rewrites_used != "FAIL":
            raise ValueError(f"rewrites_used must be 0..5 or 'FAIL', got {self.rewrites_used!r}")
        elif not self.failure_reason and len(self.attempts) != MAX_GENERATOR_CALLS:
            raise ValueError("an exhausted transcript holds all six attempts")

    @property
    def solved(self) -> bool:
        return isinstance(self.rewrites_used, int)


# -- deterministic compilation --------------------------------------------------


def compile_wordplay(node: WordplayNode, request: ProofRequest) -> ProofScript:
    """Emit the proof a careful solver would write for this tree.

    Statements come out in reading order: the synonym and abbreviation
    facts behind each fragment, then each action with its letter-level
    consequence, then (for multi-part wordplay) the concatenation that
    forms the answer, and finally the definition check against the
    answer and its pattern.
    """
    answer = normalize_letters(request.candidate_answer)
    pattern_text = request.clue.pattern.render()
    spans, plain = dataset.extract_definition(request.definition)
    span_texts = [plain[span.start : span.end] for span in spans]

    statements: list[Statement] = []
    if isinstance(node, DoubleDefinition):
        for text in span_texts:
            statements.append(
                AssertPredicate("is_synonym", (text, answer), pattern=pattern_text)
            )
    else:
        resolved = resolve(node, answer)
        if resolved is None:
            # The letters cannot form the answer; prove what the
            # annotation does say and let the final equality fail.
            resolved = resolve(node, surface_letters(node))
        if resolved is None:
            raise UnsupportedNode("wordplay letters cannot be resolved at all")
        leaves: list[Statement] = []
        actions: list[Statement] = []
        _emit(node, resolved, leaves, actions)
        statements.extend(leaves)
        statements.extend(actions)
        if isinstance(node, notation.Sequence):
            parts = Concat(tuple(StringLit(part.letters) for part in resolved.parts))
            statements.append(AssertEquality(parts, StringLit(answer)))
        elif resolved.letters != answer:
            statements.append(AssertEquality(StringLit(resolved.letters), StringLit(answer)))
        if span_texts:
            statements.append(
                AssertPredicate(
                    "is_synonym", (span_texts[0], answer), pattern=pattern_text
                )
            )

    return ProofScript(
        answer=request.candidate_answer,
        clue=request.clue.surface,
        pattern=request.clue.pattern,
        definition=request.definition,
        wordplay=request.wordplay,
        statements=tuple(statements),
    )


def _emit(
    node: WordplayNode,
    resolved: Resolved,
    leaves: list[Statement],
    actions: list[Statement],
) -> None:
    if isinstance(node, Literal):
        return
    if isinstance(node, SynonymOf):
        leaves.append(AssertPredicate("is_synonym", (node.phrase, node.letters)))
        return
    if isinstance(node, AbbrevOf):
        leaves.append(AssertPredicate("is_abbreviation", (node.phrase, node.letters)))
        return
    if isinstance(node, Anagram):
        _emit(node.source, resolved.parts[0], leaves, actions)
        _action(actions, node.indicator, ActionKind.ANAGRAM)
        actions.append(
            AssertPredicate(
                "is_anagram", (surface_letters(node.source), resolved.letters)
            )
        )
        return
    if isinstance(node, Reversal):
        _emit(node.source, resolved.parts[0], leaves, actions)
        _action(actions, node.indicator, ActionKind.REVERSE)
        actions.append(
            AssertEquality(
                Call("reverse", (StringLit(surface_letters(node.source)),)),
                StringLit(resolved.letters),
            )
        )
        return
    if isinstance(node, Deletion):
        _emit(node.source, resolved.parts[0], leaves, actions)
        if node.kind is DeletionKind.FIRST:
            action, builtin = ActionKind.REMOVE_FIRST, "drop_first"
        elif node.kind is DeletionKind.LAST:
            action, builtin = ActionKind.REMOVE_LAST, "drop_last"
        else:
            raise UnsupportedNode("inner deletions have no proof-grammar mapping")
        _action(actions, node.indicator, action)
        expr: Expr = StringLit(surface_letters(node.source))
        for _ in node.removed:
            expr = Call(builtin, (expr,))
        actions.append(AssertEquality(expr, StringLit(resolved.letters)))
        return
    if isinstance(node, Initials):
        _action(actions, node.indicator, ActionKind.INITIALS)
        actions.append(
            AssertEquality(
                Call("initials", (StringLit(" ".join(node.phrases)),)),
                StringLit(resolved.letters),
            )
        )
        return
    if isinstance(node, Hidden):
        _action(actions, node.indicator, ActionKind.SUBSTRING)
        actions.append(
            AssertEquality(
                Call(
                    "hidden_span",
                    (StringLit(node.host_text), StringLit(node.letters)),
                ),
                StringLit(resolved.letters),
            )
        )
        segments = _hidden_segments(node)
        if len(segments) >= 2:
            actions.append(
                AssertEquality(
                    Concat(tuple(StringLit(piece) for piece in segments)),
                    StringLit(resolved.letters),
                )
            )
        return
    if isinstance(node, Container):
        outer, inner = resolved.parts
        _emit(node.outer, outer, leaves, actions)
        _emit(node.inner, inner, leaves, actions)
        kind = ActionKind.GOES_INSIDE if node.inserted else ActionKind.GOES_OUTSIDE
        _action(actions, node.indicator, kind)
        split = resolved.split if resolved.split is not None else node.outer_split
        actions.append(
            AssertEquality(
                Concat(
                    (
                        StringLit(outer.letters[:split]),
                        StringLit(inner.letters),
                        StringLit(outer.letters[split:]),
                    )
                ),
                StringLit(resolved.letters),
            )
        )
        return
    if isinstance(node, Homophone):
        if node.origin:
            leaves.append(
                AssertPredicate(
                    "is_synonym", (node.origin, normalize_letters(node.sounds_like))
                )
            )
        _action(actions, node.indicator, ActionKind.HOMOPHONE)
        actions.append(
            AssertPredicate("is_homophone", (node.sounds_like, resolved.letters))
        )
        return
    if isinstance(node, notation.Sequence):
        for part, sub in zip(node.parts, resolved.parts):
            _emit(part, sub, leaves, actions)
        return
    raise UnsupportedNode(f"no proof mapping for {type(node).__name__}")


def _action(actions: list[Statement], indicator: str, kind: ActionKind) -> None:
    if indicator:
        actions.append(AssertPredicate("action_type", (indicator, kind)))


def _hidden_segments(node: Hidden) -> list[str]:
    """The hidden letters as they fall across the host's words."""
    norms = [normalize_letters(word) for word in node.host_text.split()]
    joined = "".join(norms)
    start = joined.find(node.letters)
    end = start + len(node.letters)
    segments: list[str] = []
    offset = 0
    for word in norms:
        lo, hi = max(start, offset), min(end, offset + len(word))
        if lo < hi:
            segments.append(joined[lo:hi])
        offset += len(word)
    return segments


# -- prompt assembly -------------------------------------------------------------


@lru_cache(maxsize=None)
def _prompt_section(name: str) -> str:
    path = lexfiles.seed_path(f"prompts/{name}")
    return path.read_text(encoding="utf-8").rstrip("\n")


def request_block(request: ProofRequest) -> str:
    """The proof stub the generator is asked to complete."""
    header = ProofScript(
        answer=request.candidate_answer,
        clue=request.clue.surface,
        pattern=request.clue.pattern,
        definition=request.definition,
        wordplay=request.wordplay,
    )
    return render_proof(header).rstrip("\n")


def build_prompt(
    request: ProofRequest,
    failure_report: Optional[str] = None,
    previous_script: Optional[str] = None,
) -> str:
    """Assemble the generator prompt; fixed section order, data-file text."""
    sections = [
        _prompt_section("preamble.txt"),
        _prompt_section("wordplay_examples.txt"),
        _prompt_section("functions.txt"),
        _prompt_section("fewshot.txt"),
        _prompt_section("instruction.txt"),
        request_block(request),
    ]
    if failure_report:
        if previous_script:
            sections.append(previous_script.rstrip("\n"))
        sections.append(failure_report.rstrip("\n"))
    return "\n\n".join(sections) + "\n"


# -- the rewrite loop ------------------------------------------------------------


def prove_with_rewrites(
    request: ProofRequest,
    generator,
    lexicon: Lexicon,
    max_calls: int = MAX_GENERATOR_CALLS,
) -> GeneratorTranscript:
    """Draft, verify, and rewrite until proved or out of attempts.

    ``max_calls`` may be lowered (a tighter rewrite cap) but never
    raised past the published budget of six.
    """
    if not 1 <= max_calls <= MAX_GENERATOR_CALLS:
        raise ValueError(f"max_calls must be 1..{MAX_GENERATOR_CALLS}, got {max_calls}")
    attempts: list[Attempt] = []
    report: Optional[str] = None
    previous: Optional[str] = None
    for index in range(max_calls):
        prompt = build_prompt(request, failure_report=report, previous_script=previous)
        try:
            response = generator.generate(prompt)
        except GeneratorUnavailable as error:
            return GeneratorTranscript(tuple(attempts), "FAIL", failure_reason=str(error))
        outcome = verify_text(response, lexicon)
        attempts.append(Attempt(prompt, response, outcome))
        if outcome.status is ProofStatus.PROVED:
            return GeneratorTranscript(tuple(attempts), index)
        previous = response
        report = render_failure_report(outcome)
    if max_calls < MAX_GENERATOR_CALLS:
        return GeneratorTranscript(
            tuple(attempts),
            "FAIL",
            failure_reason=f"rewrite cap reached after {max_calls} call(s)",
        )
    return GeneratorTranscript(tuple(attempts), "FAIL")


def save_transcript(transcript: GeneratorTranscript, path: Union[str, Path]) -> None:
    """One JSON line per attempt: prompt, response, status, failure report."""
    lines = []
    for attempt in transcript.attempts:
        record = {
            "prompt": attempt.prompt,
            "response": attempt.response,
            "status": attempt.outcome.status.name,
            "failure_report": (
                ""
                if attempt.outcome.status is ProofStatus.PROVED
                else render_failure_report(attempt.outcome)
            ),
        }
        lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_transcript_responses(path: Union[str, Path]) -> list[str]:
    responses = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            responses.append(json.loads(line)["response"])
    return responses


# -- generators ------------------------------------------------------------------

_HEADER_LINE = re.compile(r"^proof\s+.*$", re.MULTILINE)
_FIELD = re.compile(r"(\w+)=(\"([^\"]*)\"|'([^']*)')")


class CompilerBackedMock:
    """Answers prompts by recompiling the request they contain.

    The request (or, on a rewrite, the previous script) is the last
    ``proof`` header in the prompt, with its definition and wordplay
    lines right below.  ``fail_first`` spoils that many responses with
    a false equality, which makes the rewrite loop take measurable
    laps before succeeding.
    """

    def __init__(self, fail_first: int = 0):
        self.fail_first = fail_first
        self.calls = 0

    def generate(self, prompt: str) -> str:
        self.calls += 1
        headers = list(_HEADER_LINE.finditer(prompt))
        tail = prompt[headers[-1].start() :] if headers else ""
        fields = {
            match.group(1): match.group(3) or match.group(4) or ""
            for match in _FIELD.finditer(tail.split("\n", 1)[0])
        }
        definition = _last_prefixed(tail, "definition:")
        wordplay = _last_prefixed(tail, "wordplay:")
        try:
            clue = Clue(
                surface=fields["clue"],
                pattern=Pattern.parse(fields["pattern"]),
            )
            request = ProofRequest(
                clue=clue,
                candidate_answer=fields["answer"],
                definition=definition or fields["clue"],
                wordplay=wordplay,
            )
            node = notation.parse_wordplay(wordplay)
            script = compile_wordplay(node, request)
        except (KeyError, ValueError) as error:
            # Nothing compilable: answer with an honest stub that the
            # verifier will reject, mirroring a lost generator.
            return (
                f'proof answer="X" clue="unparseable request" pattern="1"\n'
                f"# {type(error).__name__}\n"
            )
        if self.calls <= self.fail_first:
            spoiled = script.statements + (
                AssertEquality(StringLit("QQ"), StringLit("ZZ")),
            )
            script = replace(script, statements=spoiled)
        return render_proof(script)


def _last_prefixed(text: str, prefix: str) -> str:
    value = ""
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith(prefix):
            value = stripped[len(prefix) :].strip()
    return value


class ScriptedReplayMock:
    """Plays back a fixed response list, one per generate() call."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self.calls = 0

    @classmethod
    def from_transcript(cls, path: Union[str, Path]) -> "ScriptedReplayMock":
        return cls(load_transcript_responses(path))

    def generate(self, prompt: str) -> str:
        if self.calls >= len(self._responses):
            raise GeneratorUnavailable("replay script exhausted")
        response = self._responses[self.calls]
        self.calls += 1
        return response


class HttpChatGenerator:
    """Chat-completion HTTP client, gated on an API key variable."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "CRYPTIC_PROVER_API_KEY",
        timeout: float = 120.0,
        max_concurrent: int = 4,
        temperature: Optional[float] = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.temperature = temperature
        self._slots = threading.BoundedSemaphore(max_concurrent)

    def generate(self, prompt: str) -> str:
        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise GeneratorUnavailable(
                f"no API key: set {self.api_key_env} to use the HTTP generator"
            )
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        with self._slots:
            try:
                response = requests.post(
                    self.endpoint,
                    json=payload,
                    headers={"Authorization": f"Bearer {api_key}"},
                    timeout=self.timeout,
                )
                response.raise_for_status()
                data = response.json()
            except requests.RequestException as error:
                raise GeneratorUnavailable(str(error)) from None
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise GeneratorUnavailable("malformed completion payload") from None
