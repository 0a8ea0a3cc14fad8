"""Parse and render the compact wordplay notation used by crossword solvers.

Solvers annotate how a cryptic answer is assembled with a terse, loosely
standardised dialect.  The conventions this module understands:

* CAPS letters are the letters that end up in the answer, in order.
* ``(corset)* (*shredded)`` marks an anagram and its signifier word.
* ``(LAGER)< (<returned)`` marks a reversal and its signifier.
* ``[c]RAVEN`` / ``ELVE[s]`` mark deleted leading/trailing letters; an
  internal ``AB[c]DE`` marks an internal deletion.
* ``D[one]`` keeps only the initial letter of a clue word.
* ``[fo]UND ERMINE D[eer] (hides)`` marks an answer hidden across words.
* ``WORD (gloss)`` records the clue phrase the letters came from; a
  ``short form`` note marks an abbreviation rather than a synonym.
* ``"pair" (twins, "we hear")`` marks a homophone, its origin phrase and
  the spoken-word signifier.
* ``X in Y`` / ``Y around X`` mark one fragment inside another; a slash
  in the outer letters (``V/ICE``) marks where they split.
* ``DD`` on its own marks a double definition.
* ``+`` joins fragments; parenthesised ``i.e. ...`` notes, ``X = ...``
  expansions and CAPS mentions are commentary and carry no structure.

``parse_wordplay`` builds a ``WordplayNode`` tree from an annotation,
``render_wordplay`` produces the canonical spelling of a tree, and
``resolve``/``yields_answer`` check a tree against an answer, permuting
anagrams, spelling out homophones and searching container split points
as needed.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from enum import Enum, auto
from typing import Optional, Union

from cryptic_prover import lexfiles
from cryptic_prover.core import ActionKind, normalize_letters, phonetic_key


class ParseError(ValueError):
    """Annotation text that does not follow the notation.

    ``position`` is the character offset where parsing stopped and
    ``matched_prefix`` is the annotation text that parsed cleanly.
    """

    def __init__(self, message: str, text: str = "", position: int = 0):
        self.position = position
        self.matched_prefix = text[:position]
        super().__init__(
            f"{message} at position {position} (parsed prefix {self.matched_prefix!r})"
        )


class DeletionKind(Enum):
    FIRST = auto()
    LAST = auto()
    INNER = auto()


def _require_caps(letters: str, what: str) -> None:
    if not letters or normalize_letters(letters) != letters:
        raise ValueError(f"{what} must be nonempty A-Z letters, got {letters!r}")


@dataclass(frozen=True)
class Literal:
    letters: str

    def __post_init__(self):
        _require_caps(self.letters, "Literal letters")


@dataclass(frozen=True)
class SynonymOf:
    phrase: str
    letters: str

    def __post_init__(self):
        _require_caps(self.letters, "SynonymOf letters")
        if not self.phrase.strip():
            raise ValueError("SynonymOf phrase must be nonempty")


@dataclass(frozen=True)
class AbbrevOf:
    phrase: str
    letters: str

    def __post_init__(self):
        _require_caps(self.letters, "AbbrevOf letters")
        if not self.phrase.strip():
            raise ValueError("AbbrevOf phrase must be nonempty")


@dataclass(frozen=True)
class Anagram:
    source: "WordplayNode"
    indicator: str


@dataclass(frozen=True)
class Reversal:
    source: "WordplayNode"
    indicator: str


@dataclass(frozen=True)
class Deletion:
    source: "WordplayNode"
    removed: str
    kind: DeletionKind
    indicator: str

    def __post_init__(self):
        _require_caps(self.removed, "Deletion removed letters")
        s = surface_letters(self.source)
        r = self.removed
        if len(r) >= len(s):
            raise ValueError(f"cannot delete {r!r} from {s!r}: nothing would remain")
        ok = {
            DeletionKind.FIRST: s.startswith(r),
            DeletionKind.LAST: s.endswith(r),
            DeletionKind.INNER: _inner_removal_index(s, r) is not None,
        }[self.kind]
        if not ok:
            raise ValueError(f"{r!r} is not a {self.kind.name} segment of {s!r}")


@dataclass(frozen=True)
class Initials:
    phrases: tuple[str, ...]
    indicator: str

    def __post_init__(self):
        if not self.phrases or not all(p.strip() for p in self.phrases):
            raise ValueError("Initials needs at least one nonempty phrase")
        for phrase in self.phrases:
            for word in phrase.split():
                if not normalize_letters(word):
                    raise ValueError(f"Initials word {word!r} has no letters")


@dataclass(frozen=True)
class Hidden:
    host_text: str
    indicator: str
    letters: str

    def __post_init__(self):
        _require_caps(self.letters, "Hidden letters")
        if self.letters not in normalize_letters(self.host_text):
            raise ValueError(
                f"{self.letters!r} is not contiguous in {self.host_text!r}"
            )


@dataclass(frozen=True)
class Container:
    outer: "WordplayNode"
    inner: "WordplayNode"
    indicator: str
    outer_split: int = 1
    inserted: bool = False

    def __post_init__(self):
        span = len(surface_letters(self.outer))
        if not 1 <= self.outer_split <= span - 1:
            raise ValueError(
                f"outer_split {self.outer_split} is not a split of {span} letters"
            )


@dataclass(frozen=True)
class Homophone:
    sounds_like: str
    indicator: str
    letters: str = ""
    origin: str = ""

    def __post_init__(self):
        if not self.sounds_like.strip():
            raise ValueError("Homophone sounds_like must be nonempty")
        if not self.letters:
            object.__setattr__(self, "letters", normalize_letters(self.sounds_like))
        _require_caps(self.letters, "Homophone letters")


@dataclass(frozen=True)
class DoubleDefinition:
    pass


@dataclass(frozen=True)
class Sequence:
    parts: tuple["WordplayNode", ...]

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("Sequence needs at least two parts")
        for part in self.parts:
            if isinstance(part, Sequence):
                raise ValueError("Sequence parts must not nest; flatten them")
            if isinstance(part, DoubleDefinition):
                raise ValueError("a double definition stands alone")


WordplayNode = Union[
    Literal,
    SynonymOf,
    AbbrevOf,
    Anagram,
    Reversal,
    Deletion,
    Initials,
    Hidden,
    Container,
    Homophone,
    DoubleDefinition,
    Sequence,
]


def _inner_removal_index(s: str, removed: str) -> Optional[int]:
    for i in range(1, len(s) - len(removed)):
        if s[i : i + len(removed)] == removed:
            return i
    return None


def surface_letters(node: WordplayNode) -> str:
    """The answer letters a node contributes, before any permuting action.

    Anagram sources are reported unpermuted and a homophone reports its
    recorded letters; ``resolve`` handles matching those against an
    answer.  A double definition contributes no letters of its own.
    """
    if isinstance(node, (Literal, SynonymOf, AbbrevOf)):
        return node.letters
    if isinstance(node, Anagram):
        return surface_letters(node.source)
    if isinstance(node, Reversal):
        return surface_letters(node.source)[::-1]
    if isinstance(node, Deletion):
        s = surface_letters(node.source)
        r = node.removed
        if node.kind is DeletionKind.FIRST:
            return s[len(r) :]
        if node.kind is DeletionKind.LAST:
            return s[: len(s) - len(r)]
        i = _inner_removal_index(s, r)
        assert i is not None
        return s[:i] + s[i + len(r) :]
    if isinstance(node, Initials):
        return "".join(
            normalize_letters(word)[:1]
            for phrase in node.phrases
            for word in phrase.split()
        )
    if isinstance(node, Hidden):
        return node.letters
    if isinstance(node, Container):
        outer = surface_letters(node.outer)
        k = node.outer_split
        return outer[:k] + surface_letters(node.inner) + outer[k:]
    if isinstance(node, Homophone):
        return node.letters
    if isinstance(node, DoubleDefinition):
        return ""
    if isinstance(node, Sequence):
        return "".join(surface_letters(p) for p in node.parts)
    raise TypeError(f"not a wordplay node: {node!r}")


# --------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # WORD GROUP DQUOTE SQUOTE STAR LT PLUS MINUS
    text: str
    pos: int


_WORD_RE = re.compile(r"(?:\[[A-Za-z'’]+\]|[A-Za-z][A-Za-z'’/]*)+")
_SEG_RE = re.compile(r"\[([A-Za-z'’]+)\]|([A-Za-z'’/]+)")
_SIGILS = {"*": "STAR", "<": "LT", "+": "PLUS", "-": "MINUS"}


def _tokenize(text: str, full: str, base: int = 0) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace() or ch == ",":
            i += 1
            continue
        if ch == "(":
            depth = 1
            j = i + 1
            while j < n and depth:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                j += 1
            if depth:
                raise ParseError("unclosed parenthesis", full, base + i)
            tokens.append(_Token("GROUP", text[i + 1 : j - 1], base + i))
            i = j
            continue
        if ch in "\"“”":
            j = i + 1
            while j < n and text[j] not in "\"“”":
                j += 1
            if j >= n:
                raise ParseError("unclosed double quote", full, base + i)
            tokens.append(_Token("DQUOTE", text[i + 1 : j], base + i))
            i = j + 1
            continue
        if ch in "'’":
            j = i + 1
            while j < n and text[j] not in "'’":
                j += 1
            if j >= n:
                raise ParseError("unclosed quote", full, base + i)
            tokens.append(_Token("SQUOTE", text[i + 1 : j], base + i))
            i = j + 1
            continue
        if ch in _SIGILS:
            tokens.append(_Token(_SIGILS[ch], ch, base + i))
            i += 1
            continue
        if ch.isalpha() or ch == "[":
            m = _WORD_RE.match(text, i)
            if m:
                tokens.append(_Token("WORD", m.group(), base + i))
                i = m.end()
                continue
        raise ParseError(f"unexpected character {ch!r}", full, base + i)
    return tokens


def _segments(word_text: str) -> list[tuple[str, str]]:
    return [
        ("brkt", m.group(1)) if m.group(1) is not None else ("bare", m.group(2))
        for m in _SEG_RE.finditer(word_text)
    ]


def _is_caps(segment_text: str) -> bool:
    clean = re.sub(r"['’/]", "", segment_text)
    return bool(clean) and clean.isupper()


# --------------------------------------------------------------------------
# Item layer: units, plain words and container signifiers


@dataclass
class _Unit:
    node: WordplayNode
    pos: int
    split_marker: Optional[int] = None


@dataclass
class _Word:
    text: str
    pos: int


@dataclass
class _CSig:
    text: str
    pos: int


_Item = Union[_Unit, _Word, _CSig]

_ABBREV_MARKERS = {"short form", "abbreviation", "abbrev", "abbr", "for short", "short for"}
_GLUE_WORDS = {"of", "to", "on", "a", "an", "the", "and", "it", "is", "for"}
_CONTAINER_ACTIONS = {ActionKind.GOES_INSIDE, ActionKind.GOES_OUTSIDE}

_NODE_ACTION = {
    Anagram: ActionKind.ANAGRAM,
    Reversal: ActionKind.REVERSE,
    Initials: ActionKind.INITIALS,
    Hidden: ActionKind.SUBSTRING,
    Homophone: ActionKind.HOMOPHONE,
}


@dataclass(frozen=True)
class _Tables:
    signifiers: dict[str, frozenset[ActionKind]]
    abbrev_inverse: dict[str, set[str]]


def _default_tables() -> _Tables:
    return _Tables(lexfiles.seed_indicator_table(), lexfiles.seed_abbreviation_inverse())


def _node_action(node: WordplayNode) -> Optional[ActionKind]:
    if isinstance(node, Deletion):
        if node.kind is DeletionKind.FIRST:
            return ActionKind.REMOVE_FIRST
        if node.kind is DeletionKind.LAST:
            return ActionKind.REMOVE_LAST
        return None
    return _NODE_ACTION.get(type(node))


def _wrap_gloss(node: WordplayNode, phrase: str, abbrev: bool, tables: _Tables) -> Optional[WordplayNode]:
    """Attach an origin gloss to the innermost bare Literal, if there is one."""
    if isinstance(node, Literal):
        short_forms = tables.abbrev_inverse.get(phrase.casefold(), set())
        if abbrev or (len(node.letters) <= 3 and node.letters in short_forms):
            return AbbrevOf(phrase, node.letters)
        return SynonymOf(phrase, node.letters)
    if isinstance(node, (Anagram, Reversal, Deletion)):
        sub = _wrap_gloss(node.source, phrase, abbrev, tables)
        return dataclasses.replace(node, source=sub) if sub is not None else None
    if isinstance(node, Homophone) and not node.origin and not abbrev:
        return dataclasses.replace(node, origin=phrase)
    return None


def _mark_abbrev(node: WordplayNode) -> Optional[WordplayNode]:
    if isinstance(node, SynonymOf):
        return AbbrevOf(node.phrase, node.letters)
    if isinstance(node, (Anagram, Reversal, Deletion)):
        sub = _mark_abbrev(node.source)
        return dataclasses.replace(node, source=sub) if sub is not None else None
    return None


def _set_indicator(node: WordplayNode, text: str, wanted: Optional[set[ActionKind]]) -> Optional[WordplayNode]:
    """Set an empty indicator slot when the signifier suits the node's action."""
    action = _node_action(node)
    if isinstance(node, Deletion):
        suits = wanted is None or (action is not None and action in wanted)
    else:
        suits = action is not None and wanted is not None and action in wanted
    if suits and getattr(node, "indicator", None) == "":
        return dataclasses.replace(node, indicator=text)
    return None


# --------------------------------------------------------------------------
# Group classification


@dataclass
class _Group:
    kind: str  # "dd" | "commentary" | "unit" | "parts"
    parts: list[tuple] = dataclasses.field(default_factory=list)
    node: Optional[WordplayNode] = None
    pos: int = 0


def _classify_group(token: _Token, tables: _Tables, full: str) -> _Group:
    content = token.text.strip()
    if content == "DD":
        return _Group("dd", pos=token.pos)
    if "(" in content:
        node = _parse_text(content, full, token.pos + 1, tables)
        return _Group("unit", node=node, pos=token.pos)

    raw_parts = [p.strip() for p in content.split(",") if p.strip()]
    if not raw_parts:
        raise ParseError("empty parentheses", full, token.pos)
    if raw_parts[0].casefold().startswith("i.e."):
        return _Group("commentary", pos=token.pos)

    roles: list[tuple] = []
    for part in raw_parts:
        part = re.split(r"\s*=\s*", part, maxsplit=1)[0].strip()
        if not part:
            continue
        if part[0] in "\"“”" and part[-1] in "\"“”" and len(part) >= 3:
            roles.append(("homo_ind", part[1:-1]))
            continue
        if part.startswith("*"):
            roles.append(("sig", part[1:].strip(), {ActionKind.ANAGRAM}))
            continue
        if part.startswith("<"):
            roles.append(("sig", part[1:].strip(), {ActionKind.REVERSE}))
            continue
        if part.startswith("-"):
            roles.append(("sig", part[1:].strip(), None))
            continue
        if any(_is_caps(w) for w in part.split()):
            roles.append(("commentary", part))
            continue
        fold = part.casefold()
        if fold in tables.signifiers:
            roles.append(("table_sig", part, set(tables.signifiers[fold])))
            continue
        if fold in _ABBREV_MARKERS:
            roles.append(("abbrev", part))
            continue
        roles.append(("gloss", part))
    if all(role[0] == "commentary" for role in roles):
        return _Group("commentary", pos=token.pos)
    return _Group("parts", parts=roles, pos=token.pos)


def _is_container_sig(group: _Group) -> bool:
    live = [r for r in group.parts if r[0] != "commentary"]
    return (
        len(live) == 1
        and live[0][0] == "table_sig"
        and live[0][2] <= _CONTAINER_ACTIONS
    )


def _apply_group(
    unit: _Unit, group: _Group, tables: _Tables, items: list[_Item], boundary: int = -1
) -> bool:
    """Try to attach every live part of a group to a unit; commit only if all fit."""
    node = unit.node
    glossed = False
    abbrev = any(r[0] == "abbrev" for r in group.parts)
    for role in group.parts:
        kind = role[0]
        if kind in ("commentary", "abbrev"):
            continue
        if kind == "gloss":
            if glossed:
                continue  # later glosses are commentary
            wrapped = _wrap_gloss(node, role[1], abbrev, tables)
            if wrapped is None:
                return False
            node = wrapped
            glossed = True
            continue
        if kind == "homo_ind":
            if isinstance(node, Homophone) and node.indicator == "":
                node = dataclasses.replace(node, indicator=role[1])
                continue
            return False
        # "sig" and "table_sig" both carry (kind, text, wanted-actions)
        text, wanted = role[1], role[2]
        if (
            kind == "table_sig"
            and ActionKind.INITIALS in wanted
            and isinstance(node, Initials)
            and node.indicator == ""
        ):
            node = _merge_initials_run(unit, node, text, items, boundary)
            continue
        updated = _set_indicator(node, text, wanted)
        if updated is None:
            return False
        node = updated
    if abbrev and not glossed:
        marked = _mark_abbrev(node)
        if marked is None:
            return False
        node = marked
    unit.node = node
    return True


def _merge_initials_run(
    unit: _Unit, node: Initials, indicator: str, items: list[_Item], boundary: int
) -> Initials:
    """Fold adjacent initial-letter units into one node when a signifier lands."""
    phrases = list(node.phrases)
    while (
        len(items) >= 2
        and len(items) - 2 >= boundary
        and items[-1] is unit
        and isinstance(items[-2], _Unit)
        and isinstance(items[-2].node, Initials)
        and items[-2].node.indicator == ""
    ):
        phrases = list(items[-2].node.phrases) + phrases
        del items[-2]
    return Initials(tuple(phrases), indicator)


# --------------------------------------------------------------------------
# Word-token shapes


def _word_item(token: _Token, full: str) -> _Item:
    segs = _segments(token.text)
    kinds = [k for k, _ in segs]
    texts = [t for _, t in segs]

    if kinds == ["bare"]:
        seg = texts[0]
        if not _is_caps(seg):
            return _Word(token.text, token.pos)
        split_marker = None
        if "/" in seg:
            head, _, tail = seg.partition("/")
            if "/" in tail or not head or not tail:
                raise ParseError("malformed split marker", full, token.pos)
            split_marker = len(normalize_letters(head))
        return _Unit(Literal(normalize_letters(seg)), token.pos, split_marker)

    for kind, seg in segs:
        if kind == "bare" and not _is_caps(seg):
            raise ParseError(
                f"expected capitals next to brackets in {token.text!r}", full, token.pos
            )
    caps = [normalize_letters(t) for t in texts]

    if kinds == ["brkt", "bare"]:
        return _Unit(
            Deletion(Literal(caps[0] + caps[1]), caps[0], DeletionKind.FIRST, ""),
            token.pos,
        )
    if kinds == ["bare", "brkt"]:
        if len(caps[0]) == 1 and len(caps[1]) > 1:
            word = (texts[0] + texts[1]).lower()
            return _Unit(Initials((word,), ""), token.pos)
        return _Unit(
            Deletion(Literal(caps[0] + caps[1]), caps[1], DeletionKind.LAST, ""),
            token.pos,
        )
    if kinds == ["bare", "brkt", "bare"]:
        return _Unit(
            Deletion(Literal(caps[0] + caps[1] + caps[2]), caps[1], DeletionKind.INNER, ""),
            token.pos,
        )
    if kinds == ["brkt", "bare", "brkt"]:
        host = (texts[0] + texts[1] + texts[2]).lower()
        return _Unit(Hidden(host, "", caps[1]), token.pos)
    raise ParseError(f"unrecognized word shape {token.text!r}", full, token.pos)


def _try_hidden_run(
    tokens: list[_Token], start: int, tables: _Tables, full: str
) -> Optional[tuple[_Unit, int]]:
    """Detect multi-word hidden answers and merged CAPS phrases.

    Returns the unit and the index just past the consumed tokens.
    """
    run: list[list[tuple[str, str]]] = []
    j = start
    while j < len(tokens) and tokens[j].kind == "WORD":
        segs = _segments(tokens[j].text)
        has_brkt = any(k == "brkt" for k, _ in segs)
        bare = [t for k, t in segs if k == "bare"]
        if not all(_is_caps(t) for t in bare) or not (has_brkt or bare):
            break
        run.append(segs)
        j += 1
    if len(run) < 2:
        return None

    shape_ok = True
    for wi, segs in enumerate(run):
        for si, (kind, _) in enumerate(segs):
            if kind != "brkt":
                continue
            leading = wi == 0 and si == 0
            trailing = wi == len(run) - 1 and si == len(segs) - 1
            if not (leading or trailing):
                shape_ok = False
    has_brackets = any(k == "brkt" for segs in run for k, _ in segs)
    next_is_substring_sig = False
    if j < len(tokens) and tokens[j].kind == "GROUP":
        fold = tokens[j].text.strip().casefold()
        next_is_substring_sig = ActionKind.SUBSTRING in tables.signifiers.get(fold, ())

    if shape_ok and (has_brackets or next_is_substring_sig):
        words = ["".join(t for _, t in segs).lower() for segs in run]
        letters = "".join(
            normalize_letters(t) for segs in run for k, t in segs if k == "bare"
        )
        if not letters:
            raise ParseError("hidden words carry no capitals", full, tokens[start].pos)
        return _Unit(Hidden(" ".join(words), "", letters), tokens[start].pos), j
    if not has_brackets:
        letters = "".join(normalize_letters(t) for segs in run for _, t in segs)
        return _Unit(Literal(letters), tokens[start].pos), j
    return None


# --------------------------------------------------------------------------
# Assembly


def _operand_node(content: str, full: str, base: int, tables: _Tables) -> WordplayNode:
    tokens = _tokenize(content, full, base)
    if not tokens:
        raise ParseError("empty operand", full, base)
    if all(t.kind == "WORD" for t in tokens):
        letters = normalize_letters("".join(t.text for t in tokens))
        if not letters:
            raise ParseError("operand has no letters", full, base)
        return Literal(letters)
    return _assemble(tokens, full, tables)


def _parse_text(text: str, full: str, base: int, tables: _Tables) -> WordplayNode:
    return _assemble(_tokenize(text, full, base), full, tables)


def _is_double_definition(text: str, tokens: list[_Token]) -> bool:
    if text.strip().casefold() in ("dd", "double definition"):
        return True
    dd_groups = [t for t in tokens if t.kind == "GROUP" and t.text.strip() == "DD"]
    others = [t for t in tokens if t not in dd_groups]
    return len(dd_groups) == 1 and all(
        t.kind == "WORD" and all(not _is_caps(s) for k, s in _segments(t.text) if k == "bare")
        for t in others
    )


def _assemble(tokens: list[_Token], full: str, tables: _Tables) -> WordplayNode:
    items: list[_Item] = []
    pending: list[_Group] = []
    # A "+" closes the fragment before it: groups and quotes that follow
    # belong to the next fragment and must not attach backwards.
    boundary = -1

    def new_unit(unit: _Unit) -> None:
        for group in pending:
            if not _apply_group(unit, group, tables, items):
                raise ParseError("signifier does not fit what follows it", full, group.pos)
        pending.clear()
        items.append(unit)

    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token.kind == "WORD":
            found = _try_hidden_run(tokens, i, tables, full)
            if found:
                unit, i = found
                new_unit(unit)
                continue
            item = _word_item(token, full)
            if isinstance(item, _Unit):
                new_unit(item)
            else:
                items.append(item)
            i += 1
            continue
        if token.kind == "GROUP":
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if nxt is not None and nxt.kind in ("STAR", "LT"):
                source = _operand_node(token.text, full, token.pos + 1, tables)
                node: WordplayNode
                if nxt.kind == "STAR":
                    node = Anagram(source, "")
                else:
                    node = Reversal(source, "")
                new_unit(_Unit(node, token.pos))
                i += 2
                continue
            group = _classify_group(token, tables, full)
            if group.kind == "dd":
                raise ParseError("unexpected DD marker", full, token.pos)
            if group.kind == "commentary":
                i += 1
                continue
            if group.kind == "unit":
                new_unit(_Unit(group.node, token.pos))
                i += 1
                continue
            if _is_container_sig(group):
                live = [r for r in group.parts if r[0] != "commentary"]
                items.append(_CSig(live[0][1], token.pos))
                i += 1
                continue
            last = items[-1] if items and isinstance(items[-1], _Unit) else None
            if len(items) == boundary:
                last = None
            if last is not None and _apply_group(last, group, tables, items, boundary):
                i += 1
                continue
            if all(r[0] in ("sig", "table_sig", "homo_ind", "commentary") for r in group.parts):
                pending.append(group)
                i += 1
                continue
            raise ParseError("gloss does not attach to anything", full, token.pos)
        if token.kind == "DQUOTE":
            last = items[-1] if items and isinstance(items[-1], _Unit) else None
            if len(items) == boundary:
                last = None
            if last is not None and isinstance(last.node, Literal):
                last.node = Homophone(token.text, "", letters=last.node.letters)
                last.split_marker = None
            else:
                new_unit(_Unit(Homophone(token.text, ""), token.pos))
            i += 1
            continue
        if token.kind == "MINUS":
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            last = items[-1] if items and isinstance(items[-1], _Unit) else None
            if nxt is None or nxt.kind != "SQUOTE":
                raise ParseError("expected quoted letters after '-'", full, token.pos)
            if last is None or not isinstance(last.node, Deletion):
                raise ParseError("removal note without a deletion", full, token.pos)
            if normalize_letters(nxt.text) != last.node.removed:
                raise ParseError(
                    f"removal note {nxt.text!r} does not match deleted letters "
                    f"{last.node.removed!r}",
                    full,
                    nxt.pos,
                )
            i += 2
            continue
        if token.kind == "PLUS":
            boundary = len(items)
            i += 1
            continue
        if token.kind == "SQUOTE":
            raise ParseError("quoted letters without a preceding '-'", full, token.pos)
        raise ParseError(f"dangling {token.text!r}", full, token.pos)

    if pending:
        raise ParseError("dangling signifier group", full, pending[0].pos)
    return _resolve_structure(items, full, tables)


def _resolve_structure(items: list[_Item], full: str, tables: _Tables) -> WordplayNode:
    """Turn the flat item list into a tree, resolving container phrases."""
    nodes: list[tuple[WordplayNode, Optional[int]]] = []

    def next_unit(start: int) -> tuple[_Unit, int]:
        k = start
        while k < len(items):
            item = items[k]
            if isinstance(item, _Unit):
                return item, k + 1
            if isinstance(item, _Word) and item.text.casefold() in _GLUE_WORDS:
                k += 1
                continue
            break
        raise ParseError("expected wordplay after connector", full, pos_of(start))

    def pos_of(index: int) -> int:
        return items[index].pos if index < len(items) else (items[-1].pos if items else 0)

    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, _Unit):
            nodes.append((item.node, item.split_marker))
            i += 1
            continue
        if isinstance(item, _CSig):
            if nodes and isinstance(nodes[-1][0], Container):
                container, _ = nodes[-1]
                nodes[-1] = (dataclasses.replace(container, indicator=item.text), None)
                i += 1
                continue
            raise ParseError("container signifier without a container", full, item.pos)

        # A plain word: try multi-word connector phrases, longest first.
        phrase = None
        actions: frozenset[ActionKind] = frozenset()
        span = 0
        for width in (3, 2, 1):
            if i + width > len(items):
                continue
            window = items[i : i + width]
            if not all(isinstance(w, _Word) for w in window):
                continue
            candidate = " ".join(w.text for w in window).casefold()
            found = tables.signifiers.get(candidate, frozenset())
            if found & _CONTAINER_ACTIONS:
                phrase, actions, span = " ".join(w.text for w in window), found, width
                break
        fold = item.text.casefold()

        if phrase is not None and ActionKind.GOES_OUTSIDE in actions:
            after = i + span
            if (
                after < len(items)
                and isinstance(items[after], _Word)
                and items[after].text.casefold() == "it"
            ):
                if len(nodes) < 2:
                    raise ParseError("nothing for the container to wrap", full, item.pos)
                outer, outer_marker = nodes.pop()
                inner, _ = nodes.pop()
                nodes.append(
                    (
                        Container(outer, inner, phrase, outer_marker or 1, inserted=False),
                        None,
                    )
                )
                i = after + 1
                continue
            if not nodes:
                raise ParseError("container connector without left operand", full, item.pos)
            inner_unit, after_unit = next_unit(after)
            outer, outer_marker = nodes.pop()
            nodes.append(
                (
                    Container(outer, inner_unit.node, phrase, outer_marker or 1, inserted=False),
                    None,
                )
            )
            i = after_unit
            continue
        if phrase is not None and ActionKind.GOES_INSIDE in actions:
            if not nodes:
                raise ParseError("container connector without left operand", full, item.pos)
            outer_unit, after_unit = next_unit(i + span)
            inner, _ = nodes.pop()
            nodes.append(
                (
                    Container(
                        outer_unit.node,
                        inner,
                        phrase,
                        outer_unit.split_marker or 1,
                        inserted=True,
                    ),
                    None,
                )
            )
            i = after_unit
            continue
        if fold == "with" or fold in _GLUE_WORDS:
            i += 1
            continue
        raise ParseError(f"unresolved word {item.text!r}", full, item.pos)

    plain = [node for node, _ in nodes]
    if not plain:
        raise ParseError("annotation assembles no letters", full, 0)
    if len(plain) == 1:
        return plain[0]
    return Sequence(tuple(plain))


def parse_wordplay(
    annotation: str,
    *,
    signifiers: Optional[dict[str, frozenset[ActionKind]]] = None,
    abbreviations: Optional[dict[str, set[str]]] = None,
) -> WordplayNode:
    """Parse a wordplay annotation into its node tree.

    ``signifiers`` maps case-folded phrases to the actions they can mark
    and ``abbreviations`` maps case-folded phrases to known short forms;
    both default to the packaged seed tables.
    """
    if not annotation or not annotation.strip():
        raise ParseError("empty annotation", annotation, 0)
    tables = _Tables(
        signifiers if signifiers is not None else lexfiles.seed_indicator_table(),
        abbreviations if abbreviations is not None else lexfiles.seed_abbreviation_inverse(),
    )
    tokens = _tokenize(annotation, annotation)
    if _is_double_definition(annotation, tokens):
        return DoubleDefinition()
    return _assemble(tokens, annotation, tables)


# --------------------------------------------------------------------------
# Rendering


def _leaf_text(node: WordplayNode, letters: Optional[str] = None) -> str:
    shown = letters if letters is not None else node.letters
    if isinstance(node, Literal):
        return shown
    if isinstance(node, SynonymOf):
        return f"{shown} ({node.phrase})"
    if isinstance(node, AbbrevOf):
        return f"{shown} ({node.phrase}, short form)"
    raise TypeError(f"not a leaf: {node!r}")


def _bracketed(kept_before: str, removed: str, kept_after: str) -> str:
    out = kept_before
    out += f"[{removed.lower()}]"
    out += kept_after
    return out


def _render_deletion(node: Deletion) -> str:
    s = surface_letters(node.source)
    r = node.removed
    if node.kind is DeletionKind.FIRST:
        body = _bracketed("", r, s[len(r) :])
    elif node.kind is DeletionKind.LAST:
        body = _bracketed(s[: len(s) - len(r)], r, "")
    else:
        i = _inner_removal_index(s, r)
        assert i is not None
        body = _bracketed(s[:i], r, s[i + len(r) :])
    if isinstance(node.source, SynonymOf):
        body += f" ({node.source.phrase})"
    elif isinstance(node.source, AbbrevOf):
        body += f" ({node.source.phrase}, short form)"
    if node.indicator:
        body += f" (-{node.indicator})"
    return body


def _render_initials(node: Initials) -> str:
    words = []
    for phrase in node.phrases:
        for word in phrase.split():
            head = normalize_letters(word)[:1]
            tail = word[len(head) :] if len(word) > len(head) else ""
            words.append(f"{head}[{tail}]" if tail else head)
    text = " ".join(words)
    if node.indicator:
        text += f" ({node.indicator})"
    return text


def _render_hidden(node: Hidden) -> str:
    words = node.host_text.split()
    norms = [normalize_letters(w) for w in words]
    joined = "".join(norms)
    # Brackets may only open the first word and close the last, so prefer an
    # occurrence of the letters whose overhangs stay within those words.
    start = joined.find(node.letters)
    assert start >= 0
    probe = start
    while probe >= 0:
        end = probe + len(node.letters)
        if len(norms) == 1:
            fits = 0 < probe and end < len(joined)
        else:
            fits = probe <= len(norms[0]) and end >= len(joined) - len(norms[-1])
        if fits:
            start = probe
            break
        probe = joined.find(node.letters, probe + 1)
    end = start + len(node.letters)
    rendered = []
    offset = 0
    for norm in norms:
        a, b = offset, offset + len(norm)
        lo, hi = max(a, start), min(b, end)
        if lo >= hi:
            rendered.append(f"[{norm.lower()}]")
        else:
            pre = norm[: lo - a].lower()
            mid = norm[lo - a : hi - a]
            post = norm[hi - a :].lower()
            text = (f"[{pre}]" if pre else "") + mid + (f"[{post}]" if post else "")
            rendered.append(text)
        offset = b
    text = " ".join(rendered)
    if node.indicator:
        text += f" ({node.indicator})"
    return text


def _render_container(node: Container) -> str:
    tables = _default_tables()
    if isinstance(node.outer, (Literal, SynonymOf, AbbrevOf)) and node.outer_split != 1:
        letters = node.outer.letters
        marked = letters[: node.outer_split] + "/" + letters[node.outer_split :]
        outer_text = _leaf_text(node.outer, marked)
    else:
        outer_text = render_wordplay(node.outer)
    inner_text = render_wordplay(node.inner)
    fold = node.indicator.casefold()
    wanted = ActionKind.GOES_INSIDE if node.inserted else ActionKind.GOES_OUTSIDE
    if node.indicator and wanted in tables.signifiers.get(fold, ()):
        connector = node.indicator
    else:
        connector = "in" if node.inserted else "around"
    if node.inserted:
        text = f"{inner_text} {connector} {outer_text}"
    else:
        text = f"{outer_text} {connector} {inner_text}"
    if node.indicator and node.indicator != connector:
        text += f" ({node.indicator})"
    return text


def _render_homophone(node: Homophone) -> str:
    text = f'"{node.sounds_like}"'
    if node.letters != normalize_letters(node.sounds_like):
        text = f"{node.letters} {text}"
    notes = []
    if node.origin:
        notes.append(node.origin)
    if node.indicator:
        notes.append(f'"{node.indicator}"')
    if notes:
        text += f" ({', '.join(notes)})"
    return text


def _operand_text(node: WordplayNode) -> str:
    if isinstance(node, Literal):
        return node.letters
    return render_wordplay(node)


def render_wordplay(node: WordplayNode) -> str:
    """Render a node tree in canonical notation; parse_wordplay inverts it."""
    if isinstance(node, (Literal, SynonymOf, AbbrevOf)):
        return _leaf_text(node)
    if isinstance(node, Anagram):
        text = f"({_operand_text(node.source)})*"
        return f"{text} (*{node.indicator})" if node.indicator else text
    if isinstance(node, Reversal):
        text = f"({_operand_text(node.source)})<"
        return f"{text} (<{node.indicator})" if node.indicator else text
    if isinstance(node, Deletion):
        return _render_deletion(node)
    if isinstance(node, Initials):
        return _render_initials(node)
    if isinstance(node, Hidden):
        return _render_hidden(node)
    if isinstance(node, Container):
        return _render_container(node)
    if isinstance(node, Homophone):
        return _render_homophone(node)
    if isinstance(node, DoubleDefinition):
        return "DD"
    if isinstance(node, Sequence):
        return " + ".join(render_wordplay(p) for p in node.parts)
    raise TypeError(f"not a wordplay node: {node!r}")


# --------------------------------------------------------------------------
# Resolution against an answer


@dataclass(frozen=True)
class Resolved:
    """A node matched against the exact letters it contributes to an answer."""

    node: WordplayNode
    letters: str
    parts: tuple["Resolved", ...] = ()
    split: Optional[int] = None


def _candidate_lengths(part: WordplayNode, available: int) -> list[int]:
    if isinstance(part, Homophone):
        return list(range(1, available + 1))
    span = len(surface_letters(part))
    return [span] if span <= available else []


def _resolve(node: WordplayNode, target: str) -> Optional[Resolved]:
    if isinstance(node, (Literal, SynonymOf, AbbrevOf, Initials, Hidden)):
        return Resolved(node, target) if surface_letters(node) == target else None
    if isinstance(node, Anagram):
        src = surface_letters(node.source)
        if sorted(src) == sorted(target) and target:
            sub = _resolve(node.source, src)
            if sub is not None:
                return Resolved(node, target, (sub,))
        return None
    if isinstance(node, Reversal):
        sub = _resolve(node.source, target[::-1])
        return Resolved(node, target, (sub,)) if sub is not None else None
    if isinstance(node, Deletion):
        if surface_letters(node) != target:
            return None
        src = surface_letters(node.source)
        sub = _resolve(node.source, src)
        return Resolved(node, target, (sub,)) if sub is not None else None
    if isinstance(node, Homophone):
        found = node.letters == target or (
            bool(target) and phonetic_key(node.letters) == phonetic_key(target)
        )
        return Resolved(node, target) if found else None
    if isinstance(node, DoubleDefinition):
        return Resolved(node, target) if target else None
    if isinstance(node, Container):
        splits = dict.fromkeys([node.outer_split, *range(1, len(target))])
        for split in splits:
            for middle in range(1, len(target) - split + 1):
                tail = len(target) - split - middle
                if tail < 1:
                    continue
                outer = _resolve(node.outer, target[:split] + target[split + middle :])
                inner = _resolve(node.inner, target[split : split + middle])
                if outer is not None and inner is not None:
                    return Resolved(node, target, (outer, inner), split=split)
        return None
    if isinstance(node, Sequence):
        memo: dict[tuple[int, int], Optional[tuple[Resolved, ...]]] = {}

        def walk(idx: int, offset: int) -> Optional[tuple[Resolved, ...]]:
            if idx == len(node.parts):
                return () if offset == len(target) else None
            key = (idx, offset)
            if key in memo:
                return memo[key]
            answer: Optional[tuple[Resolved, ...]] = None
            for span in _candidate_lengths(node.parts[idx], len(target) - offset):
                sub = _resolve(node.parts[idx], target[offset : offset + span])
                if sub is None:
                    continue
                rest = walk(idx + 1, offset + span)
                if rest is not None:
                    answer = (sub,) + rest
                    break
            memo[key] = answer
            return answer

        found = walk(0, 0)
        return Resolved(node, target, found) if found is not None else None
    raise TypeError(f"not a wordplay node: {node!r}")


def resolve(node: WordplayNode, answer: str) -> Optional[Resolved]:
    """Match a tree against an answer, choosing anagram spellings, homophone
    spellings and container split points; None when the letters cannot work."""
    return _resolve(node, normalize_letters(answer))


def yields_answer(node: WordplayNode, answer: str) -> bool:
    """Whether the annotation's letters account for the answer."""
    return resolve(node, answer) is not None
