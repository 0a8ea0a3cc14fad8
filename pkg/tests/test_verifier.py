"""Proof grammar, evaluation, lints and the frozen failure report."""

import dataclasses
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cryptic_prover import lexfiles
from cryptic_prover.core import ActionKind, normalize_letters
from cryptic_prover.oracles import seed_lexicon
from cryptic_prover.verifier import (
    AssertEquality,
    AssertNegation,
    AssertPredicate,
    Call,
    Concat,
    EmptyOperand,
    LintKind,
    ParseError,
    ProofStatus,
    Severity,
    StringLit,
    VerificationOutcome,
    eval_expr,
    parse_proof,
    render_failure_report,
    render_statement,
    verify,
    verify_text,
)

GOLDEN = Path(__file__).parent / "golden"

ONCE_PROOF = """\
proof answer="ONCE" clue="head decapitated long ago" pattern="4"
definition: head decapitated {long ago}
wordplay: [b]ONCE (head decapitated = remove first letter of BONCE)
assert is_synonym("head", "BONCE")
assert action_type("decapitated", Action.REMOVE_FIRST)
assert drop_first("BONCE") == "ONCE"
assert is_synonym("long ago", "ONCE", pattern="4")
"""

DECIMAL_PROOF = """\
proof answer="DECIMAL" clue="the point of medical treatment" pattern="7"
definition: {the point} of medical treatment
wordplay: (MEDICAL)* (*treatment = anagram)
assert is_synonym("the point", "DECIMAL", pattern="7")
assert action_type("treatment", Action.ANAGRAM)
assert is_anagram("MEDICAL", "DECIMAL")
"""

SUPERMARKET_PROOF = """\
proof answer="SUPERMARKET" clue="fat bags for every brand that's a big seller" pattern="11"
definition: fat bags for every brand that's {a big seller}
wordplay: SUET (fat) (bags = goes outside) of (PER (for every) + MARK (brand))
assert is_synonym("fat", "SUET")
assert action_type("bags", Action.GOES_OUTSIDE)
assert "SUET" == "SU" + "ET"
assert is_abbreviation("for every", "PER")
assert is_synonym("brand", "MARK")
assert "SU" + "PER" + "MARK" + "ET" == "SUPERMARKET"
assert is_synonym("a big seller", "SUPERMARKET", pattern="11")
"""

REGAL_PROOF = """\
proof answer="REGAL" clue="beer returned, fit for a king" pattern="5"
definition: beer returned, {fit for a king}
wordplay: (LAGER)< (beer, <returned)
assert is_synonym("beer", "LAGER")
assert action_type("returned", Action.REVERSE)
assert reverse("LAGER") == "REGAL"
assert is_synonym("fit for a king", "REGAL", pattern="5")
"""

UNDERMINED_PROOF = """\
proof answer="UNDERMINED" clue="found ermine deer hides damaged" pattern="10"
wordplay: [fo]UND ERMINE D[eer] (hides)
assert action_type("hides", Action.SUBSTRING)
assert hidden_span("found ermine deer", "UNDERMINED") == "UNDERMINED"
assert is_synonym("damaged", "UNDERMINED", pattern="10")
"""


def camera_proof_text() -> str:
    return lexfiles.seed_path("fixtures/proofs/camera.proof").read_text(encoding="utf-8")


def rude_proof_text() -> str:
    return lexfiles.seed_path("fixtures/proofs/rude.proof").read_text(encoding="utf-8")


PROVED_PROOF_TEXTS = [
    ONCE_PROOF,
    DECIMAL_PROOF,
    SUPERMARKET_PROOF,
    REGAL_PROOF,
    UNDERMINED_PROOF,
]


@pytest.fixture(scope="module")
def lex():
    return seed_lexicon()


class TestParse:
    def test_camera_proof_has_four_statements(self):
        proof = parse_proof(camera_proof_text())
        assert len(proof.statements) == 4
        assert proof.answer == "CAMERA"
        assert proof.pattern.render() == "6"
        assert proof.definition.endswith("{optical device}")
        assert proof.wordplay.startswith("CAME")

    def test_statement_shapes(self):
        proof = parse_proof(camera_proof_text())
        first, second, third, fourth = proof.statements
        assert first == AssertPredicate("is_synonym", ("arrived", "CAME"))
        assert second == AssertPredicate("is_abbreviation", ("artist", "RA"))
        assert third == AssertEquality(
            Concat((StringLit("CAME"), StringLit("RA"))), StringLit("CAMERA")
        )
        assert fourth == AssertPredicate(
            "is_synonym", ("optical device", "CAMERA"), pattern="6"
        )

    def test_action_tokens_and_alias(self):
        proof = parse_proof(
            'proof answer="X" clue="c" pattern="1"\n'
            'assert action_type("about", Action.IS_OUTSIDE)\n'
        )
        assert proof.statements[0].args[1] is ActionKind.GOES_OUTSIDE

    def test_trailing_comments_and_blank_lines(self):
        proof = parse_proof(rude_proof_text())
        assert len(proof.statements) == 4

    def test_single_quoted_strings(self):
        proof = parse_proof(
            "proof answer='ONCE' clue='c' pattern='4'\n"
            "assert is_synonym('long ago', 'ONCE', pattern='4')\n"
        )
        assert proof.statements[0].pattern == "4"

    def test_negation_parses(self):
        proof = parse_proof(
            'proof answer="AB" clue="c" pattern="2"\nassert not "A" == "B"\n'
        )
        statement = proof.statements[0]
        assert isinstance(statement, AssertNegation)
        assert isinstance(statement.inner, AssertEquality)

    def test_empty_body_is_zero_statements(self):
        proof = parse_proof('proof answer="AB" clue="c" pattern="2"\n')
        assert proof.statements == ()

    def test_header_only_fields(self):
        proof = parse_proof('proof pattern="3,2" clue="c" answer="ABCDE"\n')
        assert proof.pattern.total == 5


class TestParseErrors:
    def assert_error(self, script, fragment, line=None):
        with pytest.raises(ParseError) as info:
            parse_proof(script)
        assert fragment in str(info.value)
        if line is not None:
            assert info.value.line == line

    def test_misspelled_predicate_gets_did_you_mean(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert is_synomym("a", "B")\n',
            "did you mean 'is_synonym'?",
            line=2,
        )

    def test_error_carries_line_and_column(self):
        with pytest.raises(ParseError) as info:
            parse_proof('proof answer="A" clue="c" pattern="1"\nassert "A" %\n')
        assert info.value.line == 2
        assert info.value.column == 12

    def test_missing_header(self):
        self.assert_error('assert is_anagram("A", "B")\n', "proof header first")

    def test_empty_script(self):
        self.assert_error("", "a proof header is required")

    def test_duplicate_header(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nproof answer="B" clue="c" pattern="1"\n',
            "duplicate proof header",
        )

    def test_unknown_header_field(self):
        self.assert_error('proof answer="A" clue="c" glyph="1"\n', "unknown header field")

    def test_missing_header_field(self):
        self.assert_error('proof answer="A" clue="c"\n', 'missing pattern="..."')

    def test_invalid_header_pattern(self):
        self.assert_error('proof answer="A" clue="c" pattern="x"\n', "invalid pattern")

    def test_bare_expression_is_rejected(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert "A" + "B"\n',
            "a bare expression is not an assertion",
        )

    def test_unterminated_string(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert is_anagram("A, "B")\n',
            "unterminated string",
        )

    def test_unknown_action(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\n'
            'assert action_type("x", Action.SIDEWAYS)\n',
            "unknown action",
        )

    def test_pattern_kw_restricted_to_is_synonym(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\n'
            'assert is_anagram("A", "B", pattern="1")\n',
            "does not accept pattern=",
        )

    def test_predicate_arity(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert is_anagram("A")\n',
            "expects 2 arguments, got 1",
        )

    def test_builtin_arity(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert reverse("A", "B") == "AB"\n',
            "expects 1 argument(s), got 2",
        )

    def test_predicate_inside_expression(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert is_anagram("A", "B") == "X"\n',
            "end of line after a predicate assertion",
        )
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert "X" == is_anagram("A", "B")\n',
            "cannot be used inside an expression",
        )

    def test_action_outside_predicate(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nassert Action.ANAGRAM == "X"\n',
            "only valid as predicate arguments",
        )

    def test_unknown_line_shape(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\nlemma: interesting\n',
            "expected an assert line",
        )

    def test_duplicate_docstring_line(self):
        self.assert_error(
            'proof answer="A" clue="c" pattern="1"\ndefinition: x\ndefinition: y\n',
            "duplicate definition",
        )


class TestEvalExpr:
    def test_concat(self):
        expr = Concat((StringLit("BAN"), StringLit("KING")))
        assert eval_expr(expr) == "BANKING"

    def test_reverse(self):
        assert eval_expr(Call("reverse", (StringLit("LAGER"),))) == "REGAL"

    def test_drop_first(self):
        assert eval_expr(Call("drop_first", (StringLit("BONCE"),))) == "ONCE"

    def test_drop_last_first_last(self):
        assert eval_expr(Call("drop_last", (StringLit("ELVES"),))) == "ELVE"
        assert eval_expr(Call("first", (StringLit("done"),))) == "D"
        assert eval_expr(Call("last", (StringLit("done"),))) == "E"

    def test_initials_takes_each_word(self):
        assert eval_expr(Call("initials", (StringLit("magical beings"),))) == "MB"

    def test_odd_even_letters_are_one_indexed(self):
        assert eval_expr(Call("odd_letters", (StringLit("ABCDEF"),))) == "ACE"
        assert eval_expr(Call("even_letters", (StringLit("ABCDEF"),))) == "BDF"

    def test_hidden_span(self):
        found = Call("hidden_span", (StringLit("found ermine deer"), StringLit("UNDERMINED")))
        assert eval_expr(found) == "UNDERMINED"
        missing = Call("hidden_span", (StringLit("found ermine deer"), StringLit("RAVEN")))
        assert eval_expr(missing) == ""

    def test_nested_calls(self):
        expr = Call("reverse", (Call("drop_first", (StringLit("BONCE"),)),))
        assert eval_expr(expr) == "ECNO"

    def test_empty_operand(self):
        for builtin in ("drop_first", "drop_last", "first", "last"):
            with pytest.raises(EmptyOperand):
                eval_expr(Call(builtin, (StringLit(""),)))

    def test_normalizes_inputs(self):
        assert eval_expr(Call("reverse", (StringLit("lager"),))) == "REGAL"

    @given(st.text(alphabet="ABCDEFGHIJ", max_size=12))
    def test_reverse_twice_is_identity(self, s):
        expr = Call("reverse", (Call("reverse", (StringLit(s),)),))
        assert eval_expr(expr) == normalize_letters(s)

    @given(st.text(alphabet="ABCDEFGHIJ", max_size=12))
    def test_odd_and_even_partition(self, s):
        odd = eval_expr(Call("odd_letters", (StringLit(s),)))
        even = eval_expr(Call("even_letters", (StringLit(s),)))
        assert sorted(odd + even) == sorted(normalize_letters(s))
        assert len(odd) - len(even) in (0, 1)


class TestVerify:
    def test_camera_proof_proves(self, lex):
        outcome = verify(parse_proof(camera_proof_text()), lex)
        assert outcome.status is ProofStatus.PROVED
        assert outcome.failures == ()

    @pytest.mark.parametrize("text", PROVED_PROOF_TEXTS)
    def test_known_good_proofs_prove(self, lex, text):
        outcome = verify(parse_proof(text), lex)
        assert outcome.status is ProofStatus.PROVED, outcome.failures

    def test_rude_proof_fails_with_both_marked_failures(self, lex):
        outcome = verify(parse_proof(rude_proof_text()), lex)
        assert outcome.status is ProofStatus.FAILED
        assert [failure.index for failure in outcome.failures] == [2, 3]
        assert outcome.failures[0].message == "assert is_synonym('assistant', 'ASS')"
        assert outcome.failures[1].message == "assert 'RUD' + 'ASS' == 'RUDE'"

    def test_all_failures_collected_no_early_stop(self, lex):
        script = (
            'proof answer="CAMERA" clue="c" pattern="6"\n'
            'assert is_synonym("quasar", "CAMERA")\n'
            'assert "A" == "B"\n'
            'assert "CAM" + "ERA" == "CAMERA"\n'
        )
        outcome = verify(parse_proof(script), lex)
        assert [failure.index for failure in outcome.failures] == [0, 1]

    def test_header_answer_must_fit_pattern(self, lex):
        script = (
            'proof answer="RUDE" clue="c" pattern="5"\n'
            'assert is_synonym("rudeness", "RUDE")\n'
        )
        outcome = verify(parse_proof(script), lex)
        assert outcome.status is ProofStatus.FAILED
        failure = outcome.failures[0]
        assert failure.index == -1
        assert failure.message == "assert answer 'RUDE' fits the pattern '5'"
        assert failure.hint == "'RUDE' has 4 letters, the pattern needs 5"

    def test_empty_operand_becomes_failure_not_crash(self, lex):
        script = 'proof answer="A" clue="c" pattern="1"\nassert drop_first("") == "A"\n'
        outcome = verify(parse_proof(script), lex)
        assert outcome.status is ProofStatus.FAILED
        assert "empty string" in outcome.failures[0].hint

    def test_negated_empty_operand_still_fails(self, lex):
        script = 'proof answer="A" clue="c" pattern="1"\nassert not drop_first("") == "A"\n'
        outcome = verify(parse_proof(script), lex)
        assert outcome.status is ProofStatus.FAILED

    def test_is_abbreviation_failure_keeps_colon_quirk(self, lex):
        script = (
            'proof answer="CAMERA" clue="c" pattern="6"\n'
            'assert is_abbreviation("an Artist", "RA")\n'
            'assert "CAM" + "ERA" == "CAMERA"\n'
        )
        outcome = verify(parse_proof(script), lex)
        assert outcome.failures[0].message == "assert: is_abbreviation('an Artist', 'RA')"

    def test_deterministic(self, lex):
        proof = parse_proof(rude_proof_text())
        assert verify(proof, lex) == verify(proof, lex)


class TestLints:
    def test_no_assertions_is_fatal(self, lex):
        outcome = verify(parse_proof('proof answer="A" clue="c" pattern="1"\n'), lex)
        assert outcome.status is ProofStatus.FAILED
        assert outcome.lints[0].kind is LintKind.NO_ASSERTIONS
        assert outcome.lints[0].severity is Severity.FATAL

    def test_negated_predicate_is_cheating(self, lex):
        script = (
            'proof answer="ESCORT" clue="c" pattern="6"\n'
            'assert not is_synonym("quasar", "ESCORT")\n'
        )
        outcome = verify(parse_proof(script), lex)
        assert outcome.status is ProofStatus.FAILED
        kinds = [flag.kind for flag in outcome.lints]
        assert LintKind.NEGATED_ASSERT_CHEAT in kinds
        assert outcome.failures == ()  # the negation held; the lint alone sinks it

    def test_double_negation_is_still_cheating(self, lex):
        script = (
            'proof answer="ESCORT" clue="c" pattern="6"\n'
            'assert not not is_anagram("corset", "ESCORT")\n'
        )
        outcome = verify(parse_proof(script), lex)
        kinds = [flag.kind for flag in outcome.lints]
        assert LintKind.NEGATED_ASSERT_CHEAT in kinds

    def test_negated_equality_is_allowed(self, lex):
        script = (
            'proof answer="AB" clue="c" pattern="2"\n'
            'assert not "A" == "B"\n'
            'assert "A" + "B" == "AB"\n'
        )
        outcome = verify(parse_proof(script), lex)
        assert outcome.status is ProofStatus.PROVED
        kinds = [flag.kind for flag in outcome.lints]
        assert LintKind.NEGATED_ASSERT_CHEAT not in kinds

    def test_disconnected_chain_warns_but_proves(self, lex):
        script = (
            'proof answer="CAMERA" clue="arrived" pattern="6"\n'
            'assert is_synonym("arrived", "CAME")\n'
        )
        outcome = verify(parse_proof(script), lex)
        assert outcome.status is ProofStatus.PROVED
        flags = {flag.kind: flag for flag in outcome.lints}
        assert LintKind.DISCONNECTED_CHAIN in flags
        assert flags[LintKind.DISCONNECTED_CHAIN].severity is Severity.WARN

    def test_connected_proof_has_no_chain_warning(self, lex):
        outcome = verify(parse_proof(camera_proof_text()), lex)
        kinds = [flag.kind for flag in outcome.lints]
        assert LintKind.DISCONNECTED_CHAIN not in kinds

    def test_unused_clue_tokens_warn(self, lex):
        outcome = verify(parse_proof(rude_proof_text()), lex)
        flags = {flag.kind: flag for flag in outcome.lints}
        assert LintKind.UNUSED_CLUE_TOKENS in flags
        detail = flags[LintKind.UNUSED_CLUE_TOKENS].detail
        assert "computer" in detail and "language" in detail
        assert "son" not in detail.split(" : ")[1].split(", ")

    def test_fully_used_clue_has_no_warning(self, lex):
        outcome = verify(parse_proof(camera_proof_text()), lex)
        kinds = [flag.kind for flag in outcome.lints]
        assert LintKind.UNUSED_CLUE_TOKENS not in kinds

    def test_outcome_invariant_enforced(self):
        with pytest.raises(ValueError):
            VerificationOutcome(
                ProofStatus.PROVED,
                failures=(),
                lints=(
                    dataclasses.replace(
                        verify(
                            parse_proof('proof answer="A" clue="c" pattern="1"\n'),
                            seed_lexicon(),
                        ).lints[0]
                    ),
                ),
            )


class TestVerifyText:
    def test_parse_error_folds_into_outcome(self, lex):
        script = 'proof answer="A" clue="c" pattern="1"\nassert is_synomym("a", "B")\n'
        outcome = verify_text(script, lex)
        assert outcome.status is ProofStatus.PARSE_ERROR
        assert outcome.failures[0].index == -1
        assert "did you mean 'is_synonym'?" in outcome.failures[0].message

    def test_good_text_verifies(self, lex):
        assert verify_text(camera_proof_text(), lex).status is ProofStatus.PROVED


class TestFailureReport:
    def test_rude_report_matches_golden(self, lex):
        outcome = verify(parse_proof(rude_proof_text()), lex)
        expected = (GOLDEN / "rude_failure_report.txt").read_text(encoding="utf-8")
        assert render_failure_report(outcome) == expected

    def test_hint_showcase_matches_golden(self, lex):
        script = (
            'proof answer="CAMERA" clue="arrived with an artist, to get optical device" '
            'pattern="6"\n'
            'assert is_abbreviation("an Artist", "RA")\n'
            'assert action_type("goes crazy", Action.ANAGRAM)\n'
            'assert action_type("worked", Action.HOMOPHONE)\n'
            'assert "CAME" + "RA" == "CAMERA"\n'
        )
        outcome = verify(parse_proof(script), lex)
        expected = (GOLDEN / "hint_showcase_report.txt").read_text(encoding="utf-8")
        assert render_failure_report(outcome) == expected

    def test_no_assertions_report_matches_golden(self, lex):
        outcome = verify(parse_proof('proof answer="A" clue="c" pattern="1"\n'), lex)
        expected = (GOLDEN / "no_assertions_report.txt").read_text(encoding="utf-8")
        assert render_failure_report(outcome) == expected

    def test_parse_error_report(self, lex):
        outcome = verify_text(
            'proof answer="A" clue="c" pattern="1"\nassert is_synomym("a", "B")\n', lex
        )
        report = render_failure_report(outcome)
        assert report.startswith("ParseError: unknown function 'is_synomym'")
        assert report.rstrip().endswith("return the whole proof:")

    def test_proved_outcome_has_nothing_to_report(self, lex):
        outcome = verify(parse_proof(camera_proof_text()), lex)
        with pytest.raises(ValueError):
            render_failure_report(outcome)

    def test_report_is_byte_stable(self, lex):
        outcome = verify(parse_proof(rude_proof_text()), lex)
        assert render_failure_report(outcome) == render_failure_report(outcome)


class TestStatementRoundTrip:
    def test_rendered_statements_reparse(self, lex):
        texts = PROVED_PROOF_TEXTS + [camera_proof_text(), rude_proof_text()]
        for text in texts:
            proof = parse_proof(text)
            for statement in proof.statements:
                line = "assert " + render_statement(statement)
                reparsed = parse_proof(
                    'proof answer="A" clue="c" pattern="1"\n' + line + "\n"
                )
                assert reparsed.statements[0] == statement


def _mutate_letter(ch: str) -> str:
    if ch.lower() == "q":
        return "Z" if ch.isupper() else "z"
    return "Q" if ch.isupper() else "q"


def _mutate_string(value: str) -> str:
    positions = [i for i, ch in enumerate(value) if ch.isalpha()]
    middle = positions[len(positions) // 2]
    return value[:middle] + _mutate_letter(value[middle]) + value[middle + 1 :]


def _literal_mutants(statement):
    """Each way of changing one letter the rest of the proof pins down.

    Builtin call arguments are excluded: only some of their letters are
    load-bearing (changing the dropped letter of a drop_first operand,
    for instance, leaves the computed value intact).
    """
    if isinstance(statement, AssertPredicate):
        for index, arg in enumerate(statement.args):
            if isinstance(arg, str) and any(ch.isalpha() for ch in arg):
                args = list(statement.args)
                args[index] = _mutate_string(arg)
                yield dataclasses.replace(statement, args=tuple(args))
    elif isinstance(statement, AssertEquality):
        for side_name in ("lhs", "rhs"):
            side = getattr(statement, side_name)
            for mutated in _expr_mutants(side):
                yield dataclasses.replace(statement, **{side_name: mutated})


def _expr_mutants(expr):
    if isinstance(expr, StringLit):
        if any(ch.isalpha() for ch in expr.value):
            yield StringLit(_mutate_string(expr.value))
    elif isinstance(expr, Concat):
        for index, part in enumerate(expr.parts):
            for mutated in _expr_mutants(part):
                parts = list(expr.parts)
                parts[index] = mutated
                yield Concat(tuple(parts))
    # Call arguments are deliberately not mutated.


def test_single_letter_mutations_break_proofs(lex):
    texts = PROVED_PROOF_TEXTS + [camera_proof_text()]
    total = 0
    for text in texts:
        proof = parse_proof(text)
        assert verify(proof, lex).status is ProofStatus.PROVED
        for index, statement in enumerate(proof.statements):
            for mutant in _literal_mutants(statement):
                statements = list(proof.statements)
                statements[index] = mutant
                mutated = dataclasses.replace(proof, statements=tuple(statements))
                outcome = verify(mutated, lex)
                assert outcome.status is ProofStatus.FAILED, render_statement(mutant)
                total += 1
    assert total > 40
