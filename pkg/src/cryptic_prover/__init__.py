"""Parse cryptic crossword wordplay, compile it into proof scripts, and
verify candidate answers against lexicon oracles."""

from cryptic_prover.candidates import (
    EmbeddingTable,
    closest_candidates,
    cosine,
    load_embeddings,
)
from cryptic_prover.core import (
    ActionKind,
    Clue,
    Direction,
    Pattern,
    normalize_letters,
    pattern_matches,
)
from cryptic_prover.evalharness import (
    Method,
    Outcome,
    SolveRecord,
    compare_records,
    run_experiment,
    tabulate,
)
from cryptic_prover.formalize import (
    CompilerBackedMock,
    GeneratorTranscript,
    HttpChatGenerator,
    ProofRequest,
    ScriptedReplayMock,
    build_prompt,
    compile_wordplay,
    prove_with_rewrites,
)
from cryptic_prover.notation import parse_wordplay, render_wordplay
from cryptic_prover.oracles import Lexicon, seed_lexicon
from cryptic_prover.verifier import (
    ProofStatus,
    parse_proof,
    render_failure_report,
    render_proof,
    verify,
    verify_text,
)

__all__ = [
    "ActionKind",
    "Clue",
    "CompilerBackedMock",
    "Direction",
    "EmbeddingTable",
    "GeneratorTranscript",
    "HttpChatGenerator",
    "Lexicon",
    "Method",
    "Outcome",
    "Pattern",
    "ProofRequest",
    "ProofStatus",
    "ScriptedReplayMock",
    "SolveRecord",
    "build_prompt",
    "closest_candidates",
    "compare_records",
    "compile_wordplay",
    "cosine",
    "load_embeddings",
    "normalize_letters",
    "parse_proof",
    "parse_wordplay",
    "pattern_matches",
    "prove_with_rewrites",
    "render_failure_report",
    "render_proof",
    "render_wordplay",
    "run_experiment",
    "seed_lexicon",
    "tabulate",
    "verify",
    "verify_text",
]
