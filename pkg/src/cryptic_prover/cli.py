"""Command-line front end: parse, verify, formalize, candidates, experiment.

Configuration resolves in the conventional order: command-line flags
beat environment variables (``CRYPTIC_PROVER_*``) beat the YAML config
file (``--config`` or ``CRYPTIC_PROVER_CONFIG``) beat the packaged seed
data.  Every file a resolved config references must exist, and every
file a subcommand writes lands under the configured output directory.

Exit codes: 0 success (verify: PROVED), 1 a verification or proving
failure, 2 usage, parse, or configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import yaml

from cryptic_prover import dataset, lexfiles, notation
from cryptic_prover.candidates import (
    EmptyCandidateSet,
    closest_candidates,
    load_embeddings,
)
from cryptic_prover.core import Clue, Pattern, PatternError
from cryptic_prover.evalharness import (
    FileAnnotationSource,
    GoldAnnotationSource,
    compare_records,
    load_records,
    render_table,
    run_experiment,
    tabulate,
)
from cryptic_prover.formalize import (
    CompilerBackedMock,
    HttpChatGenerator,
    ProofRequest,
    ScriptedReplayMock,
    prove_with_rewrites,
    save_transcript,
)
from cryptic_prover.notation import ParseError, parse_wordplay, surface_letters
from cryptic_prover.oracles import Lexicon
from cryptic_prover.verifier import ProofStatus, render_failure_report, verify_text

ENV_PREFIX = "CRYPTIC_PROVER_"
DEFAULT_API_KEY_ENV = "CRYPTIC_PROVER_API_KEY"


class ConfigError(ValueError):
    """Bad or unusable configuration; reported on stderr with exit 2."""


@dataclass(frozen=True)
class CliConfig:
    thesaurus: Path
    abbreviations: Path
    indicators: tuple[Path, ...]
    homophones: Path
    wordlist: Path
    embeddings: Path
    output_dir: Path
    generator: str = "mock"
    replay: Optional[Path] = None
    endpoint: str = ""
    model: str = ""
    api_key_env: str = DEFAULT_API_KEY_ENV
    temperature: Optional[float] = None
    samples: int = 5
    rewrite_cap: int = 5

    def lexicon(self) -> Lexicon:
        return Lexicon.from_files(
            abbreviations=self.abbreviations,
            thesaurus=self.thesaurus,
            indicators=self.indicators,
            homophones=self.homophones,
            wordlist=self.wordlist,
        )

    def make_generator(self):
        if self.generator == "mock":
            return CompilerBackedMock()
        if self.generator == "replay":
            if self.replay is None:
                raise ConfigError("generator 'replay' needs a transcript (--replay)")
            return ScriptedReplayMock.from_transcript(self.replay)
        if self.generator == "live":
            if not self.endpoint or not self.model:
                raise ConfigError("generator 'live' needs an endpoint and a model")
            if not os.environ.get(self.api_key_env, ""):
                raise ConfigError(
                    f"generator 'live' is disabled: set {self.api_key_env}"
                )
            return HttpChatGenerator(
                self.endpoint,
                self.model,
                api_key_env=self.api_key_env,
                temperature=self.temperature,
            )
        raise ConfigError(f"unknown generator {self.generator!r}")

    def out_path(self, name: Union[str, Path]) -> Path:
        """Resolve a write target under the output directory, never outside."""
        root = self.output_dir.resolve()
        target = Path(name)
        target = (target if target.is_absolute() else root / target).resolve()
        if not target.is_relative_to(root):
            raise ConfigError(f"refusing to write outside {root}: {target}")
        target.parent.mkdir(parents=True, exist_ok=True)
        return target


_CONFIG_KEYS = (
    "thesaurus",
    "abbreviations",
    "homophones",
    "wordlist",
    "embeddings",
    "generator",
    "replay",
    "endpoint",
    "model",
    "api_key_env",
    "temperature",
    "samples",
    "rewrite_cap",
    "output_dir",
)


def _seed_defaults() -> dict:
    return {
        "thesaurus": lexfiles.seed_path("lexicon/thesaurus.tsv"),
        "abbreviations": lexfiles.seed_path("lexicon/abbreviations.tsv"),
        "indicators": (
            lexfiles.seed_path("lexicon/indicators.tsv"),
            lexfiles.seed_path("lexicon/indicators_extra.tsv"),
        ),
        "homophones": lexfiles.seed_path("lexicon/homophones.tsv"),
        "wordlist": lexfiles.seed_path("lexicon/wordlist.txt"),
        "embeddings": lexfiles.seed_path("fixtures/embeddings_16d.txt"),
        "output_dir": Path("runs"),
    }


def _load_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file must hold a mapping: {path}")
    unknown = set(raw) - set(_CONFIG_KEYS) - {"indicators"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return raw


def _env_overrides(env) -> dict:
    values = {}
    for key in _CONFIG_KEYS:
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = raw
    raw = env.get(ENV_PREFIX + "INDICATORS")
    if raw is not None:
        values["indicators"] = [p for p in raw.split(os.pathsep) if p]
    return values


def resolve_config(args: argparse.Namespace, env=os.environ) -> CliConfig:
    """Defaults, then config file, then environment, then flags."""
    values = _seed_defaults()

    config_path = getattr(args, "config", None) or env.get(ENV_PREFIX + "CONFIG")
    if config_path:
        file_values = _load_config_file(Path(config_path))
        base = Path(config_path).parent
        for key, value in file_values.items():
            if key == "indicators":
                values[key] = [base / p for p in value]
            elif key in ("thesaurus", "abbreviations", "homophones", "wordlist",
                         "embeddings", "replay", "output_dir"):
                values[key] = base / str(value)
            else:
                values[key] = value

    values.update(_env_overrides(env))

    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "indicators", None):
        values["indicators"] = args.indicators

    try:
        samples = int(values.get("samples", 5))
        rewrite_cap = int(values.get("rewrite_cap", 5))
        temperature = values.get("temperature")
        temperature = None if temperature is None else float(temperature)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"bad numeric config value: {error}") from None
    if samples < 1:
        raise ConfigError(f"samples must be at least 1, got {samples}")
    if not 0 <= rewrite_cap <= 5:
        raise ConfigError(f"rewrite cap must be 0..5, got {rewrite_cap}")

    config = CliConfig(
        thesaurus=Path(values["thesaurus"]),
        abbreviations=Path(values["abbreviations"]),
        indicators=tuple(Path(p) for p in values["indicators"]),
        homophones=Path(values["homophones"]),
        wordlist=Path(values["wordlist"]),
        embeddings=Path(values["embeddings"]),
        output_dir=Path(values["output_dir"]),
        generator=str(values.get("generator", "mock")),
        replay=Path(values["replay"]) if values.get("replay") else None,
        endpoint=str(values.get("endpoint", "")),
        model=str(values.get("model", "")),
        api_key_env=str(values.get("api_key_env", DEFAULT_API_KEY_ENV)),
        temperature=temperature,
        samples=samples,
        rewrite_cap=rewrite_cap,
    )
    _check_files_exist(config)
    return config


def _check_files_exist(config: CliConfig) -> None:
    named = [
        ("thesaurus", config.thesaurus),
        ("abbreviations", config.abbreviations),
        ("homophones", config.homophones),
        ("wordlist", config.wordlist),
        ("embeddings", config.embeddings),
    ]
    named.extend(("indicators", path) for path in config.indicators)
    if config.replay is not None:
        named.append(("replay", config.replay))
    for label, path in named:
        if not Path(path).is_file():
            raise ConfigError(f"missing {label} file: {path}")


# -- output helpers ----------------------------------------------------------


def _emit_json(payload) -> None:
    print(json.dumps(payload, ensure_ascii=False, sort_keys=True))


def _node_dict(node) -> dict:
    out = {"kind": type(node).__name__}
    for field in dataclasses.fields(node):
        value = getattr(node, field.name)
        if dataclasses.is_dataclass(value):
            value = _node_dict(value)
        elif isinstance(value, tuple):
            value = [
                _node_dict(item) if dataclasses.is_dataclass(item) else item
                for item in value
            ]
        elif hasattr(value, "name") and not isinstance(value, str):
            value = value.name
        out[field.name] = value
    return out


def _tree_lines(node, depth=0) -> list[str]:
    pad = "  " * depth
    name = type(node).__name__
    detail = []
    for field in dataclasses.fields(node):
        value = getattr(node, field.name)
        if dataclasses.is_dataclass(value) or (
            isinstance(value, tuple) and value and dataclasses.is_dataclass(value[0])
        ):
            continue
        if value == "" or value == () or value is False or value is None:
            continue
        shown = value.name if hasattr(value, "name") and not isinstance(value, str) else value
        detail.append(f"{field.name}={shown!r}")
    lines = [f"{pad}{name}" + (f" ({', '.join(detail)})" if detail else "")]
    for field in dataclasses.fields(node):
        value = getattr(node, field.name)
        if dataclasses.is_dataclass(value):
            lines.extend(_tree_lines(value, depth + 1))
        elif isinstance(value, tuple):
            for item in value:
                if dataclasses.is_dataclass(item):
                    lines.extend(_tree_lines(item, depth + 1))
    return lines


# -- subcommands -------------------------------------------------------------


def cmd_parse(config: CliConfig, args) -> int:
    annotations = []
    if args.file:
        text = Path(args.file).read_text(encoding="utf-8")
        annotations = [line for line in text.splitlines() if line.strip()]
    if args.annotation:
        annotations.append(args.annotation)
    if not annotations:
        print("nothing to parse: give an annotation or --file", file=sys.stderr)
        return 2

    status = 0
    for annotation in annotations:
        try:
            node = parse_wordplay(annotation)
        except ParseError as error:
            print(f"parse error: {error}", file=sys.stderr)
            status = 2
            continue
        letters = surface_letters(node)
        if args.json:
            _emit_json(
                {
                    "annotation": annotation,
                    "letters": letters,
                    "notation": notation.render_wordplay(node),
                    "tree": _node_dict(node),
                }
            )
        elif len(annotations) > 1:
            print(f"{letters}\t{notation.render_wordplay(node)}")
        else:
            print("\n".join(_tree_lines(node)))
            print(f"letters: {letters}")
    return status


def cmd_verify(config: CliConfig, args) -> int:
    script = Path(args.proof).read_text(encoding="utf-8")
    outcome = verify_text(script, config.lexicon())
    report = (
        "" if outcome.status is ProofStatus.PROVED else render_failure_report(outcome)
    )
    if args.json:
        _emit_json(
            {
                "status": outcome.status.name,
                "failures": [
                    {"index": f.index, "message": f.message, "hint": f.hint}
                    for f in outcome.failures
                ],
                "lints": [
                    {"kind": l.kind.name, "severity": l.severity.name, "detail": l.detail}
                    for l in outcome.lints
                ],
                "report": report,
            }
        )
    elif outcome.status is ProofStatus.PROVED:
        print("PROVED")
    else:
        print(report, end="")
    if outcome.status is ProofStatus.PROVED:
        return 0
    return 1 if outcome.status is ProofStatus.FAILED else 2


def cmd_formalize(config: CliConfig, args) -> int:
    try:
        pattern = Pattern.parse(args.pattern)
    except PatternError as error:
        print(f"bad pattern: {error}", file=sys.stderr)
        return 2
    clue = Clue(surface=args.clue, pattern=pattern)
    try:
        request = ProofRequest(
            clue=clue,
            candidate_answer=args.answer,
            definition=args.definition or args.clue,
            wordplay=args.wordplay,
        )
    except ValueError as error:
        print(f"bad request: {error}", file=sys.stderr)
        return 2

    generator = config.make_generator()
    transcript = prove_with_rewrites(
        request, generator, config.lexicon(), max_calls=config.rewrite_cap + 1
    )
    if args.transcript:
        save_transcript(transcript, config.out_path(args.transcript))

    final = transcript.attempts[-1].response if transcript.attempts else ""
    if args.json:
        _emit_json(
            {
                "rewrites_used": transcript.rewrites_used,
                "attempts": len(transcript.attempts),
                "failure_reason": transcript.failure_reason,
                "script": final,
            }
        )
    else:
        if final:
            print(final, end="" if final.endswith("\n") else "\n")
        print(f"rewrites_used: {transcript.rewrites_used}")
        if transcript.failure_reason:
            print(f"reason: {transcript.failure_reason}")
    return 0 if transcript.solved else 1


def cmd_candidates(config: CliConfig, args) -> int:
    try:
        pattern = Pattern.parse(args.pattern)
    except PatternError as error:
        print(f"bad pattern: {error}", file=sys.stderr)
        return 2
    table = load_embeddings(config.embeddings)
    wordlist = lexfiles.load_wordlist(config.wordlist)
    try:
        ranked = closest_candidates(
            args.span, pattern, args.exclude, table, wordlist, k=args.k
        )
    except (EmptyCandidateSet, ValueError) as error:
        print(f"no candidates: {error}", file=sys.stderr)
        return 2
    if args.json:
        _emit_json(
            [{"word": word, "similarity": similarity} for word, similarity in ranked]
        )
    else:
        for word, similarity in ranked:
            print(f"{word}\t{similarity:.4f}")
    return 0


def cmd_experiment(config: CliConfig, args) -> int:
    documents = dataset.load_puzzles(args.clues)
    clues = [clue for document in documents for clue in document.clues]
    if not clues:
        print("no clues in the input file", file=sys.stderr)
        return 2

    annotations = (
        FileAnnotationSource.load(args.annotations) if args.annotations else
        GoldAnnotationSource()
    )
    results_path = config.out_path(args.results)
    transcripts_dir = (
        config.out_path(args.transcripts) if args.transcripts else None
    )
    records = run_experiment(
        clues,
        generator=config.make_generator(),
        lexicon=config.lexicon(),
        table=load_embeddings(config.embeddings),
        wordlist=lexfiles.load_wordlist(config.wordlist),
        samples_per_candidate=config.samples,
        annotations=annotations,
        results_path=results_path,
        transcripts_dir=transcripts_dir,
        resume=args.resume,
        max_workers=args.workers,
        max_generator_calls=config.rewrite_cap + 1,
    )
    rows = tabulate(compare_records(records))
    if args.json:
        _emit_json(
            {
                "records": len(records),
                "results_path": str(results_path),
                "table": [row.as_dict() for row in rows],
            }
        )
    else:
        print(f"{len(records)} records -> {results_path}")
        print(render_table(rows), end="")
    return 0


def cmd_tabulate(config: CliConfig, args) -> int:
    records = load_records(args.results)
    if not records:
        print("no records in the results file", file=sys.stderr)
        return 2
    rows = tabulate(compare_records(records))
    if args.json:
        _emit_json([row.as_dict() for row in rows])
    else:
        print(render_table(rows), end="")
    return 0


# -- argument plumbing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cryptic-prover",
        description="Parse cryptic wordplay, compile and verify proofs, "
        "and run the gold-vs-decoy provability experiment.",
    )
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--output-dir", dest="output_dir", help="directory all writes go under")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a wordplay annotation")
    p.add_argument("annotation", nargs="?", help="annotation text")
    p.add_argument("--file", help="file of annotations, one per line")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("verify", help="verify a proof script file")
    p.add_argument("proof", help="path to a .proof script")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("formalize", help="generate and verify a proof for one clue")
    p.add_argument("--clue", required=True, help="clue surface text")
    p.add_argument("--pattern", required=True, help="answer pattern, e.g. 6 or 3,4")
    p.add_argument("--answer", required=True, help="candidate answer")
    p.add_argument("--wordplay", required=True, help="wordplay annotation")
    p.add_argument("--definition", help="annotated definition (defaults to the clue)")
    p.add_argument("--generator", choices=["mock", "replay", "live"])
    p.add_argument("--replay", help="transcript file for the replay generator")
    p.add_argument("--transcript", help="save the attempt transcript (under the output dir)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_formalize)

    p = sub.add_parser("candidates", help="nearest pattern-fitting decoy words")
    p.add_argument("--span", required=True, help="definition span text")
    p.add_argument("--pattern", required=True)
    p.add_argument("--exclude", default="", help="ground-truth answer to exclude")
    p.add_argument("-k", type=int, default=5, help="how many candidates")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_candidates)

    p = sub.add_parser("experiment", help="run the provability experiment")
    p.add_argument("--clues", required=True, help="YAML puzzle file with gold answers")
    p.add_argument("--samples", type=int, help="samples per candidate")
    p.add_argument("--rewrite-cap", dest="rewrite_cap", type=int)
    p.add_argument("--generator", choices=["mock", "replay", "live"])
    p.add_argument("--replay", help="transcript file for the replay generator")
    p.add_argument("--annotations", help="JSONL of pre-generated annotations")
    p.add_argument("--results", default="results.jsonl", help="results file name")
    p.add_argument("--transcripts", help="directory name for attempt transcripts")
    p.add_argument("--resume", action="store_true", help="keep finished records")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("tabulate", help="summarize a results file")
    p.add_argument("results", help="JSONL results file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_tabulate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return args.handler(config, args)
    except ConfigError as error:
        print(f"config error: {error}", file=sys.stderr)
        return 2
    except OSError as error:
        print(f"file error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
