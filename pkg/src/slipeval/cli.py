"""Command-line front end tying the pipeline together.

Subcommands: ``parse`` (validate a corpus), ``classify`` (align + classify
every record, emitting JSONL), ``report`` (condition breakdowns and
chi-square summaries from JSONL results), ``lattice`` (build and decode a
single error's recognition lattice), ``synth`` (materialize a synthetic
fixture corpus).

Exit codes: 0 success, 1 validation failure, 2 configuration/IO failure.
Outputs are byte-deterministic for fixed inputs regardless of --jobs.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .align import AlignConfig, align_all
from .analyze import step_sample, write_reports
from .classify import (
    ClassifiedError,
    Diagnostic,
    Outcome,
    accuracy,
    classify_all,
    from_jsonl_line,
    to_jsonl_line,
)
from .corpus import ErrorRecord, load_corpus, read_corpus
from .errors import (
    ConfigError,
    SchemaError,
    SlipevalError,
    UnknownRecord,
)
from .lattice import BiasConfig, best_path, build_error_lattice, export, reweight
from .synth import FixtureSpec, load_fixture_spec, write_fixture
from .transcript import load_transcript

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONFIG = 2

_DEFAULT_MASSES = (0.5, 0.3, 0.2)

_CONFIG_KEYS = {
    "corpus_path",
    "transcript_dir",
    "report_dir",
    "align",
    "lattice_masses",
    "lenient_load",
    "no_prefix_match",
    "exclude_alignment_failures",
    "min_expected",
}


@dataclass
class RunConfig:
    """Resolved run configuration (JSON config file + flag overrides)."""

    corpus_path: Path | None = None
    transcript_dir: Path | None = None
    report_dir: Path | None = None
    align: AlignConfig = field(default_factory=AlignConfig)
    lattice_masses: tuple[float, float, float] = _DEFAULT_MASSES
    lenient_load: bool = False
    no_prefix_match: bool = False
    exclude_alignment_failures: bool = False
    min_expected: float = 0.0


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            for key in ("corpus_path", "transcript_dir", "report_dir"):
                if data.get(key) is not None:
                    setattr(cfg, key, Path(data[key]))
            if data.get("align") is not None:
                cfg.align = AlignConfig(**data["align"])
            if data.get("lattice_masses") is not None:
                masses = tuple(float(x) for x in data["lattice_masses"])
                if len(masses) != 3:
                    raise ValueError("lattice_masses needs exactly 3 entries")
                cfg.lattice_masses = masses
            for key in ("lenient_load", "no_prefix_match", "exclude_alignment_failures"):
                if key in data:
                    setattr(cfg, key, bool(data[key]))
            if "min_expected" in data:
                cfg.min_expected = float(data["min_expected"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad config value: {e}") from e

    for key in ("corpus_path", "transcript_dir", "report_dir"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, Path(value))
    align_overrides = {
        key: getattr(args, key)
        for key in ("window_radius_s", "min_similarity", "max_span_slack")
        if getattr(args, key, None) is not None
    }
    if align_overrides:
        try:
            cfg.align = replace(cfg.align, **align_overrides)
        except ValueError as e:
            raise ConfigError(f"bad alignment setting: {e}") from e
    for key in ("lenient_load", "no_prefix_match", "exclude_alignment_failures"):
        if getattr(args, key, None):
            setattr(cfg, key, True)
    if getattr(args, "min_expected", None) is not None:
        cfg.min_expected = args.min_expected
        if cfg.min_expected < 0:
            raise ConfigError("min_expected must be >= 0")
    return cfg


def cmd_parse(args: argparse.Namespace) -> int:
    records, problems = read_corpus(args.corpus)
    for p in problems:
        print(f"invalid {p}", file=sys.stderr)
    print(f"{len(records)} records")
    if problems:
        print(f"{len(problems)} invalid row(s)", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _classify_chunk(
    task: tuple[str, list[ErrorRecord], Path, AlignConfig, bool],
) -> tuple[str | None, list[ClassifiedError]]:
    """Align and classify all records of one audio file. Module-level so
    it can cross a process boundary."""
    audio_id, records, tpath, align_cfg, prefix_match = task
    transcripts = {}
    note = None
    if tpath.exists():
        try:
            t = load_transcript(tpath)
            if t.audio_id != audio_id:
                note = (
                    f"{tpath.name}: declares audio_id {t.audio_id!r}, expected "
                    f"{audio_id!r}; records flagged as alignment failures"
                )
            else:
                transcripts[audio_id] = t
        except SchemaError as e:
            note = f"{tpath.name}: {e}; records flagged as alignment failures"
    else:
        note = f"no transcript for audio {audio_id!r} ({tpath.name} missing)"
    spans = align_all(records, transcripts, align_cfg)
    return note, classify_all(records, spans, prefix_match=prefix_match)


def cmd_classify(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if cfg.corpus_path is None or cfg.transcript_dir is None:
        raise ConfigError("classify needs --corpus-path and --transcript-dir")
    if not cfg.transcript_dir.is_dir():
        raise ConfigError(f"transcript dir not found: {cfg.transcript_dir}")
    records = load_corpus(cfg.corpus_path, lenient=cfg.lenient_load)

    groups: dict[str, list[ErrorRecord]] = {}
    for rec in records:
        groups.setdefault(rec.audio_id, []).append(rec)
    tasks = [
        (
            audio_id,
            recs,
            cfg.transcript_dir / f"{audio_id}.json",
            cfg.align,
            not cfg.no_prefix_match,
        )
        for audio_id, recs in sorted(groups.items())
    ]
    jobs = max(1, args.jobs)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_classify_chunk, tasks))
    else:
        chunks = [_classify_chunk(t) for t in tasks]

    for note, _ in chunks:
        if note:
            print(f"warning: {note}", file=sys.stderr)
    classified = sorted(
        (c for _, chunk in chunks for c in chunk), key=lambda c: c.record_id
    )
    lines = [to_jsonl_line(c) for c in classified]
    counts = Counter(c.outcome for c in classified)
    n_failed = sum(
        1 for c in classified if Diagnostic.ALIGNMENT_FAILED in c.diagnostics
    )
    acc = f"{accuracy(c.outcome for c in classified):.4f}" if classified else "n/a"
    summary = (
        f"classified {len(classified)} records: "
        f"corrected={counts[Outcome.CORRECTED]} "
        f"faithful={counts[Outcome.FAITHFUL]} "
        f"incorrect={counts[Outcome.INCORRECT]} "
        f"accuracy={acc} alignment_failures={n_failed}"
    )
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
        print(summary)
    else:
        for line in lines:
            print(line)
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if cfg.corpus_path is None or cfg.report_dir is None:
        raise ConfigError("report needs --corpus-path and --report-dir")
    records = load_corpus(cfg.corpus_path, lenient=cfg.lenient_load)
    classified = []
    for i, line in enumerate(
        args.results.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            classified.append(from_jsonl_line(line))
        except (ValueError, KeyError) as e:
            raise SchemaError(f"{args.results.name}: line {i}: {e}") from e

    written = write_reports(
        classified,
        records,
        cfg.report_dir,
        min_expected=cfg.min_expected,
        drop_alignment_failures=cfg.exclude_alignment_failures,
    )
    if args.step_sample:
        sample = step_sample(classified, args.step_sample)
        spath = Path(cfg.report_dir) / "audit_sample.jsonl"
        spath.write_text(
            "".join(to_jsonl_line(c) + "\n" for c in sample), encoding="utf-8"
        )
        written.append(spath)
    for path in written:
        print(path)
    return EXIT_OK


def _parse_alternatives(values: list[str]) -> list[tuple[str, float]]:
    alts: list[tuple[str, float]] = []
    for chunk in values:
        for item in chunk.split(","):
            item = item.strip()
            if not item:
                continue
            word, sep, prob = item.rpartition(":")
            if not sep or not word:
                raise ConfigError(f"bad alternative {item!r}; expected WORD:PROB")
            try:
                alts.append((word, float(prob)))
            except ValueError:
                raise ConfigError(f"bad probability in {item!r}") from None
    return alts


def _parse_masses(value: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in value.split(","))
    except ValueError:
        raise ConfigError(f"bad --masses {value!r}") from None
    if len(parts) != 3:
        raise ConfigError("--masses needs ERROR,INTENDED,ALTERNATIVES")
    return parts


def cmd_lattice(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if cfg.corpus_path is None:
        raise ConfigError("lattice needs --corpus-path")
    records = load_corpus(cfg.corpus_path, lenient=cfg.lenient_load)
    rec = next((r for r in records if r.record_id == args.record_id), None)
    if rec is None:
        raise UnknownRecord(f"record {args.record_id!r} not in corpus")
    masses = _parse_masses(args.masses) if args.masses else cfg.lattice_masses
    lat = build_error_lattice(
        rec.annotation.error_surface,
        rec.intended_word,
        _parse_alternatives(args.alternatives),
        error_mass=masses[0],
        intended_mass=masses[1],
        alternatives_mass=masses[2],
    )
    if args.correction_bias != 1.0 or args.verbatim_bias != 1.0:
        try:
            bias = BiasConfig(args.correction_bias, args.verbatim_bias)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        lat = reweight(lat, bias)
    sys.stdout.write(export(lat, args.format))
    labels, weight = best_path(lat)
    print(f"best path: {' '.join(labels)} (weight {weight:.6f})")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_fixture_spec(args.spec)
    if args.seed is not None:
        spec = FixtureSpec(seed=args.seed, cells=spec.cells)
    corpus_path, transcripts_dir = write_fixture(spec, args.out_dir)
    print(f"wrote {sum(c.count for c in spec.cells)} records to {corpus_path}")
    print(f"wrote transcripts to {transcripts_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slipeval",
        description="Evaluate ASR transcripts against annotated speech errors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(sp, *, align_flags=False):
        sp.add_argument("--config", type=Path, help="JSON run-config file")
        sp.add_argument("--corpus-path", type=Path, help="corpus TSV file")
        sp.add_argument(
            "--lenient-load",
            action="store_true",
            default=None,
            help="skip invalid corpus rows instead of failing",
        )
        if align_flags:
            sp.add_argument("--window-radius-s", type=float, metavar="S")
            sp.add_argument("--min-similarity", type=float, metavar="X")
            sp.add_argument("--max-span-slack", type=int, metavar="N")

    sp = sub.add_parser("parse", help="validate a corpus file")
    sp.add_argument("corpus", type=Path)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("classify", help="align and classify every record")
    add_shared(sp, align_flags=True)
    sp.add_argument("--transcript-dir", type=Path, help="dir of <audio_id>.json")
    sp.add_argument("--out", type=Path, help="JSONL output (default: stdout)")
    sp.add_argument("--jobs", type=int, default=1, metavar="N")
    sp.add_argument(
        "--no-prefix-match",
        action="store_true",
        default=None,
        help="disable the aborted-word prefix rule",
    )
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("report", help="write condition breakdowns and tests")
    add_shared(sp)
    sp.add_argument("--results", type=Path, required=True, help="classify JSONL")
    sp.add_argument("--report-dir", type=Path)
    sp.add_argument("--min-expected", type=float, metavar="X")
    sp.add_argument(
        "--exclude-alignment-failures", action="store_true", default=None
    )
    sp.add_argument("--step-sample", type=int, metavar="K")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("lattice", help="build one error's recognition lattice")
    add_shared(sp)
    sp.add_argument("record_id")
    sp.add_argument(
        "--alternatives",
        action="append",
        default=[],
        metavar="WORD:P[,WORD:P...]",
    )
    sp.add_argument("--correction-bias", type=float, default=1.0, metavar="B")
    sp.add_argument("--verbatim-bias", type=float, default=1.0, metavar="B")
    sp.add_argument("--format", choices=("arclist", "dot"), default="arclist")
    sp.add_argument("--masses", metavar="ERR,INT,ALT", help="path mass split")
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("synth", help="generate a synthetic fixture corpus")
    sp.add_argument("spec", type=Path)
    sp.add_argument("out_dir", type=Path)
    sp.add_argument("--seed", type=int, help="override the spec seed")
    sp.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SlipevalError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
