"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

from __future__ import annotations

import itertools
import json
import random
import string
import time
from collections import Counter
from pathlib import Path

import pytest

from oracles import best_span_bruteforce, best_path_bruteforce, levenshtein_recursive

from slipeval.align import AlignConfig, align_all, align_error, levenshtein
from slipeval.analyze import ContingencyTable, chi_square, chi_square_survival, tabulate
from slipeval.classify import Outcome, accuracy, classify, classify_all
from slipeval.cli import main
from slipeval.corpus import ErrorClass, SoundErrorKind
from slipeval.lattice import BiasConfig, best_path, build_error_lattice, export, reweight
from slipeval.notation import ParsedAnnotation, parse_notation, render_notation, strip_context
from slipeval.synth import FixtureCell, FixtureSpec, generate_fixture
from slipeval.transcript import load_transcript, normalize, tokens_in_window

from helpers import make_record, make_transcript

DATA = Path(__file__).parent / "data"


def _passed(n: int, name: str) -> None:
    print(f"ACCEPTANCE {n} ({name}): PASS")


def test_criterion_1_notation_parser():
    t0 = time.perf_counter()
    cases = [
        ("/ab[I]t", "abIt", ((2, "I"),), False, None),
        ("/mov=", "mov", (), True, None),
        ("/Re[k]ar=", "Rekar", ((2, "k"),), True, None),
        ("/username (Intended: password)", "username", (), False, "password"),
    ]
    for token, surface, segments, incomplete, intended in cases:
        ann = parse_notation(token)
        assert ann.error_surface == surface
        assert ann.mispronounced_segments == segments
        assert ann.incomplete is incomplete
        assert ann.intended_inline == intended

    rng = random.Random(1234)
    letters = string.ascii_letters
    for _ in range(1000):
        surface = "".join(rng.choice(letters) for _ in range(rng.randint(1, 12)))
        segments = []
        cursor = 0
        for _ in range(rng.randint(0, 2)):
            if cursor >= len(surface):
                break
            idx = rng.randint(cursor, len(surface) - 1)
            seg_len = rng.randint(1, min(2, len(surface) - idx))
            segments.append((idx, surface[idx : idx + seg_len]))
            cursor = idx + seg_len
        intended = None
        if rng.random() < 0.4:
            intended = "".join(rng.choice(letters) for _ in range(rng.randint(2, 8)))
        ann = ParsedAnnotation(
            error_surface=surface,
            incomplete=rng.random() < 0.5,
            mispronounced_segments=tuple(segments),
            intended_inline=intended,
        )
        token = render_notation(ann)
        back = parse_notation(token)
        assert back.error_surface == ann.error_surface
        assert back.mispronounced_segments == ann.mispronounced_segments
        assert back.incomplete == ann.incomplete
        assert back.intended_inline == ann.intended_inline

    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"notation criterion took {elapsed:.2f}s"
    _passed(1, "notation parser round-trip")


def test_criterion_2_levenshtein_oracle_equivalence():
    t0 = time.perf_counter()
    assert levenshtein("kitten", "sitting") == 3
    strings = [""]
    for length in range(1, 6):
        strings.extend(
            "".join(p) for p in itertools.product("abc", repeat=length)
        )
    assert len(strings) == 364
    memo: dict = {}
    for a in strings:
        for b in strings:
            assert levenshtein(a, b) == levenshtein_recursive(a, b, memo)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"levenshtein criterion took {elapsed:.2f}s"
    _passed(2, "levenshtein equals naive recursion exhaustively")


def test_criterion_3_chi_square():
    r = chi_square(ContingencyTable(("a", "b"), ("x", "y"), ((10, 20), (30, 40))))
    assert r.statistic == pytest.approx(0.793651, abs=1e-6)
    assert r.df == 1

    prop = chi_square(
        ContingencyTable(("a", "b"), ("x", "y", "z"), ((3, 6, 9), (6, 12, 18)))
    )
    assert prop.statistic == 0.0

    assert chi_square_survival(3.841, 1) == pytest.approx(0.050, abs=5e-4)
    assert chi_square_survival(6.635, 1) == pytest.approx(0.010, abs=5e-4)
    assert chi_square_survival(5.991, 2) == pytest.approx(0.050, abs=5e-4)
    _passed(3, "chi-square worked example and survival table")


def test_criterion_4_classifier_unit_triple():
    outcomes = {}
    for slot in ("dad", "mom", "tom"):
        rec = make_record(
            "we saw /Dad, Mom at home",
            corrected=True,
            intended_word="Mom",
            timestamp_s=0.7,
        )
        t = make_transcript(["we", "saw", slot, "Mom", "at", "home"])
        span = align_error(rec, t)
        assert span.error_token_index == 2, "match must happen at the aligned slot"
        outcomes[slot] = classify(rec, span).outcome
    assert outcomes == {
        "dad": Outcome.FAITHFUL,
        "mom": Outcome.CORRECTED,
        "tom": Outcome.INCORRECT,
    }

    assert (
        accuracy(
            [Outcome.CORRECTED] * 81 + [Outcome.FAITHFUL] * 2 + [Outcome.INCORRECT] * 17
        )
        == 0.83
    )
    assert (
        accuracy(
            [Outcome.CORRECTED] * 43 + [Outcome.FAITHFUL] * 31 + [Outcome.INCORRECT] * 26
        )
        == 0.74
    )
    _passed(4, "classifier triple and accuracy totals")


def _pipeline_counts(spec: FixtureSpec):
    records, transcripts = generate_fixture(spec)
    tmap = {t.audio_id: t for t in transcripts}
    spans = align_all(records, tmap)
    classified = classify_all(records, spans)
    return records, classified, Counter(c.outcome for c in classified)


def test_criterion_5_end_to_end_synthetic(tmp_path):
    t0 = time.perf_counter()
    spec_json = {
        "seed": 42,
        "cells": [
            {
                "error_class": "word",
                "contextual": False,
                "corrected": True,
                "complete": True,
                "count": 150,
                "outcome_mix": [0.5, 0.3, 0.2],
            },
            {
                "error_class": "sound",
                "contextual": True,
                "corrected": False,
                "complete": False,
                "count": 150,
                "outcome_mix": [0.5, 0.3, 0.2],
            },
        ],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_json), encoding="utf-8")
    fx = tmp_path / "fx"
    assert main(["synth", str(spec_path), str(fx)]) == 0
    results = tmp_path / "results.jsonl"
    assert (
        main(
            [
                "classify",
                "--corpus-path", str(fx / "corpus.tsv"),
                "--transcript-dir", str(fx / "transcripts"),
                "--out", str(results),
            ]
        )
        == 0
    )
    rows = [
        json.loads(line)
        for line in results.read_text(encoding="utf-8").splitlines()
    ]
    assert len(rows) == 300
    counts = Counter(r["outcome"] for r in rows)
    assert counts["corrected"] == 150
    assert counts["faithful"] == 90
    assert counts["incorrect"] == 60
    assert (counts["corrected"] + counts["faithful"]) / 300 == pytest.approx(0.80)

    # outcome mix depends on `corrected` but is identical across `contextual`
    dependent = FixtureSpec(
        seed=42,
        cells=(
            FixtureCell(ErrorClass.WORD, False, True, True, 100, (0.8, 0.1, 0.1)),
            FixtureCell(ErrorClass.WORD, False, False, True, 100, (0.3, 0.4, 0.3)),
            FixtureCell(ErrorClass.WORD, True, True, True, 100, (0.8, 0.1, 0.1)),
            FixtureCell(ErrorClass.WORD, True, False, True, 100, (0.3, 0.4, 0.3)),
        ),
    )
    records, classified, _ = _pipeline_counts(dependent)
    planted = chi_square(tabulate(classified, records, "corrected"))
    assert planted.p_value < 0.01
    independent = chi_square(tabulate(classified, records, "contextual"))
    assert independent.p_value > 0.2

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"end-to-end criterion took {elapsed:.2f}s"
    _passed(5, "synthetic end-to-end recovery and planted dependence")


def test_criterion_6_alignment_oracle():
    verbatim = FixtureSpec(
        seed=13,
        cells=(
            FixtureCell(ErrorClass.WORD, True, True, False, 30, (0.0, 1.0, 0.0)),
            FixtureCell(ErrorClass.SOUND, False, True, True, 30, (0.0, 1.0, 0.0)),
        ),
    )
    records, transcripts = generate_fixture(verbatim)
    tmap = {t.audio_id: t for t in transcripts}
    for rec in records:
        t = tmap[rec.audio_id]
        span = align_error(rec, t)
        assert span.similarity == 1.0
        expected_slot = next(
            i for i, tok in enumerate(t.tokens) if tok.start_s == rec.timestamp_s
        )
        assert span.error_token_index == expected_slot

    cfg = AlignConfig()
    checked = 0
    for seed in (21, 22):
        mixed = FixtureSpec(
            seed=seed,
            cells=(
                FixtureCell(ErrorClass.WORD, True, True, False, 25, (0.4, 0.3, 0.3)),
                FixtureCell(ErrorClass.SOUND, False, False, True, 25, (0.4, 0.3, 0.3)),
            ),
        )
        records, transcripts = generate_fixture(mixed)
        tmap = {t.audio_id: t for t in transcripts}
        for rec in records:
            t = tmap[rec.audio_id]
            span = align_error(rec, t, cfg)
            window = tokens_in_window(t, rec.timestamp_s, cfg.window_radius_s)
            base = window[0][0]
            wtoks = [normalize(tok.text) for _, tok in window]
            plain = strip_context(
                rec.context_text,
                deletion=rec.sound_kind is SoundErrorKind.DELETION,
            ).text
            ctx_tokens = normalize(plain).split()
            sim, start, length = best_span_bruteforce(
                ctx_tokens, wtoks, cfg.max_span_slack
            )
            assert span.similarity == pytest.approx(sim, abs=1e-12)
            assert span.token_range == (base + start, base + start + length)
            checked += 1
    assert checked == 100
    _passed(6, "alignment verbatim fixtures and brute-force span oracle")


def test_criterion_7_lattice():
    demo = build_error_lattice("Dad", "Mom", [("Tom", 1.0)])
    labels_seen = []
    for bias in (0.1, 0.5, 1, 2, 5, 10, 100):
        labels, _ = best_path(reweight(demo, BiasConfig(correction_bias=bias)))
        assert len(labels) == 1
        labels_seen.append(labels[0])
    assert labels_seen[0] == "Dad" and labels_seen[-1] == "Mom"
    assert all(l in ("Dad", "Mom") for l in labels_seen)
    switches = sum(1 for a, b in zip(labels_seen, labels_seen[1:]) if a != b)
    assert switches <= 1

    test_lattices = [
        demo,
        build_error_lattice("Dad"),
        build_error_lattice("Dad", None, [("Tom", 0.5), ("Tim", 0.5)]),
        reweight(demo, BiasConfig(correction_bias=10)),
        reweight(demo, BiasConfig(verbatim_bias=4.0)),
    ]
    for lat in test_lattices:
        labels, weight = best_path(lat)
        oracle_labels, oracle_weight = best_path_bruteforce(lat)
        assert tuple(labels) == oracle_labels
        assert weight == pytest.approx(oracle_weight, abs=1e-12)

    assert export(demo, "arclist") == (DATA / "lattice_dad_mom.arclist").read_text(
        encoding="utf-8"
    )
    assert export(demo, "dot") == (DATA / "lattice_dad_mom.dot").read_text(
        encoding="utf-8"
    )
    _passed(7, "lattice switching, decoding oracle, golden exports")


def test_criterion_8_transcript_format_compatibility():
    t = load_transcript(DATA / "sample_whisperx.json")
    assert len(t.tokens) == 11
    assert normalize(t.tokens[7].text) == "abit"
    hits = tokens_in_window(t, 2.5, 0.5)
    assert [tok.text for _, tok in hits] == ["abit,", "about", "Mitt"]
    _passed(8, "transcript format compatibility")


def test_criterion_9_worker_count_determinism(tmp_path):
    spec = {
        "seed": 42,
        "cells": [
            {
                "error_class": "word",
                "contextual": False,
                "corrected": True,
                "complete": True,
                "count": 40,
                "outcome_mix": [0.5, 0.3, 0.2],
            },
            {
                "error_class": "sound",
                "contextual": True,
                "corrected": False,
                "complete": False,
                "count": 40,
                "outcome_mix": [0.6, 0.2, 0.2],
            },
        ],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec), encoding="utf-8")
    fx = tmp_path / "fx"
    assert main(["synth", str(spec_path), str(fx)]) == 0
    args = [
        "classify",
        "--corpus-path", str(fx / "corpus.tsv"),
        "--transcript-dir", str(fx / "transcripts"),
    ]
    one, eight = tmp_path / "one.jsonl", tmp_path / "eight.jsonl"
    assert main(args + ["--out", str(one), "--jobs", "1"]) == 0
    assert main(args + ["--out", str(eight), "--jobs", "8"]) == 0
    assert one.read_bytes() == eight.read_bytes()
    assert one.read_bytes()  # non-empty
    _passed(9, "classify output is byte-identical across worker counts")
