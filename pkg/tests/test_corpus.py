from __future__ import annotations

from pathlib import Path

import pytest

from slipeval.corpus import (
    COLUMNS,
    ErrorClass,
    ErrorRecord,
    SoundErrorKind,
    WordPosition,
    dump_corpus,
    load_corpus,
    read_corpus,
)
from slipeval.errors import CorpusError, SchemaError
from slipeval.notation import parse_notation

TABLE1 = Path(__file__).parent / "data" / "table1.tsv"


def _write_rows(path: Path, rows: list[list[str]], header=COLUMNS) -> Path:
    lines = ["\t".join(header)] + ["\t".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _row(**over) -> list[str]:
    base = {
        "record_id": "r1",
        "audio_id": "a1",
        "timestamp_s": "3.5",
        "context_text": "we saw /dag, dog here",
        "error_class": "sound",
        "sound_kind": "substitution",
        "contextual": "false",
        "corrected": "true",
        "complete": "true",
        "word_position": "medial",
        "syllable_position": "nucleus",
        "intended_word": "dog",
        "intended_low_confidence": "false",
    }
    base.update(over)
    return [base[c] for c in COLUMNS]


def test_load_table1():
    records = load_corpus(TABLE1)
    assert [r.error_class for r in records] == [
        ErrorClass.SOUND,
        ErrorClass.WORD,
        ErrorClass.SOUND,
        ErrorClass.WORD,
    ]
    r1, r2, r3, r4 = records
    assert r1.annotation.error_surface == "abIt"
    assert r1.annotation.mispronounced_segments == ((2, "I"),)
    assert r1.word_position is WordPosition.MEDIAL
    assert r2.annotation.incomplete and not r2.complete
    assert r2.intended_word == "book"
    assert r3.sound_kind is SoundErrorKind.SUBSTITUTION
    assert r3.annotation.error_surface == "Rekar"
    # row 4 takes its intended word from the inline annotation
    assert r4.intended_word == "password"
    assert not r4.corrected and not r4.contextual


def test_load_is_order_preserving_and_idempotent():
    first = load_corpus(TABLE1)
    second = load_corpus(TABLE1)
    assert first == second
    assert [r.record_id for r in first] == ["t1-01", "t1-02", "t1-03", "t1-04"]


def test_empty_file_with_header(tmp_path):
    path = _write_rows(tmp_path / "empty.tsv", [])
    assert load_corpus(path) == []


def test_missing_column_is_schema_error(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("record_id\taudio_id\n", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_corpus(path)


def test_word_error_with_word_position_is_row_error(tmp_path):
    path = _write_rows(
        tmp_path / "c.tsv",
        [
            _row(
                record_id="bad",
                error_class="word",
                sound_kind="",
                context_text="we saw /cat, dog here",
                word_position="initial",
                syllable_position="",
            )
        ],
    )
    with pytest.raises(CorpusError) as exc:
        load_corpus(path)
    assert exc.value.errors[0].row == 2
    assert "word_position" in str(exc.value)


def test_lenient_skips_bad_rows(tmp_path):
    rows = [
        _row(),
        _row(record_id="r2", error_class="banana"),
        _row(record_id="r3"),
    ]
    path = _write_rows(tmp_path / "c.tsv", rows)
    with pytest.warns(UserWarning, match="skipping invalid"):
        records = load_corpus(path, lenient=True)
    assert [r.record_id for r in records] == ["r1", "r3"]


def test_bad_enum_reports_row_number(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(), _row(record_id="r2", sound_kind="nope")])
    records, problems = read_corpus(path)
    assert len(records) == 1
    assert len(problems) == 1
    assert problems[0].row == 3
    assert "sound_kind" in problems[0].message


def test_complete_flag_must_match_notation(tmp_path):
    path = _write_rows(
        tmp_path / "c.tsv",
        [_row(context_text="we saw /dag= dog here", complete="true")],
    )
    _, problems = read_corpus(path)
    assert len(problems) == 1
    assert "complete" in problems[0].message


def test_duplicate_record_id(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(), _row()])
    _, problems = read_corpus(path)
    assert len(problems) == 1
    assert "duplicate" in problems[0].message


def test_context_without_notation(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(context_text="no marker here")])
    _, problems = read_corpus(path)
    assert "no error notation" in problems[0].message


def test_negative_timestamp(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(timestamp_s="-1.0")])
    _, problems = read_corpus(path)
    assert "timestamp" in problems[0].message


def test_bad_boolean(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(contextual="yes")])
    _, problems = read_corpus(path)
    assert "contextual" in problems[0].message


def test_sound_error_requires_kind(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(sound_kind="")])
    _, problems = read_corpus(path)
    assert "sound_kind" in problems[0].message


def test_inline_intended_overrides_column_with_warning(tmp_path):
    path = _write_rows(
        tmp_path / "c.tsv",
        [
            _row(
                context_text="put /username (Intended: password) there",
                error_class="word",
                sound_kind="",
                word_position="",
                syllable_position="",
                intended_word="passphrase",
                corrected="false",
            )
        ],
    )
    with pytest.warns(UserWarning, match="overrides column"):
        records = load_corpus(path)
    assert records[0].intended_word == "password"


def test_missing_intended_is_flagged_low_confidence(tmp_path):
    path = _write_rows(tmp_path / "c.tsv", [_row(intended_word="")])
    with pytest.warns(UserWarning, match="low-confidence"):
        records = load_corpus(path)
    assert records[0].intended_word is None
    assert records[0].intended_low_confidence


def test_deletion_records_parse_in_deletion_mode(tmp_path):
    path = _write_rows(
        tmp_path / "c.tsv",
        [_row(context_text="we saw /d[o]g, dog here", sound_kind="deletion")],
    )
    records = load_corpus(path)
    assert records[0].annotation.error_surface == "dg"


def test_dump_load_roundtrip(tmp_path):
    records = load_corpus(TABLE1)
    out = tmp_path / "copy.tsv"
    dump_corpus(records, out)
    assert load_corpus(out) == records


def test_record_invariant_sound_fields_on_word_error():
    with pytest.raises(ValueError, match="sound_kind"):
        ErrorRecord(
            record_id="x",
            audio_id="a",
            timestamp_s=0.0,
            context_text="/cat here",
            annotation=parse_notation("/cat"),
            error_class=ErrorClass.WORD,
            sound_kind=SoundErrorKind.ADDITION,
            contextual=False,
            corrected=False,
            complete=True,
        )
