"""Annotated speech-error records and their tab-separated corpus format.

A corpus file is UTF-8 TSV with a mandatory header row and these columns,
in order:

    record_id  audio_id  timestamp_s  context_text  error_class  sound_kind
    contextual  corrected  complete  word_position  syllable_position
    intended_word  intended_low_confidence

Booleans are ``true``/``false``; an empty string means an absent optional
value. ``context_text`` carries the utterance excerpt with its inline
error notation (see the notation module).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import CorpusError, MalformedNotation, RowError, SchemaError
from .notation import ParsedAnnotation, strip_context


class ErrorClass(Enum):
    SOUND = "sound"
    WORD = "word"


class SoundErrorKind(Enum):
    SUBSTITUTION = "substitution"
    DELETION = "deletion"
    ADDITION = "addition"


class WordPosition(Enum):
    INITIAL = "initial"
    MEDIAL = "medial"
    FINAL = "final"


class SyllablePosition(Enum):
    ONSET = "onset"
    NUCLEUS = "nucleus"
    CODA = "coda"


COLUMNS = (
    "record_id",
    "audio_id",
    "timestamp_s",
    "context_text",
    "error_class",
    "sound_kind",
    "contextual",
    "corrected",
    "complete",
    "word_position",
    "syllable_position",
    "intended_word",
    "intended_low_confidence",
)

# Fraction of records expected to carry an intended word; the source
# collections this format models claim ~98%.
MIN_INTENDED_COVERAGE = 0.90


@dataclass(frozen=True)
class ErrorRecord:
    """One annotated speech error with its condition cross-classification."""

    record_id: str
    audio_id: str
    timestamp_s: float
    context_text: str
    annotation: ParsedAnnotation
    error_class: ErrorClass
    sound_kind: SoundErrorKind | None
    contextual: bool
    corrected: bool
    complete: bool
    word_position: WordPosition | None = None
    syllable_position: SyllablePosition | None = None
    intended_word: str | None = None
    intended_low_confidence: bool = False

    def __post_init__(self):
        if not self.record_id:
            raise ValueError("record_id must be non-empty")
        if not self.audio_id:
            raise ValueError("audio_id must be non-empty")
        if not (math.isfinite(self.timestamp_s) and self.timestamp_s >= 0):
            raise ValueError(f"timestamp_s must be finite and >= 0, got {self.timestamp_s}")
        if self.complete == self.annotation.incomplete:
            raise ValueError(
                "complete flag contradicts the notation "
                f"({'no ' if self.complete else ''}trailing '=' expected)"
            )
        if self.error_class is ErrorClass.SOUND:
            if self.sound_kind is None:
                raise ValueError("sound errors require sound_kind")
        else:
            if self.sound_kind is not None:
                raise ValueError("sound_kind only applies to sound errors")
            if self.word_position is not None:
                raise ValueError("word_position only applies to sound errors")
            if self.syllable_position is not None:
                raise ValueError("syllable_position only applies to sound errors")


def _parse_bool(value: str, column: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise ValueError(f"{column}: expected 'true' or 'false', got {value!r}")


def _parse_enum(enum_cls, value: str, column: str):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ValueError(f"{column}: expected one of [{allowed}], got {value!r}") from None


def _record_from_row(
    row: list[str], segment_map: dict[str, str] | None
) -> ErrorRecord:
    if len(row) != len(COLUMNS):
        raise ValueError(f"expected {len(COLUMNS)} columns, got {len(row)}")
    field = dict(zip(COLUMNS, (cell.strip() for cell in row)))

    error_class = _parse_enum(ErrorClass, field["error_class"], "error_class")
    sound_kind = (
        _parse_enum(SoundErrorKind, field["sound_kind"], "sound_kind")
        if field["sound_kind"]
        else None
    )
    ctx = strip_context(
        field["context_text"],
        deletion=sound_kind is SoundErrorKind.DELETION,
        segment_map=segment_map,
    )
    if ctx.annotation is None:
        raise ValueError("context_text contains no error notation token")

    intended = field["intended_word"] or None
    if ctx.annotation.intended_inline:
        if intended and intended != ctx.annotation.intended_inline:
            warnings.warn(
                f"{field['record_id']}: inline intended word "
                f"{ctx.annotation.intended_inline!r} overrides column {intended!r}"
            )
        intended = ctx.annotation.intended_inline

    low_confidence = _parse_bool(
        field["intended_low_confidence"], "intended_low_confidence"
    )
    if intended is None and not low_confidence:
        warnings.warn(
            f"{field['record_id']}: no intended word; flagging as low-confidence"
        )
        low_confidence = True

    return ErrorRecord(
        record_id=field["record_id"],
        audio_id=field["audio_id"],
        timestamp_s=float(field["timestamp_s"]),
        context_text=field["context_text"],
        annotation=ctx.annotation,
        error_class=error_class,
        sound_kind=sound_kind,
        contextual=_parse_bool(field["contextual"], "contextual"),
        corrected=_parse_bool(field["corrected"], "corrected"),
        complete=_parse_bool(field["complete"], "complete"),
        word_position=(
            _parse_enum(WordPosition, field["word_position"], "word_position")
            if field["word_position"]
            else None
        ),
        syllable_position=(
            _parse_enum(
                SyllablePosition, field["syllable_position"], "syllable_position"
            )
            if field["syllable_position"]
            else None
        ),
        intended_word=intended,
        intended_low_confidence=low_confidence,
    )


def read_corpus(
    path: str | Path, *, segment_map: dict[str, str] | None = None
) -> tuple[list[ErrorRecord], list[RowError]]:
    """Read a corpus TSV, returning valid records and per-row errors.

    Row numbers in errors are 1-based file lines (header is line 1).
    Raises SchemaError if the header itself is missing or wrong.
    """
    path = Path(path)
    records: list[ErrorRecord] = []
    problems: list[RowError] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path.name}: empty file; header row required")
        if tuple(h.strip() for h in header) != COLUMNS:
            missing = set(COLUMNS) - {h.strip() for h in header}
            detail = f"missing columns: {sorted(missing)}" if missing else "bad order"
            raise SchemaError(f"{path.name}: header mismatch ({detail})")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rec = _record_from_row(row, segment_map)
                if rec.record_id in seen:
                    raise ValueError(f"duplicate record_id {rec.record_id!r}")
                seen.add(rec.record_id)
                records.append(rec)
            except (ValueError, MalformedNotation) as e:
                problems.append(RowError(line_no, str(e)))

    if records:
        covered = sum(1 for r in records if r.intended_word is not None)
        if covered / len(records) < MIN_INTENDED_COVERAGE:
            warnings.warn(
                f"{path.name}: only {covered}/{len(records)} records carry an "
                f"intended word (expected >= {MIN_INTENDED_COVERAGE:.0%})"
            )
    return records, problems


def load_corpus(
    path: str | Path,
    *,
    lenient: bool = False,
    segment_map: dict[str, str] | None = None,
) -> list[ErrorRecord]:
    """Load and validate a corpus TSV.

    Strict by default: any invalid row raises CorpusError listing every
    failure with its row number. With ``lenient=True`` bad rows are skipped
    with a warning and the valid remainder is returned.
    """
    records, problems = read_corpus(path, segment_map=segment_map)
    if problems:
        if not lenient:
            raise CorpusError(problems)
        for p in problems:
            warnings.warn(f"skipping invalid {p}")
    return records


def dump_corpus(records: list[ErrorRecord], path: str | Path) -> None:
    """Write records to a corpus TSV (inverse of load_corpus)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(
            fh, delimiter="\t", quoting=csv.QUOTE_NONE, quotechar="", lineterminator="\n"
        )
        writer.writerow(COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.record_id,
                    r.audio_id,
                    str(r.timestamp_s),
                    r.context_text,
                    r.error_class.value,
                    r.sound_kind.value if r.sound_kind else "",
                    "true" if r.contextual else "false",
                    "true" if r.corrected else "false",
                    "true" if r.complete else "false",
                    r.word_position.value if r.word_position else "",
                    r.syllable_position.value if r.syllable_position else "",
                    r.intended_word or "",
                    "true" if r.intended_low_confidence else "false",
                ]
            )
