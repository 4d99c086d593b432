"""Transcription-outcome classification for aligned speech errors.

Each aligned error receives exactly one outcome:

* Corrected -- the machine wrote the intended (unspoken) word at the slot
* Faithful  -- the machine reproduced the spoken error itself
* Incorrect -- anything else, presumed a machine error

" At the slot" is load-bearing: only the transcript token aligned to the
error position is judged, so a self-correction repeated nearby can never
satisfy a rule on its own.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .align import AlignedSpan
from .corpus import ErrorRecord
from .errors import EmptyInput
from .transcript import normalize


class Outcome(Enum):
    CORRECTED = "corrected"
    FAITHFUL = "faithful"
    INCORRECT = "incorrect"


class Diagnostic(Enum):
    ALIGNMENT_FAILED = "alignment_failed"
    NO_INTENDED_WORD = "no_intended_word"
    PREFIX_MATCHED = "prefix_matched"


# An aborted fragment must keep at least this many characters to count as
# a prefix of the transcribed word; single characters match almost anything.
MIN_PREFIX_LEN = 2


@dataclass(frozen=True)
class ClassifiedError:
    """An error record's outcome plus decision diagnostics.

    ``span`` is None when a result has been rehydrated from JSONL and the
    original alignment is no longer available.
    """

    record_id: str
    outcome: Outcome
    matched_text: str | None
    span: AlignedSpan | None
    diagnostics: frozenset[Diagnostic] = frozenset()


def classify(
    rec: ErrorRecord, span: AlignedSpan, *, prefix_match: bool = True
) -> ClassifiedError:
    """Assign one outcome to an aligned error.

    Decision ladder: (1) failed alignment is Incorrect; (2) slot token
    equals the intended word: Corrected; (3) equals the produced error
    surface: Faithful; (4) for aborted words, the surface being a proper
    prefix of the slot token also counts as Faithful (disable with
    ``prefix_match=False``); (5) otherwise Incorrect. All comparisons use
    normalized text, so transcript-wide case or punctuation changes cannot
    alter the outcome.
    """
    diags: set[Diagnostic] = set()
    if rec.intended_word is None:
        diags.add(Diagnostic.NO_INTENDED_WORD)

    if span.failed or span.error_token_index is None or span.error_token_text is None:
        diags.add(Diagnostic.ALIGNMENT_FAILED)
        return ClassifiedError(
            rec.record_id, Outcome.INCORRECT, None, span, frozenset(diags)
        )

    m = normalize(span.error_token_text)
    intended = normalize(rec.intended_word) if rec.intended_word else ""
    surface = normalize(rec.annotation.error_surface)

    if intended and m == intended:
        if surface == intended:
            warnings.warn(
                f"{rec.record_id}: intended word and error surface normalize "
                f"to the same string {intended!r}; counting as Corrected"
            )
        outcome = Outcome.CORRECTED
    elif surface and m == surface:
        outcome = Outcome.FAITHFUL
    elif (
        prefix_match
        and not rec.complete
        and len(surface) >= MIN_PREFIX_LEN
        and m.startswith(surface)
        and m != surface
    ):
        outcome = Outcome.FAITHFUL
        diags.add(Diagnostic.PREFIX_MATCHED)
    else:
        outcome = Outcome.INCORRECT

    return ClassifiedError(
        rec.record_id, outcome, span.error_token_text, span, frozenset(diags)
    )


def classify_all(
    records: list[ErrorRecord],
    spans: dict[str, AlignedSpan],
    *,
    prefix_match: bool = True,
) -> list[ClassifiedError]:
    """Classify every record against its span, in record order."""
    return [
        classify(rec, spans[rec.record_id], prefix_match=prefix_match)
        for rec in records
    ]


def accuracy(outcomes: Iterable[Outcome]) -> float:
    """Overall transcription accuracy: (Corrected + Faithful) / total."""
    counts = Counter(outcomes)
    total = sum(counts.values())
    if total == 0:
        raise EmptyInput("no outcomes to aggregate")
    return (counts[Outcome.CORRECTED] + counts[Outcome.FAITHFUL]) / total


def to_jsonl_line(c: ClassifiedError) -> str:
    """One-line JSON wire form of a classified error."""
    return json.dumps(
        {
            "record_id": c.record_id,
            "outcome": c.outcome.value,
            "matched_text": c.matched_text,
            "similarity": c.span.similarity if c.span else None,
            "diagnostics": sorted(d.value for d in c.diagnostics),
        },
        ensure_ascii=False,
    )


def from_jsonl_line(line: str) -> ClassifiedError:
    """Rehydrate a classified error from its JSONL wire form.

    The alignment span is not reconstructed; ``span`` is None.
    """
    obj = json.loads(line)
    return ClassifiedError(
        record_id=str(obj["record_id"]),
        outcome=Outcome(obj["outcome"]),
        matched_text=obj.get("matched_text"),
        span=None,
        diagnostics=frozenset(Diagnostic(d) for d in obj.get("diagnostics", [])),
    )
