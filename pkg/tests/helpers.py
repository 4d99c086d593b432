"""Small factories shared across test modules."""

from __future__ import annotations

from slipeval.corpus import ErrorClass, ErrorRecord, SoundErrorKind
from slipeval.notation import parse_notation
from slipeval.transcript import Transcript, WordToken

WORD_GAP = 0.35
WORD_DUR = 0.30


def make_record(
    context: str,
    *,
    record_id: str = "rec-1",
    audio_id: str = "aud-1",
    timestamp_s: float = 0.0,
    error_class: ErrorClass = ErrorClass.WORD,
    sound_kind: SoundErrorKind | None = None,
    contextual: bool = False,
    corrected: bool = False,
    complete: bool = True,
    intended_word: str | None = None,
    **extra,
) -> ErrorRecord:
    """Build an ErrorRecord whose annotation is parsed from ``context``."""
    token = next(t for t in context.split() if t.startswith("/"))
    core = token.rstrip(".,!?;:…\"'”’)}")
    annotation = parse_notation(core, deletion=sound_kind is SoundErrorKind.DELETION)
    if error_class is ErrorClass.SOUND and sound_kind is None:
        sound_kind = SoundErrorKind.SUBSTITUTION
    return ErrorRecord(
        record_id=record_id,
        audio_id=audio_id,
        timestamp_s=timestamp_s,
        context_text=context,
        annotation=annotation,
        error_class=error_class,
        sound_kind=sound_kind,
        contextual=contextual,
        corrected=corrected,
        complete=complete,
        intended_word=intended_word,
        **extra,
    )


def make_transcript(
    words: list[str], *, audio_id: str = "aud-1", t0: float = 0.0
) -> Transcript:
    """Transcript with words on the standard timing grid starting at t0."""
    tokens = tuple(
        WordToken(w, round(t0 + i * WORD_GAP, 3), round(t0 + i * WORD_GAP + WORD_DUR, 3))
        for i, w in enumerate(words)
    )
    return Transcript(audio_id=audio_id, tokens=tokens)
