"""Word-timestamped machine transcripts: loading, normalization, windowing.

The on-disk format mirrors the JSON emitted by long-form transcription
stacks that force-align their output (segments, each carrying word entries
with start/end times and an optional confidence score), so real outputs
drop in unchanged:

    {
      "audio_id": "episode-001",          // optional, defaults to filename
      "segments": [
        {"start": 0.0, "end": 2.1, "text": "hello there",
         "words": [
           {"word": "hello", "start": 0.0, "end": 0.4, "score": 0.97},
           {"word": "there", "start": 0.5, "end": 0.9}
         ]}
      ]
    }
"""

from __future__ import annotations

import bisect
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import NonMonotonicTimestamps, SchemaError

# Force-aligned words commonly jitter; overlaps up to this much are normal.
OVERLAP_TOLERANCE_S = 0.05

# Stripped from token edges before comparison; internal characters stay.
_STRIP_CHARS = ".,!?;:\"'()[]{}…—-“”‘’"


@dataclass(frozen=True)
class WordToken:
    """One recognized word with its time span and optional confidence."""

    text: str
    start_s: float
    end_s: float
    confidence: float | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("word token text is empty")
        if not 0 <= self.start_s <= self.end_s:
            raise ValueError(
                f"bad token times for {self.text!r}: [{self.start_s}, {self.end_s}]"
            )


@dataclass(frozen=True)
class Transcript:
    """Immutable machine transcript with time-sorted word tokens."""

    audio_id: str
    tokens: tuple[WordToken, ...]
    segments: tuple[tuple[float, float, str], ...] = ()

    def __post_init__(self):
        if not self.audio_id:
            raise ValueError("audio_id must be non-empty")


def normalize(text: str) -> str:
    """Comparison form of a string: case-folded, edge punctuation stripped
    per token, whitespace collapsed to single spaces. Internal apostrophes
    and hyphens are kept ("don't" stays "don't"). Idempotent.
    """
    parts = []
    for tok in text.casefold().split():
        tok = tok.strip(_STRIP_CHARS)
        if tok:
            parts.append(tok)
    return " ".join(parts)


def load_transcript(path: str | Path) -> Transcript:
    """Load a transcript JSON file, flattening segments into sorted tokens.

    Missing per-word confidence is tolerated. Words without usable timing
    or text are dropped with a warning. Out-of-order word timestamps are
    repaired by a stable sort and reported via NonMonotonicTimestamps.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path.name}: not valid JSON ({e})") from e
    if not isinstance(data, dict) or not isinstance(data.get("segments"), list):
        raise SchemaError(f"{path.name}: expected an object with a 'segments' list")

    audio_id = str(data.get("audio_id") or path.stem)
    tokens: list[WordToken] = []
    segments: list[tuple[float, float, str]] = []
    dropped = 0
    for si, seg in enumerate(data["segments"]):
        if not isinstance(seg, dict):
            raise SchemaError(f"{path.name}: segment {si} is not an object")
        try:
            segments.append((float(seg["start"]), float(seg["end"]), str(seg["text"])))
        except KeyError as e:
            raise SchemaError(f"{path.name}: segment {si} missing key {e}") from e
        words = seg.get("words", [])
        if not isinstance(words, list):
            raise SchemaError(f"{path.name}: segment {si} 'words' is not a list")
        for wi, w in enumerate(words):
            if not isinstance(w, dict) or "word" not in w:
                raise SchemaError(f"{path.name}: segment {si} word {wi} malformed")
            text = str(w["word"]).strip()
            if not text or "start" not in w or "end" not in w:
                dropped += 1
                continue
            score = w.get("score")
            tokens.append(
                WordToken(
                    text,
                    float(w["start"]),
                    float(w["end"]),
                    None if score is None else float(score),
                )
            )
    if dropped:
        warnings.warn(f"{path.name}: dropped {dropped} word(s) without text or timing")

    starts = [t.start_s for t in tokens]
    if any(a > b for a, b in zip(starts, starts[1:])):
        warnings.warn(
            f"{path.name}: word timestamps out of order; re-sorted",
            NonMonotonicTimestamps,
        )
        tokens.sort(key=lambda t: t.start_s)
    for prev, cur in zip(tokens, tokens[1:]):
        if cur.start_s < prev.end_s - OVERLAP_TOLERANCE_S:
            warnings.warn(
                f"{path.name}: tokens {prev.text!r} and {cur.text!r} overlap by "
                f"{prev.end_s - cur.start_s:.3f}s"
            )
    return Transcript(audio_id, tuple(tokens), tuple(segments))


def tokens_in_window(
    t: Transcript, center_s: float, radius_s: float
) -> list[tuple[int, WordToken]]:
    """Tokens whose start time falls in [center - radius, center + radius].

    Returns (absolute index, token) pairs in order; an empty list signals
    an empty window. The result is always a contiguous slice of t.tokens.
    """
    if radius_s <= 0:
        raise ValueError("radius_s must be positive")
    starts = [tok.start_s for tok in t.tokens]
    lo = bisect.bisect_left(starts, center_s - radius_s)
    hi = bisect.bisect_right(starts, center_s + radius_s)
    return [(i, t.tokens[i]) for i in range(lo, hi)]


def transcript_to_dict(t: Transcript) -> dict:
    """JSON-ready form of a transcript, matching the load_transcript schema."""
    segs = []
    # Re-associate tokens with their segment by time containment.
    for start, end, text in t.segments:
        words = [
            {"word": tok.text, "start": tok.start_s, "end": tok.end_s,
             **({"score": tok.confidence} if tok.confidence is not None else {})}
            for tok in t.tokens
            if start <= tok.start_s <= end
        ]
        segs.append({"start": start, "end": end, "text": text, "words": words})
    if not t.segments and t.tokens:
        first, last = t.tokens[0], t.tokens[-1]
        segs.append(
            {
                "start": first.start_s,
                "end": last.end_s,
                "text": " ".join(tok.text for tok in t.tokens),
                "words": [
                    {"word": tok.text, "start": tok.start_s, "end": tok.end_s,
                     **({"score": tok.confidence} if tok.confidence is not None else {})}
                    for tok in t.tokens
                ],
            }
        )
    return {"audio_id": t.audio_id, "segments": segs}
