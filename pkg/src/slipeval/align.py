"""Locate annotated errors inside machine transcripts by fuzzy matching.

Alignment works in two stages with two granularities. Candidate token
spans inside a timestamp window are ranked by character-level similarity
between their normalized text and the normalized, notation-stripped
context of the error; character distance is robust to tokenization drift.
The winning span is then aligned token-by-token against the context so the
discrete transcript token sitting at the error slot can be identified.

Alignment never throws on a miss: failure is recorded on the returned
span so batch runs keep going.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import ErrorRecord, SoundErrorKind
from .notation import strip_context
from .transcript import Transcript, normalize, tokens_in_window


@dataclass(frozen=True)
class AlignConfig:
    """Alignment thresholds. Defaults are deliberate, documented choices."""

    window_radius_s: float = 5.0
    min_similarity: float = 0.6
    max_span_slack: int = 3

    def __post_init__(self):
        if self.window_radius_s <= 0:
            raise ValueError("window_radius_s must be positive")
        if not 0 <= self.min_similarity <= 1:
            raise ValueError("min_similarity must be in [0, 1]")
        if self.max_span_slack < 0:
            raise ValueError("max_span_slack must be >= 0")


@dataclass(frozen=True)
class AlignedSpan:
    """Result of aligning one error record against one transcript.

    ``token_range`` is a half-open range of absolute token indices;
    ``error_token_index`` (when present) lies inside it and names the
    transcript token aligned to the error slot, whose raw text is kept in
    ``error_token_text`` so downstream stages need no transcript access.
    """

    record_id: str
    token_range: tuple[int, int]
    similarity: float
    error_token_index: int | None
    failed: bool
    error_token_text: str | None = None


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions, and
    substitutions transforming ``a`` into ``b``.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a  # keep the rolling row short
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, 1):
            cost = 0 if ca == cb else 1
            append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Normalized similarity: 1 - distance/max(len). Two empty strings
    are identical (1.0)."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def token_levenshtein(
    a: list[str], b: list[str]
) -> tuple[int, list[tuple[int, int]]]:
    """Edit distance over token sequences plus one optimal index pairing.

    Substituting unequal tokens costs 1, equal tokens 0. The pairing lists
    (index_a, index_b) for every matched or substituted position along one
    optimal edit script; at each backtrace step ties prefer match or
    substitution over deleting from ``a`` over inserting from ``b``, which
    makes the result deterministic.
    """
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        d[i][0] = i
    for j in range(1, n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)

    pairs: list[tuple[int, int]] = []
    i, j = m, n
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and d[i][j] == d[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
        ):
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return d[m][n], pairs


def _failed_span(record_id: str) -> AlignedSpan:
    return AlignedSpan(record_id, (0, 0), 0.0, None, True, None)


def _context_tokens(rec: ErrorRecord) -> tuple[list[str], int | None]:
    """Normalized context tokens and the error slot's position among them."""
    ctx = strip_context(
        rec.context_text, deletion=rec.sound_kind is SoundErrorKind.DELETION
    )
    tokens: list[str] = []
    slot = None
    for k, tok in enumerate(ctx.tokens):
        norm = normalize(tok)
        if not norm:
            continue  # token was pure punctuation
        if k == ctx.error_index:
            slot = len(tokens)
        tokens.append(norm)
    return tokens, slot


def align_error(
    rec: ErrorRecord, t: Transcript, cfg: AlignConfig | None = None
) -> AlignedSpan:
    """Find the transcript span matching an error's context, and the token
    at its error slot.

    Candidates are all contiguous token runs inside the timestamp window
    whose length is within ``max_span_slack`` of the context's token count.
    The span with the highest character-level similarity wins; ties go to
    the earlier start, then the shorter span. The span is marked failed
    when the window is empty or the best similarity falls below
    ``min_similarity``.
    """
    if cfg is None:
        cfg = AlignConfig()
    if rec.audio_id != t.audio_id:
        raise ValueError(
            f"record {rec.record_id} is for audio {rec.audio_id!r}, "
            f"not {t.audio_id!r}"
        )
    ctx_tokens, slot = _context_tokens(rec)
    window = tokens_in_window(t, rec.timestamp_s, cfg.window_radius_s)
    if not window or not ctx_tokens or slot is None:
        return _failed_span(rec.record_id)

    base = window[0][0]
    wtoks = [normalize(tok.text) for _, tok in window]
    ctx_text = " ".join(ctx_tokens)
    n_ctx = len(ctx_tokens)

    best_key: tuple[float, int, int] | None = None
    best_span: tuple[int, int] | None = None
    lo_len = max(1, n_ctx - cfg.max_span_slack)
    hi_len = n_ctx + cfg.max_span_slack
    for length in range(lo_len, hi_len + 1):
        for start in range(0, len(wtoks) - length + 1):
            cand_text = " ".join(x for x in wtoks[start : start + length] if x)
            longest = max(len(cand_text), len(ctx_text))
            if best_key is not None and longest:
                # Length difference alone bounds similarity from above.
                bound = 1.0 - abs(len(cand_text) - len(ctx_text)) / longest
                if bound < best_key[0]:
                    continue
            sim = similarity(cand_text, ctx_text)
            key = (sim, -start, -length)
            if best_key is None or key > best_key:
                best_key = key
                best_span = (start, length)

    if best_key is None or best_span is None:
        # Window too short to host any span of a permitted length.
        return _failed_span(rec.record_id)
    sim = best_key[0]
    start, length = best_span
    failed = sim < cfg.min_similarity

    err_idx = None
    err_text = None
    _, pairs = token_levenshtein(ctx_tokens, wtoks[start : start + length])
    for ia, ib in pairs:
        if ia == slot:
            err_idx = base + start + ib
            err_text = t.tokens[err_idx].text
            break

    return AlignedSpan(
        record_id=rec.record_id,
        token_range=(base + start, base + start + length),
        similarity=sim,
        error_token_index=err_idx,
        failed=failed,
        error_token_text=err_text,
    )


def align_all(
    records: list[ErrorRecord],
    transcripts: dict[str, Transcript],
    cfg: AlignConfig | None = None,
) -> dict[str, AlignedSpan]:
    """Align every record against its transcript, keyed by record_id.

    Records whose audio_id has no transcript get a failed span rather than
    aborting the batch.
    """
    spans: dict[str, AlignedSpan] = {}
    for rec in records:
        t = transcripts.get(rec.audio_id)
        spans[rec.record_id] = (
            _failed_span(rec.record_id) if t is None else align_error(rec, t, cfg)
        )
    return spans
