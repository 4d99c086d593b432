"""Inline speech-error annotation micro-format: parse, render, strip.

A notation token marks one produced error inside an utterance excerpt:

    /word                       error word, produced as written
    /wo[r]d                     bracketed sound was mispronounced
    /wor=                       production aborted mid-word
    /word (Intended: other)     inline annotation of the intended word

Bracketed segments are spliced literally into the produced surface by
default (the right reading for substituted or added sounds). For deletion
errors the bracketed segment names the sound that was dropped, so callers
pass ``deletion=True`` and the segment is omitted from the surface while
its position is still recorded. No sound-to-spelling mapping is attempted;
an optional ``segment_map`` may rewrite segment text before splicing.

``strip_context`` removes all notation from an utterance excerpt, yielding
the plain text a transcription system would be expected to produce, plus
the position of the (first) error token within that text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MalformedNotation

# Annotation suffix naming the intended word, e.g. "(Intended: password)".
_INTENDED_RE = re.compile(r"\s*\(Intended:\s*([^()]*)\)\s*$")

# Punctuation peeled off the end of a notation token embedded in running
# text, e.g. "/mov=," -- the comma belongs to the utterance, not the token.
# ']' is excluded: it may close a final bracketed segment ("/abou[t]").
_TRAILING_PUNCT = ".,!?;:…\"'”’)}"

_PLAIN_BRACKETS_RE = re.compile(r"\[([^\[\]]*)\]")


@dataclass(frozen=True)
class ParsedAnnotation:
    """Decoded form of one notation token.

    ``mispronounced_segments`` holds (index-in-surface, segment) pairs, one
    per bracketed group. For deletion-mode parses the segment text is not
    part of the surface; the index marks where the dropped sound would have
    appeared.
    """

    error_surface: str
    raw_notation: str = ""
    incomplete: bool = False
    mispronounced_segments: tuple[tuple[int, str], ...] = ()
    intended_inline: str | None = None


def parse_notation(
    token: str,
    *,
    deletion: bool = False,
    segment_map: dict[str, str] | None = None,
) -> ParsedAnnotation:
    """Decode a single notation token into a ParsedAnnotation.

    Raises MalformedNotation for tokens that do not start with ``/``, have
    unbalanced or empty brackets, a non-final ``=``, or an empty surface.
    """
    if not token or not token.startswith("/"):
        raise MalformedNotation(f"notation token must start with '/': {token!r}")
    body = token[1:]

    intended = None
    m = _INTENDED_RE.search(body)
    if m:
        intended = m.group(1).strip()
        if not intended:
            raise MalformedNotation(f"empty (Intended: ...) group in {token!r}")
        body = body[: m.start()]

    incomplete = body.endswith("=")
    if incomplete:
        body = body[:-1]
    if "=" in body:
        raise MalformedNotation(f"'=' only allowed at the end of a token: {token!r}")
    if "/" in body:
        raise MalformedNotation(f"'/' only allowed as the token prefix: {token!r}")
    if any(ch.isspace() for ch in body):
        raise MalformedNotation(f"whitespace inside error token: {token!r}")

    surface_parts: list[str] = []
    surface_len = 0
    segments: list[tuple[int, str]] = []
    seg_chars: list[str] | None = None
    for ch in body:
        if ch == "[":
            if seg_chars is not None:
                raise MalformedNotation(f"nested '[' in {token!r}")
            seg_chars = []
        elif ch == "]":
            if seg_chars is None:
                raise MalformedNotation(f"unmatched ']' in {token!r}")
            seg = "".join(seg_chars)
            if not seg:
                raise MalformedNotation(f"empty [] group in {token!r}")
            if segment_map and seg in segment_map:
                seg = segment_map[seg]
            segments.append((surface_len, seg))
            if not deletion:
                surface_parts.append(seg)
                surface_len += len(seg)
            seg_chars = None
        elif seg_chars is not None:
            seg_chars.append(ch)
        else:
            surface_parts.append(ch)
            surface_len += 1
    if seg_chars is not None:
        raise MalformedNotation(f"unbalanced '[' in {token!r}")

    surface = "".join(surface_parts)
    if not surface:
        raise MalformedNotation(f"empty error surface in {token!r}")
    return ParsedAnnotation(surface, token, incomplete, tuple(segments), intended)


def render_notation(ann: ParsedAnnotation) -> str:
    """Serialize a ParsedAnnotation back to its notation token.

    Inverse of parse_notation for the default (splice) bracket policy:
    every segment must occur in the surface at its recorded index.
    """
    out: list[str] = []
    cursor = 0
    for idx, seg in sorted(ann.mispronounced_segments):
        if idx < cursor or ann.error_surface[idx : idx + len(seg)] != seg:
            raise ValueError(
                f"segment {seg!r}@{idx} does not splice into {ann.error_surface!r}"
            )
        out.append(ann.error_surface[cursor:idx])
        out.append(f"[{seg}]")
        cursor = idx + len(seg)
    out.append(ann.error_surface[cursor:])
    token = "/" + "".join(out)
    if ann.incomplete:
        token += "="
    if ann.intended_inline:
        token += f" (Intended: {ann.intended_inline})"
    return token


@dataclass(frozen=True)
class StrippedContext:
    """An utterance excerpt with all notation removed."""

    text: str
    tokens: tuple[str, ...]
    error_index: int | None  # position of the first error token in ``tokens``
    annotation: ParsedAnnotation | None


def strip_context(
    context_text: str,
    *,
    deletion: bool = False,
    segment_map: dict[str, str] | None = None,
) -> StrippedContext:
    """Remove notation from an utterance excerpt, tracking the error slot.

    Slash and ``=`` markers are dropped, brackets resolved, "(Intended: X)"
    annotation groups removed (the intended word was never spoken), spacing
    normalized to single spaces. Trailing punctuation on a notation token
    stays with the surrounding text. MalformedNotation propagates from any
    embedded token.
    """
    raw = context_text.split()
    out: list[str] = []
    first_ann: ParsedAnnotation | None = None
    first_idx: int | None = None
    i = 0
    while i < len(raw):
        tok = raw[i]
        if tok.startswith("/") and len(tok) > 1:
            core = tok.rstrip(_TRAILING_PUNCT)
            trail = tok[len(core) :]
            group: list[str] = []
            j = i
            if i + 1 < len(raw) and raw[i + 1].startswith("(Intended:"):
                j = i + 1
                while j < len(raw):
                    group.append(raw[j])
                    if raw[j].endswith(")"):
                        break
                    j += 1
                else:
                    raise MalformedNotation(
                        f"unterminated (Intended: ...) group after {tok!r}"
                    )
            token_str = core if not group else core + " " + " ".join(group)
            ann = parse_notation(token_str, deletion=deletion, segment_map=segment_map)
            if first_ann is None:
                first_ann = ann
                first_idx = len(out)
            out.append(ann.error_surface + trail)
            i = j + 1 if group else i + 1
        else:
            # Resolve stray balanced brackets in plain tokens; leave the rest.
            out.append(_PLAIN_BRACKETS_RE.sub(r"\1", tok))
            i += 1
    return StrippedContext(" ".join(out), tuple(out), first_idx, first_ann)


def strip_notation(context_text: str) -> str:
    """Plain-text form of an annotated excerpt (see strip_context)."""
    return strip_context(context_text).text
