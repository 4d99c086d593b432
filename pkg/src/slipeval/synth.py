"""Deterministic synthetic corpora with planted classification outcomes.

Every generated record is paired with a transcript constructed so the
classification pipeline provably produces the planted outcome: the token
at the error slot is the intended word (Corrected), the produced error
surface (Faithful), or an unrelated word (Incorrect). Word timestamps are
synthesized on a fixed 0.35 s grid, and records sit 10 s apart so their
alignment windows never overlap.

Equal seeds give byte-identical output; different seeds reorder records
but keep identical per-cell counts.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .classify import Outcome
from .corpus import (
    ErrorClass,
    ErrorRecord,
    SoundErrorKind,
    SyllablePosition,
    WordPosition,
    dump_corpus,
)
from .errors import FixtureSpecError
from .notation import parse_notation
from .transcript import Transcript, WordToken, transcript_to_dict

RECORDS_PER_AUDIO = 20
SLOT_SPACING_S = 10.0
WORD_GAP_S = 0.35
WORD_DUR_S = 0.30

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
_VOWELS = set("aeiou")

# All length >= 5 and mutually prefix-free, so truncated fragments can
# never collide with a full bank word.
WORD_BANK = (
    "anchor", "basket", "candle", "dragon", "ember", "falcon", "garden",
    "hammer", "island", "jacket", "kettle", "lantern", "marble", "needle",
    "orchid", "pencil", "quarry", "ribbon", "saddle", "timber", "umbrella",
    "velvet", "walnut", "yonder", "zephyr", "bridge", "copper", "donkey",
    "engine", "forest", "guitar", "harbor", "insect", "jungle", "kernel",
    "ladder", "magnet", "napkin", "oyster", "pillow",
)

_SOUND_KINDS = (
    SoundErrorKind.SUBSTITUTION,
    SoundErrorKind.DELETION,
    SoundErrorKind.ADDITION,
)


@dataclass(frozen=True)
class FixtureCell:
    """One experimental cell: a condition combination, how many records to
    generate for it, and the outcome mix to plant."""

    error_class: ErrorClass
    contextual: bool
    corrected: bool
    complete: bool
    count: int
    outcome_mix: tuple[float, float, float]  # corrected, faithful, incorrect

    def __post_init__(self):
        if self.count < 0:
            raise FixtureSpecError(f"cell count must be >= 0, got {self.count}")
        if len(self.outcome_mix) != 3 or any(f < 0 for f in self.outcome_mix):
            raise FixtureSpecError(f"bad outcome mix {self.outcome_mix}")
        if abs(sum(self.outcome_mix) - 1.0) > 1e-9:
            raise FixtureSpecError(
                f"outcome mix must sum to 1, got {sum(self.outcome_mix)}"
            )

    @property
    def key(self) -> tuple:
        return (self.error_class, self.contextual, self.corrected, self.complete)


@dataclass(frozen=True)
class FixtureSpec:
    seed: int
    cells: tuple[FixtureCell, ...]

    def __post_init__(self):
        keys = [c.key for c in self.cells]
        if len(set(keys)) != len(keys):
            raise FixtureSpecError("duplicate cells in fixture spec")


def load_fixture_spec(path: str | Path) -> FixtureSpec:
    """Read a fixture spec from JSON.

    Schema: {"seed": int, "cells": [{"error_class": "sound"|"word",
    "contextual": bool, "corrected": bool, "complete": bool, "count": int,
    "outcome_mix": [corrected, faithful, incorrect]}, ...]}
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FixtureSpecError(f"not valid JSON: {e}") from e
    try:
        cells = tuple(
            FixtureCell(
                error_class=ErrorClass(c["error_class"]),
                contextual=bool(c["contextual"]),
                corrected=bool(c["corrected"]),
                complete=bool(c["complete"]),
                count=int(c["count"]),
                outcome_mix=tuple(float(f) for f in c["outcome_mix"]),
            )
            for c in data["cells"]
        )
        return FixtureSpec(seed=int(data["seed"]), cells=cells)
    except (KeyError, TypeError, ValueError) as e:
        raise FixtureSpecError(f"bad fixture spec: {e}") from e


def _apportion(total: int, fractions: tuple[float, float, float]) -> list[int]:
    """Integer counts per fraction by largest remainder, so planted counts
    are exact whenever fraction * total is (numerically almost) integral."""
    raw = [f * total for f in fractions]
    base = [math.floor(x) for x in raw]
    short = total - sum(base)
    by_remainder = sorted(range(len(raw)), key=lambda i: (base[i] - raw[i], i))
    for i in by_remainder[:short]:
        base[i] += 1
    return base


def _pick(rng: random.Random, exclude: set[str]) -> str:
    word = rng.choice(WORD_BANK)
    while word in exclude:
        word = rng.choice(WORD_BANK)
    return word


def _perturb(
    rng: random.Random, base: str, kind: SoundErrorKind
) -> tuple[str, str, str, int]:
    """Derive a sound-error form from ``base``.

    Returns (surface, notation_body, segment_char, segment_index). The
    notation body brackets the mispronounced sound; for deletions the
    bracketed sound is absent from the surface.
    """
    if kind is SoundErrorKind.SUBSTITUTION:
        idx = rng.randrange(len(base))
        repl = rng.choice([c for c in _ALPHABET if c != base[idx]])
        surface = base[:idx] + repl + base[idx + 1 :]
        body = base[:idx] + f"[{repl}]" + base[idx + 1 :]
        return surface, body, repl, idx
    if kind is SoundErrorKind.ADDITION:
        idx = rng.randrange(len(base) + 1)
        added = rng.choice(_ALPHABET)
        surface = base[:idx] + added + base[idx:]
        body = base[:idx] + f"[{added}]" + base[idx:]
        return surface, body, added, idx
    idx = rng.randrange(len(base))
    surface = base[:idx] + base[idx + 1 :]
    body = base[:idx] + f"[{base[idx]}]" + base[idx + 1 :]
    return surface, body, base[idx], idx


def _word_position(idx: int, length: int) -> WordPosition:
    if idx == 0:
        return WordPosition.INITIAL
    if idx >= length - 1:
        return WordPosition.FINAL
    return WordPosition.MEDIAL


def _syllable_position(rng: random.Random, ch: str) -> SyllablePosition:
    if ch in _VOWELS:
        return SyllablePosition.NUCLEUS
    return rng.choice((SyllablePosition.ONSET, SyllablePosition.CODA))


def generate_fixture(
    spec: FixtureSpec,
) -> tuple[list[ErrorRecord], list[Transcript]]:
    """Generate the synthetic corpus and its paired transcripts."""
    rng = random.Random(spec.seed)
    planted_outcomes = (Outcome.CORRECTED, Outcome.FAITHFUL, Outcome.INCORRECT)

    plans: list[tuple[FixtureCell, Outcome, int]] = []
    for cell in spec.cells:
        counts = _apportion(cell.count, cell.outcome_mix)
        within = 0
        for outcome, n in zip(planted_outcomes, counts):
            for _ in range(n):
                plans.append((cell, outcome, within))
                within += 1
    rng.shuffle(plans)

    records: list[ErrorRecord] = []
    audio_words: dict[str, list[tuple[str, float, float, float]]] = {}
    audio_segments: dict[str, list[tuple[float, float, str]]] = {}

    for gi, (cell, outcome, within) in enumerate(plans):
        record_id = f"r{gi:05d}"
        audio_id = f"audio-{gi // RECORDS_PER_AUDIO:03d}"
        slot_start = (gi % RECORDS_PER_AUDIO) * SLOT_SPACING_S

        intended = _pick(rng, set())
        sound_kind = None
        word_position = None
        syllable_position = None
        if cell.error_class is ErrorClass.WORD:
            error_word = _pick(rng, {intended})
            surface = error_word if cell.complete else error_word[:-2]
            body = surface
        else:
            sound_kind = _SOUND_KINDS[within % len(_SOUND_KINDS)]
            base = intended if cell.complete else intended[: max(4, len(intended) - 3)]
            surface, body, seg_char, seg_idx = _perturb(rng, base, sound_kind)
            while surface == intended:
                surface, body, seg_char, seg_idx = _perturb(rng, base, sound_kind)
            error_word = surface
            if sound_kind is not SoundErrorKind.ADDITION:
                word_position = _word_position(seg_idx, len(base))
                syllable_position = _syllable_position(rng, seg_char)

        notation = "/" + body + ("" if cell.complete else "=")
        annotation = parse_notation(
            notation, deletion=sound_kind is SoundErrorKind.DELETION
        )
        assert annotation.error_surface == surface

        used = {intended, error_word, surface}
        fillers = [w for w in WORD_BANK if w not in used]
        rng.shuffle(fillers)
        pre = fillers[: rng.randint(2, 3)]
        post = fillers[len(pre) : len(pre) + rng.randint(2, 3)]
        if cell.contextual:
            if cell.error_class is ErrorClass.WORD:
                echo = error_word
            else:
                carriers = [w for w in fillers[len(pre) + len(post) :] if seg_char in w]
                echo = carriers[0] if carriers else fillers[len(pre) + len(post)]
            post = post + [echo]

        context_tokens = list(pre)
        slot_index = len(context_tokens)
        context_tokens.append(notation + ("," if cell.corrected else ""))
        if cell.corrected:
            context_tokens.append(intended)
        context_tokens.extend(post)

        if outcome is Outcome.CORRECTED:
            planted = intended
        elif outcome is Outcome.FAITHFUL:
            planted = surface
        else:
            planted = _pick(rng, used)
            while planted.startswith(surface) or surface.startswith(planted):
                planted = _pick(rng, used)
        spoken = list(pre) + [planted]
        if cell.corrected:
            spoken.append(intended)
        spoken.extend(post)

        words = audio_words.setdefault(audio_id, [])
        seg_word_entries = []
        for i, word in enumerate(spoken):
            start = round(slot_start + i * WORD_GAP_S, 3)
            end = round(slot_start + i * WORD_GAP_S + WORD_DUR_S, 3)
            score = round(rng.uniform(0.55, 0.99), 3)
            entry = (word, start, end, score)
            words.append(entry)
            seg_word_entries.append(entry)
        audio_segments.setdefault(audio_id, []).append(
            (
                seg_word_entries[0][1],
                seg_word_entries[-1][2],
                " ".join(spoken),
            )
        )

        timestamp = round(slot_start + slot_index * WORD_GAP_S, 3)
        records.append(
            ErrorRecord(
                record_id=record_id,
                audio_id=audio_id,
                timestamp_s=timestamp,
                context_text=" ".join(context_tokens),
                annotation=annotation,
                error_class=cell.error_class,
                sound_kind=sound_kind,
                contextual=cell.contextual,
                corrected=cell.corrected,
                complete=cell.complete,
                word_position=word_position,
                syllable_position=syllable_position,
                intended_word=intended,
                intended_low_confidence=False,
            )
        )

    transcripts = [
        Transcript(
            audio_id=audio_id,
            tokens=tuple(
                WordToken(w, s, e, conf) for w, s, e, conf in audio_words[audio_id]
            ),
            segments=tuple(audio_segments[audio_id]),
        )
        for audio_id in sorted(audio_words)
    ]
    return records, transcripts


def write_fixture(spec: FixtureSpec, out_dir: str | Path) -> tuple[Path, Path]:
    """Materialize a fixture on disk: corpus.tsv plus one transcript JSON
    per audio id under transcripts/. Idempotent for a given seed."""
    out_dir = Path(out_dir)
    transcripts_dir = out_dir / "transcripts"
    transcripts_dir.mkdir(parents=True, exist_ok=True)
    records, transcripts = generate_fixture(spec)
    corpus_path = out_dir / "corpus.tsv"
    dump_corpus(records, corpus_path)
    for t in transcripts:
        path = transcripts_dir / f"{t.audio_id}.json"
        path.write_text(
            json.dumps(transcript_to_dict(t), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return corpus_path, transcripts_dir
