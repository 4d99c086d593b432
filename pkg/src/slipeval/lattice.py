"""Single-slot recognition lattices over a produced error, its intended
word, and alternative candidates.

Arcs carry negative log probabilities, so the best path is the minimum
total weight. Biasing multiplies the underlying path probabilities and
renormalizes, which lets a consumer smoothly trade off error correction
(favor the intended word) against verbatim transcription (favor the
spoken error) without changing the lattice shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidProbability, NoPath

DEFAULT_ERROR_MASS = 0.5
DEFAULT_INTENDED_MASS = 0.3
DEFAULT_ALTERNATIVES_MASS = 0.2


class PathClass(Enum):
    ERROR = "error"
    INTENDED = "intended"
    ALTERNATIVE = "alternative"
    SHARED = "shared"


_DOT_COLORS = {
    PathClass.ERROR: "goldenrod",
    PathClass.INTENDED: "steelblue",
    PathClass.ALTERNATIVE: "firebrick",
    PathClass.SHARED: "gray50",
}


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    label: str
    weight: float  # negative log probability
    path_class: PathClass


@dataclass(frozen=True)
class Lattice:
    nodes: tuple[str, ...]
    start: str
    end: str
    arcs: tuple[Arc, ...]


@dataclass(frozen=True)
class BiasConfig:
    """Multipliers applied to path probabilities before renormalization.
    (1, 1) is the identity."""

    correction_bias: float = 1.0  # scales the intended-word path
    verbatim_bias: float = 1.0  # scales the spoken-error path

    def __post_init__(self):
        if self.correction_bias <= 0 or self.verbatim_bias <= 0:
            raise ValueError("bias factors must be strictly positive")

    def inverse(self) -> BiasConfig:
        return BiasConfig(1.0 / self.correction_bias, 1.0 / self.verbatim_bias)


def validate_lattice(lat: Lattice) -> list[str]:
    """Topological order of the lattice's nodes.

    Raises ValueError for structural defects (unknown nodes, cycles,
    nodes not on any start-to-end path) and NoPath when the end node is
    unreachable from the start.
    """
    known = set(lat.nodes)
    if lat.start not in known or lat.end not in known:
        raise ValueError("start/end node missing from node list")
    for arc in lat.arcs:
        if arc.src not in known or arc.dst not in known:
            raise ValueError(f"arc {arc.label!r} references unknown node")

    out: dict[str, list[Arc]] = {n: [] for n in lat.nodes}
    indeg = {n: 0 for n in lat.nodes}
    for arc in lat.arcs:
        out[arc.src].append(arc)
        indeg[arc.dst] += 1

    order: list[str] = []
    ready = [n for n in lat.nodes if indeg[n] == 0]
    while ready:
        node = ready.pop()
        order.append(node)
        for arc in out[node]:
            indeg[arc.dst] -= 1
            if indeg[arc.dst] == 0:
                ready.append(arc.dst)
    if len(order) < len(lat.nodes):
        raise ValueError("lattice contains a cycle")

    reach = {lat.start}
    for node in order:
        if node in reach:
            reach.update(arc.dst for arc in out[node])
    if lat.end not in reach:
        raise NoPath("end node unreachable from start")
    coreach = {lat.end}
    for node in reversed(order):
        if any(arc.dst in coreach for arc in out[node]):
            coreach.add(node)
    stranded = known - (reach & coreach)
    if stranded:
        raise ValueError(f"nodes not on any start-to-end path: {sorted(stranded)}")
    return order


def build_error_lattice(
    error_word: str,
    intended_word: str | None = None,
    alternatives: list[tuple[str, float]] | None = None,
    *,
    error_mass: float = DEFAULT_ERROR_MASS,
    intended_mass: float = DEFAULT_INTENDED_MASS,
    alternatives_mass: float = DEFAULT_ALTERNATIVES_MASS,
) -> Lattice:
    """Build the one-slot lattice for a single error.

    Probability mass defaults to 0.5 (spoken error), 0.3 (intended word),
    0.2 (shared across alternatives in proportion to their given weights).
    Mass for absent paths is renormalized away. Alternative weights must
    lie in (0, 1]; they are relative shares, not absolute probabilities.
    """
    if not error_word:
        raise ValueError("error_word must be non-empty")
    alternatives = list(alternatives or [])
    for word, p in alternatives:
        if not word:
            raise ValueError("alternative words must be non-empty")
        if not 0 < p <= 1:
            raise InvalidProbability(f"alternative {word!r}: {p} not in (0, 1]")
    if min(error_mass, intended_mass, alternatives_mass) <= 0:
        raise InvalidProbability("path masses must be strictly positive")

    entries: list[tuple[str, float, PathClass]] = [
        (error_word, error_mass, PathClass.ERROR)
    ]
    if intended_word:
        entries.append((intended_word, intended_mass, PathClass.INTENDED))
    if alternatives:
        share = sum(p for _, p in alternatives)
        entries.extend(
            (word, alternatives_mass * p / share, PathClass.ALTERNATIVE)
            for word, p in alternatives
        )
    total = sum(mass for _, mass, _ in entries)
    arcs = tuple(
        Arc("start", "end", word, -math.log(mass / total), cls)
        for word, mass, cls in entries
    )
    return Lattice(nodes=("start", "end"), start="start", end="end", arcs=arcs)


def path_probabilities(lat: Lattice) -> float:
    """Total probability mass over all start-to-end paths,
    sum over paths of exp(-path weight)."""
    order = validate_lattice(lat)
    fwd = {n: 0.0 for n in lat.nodes}
    fwd[lat.start] = 1.0
    out: dict[str, list[Arc]] = {n: [] for n in lat.nodes}
    for arc in lat.arcs:
        out[arc.src].append(arc)
    for node in order:
        for arc in out[node]:
            fwd[arc.dst] += fwd[node] * math.exp(-arc.weight)
    return fwd[lat.end]


def reweight(lat: Lattice, bias: BiasConfig) -> Lattice:
    """Apply bias multipliers and renormalize path probabilities to 1.

    Intended-path arcs gain probability by ``correction_bias``, error-path
    arcs by ``verbatim_bias``; the log-domain equivalent is subtracting
    ln(bias) from the arc weight. Renormalization then adds ln(Z) to every
    arc leaving the start node (each path crosses exactly one of them).
    The input lattice is unchanged.
    """
    shift = {
        PathClass.INTENDED: math.log(bias.correction_bias),
        PathClass.ERROR: math.log(bias.verbatim_bias),
    }
    biased = tuple(
        Arc(a.src, a.dst, a.label, a.weight - shift.get(a.path_class, 0.0), a.path_class)
        for a in lat.arcs
    )
    interim = Lattice(lat.nodes, lat.start, lat.end, biased)
    log_z = math.log(path_probabilities(interim))
    renormed = tuple(
        Arc(
            a.src,
            a.dst,
            a.label,
            a.weight + log_z if a.src == lat.start else a.weight,
            a.path_class,
        )
        for a in biased
    )
    return Lattice(lat.nodes, lat.start, lat.end, renormed)


def best_path(lat: Lattice) -> tuple[list[str], float]:
    """Minimum-weight start-to-end path by topological relaxation.

    Equal-weight ties resolve to the lexicographically smallest label
    sequence, so decoding is deterministic.
    """
    order = validate_lattice(lat)
    out: dict[str, list[Arc]] = {n: [] for n in lat.nodes}
    for arc in lat.arcs:
        out[arc.src].append(arc)

    best: dict[str, tuple[float, tuple[str, ...]]] = {lat.start: (0.0, ())}
    for node in order:
        if node not in best:
            continue
        dist, labels = best[node]
        for arc in out[node]:
            cand = (dist + arc.weight, labels + (arc.label,))
            cur = best.get(arc.dst)
            if cur is None or cand[0] < cur[0] or (cand[0] == cur[0] and cand[1] < cur[1]):
                best[arc.dst] = cand
    if lat.end not in best:
        raise NoPath("end node unreachable from start")
    weight, labels = best[lat.end]
    return list(labels), weight


def export(lat: Lattice, fmt: str) -> str:
    """Serialize a lattice as ``dot`` graph text or a tab-separated
    ``arclist`` (one arc per line, final line names the end node). Arc
    ordering is deterministic: (from, to, label)."""
    validate_lattice(lat)
    arcs = sorted(lat.arcs, key=lambda a: (a.src, a.dst, a.label))
    if fmt == "arclist":
        lines = [
            f"{a.src}\t{a.dst}\t{a.label}\t{_fmt_weight(a.weight)}" for a in arcs
        ]
        lines.append(lat.end)
        return "\n".join(lines) + "\n"
    if fmt == "dot":
        lines = ["digraph lattice {", "  rankdir=LR;", "  node [shape=circle];"]
        for node in lat.nodes:
            shape = "doublecircle" if node == lat.end else "circle"
            lines.append(f'  "{node}" [shape={shape}];')
        for a in arcs:
            lines.append(
                f'  "{a.src}" -> "{a.dst}" '
                f'[label="{a.label}/{_fmt_weight(a.weight)}" '
                f'color="{_DOT_COLORS[a.path_class]}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {fmt!r}; expected 'dot' or 'arclist'")


def _fmt_weight(w: float) -> str:
    return f"{0.0 if w == 0 else w:.6f}"
