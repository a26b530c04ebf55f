"""Rhyme segments: the phoneme suffix a rhyme is judged on.

The segment starts at the nucleus of the last stressed syllable (fallback:
the last syllabic segment) and runs to the end of the line. For the
tagger it is decomposed into alternating vowel/consonant cluster
components indexed by position, nucleus first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import NoNucleusError
from .features import Phoneme, feature_distance
from .transcription import Transcription

EMPTY_COMPONENT = "∅"  # pads the shorter segment during alignment


@dataclass(frozen=True)
class RhymeSegment:
    phonemes: tuple[Phoneme, ...]

    def __len__(self) -> int:
        return len(self.phonemes)

    @property
    def symbols(self) -> str:
        return "".join(p.symbol for p in self.phonemes)


@dataclass(frozen=True)
class Component:
    """A maximal vowel or consonant cluster at a segment position."""

    kind: str  # "V" or "C"
    position: int
    symbols: str


def extract_rhyme_segment(t: Transcription) -> RhymeSegment:
    """Suffix from the last stressed nucleus (fallback: last vowel)."""
    if t.stress_marks:
        start = max(t.stress_marks)
    else:
        syllabics = t.syllabic_indices()
        if not syllabics:
            raise NoNucleusError(
                f"no syllabic segment in transcription of {t.source_text!r}")
        start = syllabics[-1]
    return RhymeSegment(t.phonemes[start:])


def decompose_components(segment: RhymeSegment) -> list[Component]:
    """Alternating maximal V/C clusters from the nucleus onward."""
    components: list[Component] = []
    current_kind: str | None = None
    current: list[str] = []
    for phoneme in segment.phonemes:
        kind = "V" if phoneme.is_syllabic else "C"
        if kind != current_kind:
            if current:
                components.append(Component(current_kind, len(components),
                                            "".join(current)))
            current_kind = kind
            current = []
        current.append(phoneme.symbol)
    if current:
        components.append(Component(current_kind, len(components), "".join(current)))
    return components


def component_signature(segment: RhymeSegment) -> tuple[str, ...]:
    """Component symbol strings by position, for model lookups."""
    return tuple(c.symbols for c in decompose_components(segment))


def segment_distance(a: "RhymeSegment | Sequence[Phoneme]",
                     b: "RhymeSegment | Sequence[Phoneme]",
                     normalize: bool = False) -> float:
    """Articulatory-feature edit distance between two segments.

    Substitution costs the fraction of differing feature values,
    insertion/deletion costs 1. The unnormalized distance is a metric;
    ``normalize`` divides by max(len(a), len(b)).
    """
    pa = a.phonemes if isinstance(a, RhymeSegment) else tuple(a)
    pb = b.phonemes if isinstance(b, RhymeSegment) else tuple(b)
    return feature_distance(pa, pb, normalize=normalize)
