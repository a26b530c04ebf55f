"""Planted-rhyme corpus generation for pipeline calibration and tests.

Builds quatrain corpora from an invented vocabulary with perfect-rhyme
suffix classes: every word of a class shares its stressed suffix, so the
true rhyme chains are known by construction. Orthography equals the IPA
segment string, which keeps the lookup lexicon trivially consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, Poem, _build_poem
from .errors import ConfigError
from .evaluation import AgreementRow, Annotation
from .phonetics import LookupTranscriber, PRIMARY_STRESS

VOWELS = ("a", "e", "i", "o", "u", "y", "ø", "ɛ", "ɔ", "æ")
CONSONANTS = ("b", "d", "f", "ɡ", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z")
# suffix shapes cycle per class; V positions draw vowels, C consonants
SHAPES = ("VC", "VCV", "VCCV")
FILLERS = ("zu", "mi", "ko", "ra", "de", "fo", "ni", "se")

SCHEMES = {
    "aabb": ((0, 1), (2, 3)),
    "abab": ((0, 2), (1, 3)),
}


@dataclass(frozen=True)
class SuffixClass:
    suffix: str
    signature: tuple[str, ...]  # positional components of the rhyme segment
    words: tuple[str, ...]


@dataclass(frozen=True)
class PlantedCorpus:
    """A generated corpus plus its ground truth and lookup lexicon."""

    corpus: Corpus
    truth: dict[str, tuple[tuple[int, ...], ...]]  # poem id -> chains
    lexicon: dict[str, str]  # word -> IPA
    classes: tuple[SuffixClass, ...]
    seed: int

    def transcriber(self) -> LookupTranscriber:
        return LookupTranscriber(self.lexicon, self.corpus.language)

    def truth_annotations(self, annotator_id: str = "truth") -> list[Annotation]:
        return [
            Annotation(annotator_id=annotator_id, poem_id=pid, chains=chains)
            for pid, chains in sorted(self.truth.items())
        ]

    def save_lexicon(self, path: str | Path) -> None:
        lines = [f"{word}\t{ipa}" for word, ipa in sorted(self.lexicon.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _suffix_signature(shape: str, symbols: tuple[str, ...]) -> tuple[str, ...]:
    """Group a shape's symbols into maximal same-kind clusters."""
    out: list[str] = []
    cluster = symbols[0]
    for kind_prev, kind_cur, sym in zip(shape, shape[1:], symbols[1:]):
        if kind_cur == kind_prev:
            cluster += sym
        else:
            out.append(cluster)
            cluster = sym
    out.append(cluster)
    return tuple(out)


def _build_classes(rng: np.random.Generator, n_classes: int,
                   words_per_class: int) -> tuple[SuffixClass, ...]:
    used_suffixes: set[str] = set()
    classes: list[SuffixClass] = []
    onsets = list(CONSONANTS)
    for k in range(n_classes):
        shape = SHAPES[k % len(SHAPES)]
        for _ in range(1000):
            symbols = tuple(
                VOWELS[rng.integers(len(VOWELS))] if kind == "V"
                else CONSONANTS[rng.integers(len(CONSONANTS))]
                for kind in shape
            )
            suffix = "".join(symbols)
            if suffix not in used_suffixes:
                break
        else:  # pragma: no cover - inventory far exceeds class counts
            raise ConfigError(f"cannot build {n_classes} distinct suffix classes")
        used_suffixes.add(suffix)
        picks = rng.permutation(len(onsets))[:words_per_class]
        words = tuple(onsets[i] + suffix for i in sorted(picks))
        classes.append(SuffixClass(suffix, _suffix_signature(shape, symbols), words))
    return tuple(classes)


def _disjoint(a: SuffixClass, b: SuffixClass) -> bool:
    """No shared component at any aligned rhyme-segment position."""
    return all(x != y for x, y in zip(a.signature, b.signature))


def _pick_class_pair(rng: np.random.Generator,
                     classes: tuple[SuffixClass, ...]) -> tuple[int, int]:
    # positionwise-disjoint classes keep chance component collisions out of
    # the planted signal; relax after enough failed draws so tiny
    # inventories still generate
    for _ in range(64):
        i, j = rng.choice(len(classes), size=2, replace=False)
        if _disjoint(classes[i], classes[j]):
            return int(i), int(j)
    i, j = rng.choice(len(classes), size=2, replace=False)
    return int(i), int(j)


def make_planted_corpus(n_lines: int, seed: int, n_classes: int = 12,
                        words_per_class: int = 3,
                        language: str = "eo") -> PlantedCorpus:
    """Generate ~n_lines of single-quatrain poems with planted rhymes.

    Each poem draws two suffix classes (never the same class twice in one
    poem) and a scheme (aabb or abab); the truth chains follow from the
    scheme. Deterministic in seed.
    """
    if n_classes < 2:
        raise ConfigError(f"need at least 2 suffix classes, got {n_classes}")
    if words_per_class < 2:
        raise ConfigError(f"need at least 2 words per class, got {words_per_class}")
    if n_lines < 4:
        raise ConfigError(f"need at least 4 lines, got {n_lines}")
    rng = np.random.default_rng(seed)
    classes = _build_classes(rng, n_classes, words_per_class)

    lexicon: dict[str, str] = {f: f for f in FILLERS}
    for cls in classes:
        for word in cls.words:
            lexicon[word] = PRIMARY_STRESS + word

    scheme_names = sorted(SCHEMES)
    poems: list[Poem] = []
    truth: dict[str, tuple[tuple[int, ...], ...]] = {}
    n_poems = n_lines // 4
    for p in range(n_poems):
        scheme = scheme_names[rng.integers(len(scheme_names))]
        ci, cj = _pick_class_pair(rng, classes)
        chains = SCHEMES[scheme]
        end_words: dict[int, str] = {}
        for chain, cls_index in zip(chains, (ci, cj)):
            cls = classes[cls_index]
            picks = rng.permutation(len(cls.words))[:2]
            for line_index, word_index in zip(chain, picks):
                end_words[line_index] = cls.words[word_index]
        lines = []
        for line_index in range(4):
            n_fill = int(rng.integers(1, 4))
            fill = [FILLERS[rng.integers(len(FILLERS))] for _ in range(n_fill)]
            lines.append(" ".join([*fill, end_words[line_index]]))
        pid = f"p{p:05d}"
        poems.append(_build_poem(pid, language, f"planted {scheme} {p}", [lines]))
        truth[pid] = tuple(tuple(chain) for chain in chains)

    corpus = Corpus(language=language, poems=tuple(poems))
    return PlantedCorpus(corpus=corpus, truth=truth, lexicon=lexicon,
                         classes=classes, seed=seed)


def simulate_agreement_rows(n_rows: int, seed: int,
                            beta_phon: float = -0.5, beta_line: float = -0.8,
                            intercepts: dict[str, float] | None = None
                            ) -> list[AgreementRow]:
    """Draw agreement rows from the logistic model with known coefficients.

    agreement ~ Bernoulli(sigmoid(alpha_corpus + beta_phon * phon
    + beta_line * line)); line distances are uniform on 1..10 and phonetic
    distances uniform on [0, 3). Used as the generate-then-fit oracle for
    the regression module.
    """
    if intercepts is None:
        intercepts = {
            "aa": 2.0, "bb": 2.25, "cc": 2.5, "dd": 2.75,
            "ee": 3.0, "ff": 3.25, "gg": 3.5,
        }
    rng = np.random.default_rng(seed)
    corpora = sorted(intercepts)
    rows: list[AgreementRow] = []
    for _ in range(n_rows):
        corpus = corpora[rng.integers(len(corpora))]
        line = int(rng.integers(1, 11))
        phon = float(rng.uniform(0.0, 3.0))
        eta = intercepts[corpus] + beta_phon * phon + beta_line * line
        p = 1.0 / (1.0 + np.exp(-eta))
        rows.append(AgreementRow(
            agreement=bool(rng.random() < p),
            line_distance=line,
            phon_distance=phon,
            corpus=corpus,
        ))
    return rows
