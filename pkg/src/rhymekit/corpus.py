"""Poetry corpora: loading, validation, sampling, and line-final tokens.

A corpus is a flat JSON file (see :func:`load_corpus`) or a directory of
plain-text poems, one file per poem, with blank lines separating stanzas.
All structures are immutable once built and safe to share across threads.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, SchemaError

# ISO 639-1 two-letter codes.
ISO_639_1 = frozenset(
    """aa ab ae af ak am an ar as av ay az ba be bg bh bi bm bn bo br bs ca ce ch co
    cr cs cu cv cy da de dv dz ee el en eo es et eu fa ff fi fj fo fr fy ga gd gl gn
    gu gv ha he hi ho hr ht hu hy hz ia id ie ig ii ik io is it iu ja jv ka kg ki kj
    kk kl km kn ko kr ks ku kv kw ky la lb lg li ln lo lt lu lv mg mh mi mk ml mn mr
    ms mt my na nb nd ne ng nl nn no nr nv ny oc oj om or os pa pi pl ps pt qu rm rn
    ro ru rw sa sc sd se sg si sk sl sm sn so sq sr ss st su sv sw ta te tg th ti tk
    tl tn to tr ts tt tw ty ug uk ur uz ve vi vo wa wo xh yi yo za zh zu""".split()
)

# A word is a run of letters, optionally chained by internal apostrophes or
# hyphens ("o'er", "well-known"). [^\W\d_] is the Unicode letter class.
_WORD_RE = re.compile(r"[^\W\d_]+(?:['’\-][^\W\d_]+)*")


@dataclass(frozen=True)
class Line:
    text: str
    poem_id: str
    index_in_poem: int
    stanza_index: int


@dataclass(frozen=True)
class Poem:
    id: str
    language: str
    lines: tuple[Line, ...]
    title: Optional[str] = None

    @property
    def line_count(self) -> int:
        return len(self.lines)

    @property
    def stanzas(self) -> list[list[str]]:
        """Line texts regrouped by stanza index."""
        out: list[list[str]] = []
        for line in self.lines:
            while len(out) <= line.stanza_index:
                out.append([])
            out[line.stanza_index].append(line.text)
        return out


@dataclass(frozen=True)
class Corpus:
    language: str
    poems: tuple[Poem, ...]

    @property
    def total_lines(self) -> int:
        return sum(p.line_count for p in self.poems)

    def poem(self, poem_id: str) -> Poem:
        for p in self.poems:
            if p.id == poem_id:
                return p
        raise KeyError(poem_id)


@dataclass(frozen=True)
class Sample:
    """Whole poems drawn from one corpus until a line budget is reached."""

    poems: tuple[Poem, ...]
    seed: int
    target_lines: int

    @property
    def total_lines(self) -> int:
        return sum(p.line_count for p in self.poems)


def _build_poem(poem_id: str, language: str, title: Optional[str],
                stanzas: Iterable[Iterable[str]]) -> Poem:
    """Assemble a Poem, applying the blank-line stanza rule.

    Blank entries inside a declared stanza split it further; empty stanzas
    are dropped, so stanza indices come out dense and non-decreasing.
    """
    lines: list[Line] = []
    stanza_index = 0
    for stanza in stanzas:
        emitted = False
        for raw in stanza:
            if not isinstance(raw, str):
                raise SchemaError(f"poem {poem_id!r}: line is not a string: {raw!r}")
            text = raw.strip()
            if not text:
                if emitted:
                    stanza_index += 1
                    emitted = False
                continue
            lines.append(Line(text=text, poem_id=poem_id,
                              index_in_poem=len(lines), stanza_index=stanza_index))
            emitted = True
        if emitted:
            stanza_index += 1
    return Poem(id=poem_id, language=language, lines=tuple(lines), title=title)


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus JSON file.

    Schema: ``{"language": "en", "poems": [{"id": "p1", "title": null,
    "stanzas": [["line text", ...], ...]}]}``.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError(f"corpus file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"corpus file is not valid JSON: {path}: {exc}")
    return corpus_from_dict(data)


def corpus_from_dict(data: dict) -> Corpus:
    if not isinstance(data, dict):
        raise SchemaError("corpus root must be a JSON object")
    language = data.get("language")
    if not isinstance(language, str) or language not in ISO_639_1:
        raise SchemaError(f"unknown language code: {language!r}")
    raw_poems = data.get("poems")
    if not isinstance(raw_poems, list) or not raw_poems:
        raise SchemaError("corpus must contain a non-empty 'poems' list")

    poems: list[Poem] = []
    seen: set[str] = set()
    for entry in raw_poems:
        if not isinstance(entry, dict):
            raise SchemaError(f"poem entry is not an object: {entry!r}")
        poem_id = entry.get("id")
        if not isinstance(poem_id, str) or not poem_id:
            raise SchemaError(f"poem has no usable id: {entry.get('id')!r}")
        if poem_id in seen:
            raise SchemaError(f"duplicate poem id: {poem_id!r}")
        seen.add(poem_id)
        stanzas = entry.get("stanzas")
        if not isinstance(stanzas, list):
            raise SchemaError(f"poem {poem_id!r} has no 'stanzas' list")
        title = entry.get("title")
        if title is not None and not isinstance(title, str):
            raise SchemaError(f"poem {poem_id!r}: title must be a string or null")
        poems.append(_build_poem(poem_id, language, title, stanzas))

    corpus = Corpus(language=language, poems=tuple(poems))
    if corpus.total_lines < 1:
        raise SchemaError("corpus contains no lines")
    return corpus


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "language": corpus.language,
        "poems": [
            {"id": p.id, "title": p.title, "stanzas": p.stanzas}
            for p in corpus.poems
        ],
    }


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(corpus_to_dict(corpus), ensure_ascii=False, indent=1,
                   sort_keys=True) + "\n",
        encoding="utf-8",
    )


def ingest_text_dir(directory: str | Path, language: str) -> Corpus:
    """Build a corpus from a directory of plain-text poems.

    One poem per ``*.txt`` file; the file name (without extension) is the
    poem id; blank lines separate stanzas.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise SchemaError(f"not a directory: {directory}")
    if language not in ISO_639_1:
        raise SchemaError(f"unknown language code: {language!r}")
    poems = []
    for file in sorted(directory.glob("*.txt")):
        text_lines = file.read_text(encoding="utf-8").splitlines()
        poems.append(_build_poem(file.stem, language, None, [text_lines]))
    if not poems:
        raise SchemaError(f"no .txt poems found in {directory}")
    return Corpus(language=language, poems=tuple(poems))


def sample_poems(corpus: Corpus, target_lines: int, seed: int) -> Sample:
    """Draw whole poems uniformly without replacement until the line budget.

    Stops at the first poem that reaches or overshoots ``target_lines``, so
    the total satisfies target <= total < target + max poem length.
    Deterministic for a fixed seed; different seeds may reuse poems.
    """
    if target_lines < 1:
        raise InsufficientDataError(f"target_lines must be >= 1, got {target_lines}")
    if corpus.total_lines < target_lines:
        raise InsufficientDataError(
            f"corpus has {corpus.total_lines} lines, need {target_lines}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus.poems))
    chosen: list[Poem] = []
    total = 0
    for idx in order:
        poem = corpus.poems[idx]
        if poem.line_count == 0:
            continue
        chosen.append(poem)
        total += poem.line_count
        if total >= target_lines:
            break
    return Sample(poems=tuple(chosen), seed=seed, target_lines=target_lines)


def line_final_word(line: Line | str) -> Optional[str]:
    """Last word of a line: letters plus internal apostrophes/hyphens,
    case-folded. Returns None when the line contains no letters."""
    text = line.text if isinstance(line, Line) else line
    words = _WORD_RE.findall(text)
    if not words:
        return None
    return unicodedata.normalize("NFC", words[-1]).casefold()


def normalize_word(word: str) -> Optional[str]:
    """Reduce an arbitrary word string to the same form line_final_word
    emits: first word-like run, case-folded. None if no letters."""
    return line_final_word(word)
