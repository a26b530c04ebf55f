"""Line-to-IPA transcription adapters and the IPA segment tokenizer.

Two adapter modes: an external process (espeak-ng compatible: text on
argv, IPA on stdout) and a lookup table loaded from a word<TAB>ipa TSV.
Both cache by (language, line text) and emit :class:`Transcription`
objects whose stress marks point at syllabic segments.
"""

from __future__ import annotations

import shutil
import subprocess
import threading
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from ..corpus import _WORD_RE
from ..errors import TranscriptionError, UnknownWordError
from .features import FeatureTable, Phoneme, shipped_table

PRIMARY_STRESS = "ˈ"
SECONDARY_STRESS = "ˌ"

# Characters carrying no segmental content. Secondary stress is ignored:
# rhyme anchors on the strongest stress of the final word.
_SKIP = set(" \t .|‖#()/\\_,;:!?ˌ‍-")
# Combining marks dropped before matching: tie bars and the non-syllabic mark.
_STRIP = {"͡", "͜", "̯"}


@dataclass(frozen=True)
class Transcription:
    phonemes: tuple[Phoneme, ...]
    stress_marks: frozenset[int]
    source_text: str

    def syllabic_indices(self) -> list[int]:
        return [i for i, p in enumerate(self.phonemes) if p.is_syllabic]


def tokenize_ipa(ipa: str, table: FeatureTable, context: str = "") -> Transcription:
    """Split an IPA string into table segments, greedy longest match.

    A primary stress mark flags the next syllabic segment as a stressed
    nucleus. Unknown symbols raise a table-coverage error.
    """
    text = unicodedata.normalize("NFD", ipa)
    text = "".join(ch for ch in text if ch not in _STRIP)
    phonemes: list[Phoneme] = []
    stressed: set[int] = set()
    pending_stress = False
    i = 0
    n = len(text)
    max_len = table.max_symbol_len
    while i < n:
        ch = text[i]
        if ch == PRIMARY_STRESS:
            pending_stress = True
            i += 1
            continue
        if ch in _SKIP:
            i += 1
            continue
        match = None
        for length in range(min(max_len, n - i), 0, -1):
            cand = text[i:i + length]
            if cand in table:
                match = cand
                break
        if match is None:
            raise TranscriptionError(
                f"symbol not covered by the feature table: {ch!r}"
                + (f" (in {context!r})" if context else "")
            )
        phoneme = table.phoneme(match)
        if pending_stress and phoneme.is_syllabic:
            stressed.add(len(phonemes))
            pending_stress = False
        phonemes.append(phoneme)
        i += len(match)
    return Transcription(tuple(phonemes), frozenset(stressed), ipa)


class Transcriber:
    """Base adapter: produces cached Transcriptions for lines of text."""

    def __init__(self, language: str, table: FeatureTable | None = None):
        self.language = language
        self.table = table if table is not None else shipped_table()
        self._cache: dict[tuple[str, str], Transcription] = {}
        self._lock = threading.Lock()

    def line_to_ipa(self, text: str) -> str:
        raise NotImplementedError

    def transcribe(self, line_text: str) -> Transcription:
        key = (self.language, line_text)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        ipa = self.line_to_ipa(line_text)
        result = tokenize_ipa(ipa, self.table, context=line_text)
        result = Transcription(result.phonemes, result.stress_marks, line_text)
        with self._lock:
            self._cache.setdefault(key, result)
        return result


class LookupTranscriber(Transcriber):
    """Word -> IPA lookup loaded from a TSV file or a mapping."""

    def __init__(self, source: str | Path | dict[str, str], language: str,
                 table: FeatureTable | None = None):
        super().__init__(language, table)
        if isinstance(source, dict):
            entries = dict(source)
        else:
            entries = {}
            for lineno, raw in enumerate(
                    Path(source).read_text(encoding="utf-8").splitlines(), 1):
                if not raw.strip():
                    continue
                parts = raw.split("\t")
                if len(parts) != 2:
                    raise TranscriptionError(
                        f"{source}: line {lineno}: expected word<TAB>ipa")
                entries[parts[0]] = parts[1]
        self._entries = {k.casefold(): v for k, v in entries.items()}

    def line_to_ipa(self, text: str) -> str:
        words = _WORD_RE.findall(text)
        out = []
        for word in words:
            ipa = self._entries.get(word.casefold())
            if ipa is None:
                raise UnknownWordError(word)
            out.append(ipa)
        return " ".join(out)


class EspeakTranscriber(Transcriber):
    """Adapter for an espeak-ng style external process.

    Invokes ``<executable> -q --ipa -v <voice> -- <text>`` per line and
    reads IPA from stdout.
    """

    def __init__(self, language: str, table: FeatureTable | None = None,
                 executable: str = "espeak-ng", voice: str | None = None,
                 timeout: float = 30.0):
        super().__init__(language, table)
        self.executable = executable
        self.voice = voice or language
        self.timeout = timeout

    @staticmethod
    def available(executable: str = "espeak-ng") -> bool:
        return shutil.which(executable) is not None

    def line_to_ipa(self, text: str) -> str:
        cmd = [self.executable, "-q", "--ipa", "-v", self.voice, "--", text]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True,
                                  timeout=self.timeout)
        except FileNotFoundError:
            raise TranscriptionError(f"transcriber executable not found: {self.executable}")
        except subprocess.TimeoutExpired:
            raise TranscriptionError(f"transcriber timed out on: {text!r}")
        if proc.returncode != 0:
            raise TranscriptionError(
                f"{self.executable} failed (exit {proc.returncode}): {proc.stderr.strip()}")
        return proc.stdout.strip()


def make_transcriber(spec: str, language: str,
                     table: FeatureTable | None = None) -> Transcriber:
    """Build a transcriber from a CLI-style spec string.

    ``tsv:/path/to/lexicon.tsv`` selects lookup mode; ``espeak`` or
    ``espeak:<executable>`` selects the external process.
    """
    if spec.startswith("tsv:"):
        return LookupTranscriber(spec[4:], language, table)
    if spec == "espeak":
        return EspeakTranscriber(language, table)
    if spec.startswith("espeak:"):
        return EspeakTranscriber(language, table, executable=spec[7:])
    raise TranscriptionError(f"unknown transcriber spec: {spec!r}")
