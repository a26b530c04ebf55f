"""Ternary articulatory feature table and feature-weighted edit distance.

The shipped table (``data/features.csv``) maps each IPA segment to 22
ternary features (columns f1..f22), in this order: syllabic, sonorant,
consonantal, continuant, delayed release, lateral, nasal, strident, voice,
spread glottis, constricted glottis, anterior, coronal, distributed,
labial, dorsal, high, low, back, round, tense, long. Symbols are stored
NFD-normalized; multi-codepoint segments (affricate digraphs, nasalized
vowels, palatalized consonants) each have their own row.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import SchemaError, TableCoverageError

_VALUE = {"+": 1, "-": -1, "0": 0}
_SYL = 0  # index of the syllabic feature


@dataclass(frozen=True)
class Phoneme:
    """One IPA segment with its ternary feature vector."""

    symbol: str
    features: tuple[int, ...]

    @property
    def is_syllabic(self) -> bool:
        return self.features[_SYL] == 1


class FeatureTable:
    """Immutable symbol -> feature-vector mapping loaded from CSV."""

    def __init__(self, vectors: dict[str, tuple[int, ...]]):
        if not vectors:
            raise SchemaError("feature table is empty")
        lengths = {len(v) for v in vectors.values()}
        if len(lengths) != 1:
            raise SchemaError(f"inconsistent feature counts in table: {lengths}")
        self._vectors = dict(vectors)
        self.n_features = lengths.pop()
        self.max_symbol_len = max(len(s) for s in vectors)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def symbols(self) -> list[str]:
        return sorted(self._vectors)

    def phoneme(self, symbol: str) -> Phoneme:
        try:
            return Phoneme(symbol, self._vectors[symbol])
        except KeyError:
            raise TableCoverageError(symbol) from None

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureTable":
        with open(path, encoding="utf-8", newline="") as fh:
            return cls._parse(csv.reader(fh), str(path))

    @classmethod
    def _parse(cls, reader: Iterable[list[str]], origin: str) -> "FeatureTable":
        rows = iter(reader)
        header = next(rows, None)
        if not header or header[0] != "symbol":
            raise SchemaError(f"{origin}: first column must be 'symbol'")
        n = len(header) - 1
        vectors: dict[str, tuple[int, ...]] = {}
        for row in rows:
            if not row:
                continue
            if len(row) != n + 1:
                raise SchemaError(f"{origin}: row {row[0]!r} has {len(row) - 1} values, expected {n}")
            try:
                vec = tuple(_VALUE[v] for v in row[1:])
            except KeyError as exc:
                raise SchemaError(f"{origin}: row {row[0]!r} has bad value {exc}")
            vectors[unicodedata.normalize("NFD", row[0])] = vec
        return cls(vectors)


_shipped: FeatureTable | None = None


def shipped_table() -> FeatureTable:
    """The feature table bundled with the package (cached)."""
    global _shipped
    if _shipped is None:
        ref = resources.files("rhymekit.phonetics").joinpath("data/features.csv")
        with resources.as_file(ref) as path:
            _shipped = FeatureTable.from_csv(path)
    return _shipped


def _matrix(phonemes: Sequence[Phoneme]) -> np.ndarray:
    if not phonemes:
        return np.zeros((0, 0), dtype=np.int8)
    width = len(phonemes[0].features)
    for p in phonemes:
        if not p.features or len(p.features) != width:
            raise TableCoverageError(p.symbol)
    return np.array([p.features for p in phonemes], dtype=np.int8)


def feature_distance(a: Sequence[Phoneme], b: Sequence[Phoneme],
                     normalize: bool = False) -> float:
    """Edit distance between two phoneme sequences.

    Substituting one segment for another costs the fraction of feature
    values on which they differ; inserting or deleting a segment costs 1.
    With ``normalize`` the result is divided by max(len(a), len(b)).
    """
    ma, mb = _matrix(a), _matrix(b)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raw = float(max(n, m))
        return raw / max(n, m) if normalize and max(n, m) else raw
    if ma.shape[1] != mb.shape[1]:
        raise TableCoverageError(b[0].symbol)
    nf = ma.shape[1]
    # sub[i, j] = fraction of differing features between a[i] and b[j]
    sub = (ma[:, None, :] != mb[None, :, :]).sum(axis=2) / nf

    dist = np.zeros((n + 1, m + 1))
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dist[i, j] = min(
                dist[i - 1, j] + 1.0,
                dist[i, j - 1] + 1.0,
                dist[i - 1, j - 1] + sub[i - 1, j - 1],
            )
    raw = float(dist[n, m])
    return raw / max(n, m) if normalize else raw
