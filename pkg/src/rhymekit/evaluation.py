"""Chain/link evaluation: F1 agreement, IAA reports, regression dataset,
and the training-size sweep.

A rhyme chain of n lines expands to C(n,2) links (unordered line pairs);
F1 over link sets is the agreement measure throughout. The consecutive-
pairs dataset turns two annotators' chains into rows (agreement,
line_distance, phon_distance, corpus) for the logistic model, and
run_sweep retrains the tagger at a ladder of sample sizes.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus, sample_poems
from .errors import (
    CoverageMismatchError,
    InsufficientDataError,
    RuntimeFailure,
    SchemaError,
    ScopeError,
)
from .phonetics import Transcriber, extract_rhyme_segment, segment_distance
from .tagger import TaggerConfig, tag_poem, train_model

logger = logging.getLogger(__name__)

Chain = tuple[int, ...]


def _validated_chains(chains: Sequence[Sequence[int]], poem_id: str,
                      line_count: Optional[int] = None) -> tuple[Chain, ...]:
    seen: set[int] = set()
    out: list[Chain] = []
    for chain in chains:
        tup = tuple(int(i) for i in chain)
        if len(tup) < 2:
            raise SchemaError(f"{poem_id}: chain {tup} has fewer than 2 lines")
        if any(b <= a for a, b in zip(tup, tup[1:])):
            raise SchemaError(f"{poem_id}: chain {tup} is not strictly increasing")
        if tup[0] < 0:
            raise SchemaError(f"{poem_id}: negative line index in {tup}")
        if line_count is not None and tup[-1] >= line_count:
            raise SchemaError(
                f"{poem_id}: line index {tup[-1]} outside poem of {line_count} lines")
        overlap = seen.intersection(tup)
        if overlap:
            raise SchemaError(
                f"{poem_id}: chains are not disjoint (shared lines {sorted(overlap)})")
        seen.update(tup)
        out.append(tup)
    return tuple(out)


@dataclass(frozen=True)
class Annotation:
    """One annotator's rhyme chains for one poem."""

    annotator_id: str
    poem_id: str
    chains: tuple[Chain, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "chains", _validated_chains(self.chains, self.poem_id))


@dataclass(frozen=True)
class LinkSet:
    """Unordered same-chain line pairs of one poem."""

    poem_id: str
    links: frozenset[tuple[int, int]]


def annotation_from_dict(data: dict, line_count: Optional[int] = None) -> Annotation:
    try:
        annotator = data["annotator"]
        poem_id = data["poem_id"]
        chains = data["chains"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"annotation file missing field: {exc}")
    _validated_chains(chains, poem_id, line_count)
    return Annotation(annotator_id=annotator, poem_id=poem_id,
                      chains=tuple(tuple(c) for c in chains))


def annotation_to_dict(a: Annotation) -> dict:
    return {
        "annotator": a.annotator_id,
        "poem_id": a.poem_id,
        "chains": [list(chain) for chain in a.chains],
    }


def load_annotation(path: str | Path, line_count: Optional[int] = None) -> Annotation:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}")
    return annotation_from_dict(data, line_count)


def save_annotation(a: Annotation, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(annotation_to_dict(a), ensure_ascii=False, sort_keys=True,
                   indent=1) + "\n",
        encoding="utf-8",
    )


def load_annotation_dir(path: str | Path) -> list[Annotation]:
    """All *.json annotations under a directory, sorted by poem id."""
    files = sorted(Path(path).glob("*.json"))
    annotations = [load_annotation(f) for f in files]
    return sorted(annotations, key=lambda a: a.poem_id)


def chains_to_links(a: Annotation) -> LinkSet:
    """Expand each chain of n lines into its C(n,2) unordered pairs."""
    links: set[tuple[int, int]] = set()
    for chain in a.chains:
        links.update(combinations(chain, 2))
    return LinkSet(poem_id=a.poem_id, links=frozenset(links))


def f1_links(a: LinkSet, b: LinkSet) -> float:
    """F1 = 2|a∩b| / (|a|+|b|); two empty sets agree perfectly (1.0)."""
    if a.poem_id != b.poem_id:
        raise ScopeError(
            f"link sets from different poems: {a.poem_id!r} vs {b.poem_id!r}")
    if not a.links and not b.links:
        return 1.0
    return 2.0 * len(a.links & b.links) / (len(a.links) + len(b.links))


def _pooled_f1(pairs: Sequence[tuple[LinkSet, LinkSet]]) -> float:
    """F1 over links pooled across poems (links keyed by poem id)."""
    pool_a: set = set()
    pool_b: set = set()
    for la, lb in pairs:
        if la.poem_id != lb.poem_id:
            raise ScopeError(
                f"link sets from different poems: {la.poem_id!r} vs {lb.poem_id!r}")
        pool_a.update((la.poem_id, i, j) for i, j in la.links)
        pool_b.update((lb.poem_id, i, j) for i, j in lb.links)
    if not pool_a and not pool_b:
        return 1.0
    return 2.0 * len(pool_a & pool_b) / (len(pool_a) + len(pool_b))


def pooled_f1(pairs: Sequence[tuple[LinkSet, LinkSet]]) -> float:
    """Public alias of the micro-averaged F1 over (a, b) link-set pairs."""
    return _pooled_f1(pairs)


@dataclass(frozen=True)
class IaaResult:
    language: str
    micro_f1: float
    macro_f1: float
    per_poem: dict[str, float]


def _pair_by_poem(ann1: Sequence[Annotation], ann2: Sequence[Annotation],
                  language: str) -> list[tuple[Annotation, Annotation]]:
    by_id_1 = {a.poem_id: a for a in ann1}
    by_id_2 = {a.poem_id: a for a in ann2}
    missing = sorted(set(by_id_1) ^ set(by_id_2))
    if missing:
        raise CoverageMismatchError(
            f"{language}: annotators do not cover the same poems; "
            f"missing on one side: {missing}", missing)
    return [(by_id_1[pid], by_id_2[pid]) for pid in sorted(by_id_1)]


def iaa_report(annotations: Mapping[str, tuple[Sequence[Annotation],
                                               Sequence[Annotation]]]
               ) -> dict[str, IaaResult]:
    """Per-language inter-annotator F1: pooled (micro) and per-poem."""
    report: dict[str, IaaResult] = {}
    for language, (ann1, ann2) in sorted(annotations.items()):
        paired = _pair_by_poem(ann1, ann2, language)
        link_pairs = [(chains_to_links(a), chains_to_links(b)) for a, b in paired]
        per_poem = {la.poem_id: f1_links(la, lb) for la, lb in link_pairs}
        micro = _pooled_f1(link_pairs)
        macro = float(np.mean(list(per_poem.values()))) if per_poem else 1.0
        report[language] = IaaResult(language, micro, macro, per_poem)
    return report


def write_iaa_csv(report: Mapping[str, IaaResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["language", "micro_f1", "macro_f1", "poems"])
        for language in sorted(report):
            r = report[language]
            writer.writerow([language, f"{r.micro_f1:.6f}", f"{r.macro_f1:.6f}",
                             len(r.per_poem)])


@dataclass(frozen=True)
class AgreementRow:
    """One consecutive rhyme pair for the agreement regression."""

    agreement: bool
    line_distance: int
    phon_distance: float
    corpus: str

    def __post_init__(self):
        if self.line_distance < 1:
            raise SchemaError(
                f"line_distance must be >= 1, got {self.line_distance}")
        if self.phon_distance < 0:
            raise SchemaError(
                f"phon_distance must be non-negative, got {self.phon_distance}")


@dataclass(frozen=True)
class AgreementDataset:
    rows: tuple[AgreementRow, ...]
    skipped: int


def consecutive_pairs_dataset(corpus: Corpus, ann1: Sequence[Annotation],
                              ann2: Sequence[Annotation],
                              transcriber: Transcriber) -> AgreementDataset:
    """Rows for every chain-consecutive pair marked by either annotator.

    Each pair appears once even when both annotators produce it; agreement
    means the pair is a link (full chain co-membership) for both. Pairs
    whose lines fail transcription are skipped with a logged warning.
    """
    paired = _pair_by_poem(ann1, ann2, corpus.language)
    rows: list[AgreementRow] = []
    skipped = 0
    for a1, a2 in paired:
        poem = corpus.poem(a1.poem_id)
        links1 = chains_to_links(a1).links
        links2 = chains_to_links(a2).links
        pairs: set[tuple[int, int]] = set()
        for annotation in (a1, a2):
            for chain in annotation.chains:
                pairs.update(zip(chain, chain[1:]))
        for i, j in sorted(pairs):
            if j >= poem.line_count:
                raise SchemaError(
                    f"{poem.id}: annotated line {j} outside poem of "
                    f"{poem.line_count} lines")
            try:
                seg_i = extract_rhyme_segment(transcriber.transcribe(poem.lines[i].text))
                seg_j = extract_rhyme_segment(transcriber.transcribe(poem.lines[j].text))
            except RuntimeFailure as exc:
                logger.warning("skipping pair (%d,%d) of %s: %s", i, j, poem.id, exc)
                skipped += 1
                continue
            rows.append(AgreementRow(
                agreement=(i, j) in links1 and (i, j) in links2,
                line_distance=j - i,
                phon_distance=segment_distance(seg_i, seg_j),
                corpus=corpus.language,
            ))
    return AgreementDataset(rows=tuple(rows), skipped=skipped)


AGREEMENT_CSV_HEADER = ["agreement", "line_distance", "phon_distance", "corpus"]


def write_agreement_csv(rows: Iterable[AgreementRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGREEMENT_CSV_HEADER)
        for row in rows:
            writer.writerow([int(row.agreement), row.line_distance,
                             f"{row.phon_distance:.6f}", row.corpus])


def read_agreement_csv(path: str | Path) -> list[AgreementRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != AGREEMENT_CSV_HEADER:
            raise SchemaError(f"{path}: expected header {AGREEMENT_CSV_HEADER}, "
                              f"got {header}")
        rows = []
        for record in reader:
            if not record:
                continue
            rows.append(AgreementRow(
                agreement=bool(int(record[0])),
                line_distance=int(record[1]),
                phon_distance=float(record[2]),
                corpus=record[3],
            ))
    return rows


@dataclass(frozen=True)
class SweepRow:
    language: str
    size: int
    sample: int
    f1_ann1: Optional[float]
    f1_ann2: Optional[float]
    failed: bool


@dataclass(frozen=True)
class SweepConfig:
    sizes: tuple[int, ...]
    samples_per_size: int
    master_seed: int
    tagger: TaggerConfig = TaggerConfig()


def _f1_vs_gold(tagged_by_poem: Mapping[str, LinkSet],
                gold: Sequence[Annotation]) -> float:
    pairs = []
    for annotation in gold:
        links = chains_to_links(annotation)
        pairs.append((tagged_by_poem[annotation.poem_id], links))
    return _pooled_f1(pairs)


def run_sweep(corpus: Corpus, gold1: Sequence[Annotation],
              gold2: Sequence[Annotation], transcriber: Transcriber,
              config: SweepConfig) -> list[SweepRow]:
    """Train one model per (size, sample index) and score it on the gold
    poems against both annotators. Deterministic under master_seed."""
    gold_ids = {a.poem_id for a in gold1} | {a.poem_id for a in gold2}
    gold_poems = [corpus.poem(pid) for pid in sorted(gold_ids)]
    rows: list[SweepRow] = []
    for size in config.sizes:
        if size > corpus.total_lines:
            logger.warning("size %d exceeds corpus (%d lines); skipped",
                           size, corpus.total_lines)
            continue
        for k in range(config.samples_per_size):
            seed = int(np.random.SeedSequence(
                [config.master_seed, size, k]).generate_state(1)[0])
            try:
                sample = sample_poems(corpus, size, seed)
                model = train_model(sample, transcriber, config.tagger)
                tagged = {
                    poem.id: LinkSet(
                        poem.id,
                        frozenset(
                            link
                            for chain in tag_poem(model, poem, transcriber).chains
                            for link in combinations(chain, 2)))
                    for poem in gold_poems
                }
                rows.append(SweepRow(
                    language=corpus.language, size=size, sample=k,
                    f1_ann1=_f1_vs_gold(tagged, gold1),
                    f1_ann2=_f1_vs_gold(tagged, gold2),
                    failed=False,
                ))
            except (RuntimeFailure, InsufficientDataError) as exc:
                logger.warning("sweep size=%d sample=%d failed: %s", size, k, exc)
                rows.append(SweepRow(
                    language=corpus.language, size=size, sample=k,
                    f1_ann1=None, f1_ann2=None, failed=True,
                ))
    return rows


SWEEP_CSV_HEADER = ["language", "size", "sample", "f1_ann1", "f1_ann2", "failed"]


def write_sweep_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_CSV_HEADER)
        for row in rows:
            writer.writerow([
                row.language, row.size, row.sample,
                "" if row.f1_ann1 is None else f"{row.f1_ann1:.6f}",
                "" if row.f1_ann2 is None else f"{row.f1_ann2:.6f}",
                int(row.failed),
            ])


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_CSV_HEADER:
            raise SchemaError(f"{path}: expected header {SWEEP_CSV_HEADER}, "
                              f"got {header}")
        rows = []
        for record in reader:
            if not record:
                continue
            rows.append(SweepRow(
                language=record[0], size=int(record[1]), sample=int(record[2]),
                f1_ann1=float(record[3]) if record[3] else None,
                f1_ann2=float(record[4]) if record[4] else None,
                failed=bool(int(record[5])),
            ))
    return rows
