"""Unsupervised rhyme recognition.

Rhyme pairs recur in a large enough corpus, so line-final word pairs that
co-occur more often than chance (high T-score) make a training set. From
those seed pairs the tagger learns, per segment position, how probable it
is that two sound components belong to a rhyming pair, re-tags the
candidate pairs with the learned tables, and iterates to a fixpoint.
Accepted line pairs are merged into chains with union-find.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import Poem, Sample, line_final_word
from .errors import (
    CannotTrainError,
    RuntimeFailure,
    SchemaError,
    UndefinedScoreError,
)
from .phonetics import (
    EMPTY_COMPONENT,
    RhymeSegment,
    Transcriber,
    component_signature,
    extract_rhyme_segment,
)

MODEL_FILE_VERSION = 1

TokenPair = tuple[str, str]
ComponentPair = tuple[str, str]


@dataclass
class CollocationStats:
    """Counts over line-final token pairs within a window."""

    pair_counts: Counter
    token_counts: Counter
    n_pairs: int


@dataclass(frozen=True)
class TaggerConfig:
    window: int = 7
    tau: float = 0.8
    alpha: float = 1.0
    t_min: float = 2.0
    min_count: int = 2
    max_iter: int = 20
    min_change: float = 0.01  # convergence: tagged set changes < 1%

    def __post_init__(self):
        if self.window < 1:
            raise SchemaError(f"window must be >= 1, got {self.window}")
        if not 0.0 < self.tau < 1.0:
            raise SchemaError(f"tau must be in (0,1), got {self.tau}")
        if self.alpha <= 0:
            raise SchemaError(f"alpha must be positive, got {self.alpha}")
        if self.max_iter < 1:
            raise SchemaError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class RhymeModel:
    """Learned per-position component-pair probabilities plus config."""

    language: str
    window: int
    tau: float
    alpha: float
    t_min: float
    min_count: int
    iterations_run: int
    training_lines: int
    tables: dict[int, dict[ComponentPair, float]]

    def probability(self, position: int, pair: ComponentPair) -> float:
        # Unseen component pairs fall back to the all-smoothed prior a/2a.
        table = self.tables.get(position)
        if table is None:
            return 0.5
        return table.get(pair, 0.5)


@dataclass(frozen=True)
class TaggedPoem:
    poem_id: str
    chains: tuple[tuple[int, ...], ...]
    pair_scores: dict[tuple[int, int], float]


class UnionFind:
    """Union-find over dense integer indices, path halving + size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def groups(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for i in range(len(self.parent)):
            out[self.find(i)].append(i)
        return out


def _token_pair(a: str, b: str) -> TokenPair:
    return (a, b) if a <= b else (b, a)


def _component_pair(a: str, b: str) -> ComponentPair:
    return (a, b) if a <= b else (b, a)


def collect_collocations(sample: Sample | Iterable[Poem], window: int) -> CollocationStats:
    """Count unordered line-final token pairs at distance <= window.

    Pairs never cross poem boundaries; lines without a final word are
    skipped. token_counts tallies token occurrences inside the counted
    pairs, so all T-score inputs live in one sample space.
    """
    if window < 1:
        raise SchemaError(f"window must be >= 1, got {window}")
    poems = sample.poems if isinstance(sample, Sample) else sample
    pair_counts: Counter = Counter()
    token_counts: Counter = Counter()
    n_pairs = 0
    for poem in poems:
        tokens = [line_final_word(line) for line in poem.lines]
        n = len(tokens)
        for i in range(n):
            if tokens[i] is None:
                continue
            for j in range(i + 1, min(i + window, n - 1) + 1):
                if tokens[j] is None:
                    continue
                pair_counts[_token_pair(tokens[i], tokens[j])] += 1
                token_counts[tokens[i]] += 1
                token_counts[tokens[j]] += 1
                n_pairs += 1
    return CollocationStats(pair_counts, token_counts, n_pairs)


def t_score(o: float, fx: float, fy: float, n: float) -> float:
    """T-score of an observed pair count against its expectation.

    (O - E) / sqrt(O) with E = fx * fy / n.
    """
    if o <= 0:
        raise UndefinedScoreError(f"t_score undefined for observed count {o}")
    if n <= 0:
        raise UndefinedScoreError(f"t_score undefined for total count {n}")
    return (o - fx * fy / n) / math.sqrt(o)


def seed_training_pairs(stats: CollocationStats, t_min: float,
                        min_count: int) -> set[TokenPair]:
    """Token pairs frequent and associated enough to seed training."""
    seeds: set[TokenPair] = set()
    for pair, count in stats.pair_counts.items():
        if count < min_count:
            continue
        score = t_score(count, stats.token_counts[pair[0]],
                        stats.token_counts[pair[1]], stats.n_pairs)
        if score >= t_min:
            seeds.add(pair)
    return seeds


@dataclass
class _Candidate:
    """A within-window line pair, deduplicated by component signature."""

    signature: tuple[ComponentPair, ...]
    count: int = 0
    seed_count: int = 0  # occurrences whose token pair is in the seed set


def _aligned_pairs(sig_a: Sequence[str], sig_b: Sequence[str]) -> tuple[ComponentPair, ...]:
    length = max(len(sig_a), len(sig_b))
    out = []
    for p in range(length):
        ca = sig_a[p] if p < len(sig_a) else EMPTY_COMPONENT
        cb = sig_b[p] if p < len(sig_b) else EMPTY_COMPONENT
        out.append(_component_pair(ca, cb))
    return tuple(out)


def _line_signatures(poem: Poem, transcriber: Transcriber
                     ) -> list[tuple[Optional[str], Optional[tuple[str, ...]]]]:
    """Per line: (final token, component signature). None entries mean the
    line cannot participate (no final word / no nucleus)."""
    out = []
    for line in poem.lines:
        token = line_final_word(line)
        if token is None:
            out.append((None, None))
            continue
        try:
            transcription = transcriber.transcribe(line.text)
            segment = extract_rhyme_segment(transcription)
        except RuntimeFailure as exc:
            # keep the exception class; tack on which line failed
            exc.args = (f"{exc} (poem {poem.id!r}, line {line.index_in_poem})",)
            raise
        out.append((token, component_signature(segment)))
    return out


def _collect_candidates(poems: Iterable[Poem], transcriber: Transcriber,
                        window: int, seed_pairs: set[TokenPair]
                        ) -> tuple[dict, int]:
    """Aggregate window pairs by component signature; returns (candidates,
    total line count)."""
    candidates: dict[tuple[ComponentPair, ...], _Candidate] = {}
    total_lines = 0
    for poem in poems:
        total_lines += len(poem.lines)
        sigs = _line_signatures(poem, transcriber)
        n = len(sigs)
        for i in range(n):
            tok_i, sig_i = sigs[i]
            if sig_i is None:
                continue
            for j in range(i + 1, min(i + window, n - 1) + 1):
                tok_j, sig_j = sigs[j]
                if sig_j is None:
                    continue
                key = _aligned_pairs(sig_i, sig_j)
                cand = candidates.get(key)
                if cand is None:
                    cand = candidates[key] = _Candidate(key)
                cand.count += 1
                if _token_pair(tok_i, tok_j) in seed_pairs:
                    cand.seed_count += 1
    return candidates, total_lines


def _estimate_tables(candidates: dict, rhymed: dict, alpha: float
                     ) -> dict[int, dict[ComponentPair, float]]:
    """P_p(c) = (rhymed occurrences + alpha) / (all occurrences + 2*alpha)."""
    totals: dict[int, Counter] = defaultdict(Counter)
    positives: dict[int, Counter] = defaultdict(Counter)
    for key, cand in candidates.items():
        r = rhymed.get(key, 0)
        for p, pair in enumerate(key):
            totals[p][pair] += cand.count
            if r:
                positives[p][pair] += r
    tables: dict[int, dict[ComponentPair, float]] = {}
    for p, total_counter in totals.items():
        table = {}
        for pair, total in total_counter.items():
            table[pair] = (positives[p][pair] + alpha) / (total + 2.0 * alpha)
        tables[p] = table
    return tables


def _score_signature(tables: dict, key: tuple[ComponentPair, ...]) -> float:
    log_sum = 0.0
    for p, pair in enumerate(key):
        prob = tables.get(p, {}).get(pair, 0.5)
        if prob <= 0.0:
            return 0.0
        log_sum += math.log(prob)
    return math.exp(log_sum / len(key)) if key else 0.0


def estimate_model(seed_pairs: set[TokenPair], sample: Sample,
                   transcriber: Transcriber,
                   config: TaggerConfig = TaggerConfig()) -> RhymeModel:
    """Learn component-pair probability tables from seed token pairs.

    Iterates estimation and re-tagging until the tagged candidate set
    changes by less than ``config.min_change`` or ``config.max_iter`` is
    reached; returns the frozen model.
    """
    if not seed_pairs:
        raise CannotTrainError("no seed pairs to train from")
    candidates, total_lines = _collect_candidates(
        sample.poems, transcriber, config.window, seed_pairs)
    if not candidates:
        raise CannotTrainError("no candidate line pairs in sample")

    # Round 0: the seed token pairs define which occurrences count as rhymed.
    rhymed: dict[tuple, int] = {
        key: cand.seed_count for key, cand in candidates.items() if cand.seed_count
    }
    tables: dict[int, dict[ComponentPair, float]] = {}
    iterations = 0
    for _ in range(config.max_iter):
        tables = _estimate_tables(candidates, rhymed, config.alpha)
        iterations += 1
        new_rhymed: dict[tuple, int] = {}
        for key, cand in candidates.items():
            if _score_signature(tables, key) >= config.tau:
                new_rhymed[key] = cand.count
        changed = 0
        for key in set(rhymed) | set(new_rhymed):
            before = candidates[key].count if key in rhymed else 0
            after = new_rhymed.get(key, 0)
            if (before > 0) != (after > 0):
                changed += candidates[key].count
        previous_total = sum(
            candidates[key].count for key in rhymed) or 1
        rhymed = new_rhymed
        if changed / previous_total < config.min_change:
            break

    return RhymeModel(
        language=sample.poems[0].language if sample.poems else "",
        window=config.window,
        tau=config.tau,
        alpha=config.alpha,
        t_min=config.t_min,
        min_count=config.min_count,
        iterations_run=iterations,
        training_lines=total_lines,
        tables=tables,
    )


def score_pair(model: RhymeModel, a: RhymeSegment, b: RhymeSegment) -> float:
    """Geometric mean of the learned per-position probabilities."""
    key = _aligned_pairs(component_signature(a), component_signature(b))
    log_sum = 0.0
    for p, pair in enumerate(key):
        prob = model.probability(p, pair)
        if prob <= 0.0:
            return 0.0
        log_sum += math.log(prob)
    return math.exp(log_sum / len(key)) if key else 0.0


def tag_poem(model: RhymeModel, poem: Poem, transcriber: Transcriber) -> TaggedPoem:
    """Score all line pairs within the window and chain the accepted ones."""
    sigs = _line_signatures(poem, transcriber)
    n = len(sigs)
    scores: dict[tuple[int, int], float] = {}
    uf = UnionFind(n)
    for i in range(n):
        if sigs[i][1] is None:
            continue
        for j in range(i + 1, min(i + model.window, n - 1) + 1):
            if sigs[j][1] is None:
                continue
            key = _aligned_pairs(sigs[i][1], sigs[j][1])
            score = _score_signature(model.tables, key)
            scores[(i, j)] = score
            if score >= model.tau:
                uf.union(i, j)
    chains = tuple(
        tuple(sorted(group))
        for _, group in sorted(uf.groups().items(), key=lambda kv: min(kv[1]))
        if len(group) >= 2
    )
    return TaggedPoem(poem_id=poem.id, chains=chains, pair_scores=scores)


def train_model(sample: Sample, transcriber: Transcriber,
                config: TaggerConfig = TaggerConfig()) -> RhymeModel:
    """Full pipeline: collocations -> T-score seeds -> iterative estimation."""
    stats = collect_collocations(sample, config.window)
    seeds = seed_training_pairs(stats, config.t_min, config.min_count)
    if not seeds:
        raise CannotTrainError(
            f"no token pair passed t >= {config.t_min} with count >= {config.min_count}")
    return estimate_model(seeds, sample, transcriber, config)


def model_to_dict(model: RhymeModel) -> dict:
    tables = {
        str(pos): {
            f"{pair[0]}|{pair[1]}": prob for pair, prob in sorted(table.items())
        }
        for pos, table in sorted(model.tables.items())
    }
    return {
        "version": MODEL_FILE_VERSION,
        "language": model.language,
        "window": model.window,
        "tau": model.tau,
        "alpha": model.alpha,
        "t_min": model.t_min,
        "min_count": model.min_count,
        "iterations_run": model.iterations_run,
        "training_lines": model.training_lines,
        "tables": tables,
    }


def model_from_dict(data: dict) -> RhymeModel:
    if data.get("version") != MODEL_FILE_VERSION:
        raise SchemaError(f"unsupported model file version: {data.get('version')!r}")
    tables: dict[int, dict[ComponentPair, float]] = {}
    for pos, table in data["tables"].items():
        parsed = {}
        for key, prob in table.items():
            a, sep, b = key.partition("|")
            if not sep:
                raise SchemaError(f"bad component pair key: {key!r}")
            parsed[(a, b)] = float(prob)
        tables[int(pos)] = parsed
    return RhymeModel(
        language=data["language"],
        window=int(data["window"]),
        tau=float(data["tau"]),
        alpha=float(data["alpha"]),
        t_min=float(data["t_min"]),
        min_count=int(data["min_count"]),
        iterations_run=int(data["iterations_run"]),
        training_lines=int(data["training_lines"]),
        tables=tables,
    )


def save_model(model: RhymeModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), ensure_ascii=False, sort_keys=True,
                   indent=1) + "\n",
        encoding="utf-8",
    )


def load_model(path: str | Path) -> RhymeModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError(f"model file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON: {path}: {exc}")
    return model_from_dict(data)
