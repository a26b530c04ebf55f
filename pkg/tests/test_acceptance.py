"""Acceptance gate: one test per shipped guarantee, named for its criterion.

Each test prints an explicit PASS line (visible with -s); under plain
``pytest -v`` the per-test PASSED/FAILED line is the criterion verdict.
Slow generative checks share module-scoped fixtures.
"""
import json
import math
import statistics
import time
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

from rhymekit import (
    Annotation,
    LogitModelConfig,
    SweepConfig,
    build_prompt,
    chains_to_links,
    f1_links,
    fit_hierarchical_logit,
    hdi,
    line_final_word,
    make_planted_corpus,
    map_groups_to_lines,
    parse_response,
    run_benchmark,
    run_sweep,
    save_annotation,
    save_corpus,
    segment_distance,
    shipped_table,
    simulate_agreement_rows,
    t_score,
)
from rhymekit.cli import main as cli_main
from rhymekit.llm import EXAMPLE_OUTPUT

SWEEP_SIZES = (1000, 2000, 4000, 8000)


def random_chains(n_lines, rng):
    order = rng.permutation(n_lines)
    chains, cursor = [], 0
    while cursor < n_lines:
        take = int(rng.integers(1, 5))
        group = sorted(int(i) for i in order[cursor:cursor + take])
        cursor += take
        if len(group) >= 2:
            chains.append(tuple(group))
    return tuple(sorted(chains))


def oracle_f1(chains_a, chains_b):
    def links(chains):
        out = set()
        for chain in chains:
            out.update(frozenset(p) for p in combinations(chain, 2))
        return out

    la, lb = links(chains_a), links(chains_b)
    if not la and not lb:
        return 1.0
    if not la or not lb:
        return 0.0
    tp = len(la & lb)
    precision = tp / len(lb)
    recall = tp / len(la)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def brute_force_hdi(samples, mass):
    ordered = np.sort(np.asarray(samples, dtype=float))
    n = ordered.size
    k = max(1, math.ceil(mass * n - 1e-9))
    widths = ordered[k - 1:] - ordered[: n - k + 1]
    best = int(np.argmin(widths))
    return float(ordered[best]), float(ordered[best + k - 1])


def _pass(t0, message):
    print(f"[{time.perf_counter() - t0:.1f}s] PASS {message}")


def test_link_expansion_octave_and_sixteen_line_scheme():
    t0 = time.perf_counter()
    octave = Annotation(annotator_id="a", poem_id="p",
                        chains=((0, 3, 4, 7), (1, 2, 5, 6)))
    assert len(chains_to_links(octave).links) == 12

    alternating = Annotation(
        annotator_id="a", poem_id="p",
        chains=tuple((base, base + 2) for base in
                     (0, 1, 4, 5, 8, 9, 12, 13)))
    positives = len(chains_to_links(alternating).links)
    total = len(list(combinations(range(16), 2)))
    assert positives == 8
    assert total == 120
    assert total - positives == 112
    _pass(t0, f"link expansion: octave 12 links; 16-line scheme 8/112")


def test_f1_matches_set_intersection_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260814)
    worst = 0.0
    for _ in range(1000):
        n_lines = int(rng.integers(2, 21))
        a = Annotation(annotator_id="a", poem_id="p",
                       chains=random_chains(n_lines, rng))
        b = Annotation(annotator_id="b", poem_id="p",
                       chains=random_chains(n_lines, rng))
        got = f1_links(chains_to_links(a), chains_to_links(b))
        worst = max(worst, abs(got - oracle_f1(a.chains, b.chains)))
    assert worst <= 1e-12
    _pass(t0, f"f1 oracle: 1000 pairs, max |diff| {worst:.2e} <= 1e-12")


def test_t_score_matches_direct_formula():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(10000):
        o = int(rng.integers(1, 500))
        fx = int(rng.integers(1, 2000))
        fy = int(rng.integers(1, 2000))
        n = int(rng.integers(1, 100000))
        expected = (o - fx * fy / n) / math.sqrt(o)
        worst = max(worst, abs(t_score(o, fx, fy, n) - expected))
    assert worst <= 1e-9
    _pass(t0, f"t-score: 10000 tuples, max |diff| {worst:.2e} <= 1e-9")


def test_segment_distance_metric_axioms():
    t0 = time.perf_counter()
    table = shipped_table()
    phonemes = [table.phoneme(symbol) for symbol in table.symbols]
    rng = np.random.default_rng(4242)

    def draw():
        length = int(rng.integers(1, 5))
        return tuple(phonemes[i]
                     for i in rng.integers(0, len(phonemes), size=length))

    for _ in range(10000):
        a, b, c = draw(), draw(), draw()
        d_ab = segment_distance(a, b)
        assert d_ab >= 0.0
        assert segment_distance(a, a) == 0.0
        assert d_ab == segment_distance(b, a)
        assert segment_distance(a, c) <= d_ab + segment_distance(b, c) + 1e-12
    _pass(t0, f"metric axioms: 10000 triples from the shipped table")


@pytest.fixture(scope="module")
def recovery_sweeps():
    def sweep(n_classes):
        t0 = time.perf_counter()
        planted = make_planted_corpus(10000, seed=11, n_classes=n_classes)
        gold = planted.truth_annotations()
        rows = run_sweep(
            planted.corpus, gold, gold, planted.transcriber(),
            SweepConfig(sizes=SWEEP_SIZES, samples_per_size=10, master_seed=0))
        assert not any(r.failed for r in rows)
        print(f"[sweep n_classes={n_classes}: "
              f"{time.perf_counter() - t0:.1f}s]")
        return {size: statistics.median(
            r.f1_ann1 for r in rows if r.size == size) for size in SWEEP_SIZES}

    return {"small": sweep(10), "large": sweep(64)}


def first_size_reaching(medians, threshold):
    for size in SWEEP_SIZES:
        if medians[size] >= threshold:
            return size
    return None


def test_planted_recovery_f1_and_size_curve(recovery_sweeps):
    t0 = time.perf_counter()
    medians = recovery_sweeps["small"]
    assert medians[8000] >= 0.95
    ordered = [medians[size] for size in SWEEP_SIZES]
    assert all(lo <= hi for lo, hi in zip(ordered, ordered[1:]))
    shown = ", ".join(f"{size}: {medians[size]:.3f}" for size in SWEEP_SIZES)
    _pass(t0, f"planted recovery: median F1 non-decreasing ({shown}), "
          f"8000-line median >= 0.95")


def test_larger_suffix_inventory_needs_more_lines(recovery_sweeps):
    t0 = time.perf_counter()
    small = first_size_reaching(recovery_sweeps["small"], 0.9)
    large = first_size_reaching(recovery_sweeps["large"], 0.9)
    assert small is not None
    assert large is None or small < large
    _pass(t0, f"inflection sensitivity: F1 0.9 at {small} lines with 10 "
          f"suffix classes vs {large or '>8000'} with 64")


def test_regression_recovers_generating_coefficients():
    t0 = time.perf_counter()
    rows = simulate_agreement_rows(5000, seed=6)
    truth = {"beta_phon": -0.5, "beta_line": -0.8,
             "alpha_aa": 2.0, "alpha_bb": 2.25, "alpha_cc": 2.5,
             "alpha_dd": 2.75, "alpha_ee": 3.0, "alpha_ff": 3.25,
             "alpha_gg": 3.5}
    summary = fit_hierarchical_logit(
        rows, LogitModelConfig(chains=2, draws=2000, warmup=800, seed=3))
    bp = summary.parameters["beta_phon"]
    bl = summary.parameters["beta_line"]
    assert abs(bp.mean - truth["beta_phon"]) <= 0.15
    assert abs(bl.mean - truth["beta_line"]) <= 0.15
    assert bp.hdi_high < 0.0
    assert bl.hdi_high < 0.0
    assert abs(bl.mean) > abs(bp.mean)
    worst_rhat = max(p.rhat for p in summary.parameters.values())
    assert worst_rhat <= 1.05
    for name, value in truth.items():
        if name.startswith("alpha_"):
            p = summary.parameters[name]
            assert abs(p.mean - value) <= 3.0 * p.sd
    _pass(t0, f"regression recovery: means {bp.mean:+.3f}/{bl.mean:+.3f} "
          f"within 0.15 of -0.5/-0.8, HDIs < 0, max rhat {worst_rhat:.3f}")


def test_hdi_matches_exhaustive_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(777)
    for case in range(1000):
        n = int(rng.integers(5, 400))
        kind = case % 3
        if kind == 0:
            samples = rng.normal(size=n)
        elif kind == 1:
            samples = rng.exponential(size=n)
        else:
            samples = rng.integers(0, 6, size=n).astype(float)
        mass = float(rng.uniform(0.5, 0.99))
        assert hdi(samples, mass) == brute_force_hdi(samples, mass)
    _pass(t0, f"hdi minimality: 1000 vectors match the exhaustive oracle")


class _EchoGoldProvider:
    """Answers each prompt with the gold chains rendered as word groups."""

    model_name = "echo-gold"

    def __init__(self, planted):
        self.responses = {}
        for annotation in planted.truth_annotations():
            poem = planted.corpus.poem(annotation.poem_id)
            groups = [[line_final_word(poem.lines[i]) for i in chain]
                      for chain in annotation.chains]
            text = "\n".join(line.text for line in poem.lines)
            self.responses[text] = json.dumps({"rhymes": groups})

    def complete(self, user_message, assistant_example):
        poem_text = user_message.rsplit("Text:\n", 1)[1]
        return self.responses[poem_text]


def test_llm_harness_offline(limerick_poem):
    t0 = time.perf_counter()
    planted = make_planted_corpus(40, seed=2)
    gold = planted.truth_annotations("gold")
    report = run_benchmark(_EchoGoldProvider(planted), planted.corpus.poems,
                           [gold], language="eo", concurrency=1)
    assert report.pooled == {"gold": 1.0}
    assert report.failed_poems == ()

    groups = parse_response(EXAMPLE_OUTPUT)
    assert map_groups_to_lines(groups, limerick_poem) == ((0, 1, 4), (2, 3))

    user, assistant = build_prompt(limerick_poem)
    golden = Path(__file__).parent / "data"
    assert user == (golden / "prompt_user_limerick.txt").read_text("utf-8")
    assert assistant == (golden / "prompt_assistant_example.txt").read_text(
        "utf-8")
    _pass(t0, f"llm offline: gold echo pools to F1 1.0, worked example maps "
          "to [[0,1,4],[2,3]], prompt matches golden files")


def test_train_and_sweep_are_byte_deterministic(tmp_path):
    t0 = time.perf_counter()
    planted = make_planted_corpus(1200, seed=5)
    corpus_path = tmp_path / "corpus.json"
    save_corpus(planted.corpus, corpus_path)
    lexicon_path = tmp_path / "lexicon.tsv"
    planted.save_lexicon(lexicon_path)
    gold_dir = tmp_path / "gold"
    gold_dir.mkdir()
    for annotation in planted.truth_annotations("gold"):
        save_annotation(annotation, gold_dir / f"{annotation.poem_id}.json")

    outputs = []
    for run in ("one", "two"):
        model_out = tmp_path / f"model-{run}.json"
        assert cli_main(["train", "--corpus", str(corpus_path),
                         "--transcriber", f"tsv:{lexicon_path}",
                         "--lines", "800", "--seed", "2",
                         "--out", str(model_out)]) == 0
        sweep_out = tmp_path / f"sweep-{run}.csv"
        assert cli_main(["sweep", "--corpus", str(corpus_path),
                         "--transcriber", f"tsv:{lexicon_path}",
                         "--ann-dir", str(gold_dir),
                         "--ann-dir", str(gold_dir),
                         "--sizes", "400,800", "--samples", "2", "--seed", "0",
                         "--out", str(sweep_out)]) == 0
        outputs.append((model_out.read_bytes(), sweep_out.read_bytes()))
    assert outputs[0] == outputs[1]
    _pass(t0, f"determinism: train and sweep outputs byte-identical "
          "across two runs")
