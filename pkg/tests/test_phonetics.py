import os
import stat

import numpy as np
import pytest

from rhymekit import (
    EMPTY_COMPONENT,
    EspeakTranscriber,
    LookupTranscriber,
    component_signature,
    decompose_components,
    extract_rhyme_segment,
    feature_distance,
    make_transcriber,
    segment_distance,
    shipped_table,
    tokenize_ipa,
)
from rhymekit.errors import (
    NoNucleusError,
    TranscriptionError,
    UnknownWordError,
)
from rhymekit.phonetics import RhymeSegment


@pytest.fixture(scope="module")
def table():
    return shipped_table()


def brute_force_distance(a, b, table, normalize=True):
    """Plain-python Levenshtein oracle, independent of the numpy DP."""

    def sub(x, y):
        diffs = sum(1 for u, v in zip(x.features, y.features) if u != v)
        return diffs / len(x.features) if normalize else float(diffs)

    indel = 1.0 if normalize else float(len(a[0].features) if a else len(b[0].features))
    m, n = len(a), len(b)
    prev = [j * 1.0 for j in range(n + 1)]
    for i in range(1, m + 1):
        cur = [i * 1.0] + [0.0] * n
        for j in range(1, n + 1):
            cur[j] = min(
                prev[j] + 1.0,
                cur[j - 1] + 1.0,
                prev[j - 1] + sub(a[i - 1], b[j - 1]),
            )
        prev = cur
    return prev[n]


class TestFeatureTable:
    def test_shipped_table_loads(self, table):
        assert table.n_features == 22
        assert len(table.symbols) > 300

    def test_values_ternary(self, table):
        for symbol in table.symbols:
            assert set(table.phoneme(symbol).features) <= {-1, 0, 1}

    def test_known_contrasts(self, table):
        # voicing contrast differs in exactly one feature
        for a, b in [("p", "b"), ("t", "d"), ("s", "z")]:
            pa, pb = table.phoneme(a), table.phoneme(b)
            assert sum(1 for x, y in zip(pa.features, pb.features) if x != y) == 1

    def test_nasal_stop_pair_differs_in_two(self, table):
        pa, pb = table.phoneme("m"), table.phoneme("b")
        assert sum(1 for x, y in zip(pa.features, pb.features) if x != y) == 2

    def test_vowels_are_syllabic(self, table):
        for v in "aeiou":
            assert table.phoneme(v).is_syllabic
        assert not table.phoneme("t").is_syllabic


class TestFeatureDistance:
    def test_identity(self, table):
        seg = [table.phoneme(s) for s in ("b", "a", "n")]
        assert feature_distance(seg, seg) == 0.0

    def test_single_substitution_value(self, table):
        # m vs b differ in 2 of 22 features
        a = [table.phoneme("a"), table.phoneme("m")]
        b = [table.phoneme("a"), table.phoneme("b")]
        np.testing.assert_allclose(feature_distance(a, b), 2 / 22)

    def test_indel_cost_one(self, table):
        a = [table.phoneme("a")]
        b = [table.phoneme("a"), table.phoneme("n")]
        np.testing.assert_allclose(feature_distance(a, b), 1.0)

    def test_empty_vs_segment(self, table):
        b = [table.phoneme(s) for s in ("a", "n", "o")]
        assert feature_distance([], b) == 3.0
        assert feature_distance([], []) == 0.0

    def test_matches_brute_force_oracle(self, table):
        rng = np.random.default_rng(20240517)
        symbols = sorted(table.symbols)
        for _ in range(300):
            a = [table.phoneme(symbols[i])
                 for i in rng.integers(len(symbols), size=rng.integers(0, 6))]
            b = [table.phoneme(symbols[i])
                 for i in rng.integers(len(symbols), size=rng.integers(0, 6))]
            np.testing.assert_allclose(
                feature_distance(a, b), brute_force_distance(a, b, table),
                atol=1e-12)

    def test_metric_axioms_sampled(self, table):
        rng = np.random.default_rng(7)
        symbols = sorted(table.symbols)

        def random_segment():
            return [table.phoneme(symbols[i])
                    for i in rng.integers(len(symbols), size=rng.integers(1, 5))]

        for _ in range(500):
            a, b, c = random_segment(), random_segment(), random_segment()
            dab = feature_distance(a, b)
            dba = feature_distance(b, a)
            dac = feature_distance(a, c)
            dcb = feature_distance(c, b)
            assert dab >= 0.0
            np.testing.assert_allclose(dab, dba, atol=1e-12)
            assert dab <= dac + dcb + 1e-12


class TestTokenizer:
    def test_greedy_longest_match(self, table):
        # tʃ must parse as one affricate, not t + ʃ
        t = tokenize_ipa("tʃa", table)
        assert [p.symbol for p in t.phonemes][0] == "tʃ"

    def test_primary_stress_marks_next_nucleus(self, table):
        t = tokenize_ipa("bˈano", table)
        assert t.stress_marks == {1}
        assert t.phonemes[1].symbol == "a"

    def test_secondary_stress_ignored(self, table):
        t = tokenize_ipa("ˌbaˈno", table)
        assert t.stress_marks == {3}

    def test_tie_bar_stripped(self, table):
        t = tokenize_ipa("t͡ʃa", table)
        assert [p.symbol for p in t.phonemes] == ["tʃ", "a"]

    def test_unknown_symbol_raises(self, table):
        with pytest.raises(TranscriptionError, match="feature table"):
            tokenize_ipa("b⁂a", table)

    def test_punctuation_skipped(self, table):
        t = tokenize_ipa("ba | no, za", table)
        assert len(t.phonemes) == 6


class TestLookupTranscriber:
    def test_tsv_round_trip(self, tmp_path):
        tsv = tmp_path / "lex.tsv"
        tsv.write_text("bano\tˈbano\nzu\tzu\n", encoding="utf-8")
        tr = make_transcriber(f"tsv:{tsv}", "eo")
        t = tr.transcribe("zu bano")
        assert [p.symbol for p in t.phonemes] == ["z", "u", "b", "a", "n", "o"]
        assert t.stress_marks == {3}

    def test_unknown_word(self):
        tr = LookupTranscriber({"bano": "ˈbano"}, "eo")
        with pytest.raises(UnknownWordError, match="missing"):
            tr.transcribe("missing bano")

    def test_cache_returns_same_object(self):
        tr = LookupTranscriber({"bano": "ˈbano"}, "eo")
        assert tr.transcribe("bano") is tr.transcribe("bano")

    def test_casefolded_lookup(self):
        tr = LookupTranscriber({"Bano": "ˈbano"}, "eo")
        assert len(tr.transcribe("BANO").phonemes) == 4

    def test_malformed_tsv_rejected(self, tmp_path):
        tsv = tmp_path / "lex.tsv"
        tsv.write_text("just-one-column\n", encoding="utf-8")
        with pytest.raises(TranscriptionError, match="TAB"):
            LookupTranscriber(tsv, "eo")


class TestEspeakTranscriber:
    @pytest.fixture
    def stub(self, tmp_path):
        exe = tmp_path / "fake-espeak"
        exe.write_text("#!/bin/sh\nshift 5\necho \"bˈano\"\n", encoding="utf-8")
        exe.chmod(exe.stat().st_mode | stat.S_IEXEC)
        return str(exe)

    def test_stub_process_output(self, stub):
        tr = EspeakTranscriber("eo", executable=stub)
        t = tr.transcribe("whatever line")
        assert [p.symbol for p in t.phonemes] == ["b", "a", "n", "o"]
        assert t.stress_marks == {1}

    def test_missing_executable(self):
        tr = EspeakTranscriber("eo", executable="/nonexistent/espeak")
        with pytest.raises(TranscriptionError, match="not found"):
            tr.transcribe("line")

    def test_failing_process(self, tmp_path):
        exe = tmp_path / "broken"
        exe.write_text("#!/bin/sh\necho boom >&2\nexit 3\n", encoding="utf-8")
        exe.chmod(exe.stat().st_mode | stat.S_IEXEC)
        tr = EspeakTranscriber("eo", executable=str(exe))
        with pytest.raises(TranscriptionError, match="boom"):
            tr.transcribe("line")

    @pytest.mark.skipif(not EspeakTranscriber.available(),
                        reason="espeak-ng not installed")
    def test_live_binary(self):
        tr = EspeakTranscriber("en")
        assert tr.transcribe("hello world").phonemes

    def test_spec_strings(self, stub):
        assert isinstance(make_transcriber("espeak", "en"), EspeakTranscriber)
        tr = make_transcriber(f"espeak:{stub}", "eo")
        assert tr.executable == stub
        with pytest.raises(TranscriptionError, match="spec"):
            make_transcriber("magic:", "en")


class TestRhymeSegment:
    def test_from_last_stress(self, table):
        t = tokenize_ipa("zu mi bˈano", table)
        seg = extract_rhyme_segment(t)
        assert [p.symbol for p in seg.phonemes] == ["a", "n", "o"]

    def test_fallback_last_vowel(self, table):
        t = tokenize_ipa("bano", table)  # no stress mark anywhere
        seg = extract_rhyme_segment(t)
        assert [p.symbol for p in seg.phonemes] == ["o"]

    def test_no_nucleus_raises(self, table):
        t = tokenize_ipa("pst", table)
        with pytest.raises(NoNucleusError):
            extract_rhyme_segment(t)

    def test_components_alternate(self, table):
        t = tokenize_ipa("bˈarno", table)
        seg = extract_rhyme_segment(t)
        comps = decompose_components(seg)
        assert [c.kind for c in comps] == ["V", "C", "V"]
        assert component_signature(seg) == ("a", "rn", "o")

    def test_segment_distance_of_perfect_rhyme(self, table):
        a = extract_rhyme_segment(tokenize_ipa("bˈano", table))
        b = extract_rhyme_segment(tokenize_ipa("kˈano", table))
        assert segment_distance(a, b) == 0.0

    def test_empty_component_constant(self):
        assert EMPTY_COMPONENT == "∅"

    def test_segment_distance_accepts_raw_lists(self, table):
        a = [table.phoneme("a"), table.phoneme("n")]
        assert segment_distance(a, a) == 0.0
        assert segment_distance(RhymeSegment(tuple(a)), a) == 0.0
