"""Corpus-driven toolkit for unsupervised rhyme recognition in poetry.

Pipeline: load a corpus, transcribe line endings to IPA, seed rhyme
candidates by T-score collocation, learn per-position sound-pair
probabilities, tag rhyme chains, and evaluate against human annotations
with link F1, a hierarchical agreement regression, and an LLM one-shot
benchmark.
"""

from . import errors
from .corpus import (
    Corpus,
    Line,
    Poem,
    Sample,
    corpus_from_dict,
    corpus_to_dict,
    ingest_text_dir,
    line_final_word,
    load_corpus,
    sample_poems,
    save_corpus,
)
from .evaluation import (
    AgreementDataset,
    AgreementRow,
    Annotation,
    IaaResult,
    LinkSet,
    SweepConfig,
    SweepRow,
    annotation_from_dict,
    annotation_to_dict,
    chains_to_links,
    consecutive_pairs_dataset,
    f1_links,
    iaa_report,
    load_annotation,
    load_annotation_dir,
    pooled_f1,
    read_agreement_csv,
    read_sweep_csv,
    run_sweep,
    save_annotation,
    write_agreement_csv,
    write_iaa_csv,
    write_sweep_csv,
)
from .llm import (
    BenchmarkReport,
    ProviderConfig,
    ResponseArchive,
    RestProvider,
    RhymeGroups,
    build_prompt,
    map_groups_to_lines,
    parse_response,
    provider_config_from_file,
    run_benchmark,
    write_benchmark_csv,
)
from .phonetics import (
    EMPTY_COMPONENT,
    EspeakTranscriber,
    FeatureTable,
    LookupTranscriber,
    Phoneme,
    RhymeSegment,
    Transcriber,
    Transcription,
    component_signature,
    decompose_components,
    extract_rhyme_segment,
    feature_distance,
    make_transcriber,
    segment_distance,
    shipped_table,
    tokenize_ipa,
)
from .regression import (
    LogitModelConfig,
    ParameterSummary,
    PosteriorSummary,
    fit_hierarchical_logit,
    hdi,
    read_summary_csv,
    write_summary_csv,
)
from .service import AnnotationStore, build_server
from .synthetic import (
    PlantedCorpus,
    SuffixClass,
    make_planted_corpus,
    simulate_agreement_rows,
)
from .tagger import (
    CollocationStats,
    RhymeModel,
    TaggedPoem,
    TaggerConfig,
    collect_collocations,
    estimate_model,
    load_model,
    save_model,
    score_pair,
    seed_training_pairs,
    t_score,
    tag_poem,
    train_model,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Corpus", "Line", "Poem", "Sample",
    "corpus_from_dict", "corpus_to_dict", "ingest_text_dir",
    "line_final_word", "load_corpus", "sample_poems", "save_corpus",
    "AgreementDataset", "AgreementRow", "Annotation", "IaaResult", "LinkSet",
    "SweepConfig", "SweepRow", "annotation_from_dict", "annotation_to_dict",
    "chains_to_links", "consecutive_pairs_dataset",
    "f1_links", "iaa_report", "load_annotation", "load_annotation_dir",
    "pooled_f1", "read_agreement_csv", "read_sweep_csv", "run_sweep",
    "save_annotation", "write_agreement_csv", "write_iaa_csv",
    "write_sweep_csv",
    "BenchmarkReport", "ProviderConfig", "ResponseArchive", "RestProvider",
    "RhymeGroups", "build_prompt", "map_groups_to_lines", "parse_response",
    "provider_config_from_file", "run_benchmark", "write_benchmark_csv",
    "EMPTY_COMPONENT", "EspeakTranscriber", "FeatureTable",
    "LookupTranscriber", "Phoneme", "RhymeSegment", "Transcriber",
    "Transcription", "component_signature", "decompose_components",
    "extract_rhyme_segment", "feature_distance", "make_transcriber",
    "segment_distance", "shipped_table", "tokenize_ipa",
    "LogitModelConfig", "ParameterSummary", "PosteriorSummary",
    "fit_hierarchical_logit", "hdi", "read_summary_csv", "write_summary_csv",
    "AnnotationStore", "build_server",
    "PlantedCorpus", "SuffixClass", "make_planted_corpus",
    "simulate_agreement_rows",
    "CollocationStats", "RhymeModel", "TaggedPoem", "TaggerConfig",
    "collect_collocations", "estimate_model", "load_model", "save_model",
    "score_pair", "seed_training_pairs", "t_score", "tag_poem", "train_model",
    "__version__",
]
