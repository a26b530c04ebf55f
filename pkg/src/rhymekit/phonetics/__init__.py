from .features import FeatureTable, Phoneme, feature_distance, shipped_table
from .segments import (
    EMPTY_COMPONENT,
    Component,
    RhymeSegment,
    component_signature,
    decompose_components,
    extract_rhyme_segment,
    segment_distance,
)
from .transcription import (
    PRIMARY_STRESS,
    EspeakTranscriber,
    LookupTranscriber,
    Transcriber,
    Transcription,
    make_transcriber,
    tokenize_ipa,
)

__all__ = [
    "FeatureTable",
    "Phoneme",
    "feature_distance",
    "shipped_table",
    "EMPTY_COMPONENT",
    "Component",
    "RhymeSegment",
    "component_signature",
    "decompose_components",
    "extract_rhyme_segment",
    "segment_distance",
    "PRIMARY_STRESS",
    "EspeakTranscriber",
    "LookupTranscriber",
    "Transcriber",
    "Transcription",
    "make_transcriber",
    "tokenize_ipa",
]
