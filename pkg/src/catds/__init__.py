"""Clip-wise acoustic token distribution similarity (CATDS) toolkit.

Pipeline: SSL feature frames are quantized against a k-means codebook,
run-collapsed into pseudo-phone symbols, tokenized by a merge-based subword
model, and summarized as token frequency vectors. Donor clips are ranked by
length-debiased cosine similarity to a target-language reference, and
subset manifests are emitted under several selection strategies.
"""

from .corpusio import (
    ClipEntry,
    ClipManifest,
    OversizedSampleWarning,
    ScoreRecord,
    assemble_clips,
    read_feature_file,
    read_frequency_vector,
    read_manifest,
    read_score_table,
    read_token_file,
    write_feature_file,
    write_frequency_vector,
    write_manifest,
    write_score_table,
    write_token_file,
)
from .quantizer import FrameQuantizer, assign, load_codebook, save_codebook, subsample_frames
from .scorer import (
    EmptyClipWarning,
    LengthScaler,
    ScoreResult,
    build_frequency_vector,
    catds_score,
    cosine_similarity,
    score_corpus,
)
from .selector import (
    GridConfig,
    LidRecord,
    UnscoredClipWarning,
    file_sha256,
    materialize_grid,
    plan_grid,
    read_lid_table,
    select_by_catds,
    select_by_lid,
    select_random,
    subset_sizes,
    write_lid_table,
)
from .statsreport import (
    PairedResults,
    Summary,
    WilcoxonResult,
    build_report,
    export_scatter,
    pearson_r,
    read_results_table,
    summarize,
    wilcoxon_signed_rank,
)
from .subword import SubwordTokenizer, VocabularyExhaustedWarning
from .symbolizer import SymbolSeq, collapse_runs, dump_text, parse_text
from .synthcorpus import (
    LanguageSpec,
    emit_features,
    generate_corpus,
    make_centroids,
    make_mixture,
    precision_at_k,
    uniform_spec,
)

__version__ = "0.1.0"

__all__ = [
    "ClipEntry",
    "ClipManifest",
    "EmptyClipWarning",
    "FrameQuantizer",
    "GridConfig",
    "LanguageSpec",
    "LengthScaler",
    "LidRecord",
    "OversizedSampleWarning",
    "PairedResults",
    "ScoreRecord",
    "ScoreResult",
    "SubwordTokenizer",
    "Summary",
    "SymbolSeq",
    "UnscoredClipWarning",
    "VocabularyExhaustedWarning",
    "WilcoxonResult",
    "assemble_clips",
    "assign",
    "build_frequency_vector",
    "build_report",
    "catds_score",
    "collapse_runs",
    "cosine_similarity",
    "dump_text",
    "emit_features",
    "export_scatter",
    "file_sha256",
    "generate_corpus",
    "load_codebook",
    "make_centroids",
    "make_mixture",
    "materialize_grid",
    "parse_text",
    "pearson_r",
    "plan_grid",
    "precision_at_k",
    "read_feature_file",
    "read_frequency_vector",
    "read_lid_table",
    "read_manifest",
    "read_results_table",
    "read_score_table",
    "read_token_file",
    "save_codebook",
    "score_corpus",
    "select_by_catds",
    "select_by_lid",
    "select_random",
    "subsample_frames",
    "subset_sizes",
    "summarize",
    "uniform_spec",
    "wilcoxon_signed_rank",
    "write_feature_file",
    "write_frequency_vector",
    "write_lid_table",
    "write_manifest",
    "write_score_table",
    "write_token_file",
]
