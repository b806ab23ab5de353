//! Cross-lingual extractive reading comprehension through a pivot language.
//!
//! The pipeline translates a target-language context and question into a
//! pivot language, runs an extractive reading-comprehension model there, and
//! projects the answer span back into the original language through the
//! translator's attention soft-alignments — so answers in the target
//! language come out as exact substrings of the original context.
//!
//! The crate provides the data model and math for that loop, plus metrics,
//! corpus preparation utilities, deterministic synthetic oracles for testing,
//! and a runnable pipeline with oracle, file and HTTP backends. Start with
//! the `examples/` directory: each example exercises one capability
//! end-to-end.

pub mod attention;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod jsonl;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod span;
pub mod types;

pub use error::{Error, Result};

pub use attention::{attention_from_alignment, attention_from_states, BilinearWeights, HiddenStates};
pub use corpus::{
    filter_pairs, load_squad, oversample_questions, save_squad, split_corpus, AlignedPair,
    FilterConfig, OversampleConfig,
};
pub use metrics::{
    char_f1, corpus_bleu, evaluate_dataset, exact_match, substring_rate, BleuConfig, EvalReport,
    NormalizationConfig,
};
pub use oracle::{
    gen_synthetic_dataset, toy_back_translate, toy_translate, NoiseConfig, RcOracleConfig,
    ReorderRule, SyntheticLexicon,
};
pub use pipeline::{
    noise_sweep, run_baseline, run_pipeline, sweep_to_csv, LexiconSpec, PipelineConfig,
    PipelineMode, RcBackend, SweepParameter, TranslatorBackend,
};
pub use span::{extract_answer, project_span, select_span, ExtractedAnswer, SpanSelectConfig};
pub use types::{
    AttentionMatrix, GoldAnswer, LanguageTag, Prediction, QAExample, SpanDistributions, Token,
    TokenSpan, TokenizedText, TranslationRecord,
};
