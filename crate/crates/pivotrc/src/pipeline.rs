//! The end-to-end answering pipeline: translate the target-language context
//! and question into the pivot language, run a reading-comprehension backend
//! there, and project the chosen span back into the original context — plus
//! the generative back-translation baseline and a noise-sweep harness.
//!
//! Runs are deterministic: every random draw is seeded from the pipeline
//! seed and the example index, work is parallelized per example with the
//! output order fixed by the input order, and failures are isolated — a bad
//! example is recorded and scored zero while the run continues.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jsonl::read_jsonl;
use crate::metrics::{evaluate_dataset, EvalReport, NormalizationConfig};
use crate::oracle::{
    keyword_rc, perfect_rc, toy_back_translate, toy_translate, NoiseConfig, RcMode,
    RcOracleConfig, SyntheticLexicon,
};
use crate::span::{extract_answer, project_position, select_span, SpanSelectConfig};
use crate::types::{
    char_len, Prediction, PredictionMode, QAExample, SpanDistributions, TokenSpan, TokenizedText,
    TranslationRecord,
};

/// Hex SHA-256 over `lang + "\n" + raw`: the key under which file-backed
/// translators store and look up translations.
pub fn input_hash(lang: &str, raw: &str) -> String {
    let digest = Sha256::digest(format!("{lang}\n{raw}").as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A lexicon given either inline or as a path to a lexicon JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LexiconSpec {
    Path(PathBuf),
    Inline(SyntheticLexicon),
}

impl LexiconSpec {
    pub fn load(&self) -> Result<SyntheticLexicon> {
        match self {
            LexiconSpec::Inline(lex) => Ok(lex.clone()),
            LexiconSpec::Path(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::InvalidConfig(format!("cannot read lexicon {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::InvalidConfig(format!("bad lexicon {}: {e}", path.display()))
                })
            }
        }
    }
}

/// Where translations come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranslatorBackend {
    /// The deterministic toy translator; see [`toy_translate`]. Inside the
    /// pipeline the noise seed is derived per example from the pipeline
    /// seed, so the `seed` field of `noise` is ignored here.
    Oracle {
        lexicon: LexiconSpec,
        #[serde(default)]
        noise: NoiseConfig,
    },
    /// Precomputed translations: a JSONL file of translation records, looked
    /// up by [`input_hash`] of the source language and raw text.
    File { path: PathBuf },
    /// A remote translation service; see [`translate_remote`] for the wire
    /// format. In-flight requests are bounded by the worker count.
    Http { endpoint: String },
}

/// Where span distributions come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RcBackend {
    /// Distributions peaked on the gold span's image in the pivot text; the
    /// upper bound for everything downstream of the reader.
    Perfect {
        #[serde(default = "default_peak")]
        peak: f64,
    },
    /// The keyword-window reader; see [`keyword_rc`].
    Keyword {
        #[serde(default = "default_temperature")]
        temperature: f64,
        #[serde(default = "default_window")]
        window: usize,
    },
    /// Precomputed distributions: a JSONL file of
    /// `{"id", "p_start", "p_end"}` rows, looked up by example id.
    File { path: PathBuf },
    /// A remote reader; see the wire format in [`rc_remote`].
    Http { endpoint: String },
}

fn default_peak() -> f64 {
    1.0
}

fn default_temperature() -> f64 {
    RcOracleConfig::default().temperature
}

fn default_window() -> usize {
    RcOracleConfig::default().window
}

fn default_workers() -> usize {
    4
}

fn default_cache() -> bool {
    true
}

/// Whether answers are extracted from the original context or generated by
/// back-translating the pivot answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    #[default]
    RuntimeMt,
    BackTranslation,
}

/// Full configuration of a pipeline run. Serializes to the JSON accepted by
/// `pipeline run --config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub translator: TranslatorBackend,
    /// Used only in back-translation mode; when absent, the forward
    /// translator doubles as the back-translator.
    #[serde(default)]
    pub back_translator: Option<TranslatorBackend>,
    pub rc: RcBackend,
    #[serde(default)]
    pub span_cfg: SpanSelectConfig,
    #[serde(default)]
    pub norm_cfg: NormalizationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: PipelineMode,
    /// Worker threads; also the bound on in-flight HTTP requests.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Cache backend responses within the run, keyed by input hash (and
    /// derived seed, for the oracle). Purely an optimization: results are
    /// identical with the cache off.
    #[serde(default = "default_cache")]
    pub cache: bool,
}

impl PipelineConfig {
    /// A config with the given backends and every other field at its default:
    /// seed 0, runtime-MT mode, 4 workers, caching on.
    pub fn new(translator: TranslatorBackend, rc: RcBackend) -> Self {
        PipelineConfig {
            translator,
            back_translator: None,
            rc,
            span_cfg: SpanSelectConfig::default(),
            norm_cfg: NormalizationConfig::default(),
            seed: 0,
            mode: PipelineMode::default(),
            workers: default_workers(),
            cache: default_cache(),
        }
    }

    /// Rewrites relative backend paths to be relative to `base` — call this
    /// after loading a config file so paths resolve against the file's
    /// directory rather than the working directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        let fix_translator = |t: &mut TranslatorBackend| match t {
            TranslatorBackend::Oracle {
                lexicon: LexiconSpec::Path(p),
                ..
            } => fix(p),
            TranslatorBackend::File { path } => fix(path),
            _ => {}
        };
        fix_translator(&mut self.translator);
        if let Some(bt) = &mut self.back_translator {
            fix_translator(bt);
        }
        if let RcBackend::File { path } = &mut self.rc {
            fix(path);
        }
    }
}

/// One example the pipeline could not answer, with the reason. The example
/// still counts in the denominator of the run's metrics, scored zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleFailure {
    pub example_id: String,
    pub error: String,
}

/// The output of a pipeline run: one prediction per answered example (input
/// order), the failures, and the evaluation against the dataset's golds.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub predictions: Vec<Prediction>,
    pub failures: Vec<ExampleFailure>,
    pub report: EvalReport,
}

enum TranslatorImpl {
    Oracle {
        lexicon: SyntheticLexicon,
        noise: NoiseConfig,
    },
    File {
        store: HashMap<String, TranslationRecord>,
    },
    Http {
        endpoint: String,
    },
}

impl TranslatorImpl {
    fn build(backend: &TranslatorBackend) -> Result<Self> {
        match backend {
            TranslatorBackend::Oracle { lexicon, noise } => {
                noise.validate()?;
                Ok(TranslatorImpl::Oracle {
                    lexicon: lexicon.load()?,
                    noise: *noise,
                })
            }
            TranslatorBackend::File { path } => {
                let records: Vec<TranslationRecord> = read_jsonl(path)?;
                let mut store = HashMap::with_capacity(records.len());
                for (i, rec) in records.into_iter().enumerate() {
                    let violations = crate::types::validate_record(&rec);
                    if !violations.is_empty() {
                        return Err(Error::Validation(
                            violations
                                .into_iter()
                                .map(|v| format!("{}: record {i}: {v}", path.display()))
                                .collect(),
                        ));
                    }
                    let key = input_hash(rec.source.language.code(), &rec.source.raw);
                    if store.insert(key, rec).is_some() {
                        return Err(Error::InvalidData(format!(
                            "{}: record {i} duplicates an earlier input hash",
                            path.display()
                        )));
                    }
                }
                Ok(TranslatorImpl::File { store })
            }
            TranslatorBackend::Http { endpoint } => Ok(TranslatorImpl::Http {
                endpoint: endpoint.clone(),
            }),
        }
    }

    /// Cache key for a given input. Oracle output depends on the derived
    /// seed, so the seed is part of its key; file and HTTP lookups are
    /// seed-independent.
    fn cache_key(&self, text: &TokenizedText, seed: u64) -> String {
        match self {
            TranslatorImpl::Oracle { .. } => {
                format!("{}\n{}\n{seed}", text.language.code(), text.raw)
            }
            _ => format!("{}\n{}", text.language.code(), text.raw),
        }
    }

    fn translate_uncached(&self, text: &TokenizedText, seed: u64) -> Result<TranslationRecord> {
        match self {
            TranslatorImpl::Oracle { lexicon, noise } => {
                let noise = NoiseConfig { seed, ..*noise };
                toy_translate(text, lexicon, &noise)
            }
            TranslatorImpl::File { store } => {
                let key = input_hash(text.language.code(), &text.raw);
                store.get(&key).cloned().ok_or_else(|| {
                    Error::InvalidData(format!(
                        "no stored translation for {} input {:?}",
                        text.language, text.raw
                    ))
                })
            }
            TranslatorImpl::Http { endpoint } => translate_remote(endpoint, text),
        }
    }
}

enum RcImpl {
    Perfect { peak: f64 },
    Keyword { cfg: RcOracleConfig },
    File { store: HashMap<String, SpanDistributions> },
    Http { endpoint: String },
}

#[derive(Serialize, Deserialize)]
struct RcFileRow {
    id: String,
    p_start: Vec<f64>,
    p_end: Vec<f64>,
}

impl RcImpl {
    fn build(backend: &RcBackend) -> Result<Self> {
        match backend {
            RcBackend::Perfect { peak } => {
                if !(*peak > 0.0 && *peak <= 1.0) {
                    return Err(Error::InvalidConfig(format!("peak {peak} outside (0, 1]")));
                }
                Ok(RcImpl::Perfect { peak: *peak })
            }
            RcBackend::Keyword { temperature, window } => {
                let cfg = RcOracleConfig {
                    mode: RcMode::Keyword,
                    temperature: *temperature,
                    window: *window,
                };
                cfg.validate()?;
                Ok(RcImpl::Keyword { cfg })
            }
            RcBackend::File { path } => {
                let rows: Vec<RcFileRow> = read_jsonl(path)?;
                let mut store = HashMap::with_capacity(rows.len());
                for row in rows {
                    let dists = SpanDistributions::new(row.p_start, row.p_end).map_err(|e| {
                        Error::InvalidData(format!(
                            "{}: example {:?}: {e}",
                            path.display(),
                            row.id
                        ))
                    })?;
                    if store.insert(row.id.clone(), dists).is_some() {
                        return Err(Error::InvalidData(format!(
                            "{}: duplicate distributions for example {:?}",
                            path.display(),
                            row.id
                        )));
                    }
                }
                Ok(RcImpl::File { store })
            }
            RcBackend::Http { endpoint } => Ok(RcImpl::Http {
                endpoint: endpoint.clone(),
            }),
        }
    }

    fn distributions(
        &self,
        example: &QAExample,
        ctx_record: &TranslationRecord,
        question_record: &TranslationRecord,
    ) -> Result<SpanDistributions> {
        match self {
            RcImpl::Perfect { peak } => {
                let gold = gold_pivot_span(example, ctx_record)?;
                perfect_rc(ctx_record, gold, *peak)
            }
            RcImpl::Keyword { cfg } => {
                keyword_rc(&ctx_record.target, &question_record.target, cfg)
            }
            RcImpl::File { store } => store.get(&example.id).cloned().ok_or_else(|| {
                Error::InvalidData(format!("no stored distributions for example {:?}", example.id))
            }),
            RcImpl::Http { endpoint } => {
                rc_remote(endpoint, &ctx_record.target, &question_record.target)
            }
        }
    }
}

/// Locates the gold answer's image in the pivot text: the tokens whose
/// argmax alignment lands inside the source tokens covered by the answer.
fn gold_pivot_span(example: &QAExample, ctx_record: &TranslationRecord) -> Result<TokenSpan> {
    let gold = example
        .gold_answers
        .first()
        .ok_or_else(|| Error::InvalidData(format!("example {:?} has no gold answer", example.id)))?;
    let end = gold.char_start + char_len(&gold.text);
    let src_span = ctx_record
        .source
        .span_covering(gold.char_start, end)
        .ok_or_else(|| {
            Error::InvalidData(format!(
                "example {:?}: gold answer covers no source token",
                example.id
            ))
        })?;
    let mut first = None;
    let mut last = None;
    for j in 0..ctx_record.target.len() {
        let i = project_position(&ctx_record.attention, j)?;
        if (src_span.start..=src_span.end).contains(&i) {
            first.get_or_insert(j);
            last = Some(j);
        }
    }
    match (first, last) {
        (Some(s), Some(e)) => TokenSpan::new(s, e),
        _ => Err(Error::InvalidData(format!(
            "example {:?}: gold answer has no image in the pivot text",
            example.id
        ))),
    }
}

struct Runtime {
    translator: TranslatorImpl,
    back_translator: Option<TranslatorImpl>,
    rc: RcImpl,
    cache: Option<Mutex<HashMap<String, TranslationRecord>>>,
}

const STREAM_CONTEXT: u64 = 0;
const STREAM_QUESTION: u64 = 1;
const STREAM_BACK: u64 = 2;

/// Per-example, per-use seed: the pipeline seed XORed with a value unique to
/// (example index, stream), so context noise, question noise and baseline
/// word picks never share a random stream.
fn derived_seed(base: u64, index: usize, stream: u64) -> u64 {
    base ^ ((index as u64).wrapping_mul(4).wrapping_add(stream))
}

impl Runtime {
    fn build(cfg: &PipelineConfig) -> Result<Self> {
        if cfg.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(Runtime {
            translator: TranslatorImpl::build(&cfg.translator)?,
            back_translator: cfg
                .back_translator
                .as_ref()
                .map(TranslatorImpl::build)
                .transpose()?,
            rc: RcImpl::build(&cfg.rc)?,
            cache: cfg.cache.then(|| Mutex::new(HashMap::new())),
        })
    }

    fn translate(&self, text: &TokenizedText, seed: u64) -> Result<TranslationRecord> {
        let key = self.translator.cache_key(text, seed);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.lock().unwrap().get(&key) {
                return Ok(hit.clone());
            }
        }
        let record = self.translator.translate_uncached(text, seed)?;
        if let Some(cache) = &self.cache {
            cache.lock().unwrap().insert(key, record.clone());
        }
        Ok(record)
    }

    /// Translates an isolated pivot-language answer string back to the
    /// target language, with no access to the original context.
    fn back_translate(&self, answer: &str, pivot: &TokenizedText, seed: u64) -> Result<String> {
        let backend = self.back_translator.as_ref().unwrap_or(&self.translator);
        match backend {
            TranslatorImpl::Oracle { lexicon, .. } => {
                Ok(toy_back_translate(answer, lexicon, seed))
            }
            other => {
                let text = TokenizedText::from_whitespace(answer, pivot.language.clone());
                let record = other.translate_uncached(&text, seed)?;
                Ok(record.target.raw)
            }
        }
    }

    fn answer_extractive(
        &self,
        index: usize,
        example: &QAExample,
        cfg: &PipelineConfig,
    ) -> Result<Prediction> {
        let ctx = self.translate(
            &example.context,
            derived_seed(cfg.seed, index, STREAM_CONTEXT),
        )?;
        let question = self.translate(
            &example.question,
            derived_seed(cfg.seed, index, STREAM_QUESTION),
        )?;
        let dists = self.rc.distributions(example, &ctx, &question)?;
        let extracted = extract_answer(&ctx, &dists, &cfg.span_cfg)?;
        debug_assert_eq!(
            crate::types::char_slice(
                &example.context.raw,
                extracted.char_range.0,
                extracted.char_range.1
            ),
            Some(extracted.answer_text.as_str()),
        );
        Ok(Prediction {
            example_id: example.id.clone(),
            answer_text: extracted.answer_text,
            char_range: Some(extracted.char_range),
            mode: PredictionMode::Extractive,
        })
    }

    fn answer_generative(
        &self,
        index: usize,
        example: &QAExample,
        cfg: &PipelineConfig,
    ) -> Result<Prediction> {
        let ctx = self.translate(
            &example.context,
            derived_seed(cfg.seed, index, STREAM_CONTEXT),
        )?;
        let question = self.translate(
            &example.question,
            derived_seed(cfg.seed, index, STREAM_QUESTION),
        )?;
        let dists = self.rc.distributions(example, &ctx, &question)?;
        if dists.len() != ctx.target.len() {
            return Err(Error::dims(
                format!("{} span probabilities (one per target token)", ctx.target.len()),
                format!("{}", dists.len()),
            ));
        }
        let pivot_span = select_span(&dists, &cfg.span_cfg)?;
        let pivot_answer = ctx.target.span_text(pivot_span)?;
        let answer = self.back_translate(
            pivot_answer,
            &ctx.target,
            derived_seed(cfg.seed, index, STREAM_BACK),
        )?;
        Ok(Prediction {
            example_id: example.id.clone(),
            answer_text: answer,
            char_range: None,
            mode: PredictionMode::Generated,
        })
    }
}

fn run_with<F>(examples: &[QAExample], cfg: &PipelineConfig, per_example: F) -> Result<PipelineRun>
where
    F: Fn(usize, &QAExample) -> Result<Prediction> + Sync,
{
    if examples.is_empty() {
        return Err(Error::EmptyInput("examples"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<Prediction>> = pool.install(|| {
        examples
            .par_iter()
            .enumerate()
            .map(|(i, e)| per_example(i, e))
            .collect()
    });
    let mut predictions = Vec::with_capacity(examples.len());
    let mut failures = Vec::new();
    for (example, result) in examples.iter().zip(results) {
        match result {
            Ok(p) => predictions.push(p),
            Err(e) => failures.push(ExampleFailure {
                example_id: example.id.clone(),
                error: e.to_string(),
            }),
        }
    }
    let report = evaluate_dataset(examples, &predictions, &cfg.norm_cfg)?;
    Ok(PipelineRun {
        predictions,
        failures,
        report,
    })
}

/// Runs the pipeline over a dataset. In the default `runtime_mt` mode every
/// prediction is a verbatim substring of its example's context, located by
/// character range; in `back_translation` mode this delegates to
/// [`run_baseline`]. Examples that fail are recorded in `failures` and score
/// zero. Output is identical for any worker count and with the cache on or
/// off.
pub fn run_pipeline(examples: &[QAExample], cfg: &PipelineConfig) -> Result<PipelineRun> {
    if cfg.mode == PipelineMode::BackTranslation {
        return run_baseline(examples, cfg);
    }
    let runtime = Runtime::build(cfg)?;
    run_with(examples, cfg, |i, e| runtime.answer_extractive(i, e, cfg))
}

/// Runs the back-translation baseline: the pivot-side answer span is
/// translated back to the target language as an isolated string, with no
/// access to the context. The output is not anchored to the context — no
/// character range, and no substring guarantee.
pub fn run_baseline(examples: &[QAExample], cfg: &PipelineConfig) -> Result<PipelineRun> {
    let runtime = Runtime::build(cfg)?;
    run_with(examples, cfg, |i, e| runtime.answer_generative(i, e, cfg))
}

/// Which noise rate a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    DropRate,
    ParaphraseRate,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::DropRate => "drop_rate",
            SweepParameter::ParaphraseRate => "paraphrase_rate",
        }
    }
}

/// One sweep point: metrics averaged over the seeds at a single rate value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    /// Mean character F1 over seeds, in percent.
    pub f1: f64,
    /// Mean exact match over seeds, in percent.
    pub em: f64,
    pub n_seeds: usize,
}

/// Runs the pipeline at each noise value, once per seed, and averages.
/// Requires the oracle translator (the only backend with tunable noise) and
/// strictly ascending values. Because per-token noise draws are taken
/// regardless of the rates, the same seed yields nested noise sets across
/// values: each point degrades the previous one rather than resampling.
pub fn noise_sweep(
    examples: &[QAExample],
    base_cfg: &PipelineConfig,
    parameter: SweepParameter,
    values: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("sweep values"));
    }
    if seeds.is_empty() {
        return Err(Error::EmptyInput("sweep seeds"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "sweep values must be strictly ascending".into(),
        ));
    }
    if !matches!(base_cfg.translator, TranslatorBackend::Oracle { .. }) {
        return Err(Error::InvalidConfig(
            "noise sweeps require the oracle translator".into(),
        ));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut f1_sum = 0.0;
        let mut em_sum = 0.0;
        for &seed in seeds {
            let mut cfg = base_cfg.clone();
            cfg.seed = seed;
            if let TranslatorBackend::Oracle { noise, .. } = &mut cfg.translator {
                match parameter {
                    SweepParameter::DropRate => noise.drop_rate = value,
                    SweepParameter::ParaphraseRate => noise.paraphrase_rate = value,
                }
            }
            let run = run_pipeline(examples, &cfg)?;
            f1_sum += run.report.f1;
            em_sum += run.report.em;
        }
        rows.push(SweepRow {
            param: parameter.name().to_string(),
            value,
            f1: f1_sum / seeds.len() as f64,
            em: em_sum / seeds.len() as f64,
            n_seeds: seeds.len(),
        });
    }
    Ok(rows)
}

/// Renders sweep rows as CSV with a fixed header and four-decimal metrics.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,value,f1,em,n_seeds\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.4},{}",
            r.param, r.value, r.f1, r.em, r.n_seeds
        );
    }
    out
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    tokens: Vec<&'a str>,
    lang: &'a str,
}

#[derive(Deserialize)]
struct TranslateResponse {
    target_tokens: Vec<String>,
    attention: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RcRequest<'a> {
    context_tokens: Vec<&'a str>,
    question_tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct RcResponse {
    p_start: Vec<f64>,
    p_end: Vec<f64>,
}

const HTTP_ATTEMPTS: usize = 3;
const HTTP_BACKOFF: Duration = Duration::from_millis(100);

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into()
}

fn retryable(e: &ureq::Error) -> bool {
    match e {
        // Server-side failures may be transient; client errors are not.
        ureq::Error::StatusCode(code) => *code >= 500,
        _ => true,
    }
}

/// POSTs `body` to `endpoint` and parses the JSON response, retrying
/// transport errors and 5xx responses up to three attempts with exponential
/// backoff. 4xx responses and malformed bodies fail immediately.
fn post_json<T: serde::de::DeserializeOwned>(
    endpoint: &str,
    body: &impl Serialize,
) -> Result<T> {
    let agent = agent();
    let mut delay = HTTP_BACKOFF;
    let mut last_error = String::new();
    for attempt in 0..HTTP_ATTEMPTS {
        if attempt > 0 {
            std::thread::sleep(delay);
            delay *= 2;
        }
        match agent.post(endpoint).send_json(body) {
            Ok(mut response) => {
                return response
                    .body_mut()
                    .read_json::<T>()
                    .map_err(|e| Error::Http(format!("{endpoint}: bad response body: {e}")));
            }
            Err(e) if retryable(&e) => last_error = e.to_string(),
            Err(e) => return Err(Error::Http(format!("{endpoint}: {e}"))),
        }
    }
    Err(Error::Http(format!(
        "{endpoint}: {last_error} (after {HTTP_ATTEMPTS} attempts)"
    )))
}

/// Calls a remote translator: POST `{"tokens": [...], "lang": "..."}`,
/// expecting `{"target_tokens": [...], "attention": [[...]]}` where the
/// attention has one row per source token and one column per target token.
/// The assembled record must pass [`crate::types::validate_record`];
/// responses that do not are an error, not retried.
pub fn translate_remote(endpoint: &str, text: &TokenizedText) -> Result<TranslationRecord> {
    let request = TranslateRequest {
        tokens: text.tokens.iter().map(|t| t.surface.as_str()).collect(),
        lang: text.language.code(),
    };
    let response: TranslateResponse = post_json(endpoint, &request)?;
    let target = TokenizedText::from_surfaces(&response.target_tokens, pivot_tag());
    let attention = crate::types::AttentionMatrix::from_rows(response.attention)?;
    let record = TranslationRecord {
        source: text.clone(),
        target,
        attention,
        sentence_blocks: None,
    };
    let violations = crate::types::validate_record(&record);
    if violations.is_empty() {
        Ok(record)
    } else {
        Err(Error::Validation(
            violations
                .into_iter()
                .map(|v| format!("{endpoint}: {v}"))
                .collect(),
        ))
    }
}

fn pivot_tag() -> crate::types::LanguageTag {
    crate::types::LanguageTag::new("pivot").unwrap()
}

/// Calls a remote reader: POST
/// `{"context_tokens": [...], "question_tokens": [...]}`, expecting
/// `{"p_start": [...], "p_end": [...]}` — two distributions over the context
/// tokens. Responses are validated like any other distributions.
pub fn rc_remote(
    endpoint: &str,
    context: &TokenizedText,
    question: &TokenizedText,
) -> Result<SpanDistributions> {
    let request = RcRequest {
        context_tokens: context.tokens.iter().map(|t| t.surface.as_str()).collect(),
        question_tokens: question.tokens.iter().map(|t| t.surface.as_str()).collect(),
    };
    let response: RcResponse = post_json(endpoint, &request)?;
    SpanDistributions::new(response.p_start, response.p_end)
}
