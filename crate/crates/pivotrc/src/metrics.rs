//! Evaluation metrics: answer-string normalization, character-level F1,
//! exact match, corpus BLEU and the extractive substring-rate diagnostic.
//!
//! F1 and EM are character-based so that scores are meaningful for languages
//! without word boundaries; both are reported on a 0-100 scale. The
//! substring rate is the fraction of predicted answers that occur verbatim
//! in their original context — a measure of how extractive a system really
//! is — and is reported on a 0-1 scale.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::types::{Prediction, QAExample};

/// Controls answer normalization. The full pipeline (all flags on) is NFKC
/// normalization, lowercasing, whitespace removal, then punctuation removal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    pub nfkc: bool,
    pub lowercase: bool,
    pub strip_whitespace: bool,
    pub strip_punctuation: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            nfkc: true,
            lowercase: true,
            strip_whitespace: true,
            strip_punctuation: true,
        }
    }
}

/// Normalizes an answer string for comparison. Idempotent: applying it twice
/// gives the same string as applying it once.
pub fn normalize_text(s: &str, cfg: &NormalizationConfig) -> String {
    let s: String = if cfg.nfkc { s.nfkc().collect() } else { s.to_string() };
    let s = if cfg.lowercase { s.to_lowercase() } else { s };
    s.chars()
        .filter(|c| {
            if c.is_whitespace() {
                !cfg.strip_whitespace
            } else {
                c.is_alphanumeric() || !cfg.strip_punctuation
            }
        })
        .collect()
}

fn char_counts(s: &str) -> HashMap<char, usize> {
    let mut counts = HashMap::new();
    for c in s.chars() {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts
}

fn f1_single(prediction: &str, gold: &str) -> f64 {
    if prediction.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if prediction.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let pred_counts = char_counts(prediction);
    let gold_counts = char_counts(gold);
    let overlap: usize = pred_counts
        .iter()
        .map(|(c, n)| n.min(gold_counts.get(c).unwrap_or(&0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / prediction.chars().count() as f64;
    let recall = overlap as f64 / gold.chars().count() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Character-level F1 between a prediction and the best-matching gold answer,
/// on a 0-1 scale. Both sides are normalized first; the character multiset
/// intersection defines the overlap. Returns 0 when `golds` is empty.
pub fn char_f1<S: AsRef<str>>(prediction: &str, golds: &[S], cfg: &NormalizationConfig) -> f64 {
    let pred = normalize_text(prediction, cfg);
    golds
        .iter()
        .map(|g| f1_single(&pred, &normalize_text(g.as_ref(), cfg)))
        .fold(0.0, f64::max)
}

/// True when the normalized prediction equals any normalized gold answer.
pub fn exact_match<S: AsRef<str>>(prediction: &str, golds: &[S], cfg: &NormalizationConfig) -> bool {
    let pred = normalize_text(prediction, cfg);
    golds.iter().any(|g| normalize_text(g.as_ref(), cfg) == pred)
}

/// Substring-rate diagnostic: how many predicted answers appear verbatim
/// (without any normalization) in their example's raw context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstringRate {
    pub numerator: usize,
    pub denominator: usize,
    pub rate: f64,
}

/// Computes the substring rate over all predictions. The denominator is the
/// number of predictions; an empty set yields a rate of 0. Predictions whose
/// id matches no example are an error.
pub fn substring_rate(examples: &[QAExample], predictions: &[Prediction]) -> Result<SubstringRate> {
    let by_id: HashMap<&str, &QAExample> =
        examples.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut numerator = 0usize;
    for p in predictions {
        let example = by_id.get(p.example_id.as_str()).ok_or_else(|| {
            Error::InvalidData(format!("prediction for unknown example id {:?}", p.example_id))
        })?;
        if example.context.raw.contains(&p.answer_text) {
            numerator += 1;
        }
    }
    let denominator = predictions.len();
    let rate = if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    };
    Ok(SubstringRate {
        numerator,
        denominator,
        rate,
    })
}

/// Per-example scores inside an [`EvalReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerExample {
    pub id: String,
    /// Character F1 on a 0-100 scale.
    pub f1: f64,
    pub em: bool,
    /// Whether the predicted answer occurs verbatim in the raw context.
    /// Absent when the example received no prediction.
    pub substring: Option<bool>,
}

/// Aggregate evaluation results. `f1` and `em` are means on a 0-100 scale;
/// `substring_rate` is on a 0-1 scale with the number of predictions as its
/// denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub f1: f64,
    pub em: f64,
    pub n: usize,
    pub substring_rate: f64,
    pub per_example: Vec<PerExample>,
}

/// Scores predictions against gold answers. Every example is scored; an
/// example without a prediction scores zero. Duplicate prediction ids and
/// predictions for unknown ids are errors, not silent drops.
pub fn evaluate_dataset(
    examples: &[QAExample],
    predictions: &[Prediction],
    cfg: &NormalizationConfig,
) -> Result<EvalReport> {
    if examples.is_empty() {
        return Err(Error::EmptyInput("examples"));
    }
    let mut by_id: HashMap<&str, &Prediction> = HashMap::new();
    for p in predictions {
        if by_id.insert(p.example_id.as_str(), p).is_some() {
            return Err(Error::InvalidData(format!(
                "duplicate prediction for example id {:?}",
                p.example_id
            )));
        }
    }
    let known: HashMap<&str, &QAExample> = examples.iter().map(|e| (e.id.as_str(), e)).collect();
    for p in predictions {
        if !known.contains_key(p.example_id.as_str()) {
            return Err(Error::InvalidData(format!(
                "prediction for unknown example id {:?}",
                p.example_id
            )));
        }
    }

    let mut per_example = Vec::with_capacity(examples.len());
    let mut f1_sum = 0.0;
    let mut em_sum = 0.0;
    let mut substr_num = 0usize;
    for e in examples {
        let golds: Vec<&str> = e.gold_answers.iter().map(|a| a.text.as_str()).collect();
        let entry = match by_id.get(e.id.as_str()) {
            Some(p) => {
                let f1 = 100.0 * char_f1(&p.answer_text, &golds, cfg);
                let em = exact_match(&p.answer_text, &golds, cfg);
                let substring = e.context.raw.contains(&p.answer_text);
                substr_num += substring as usize;
                PerExample {
                    id: e.id.clone(),
                    f1,
                    em,
                    substring: Some(substring),
                }
            }
            None => PerExample {
                id: e.id.clone(),
                f1: 0.0,
                em: false,
                substring: None,
            },
        };
        f1_sum += entry.f1;
        em_sum += entry.em as usize as f64 * 100.0;
        per_example.push(entry);
    }
    let n = examples.len();
    let substring_rate = if predictions.is_empty() {
        0.0
    } else {
        substr_num as f64 / predictions.len() as f64
    };
    Ok(EvalReport {
        f1: f1_sum / n as f64,
        em: em_sum / n as f64,
        n,
        substring_rate,
        per_example,
    })
}

/// Controls BLEU computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BleuConfig {
    /// Highest n-gram order (default 4).
    pub max_n: usize,
    /// Add-one smoothing for orders above 1. Off by default, so any order
    /// with zero matches drives the score to 0.
    pub smooth: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig {
            max_n: 4,
            smooth: false,
        }
    }
}

fn ngram_counts<'a>(tokens: &[&'a str], n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU on a 0-100 scale, one reference per hypothesis, with
/// clipped n-gram precisions, geometric mean and brevity penalty. Tokens are
/// whitespace-separated.
pub fn corpus_bleu<S: AsRef<str>>(
    hypotheses: &[S],
    references: &[S],
    cfg: &BleuConfig,
) -> Result<f64> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyInput("hypotheses"));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::dims(
            format!("{} references", hypotheses.len()),
            format!("{}", references.len()),
        ));
    }
    if cfg.max_n == 0 {
        return Err(Error::InvalidConfig("max_n must be at least 1".into()));
    }
    let mut matched = vec![0usize; cfg.max_n];
    let mut total = vec![0usize; cfg.max_n];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;
    for (h, r) in hypotheses.iter().zip(references) {
        let h_tokens: Vec<&str> = h.as_ref().split_whitespace().collect();
        let r_tokens: Vec<&str> = r.as_ref().split_whitespace().collect();
        hyp_len += h_tokens.len();
        ref_len += r_tokens.len();
        for n in 1..=cfg.max_n {
            let h_counts = ngram_counts(&h_tokens, n);
            let r_counts = ngram_counts(&r_tokens, n);
            for (gram, count) in &h_counts {
                total[n - 1] += count;
                matched[n - 1] += count.min(r_counts.get(gram).unwrap_or(&0));
            }
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 0..cfg.max_n {
        let (num, den) = if cfg.smooth && n > 0 {
            (matched[n] + 1, total[n] + 1)
        } else {
            (matched[n], total[n])
        };
        if num == 0 || den == 0 {
            return Ok(0.0);
        }
        log_sum += (num as f64 / den as f64).ln();
    }
    let geo_mean = (log_sum / cfg.max_n as f64).exp();
    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * bp * geo_mean)
}
