//! Parallel-corpus preparation: score/length filtering, best-first
//! selection, seeded dev/train splitting, question oversampling for MT
//! training mixes, and SQuAD ingestion.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{GoldAnswer, LanguageTag, QAExample, TokenizedText};

/// One sentence pair from a mined parallel corpus, with its alignment score.
/// Both sides are token lists. Serializes with fields `src`, `tgt`, `score`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    #[serde(rename = "src")]
    pub source_sentence: Vec<String>,
    #[serde(rename = "tgt")]
    pub target_sentence: Vec<String>,
    #[serde(rename = "score")]
    pub alignment_score: f64,
}

impl AlignedPair {
    /// Builds a pair, rejecting empty sides.
    pub fn new(
        source_sentence: Vec<String>,
        target_sentence: Vec<String>,
        alignment_score: f64,
    ) -> Result<Self> {
        if source_sentence.is_empty() || target_sentence.is_empty() {
            return Err(Error::EmptyInput("aligned pair side"));
        }
        Ok(AlignedPair {
            source_sentence,
            target_sentence,
            alignment_score,
        })
    }
}

/// Filtering thresholds for mined sentence pairs: the alignment score must
/// reach `min_score` and both sides must fall in the token-length band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_score: f64,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_score: 0.0,
            min_len: 5,
            max_len: 50,
        }
    }
}

impl FilterConfig {
    /// Per-language score thresholds: mined Japanese pairs keep everything
    /// from score -0.3 up, French (and anything unlisted) from 0.0 up. The
    /// 5-50 token band applies everywhere.
    pub fn for_language(language: &LanguageTag) -> Self {
        let min_score = match language.code() {
            "ja" => -0.3,
            _ => 0.0,
        };
        FilterConfig {
            min_score,
            ..FilterConfig::default()
        }
    }

    /// The filtering predicate applied to each pair.
    pub fn admits(&self, pair: &AlignedPair) -> bool {
        let band = self.min_len..=self.max_len;
        pair.alignment_score >= self.min_score
            && band.contains(&pair.source_sentence.len())
            && band.contains(&pair.target_sentence.len())
    }
}

/// Keeps the pairs admitted by `cfg`, preserving input order.
pub fn filter_pairs(pairs: &[AlignedPair], cfg: &FilterConfig) -> Vec<AlignedPair> {
    pairs.iter().filter(|p| cfg.admits(p)).cloned().collect()
}

/// Sorts by alignment score, best first, and keeps the top `k`. The sort is
/// stable: pairs with equal scores keep their input order.
pub fn sort_and_take_best(pairs: &[AlignedPair], k: usize) -> Result<Vec<AlignedPair>> {
    if k > pairs.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot take {k} best of {} pairs",
            pairs.len()
        )));
    }
    let mut sorted: Vec<AlignedPair> = pairs.to_vec();
    sorted.sort_by(|a, b| {
        b.alignment_score
            .partial_cmp(&a.alignment_score)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    sorted.truncate(k);
    Ok(sorted)
}

/// Splits a corpus into train and dev sets after a seeded shuffle: the first
/// `n_dev` shuffled pairs become dev, the rest train. Disjoint, and together
/// they contain exactly the input. The same seed always gives the same split.
pub fn split_corpus(
    pairs: Vec<AlignedPair>,
    n_dev: usize,
    seed: u64,
) -> Result<(Vec<AlignedPair>, Vec<AlignedPair>)> {
    if n_dev >= pairs.len() {
        return Err(Error::InvalidConfig(format!(
            "n_dev {n_dev} must be smaller than the corpus ({} pairs)",
            pairs.len()
        )));
    }
    let mut shuffled = pairs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let train = shuffled.split_off(n_dev);
    Ok((train, shuffled))
}

/// Controls question oversampling in MT training mixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OversampleConfig {
    /// How many copies of each question pair to append (default 10).
    pub duplication_factor_l: usize,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        OversampleConfig {
            duplication_factor_l: 10,
        }
    }
}

/// Builds a training mix: the corpus followed by each question pair repeated
/// `l` times, so scarce translated questions carry weight against an
/// abundant mined corpus. Output size is `|corpus| + l * |questions|`.
/// Shuffling is left to the training consumer.
pub fn oversample_questions(
    corpus: &[AlignedPair],
    questions: &[AlignedPair],
    cfg: &OversampleConfig,
) -> Vec<AlignedPair> {
    let mut out =
        Vec::with_capacity(corpus.len() + questions.len() * cfg.duplication_factor_l);
    out.extend_from_slice(corpus);
    for q in questions {
        for _ in 0..cfg.duplication_factor_l {
            out.push(q.clone());
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct SquadFile {
    #[serde(default = "default_version")]
    version: String,
    data: Vec<SquadArticle>,
}

fn default_version() -> String {
    "1.1".into()
}

#[derive(Serialize, Deserialize)]
struct SquadArticle {
    #[serde(default)]
    title: String,
    paragraphs: Vec<SquadParagraph>,
}

#[derive(Serialize, Deserialize)]
struct SquadParagraph {
    context: String,
    qas: Vec<SquadQuestion>,
}

#[derive(Serialize, Deserialize)]
struct SquadQuestion {
    id: String,
    question: String,
    answers: Vec<GoldAnswer>,
}

/// Loads a SQuAD v1.1-shaped JSON file, flattening articles and paragraphs
/// into one example list. Contexts and questions are whitespace-tokenized
/// and tagged with `language`; every answer offset is checked against its
/// context (offsets count characters, as in the original format), and a
/// mismatch reports the offending qa id.
pub fn load_squad(path: &Path, language: &LanguageTag) -> Result<Vec<QAExample>> {
    let file = std::fs::File::open(path)?;
    let parsed: SquadFile = serde_json::from_reader(std::io::BufReader::new(file))?;
    let mut examples = Vec::new();
    for article in parsed.data {
        for paragraph in article.paragraphs {
            let context = TokenizedText::from_whitespace(&paragraph.context, language.clone());
            for qa in paragraph.qas {
                let question = TokenizedText::from_whitespace(&qa.question, language.clone());
                examples.push(QAExample::new(qa.id, context.clone(), question, qa.answers)?);
            }
        }
    }
    Ok(examples)
}

/// Writes examples as SQuAD v1.1-shaped JSON (one paragraph per example,
/// a single article), the inverse of [`load_squad`]: loading the file back
/// with the same language tag reproduces the examples exactly.
pub fn save_squad(path: &Path, examples: &[QAExample], title: &str) -> Result<()> {
    let paragraphs = examples
        .iter()
        .map(|e| SquadParagraph {
            context: e.context.raw.clone(),
            qas: vec![SquadQuestion {
                id: e.id.clone(),
                question: e.question.raw.clone(),
                answers: e.gold_answers.clone(),
            }],
        })
        .collect();
    let file = SquadFile {
        version: default_version(),
        data: vec![SquadArticle {
            title: title.to_string(),
            paragraphs,
        }],
    };
    crate::jsonl::write_string_atomic(path, &serde_json::to_string_pretty(&file)?)
}
