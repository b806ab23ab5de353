//! Deterministic synthetic-language models that stand in for the NMT and RC
//! systems at desk scale: a lexicon-based toy translator that emits
//! gold-alignment attention, perfect and keyword RC oracles, a context-free
//! toy back-translator, noise injectors for under-translation and
//! paraphrasing, and a synthetic dataset generator.
//!
//! Every function here is a pure function of its inputs and seed, so runs
//! are reproducible bit-for-bit and parallel schedules cannot change output.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{attention_from_alignment, softmax};
use crate::error::{Error, Result};
use crate::types::{
    char_slice, AttentionMatrix, GoldAnswer, LanguageTag, QAExample, SpanDistributions, Token,
    TokenSpan, TokenizedText, TranslationRecord,
};

/// How the toy translator permutes target tokens after lexicon expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReorderRule {
    /// Keep lexicon output order.
    Identity,
    /// Reverse the whole token sequence.
    Reverse,
    /// Shuffle within consecutive windows of the given size, seeded.
    WindowShuffle { window: usize },
}

/// A toy bilingual lexicon: `forward` maps each source word to one or more
/// target words (fertility >= 1), `reorder` permutes the expanded sequence,
/// and `synonyms` maps target words to the alternative surface used by
/// paraphrase noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LexiconRepr")]
pub struct SyntheticLexicon {
    pub forward: BTreeMap<String, Vec<String>>,
    pub reorder: ReorderRule,
    pub synonyms: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct LexiconRepr {
    forward: BTreeMap<String, Vec<String>>,
    reorder: ReorderRule,
    #[serde(default)]
    synonyms: BTreeMap<String, String>,
}

impl TryFrom<LexiconRepr> for SyntheticLexicon {
    type Error = Error;

    fn try_from(r: LexiconRepr) -> Result<Self> {
        SyntheticLexicon::new(r.forward, r.reorder, r.synonyms)
    }
}

impl SyntheticLexicon {
    pub fn new(
        forward: BTreeMap<String, Vec<String>>,
        reorder: ReorderRule,
        synonyms: BTreeMap<String, String>,
    ) -> Result<Self> {
        for (word, expansion) in &forward {
            if expansion.is_empty() {
                return Err(Error::InvalidData(format!(
                    "forward entry {word:?} has an empty expansion"
                )));
            }
        }
        for (word, alt) in &synonyms {
            if synonyms.contains_key(alt) {
                return Err(Error::InvalidData(format!(
                    "synonym value {alt:?} (for {word:?}) is itself a synonym key"
                )));
            }
        }
        if let ReorderRule::WindowShuffle { window } = reorder {
            if window == 0 {
                return Err(Error::InvalidConfig("shuffle window must be at least 1".into()));
            }
        }
        Ok(SyntheticLexicon {
            forward,
            reorder,
            synonyms,
        })
    }

    /// Word-level inverse: target word -> all source words whose expansion
    /// contains it, in sorted order. Entries with more than one source word
    /// are the homographs that make back-translation ambiguous.
    pub fn inverse(&self) -> BTreeMap<String, Vec<String>> {
        let mut inv: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (src, expansion) in &self.forward {
            for tgt in expansion {
                inv.entry(tgt.clone()).or_default().insert(src.clone());
            }
        }
        inv.into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect()
    }
}

/// Noise applied by the toy translator, modeling MT failure modes: dropped
/// target words (under-translation) and synonym substitution (paraphrasing).
/// `epsilon` smooths the emitted attention away from the gold alignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub drop_rate: f64,
    pub paraphrase_rate: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            drop_rate: 0.0,
            paraphrase_rate: 0.0,
            epsilon: 0.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("drop_rate", self.drop_rate), ("paraphrase_rate", self.paraphrase_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig(format!("{name} {rate} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside [0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Which RC oracle to use, and how sharp the keyword oracle's softmax is.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcOracleConfig {
    pub mode: RcMode,
    /// Softmax temperature for the keyword oracle; must be positive.
    pub temperature: f64,
    /// Half-width of the keyword-counting window.
    pub window: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RcMode {
    Perfect,
    Keyword,
}

impl Default for RcOracleConfig {
    fn default() -> Self {
        RcOracleConfig {
            mode: RcMode::Keyword,
            temperature: 1.0,
            window: 3,
        }
    }
}

impl RcOracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "temperature {} must be positive",
                self.temperature
            )));
        }
        Ok(())
    }
}

fn empty_target_record(source: TokenizedText, language: LanguageTag) -> Result<TranslationRecord> {
    let t_src = source.len();
    let attention = AttentionMatrix::from_rows(vec![Vec::new(); t_src])?;
    Ok(TranslationRecord {
        source,
        target: TokenizedText::from_surfaces::<String>(&[], language),
        attention,
        sentence_blocks: None,
    })
}

/// Pivot-language tag used by the toy translator's output.
pub fn pivot_language() -> LanguageTag {
    LanguageTag::new("synP").unwrap()
}

/// Translates `text` word by word through the lexicon: fertility expands one
/// source word into several target words, all gold-aligned to that source
/// index; the reorder rule permutes the sequence; then, per target token and
/// independently, noise drops it with probability `drop_rate` and substitutes
/// a synonym with probability `paraphrase_rate`. Attention over the surviving
/// tokens comes from `attention_from_alignment` with `noise.epsilon`.
///
/// Unknown source words are copied verbatim and aligned to themselves. The
/// drop and paraphrase draws are taken for every token regardless of the
/// rates, so runs with the same seed and increasing rates form nested noise
/// sets — sweeps compare like against like.
pub fn toy_translate(
    text: &TokenizedText,
    lex: &SyntheticLexicon,
    noise: &NoiseConfig,
) -> Result<TranslationRecord> {
    if text.is_empty() {
        return Err(Error::EmptyInput("translation source"));
    }
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);

    // Lexicon expansion: (target word, aligned source index).
    let mut expanded: Vec<(String, usize)> = Vec::new();
    for (i, tok) in text.tokens.iter().enumerate() {
        match lex.forward.get(&tok.surface) {
            Some(words) => expanded.extend(words.iter().map(|w| (w.clone(), i))),
            None => expanded.push((tok.surface.clone(), i)),
        }
    }

    match lex.reorder {
        ReorderRule::Identity => {}
        ReorderRule::Reverse => expanded.reverse(),
        ReorderRule::WindowShuffle { window } => {
            for chunk in expanded.chunks_mut(window) {
                for j in (1..chunk.len()).rev() {
                    chunk.swap(j, rng.random_range(0..=j));
                }
            }
        }
    }

    let mut surfaces = Vec::with_capacity(expanded.len());
    let mut alignment = Vec::with_capacity(expanded.len());
    for (word, src_idx) in expanded {
        let u_drop: f64 = rng.random();
        let u_para: f64 = rng.random();
        if u_drop < noise.drop_rate {
            continue;
        }
        let word = match lex.synonyms.get(&word) {
            Some(alt) if u_para < noise.paraphrase_rate => alt.clone(),
            _ => word,
        };
        surfaces.push(word);
        alignment.push(src_idx);
    }

    if surfaces.is_empty() {
        return empty_target_record(text.clone(), pivot_language());
    }
    let attention = attention_from_alignment(text.len(), &alignment, noise.epsilon)?;
    Ok(TranslationRecord {
        source: text.clone(),
        target: TokenizedText::from_surfaces(&surfaces, pivot_language()),
        attention,
        sentence_blocks: None,
    })
}

/// Back-translates an isolated answer string word by word through the
/// inverse lexicon. Ambiguous inverse entries (homographs) are resolved by a
/// seeded choice with no access to the original context, so the output can
/// disagree with the context's wording — the failure mode that makes
/// back-translation baselines drift. Unknown words are copied verbatim.
pub fn toy_back_translate(answer: &str, lex: &SyntheticLexicon, seed: u64) -> String {
    let inverse = lex.inverse();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<&str> = Vec::new();
    for word in answer.split_whitespace() {
        match inverse.get(word) {
            Some(candidates) if candidates.len() == 1 => out.push(&candidates[0]),
            Some(candidates) => {
                let pick = rng.random_range(0..candidates.len());
                out.push(&candidates[pick]);
            }
            None => out.push(word),
        }
    }
    out.join(" ")
}

/// Builds distributions peaked on a known-good pivot span: probability
/// `peak` on the gold start (and end), remainder uniform over the other
/// positions. With `peak = 1.0` the distributions are one-hot and
/// `select_span` recovers the gold span exactly.
pub fn perfect_rc(
    ctx_record: &TranslationRecord,
    gold_pivot_span: TokenSpan,
    peak: f64,
) -> Result<SpanDistributions> {
    let t = ctx_record.target.len();
    if t == 0 {
        return Err(Error::EmptyInput("pivot context"));
    }
    gold_pivot_span.check_for_len(t)?;
    if !(peak > 0.0 && peak <= 1.0) {
        return Err(Error::InvalidConfig(format!("peak {peak} outside (0, 1]")));
    }
    let peaked = |at: usize| -> Vec<f64> {
        if t == 1 {
            return vec![1.0];
        }
        let off = (1.0 - peak) / (t - 1) as f64;
        let mut v = vec![off; t];
        v[at] = peak;
        v
    };
    SpanDistributions::new(peaked(gold_pivot_span.start), peaked(gold_pivot_span.end))
}

/// A shallow keyword-matching reader: each position scores the number of
/// question words within `window` tokens of it, and the scores pass through
/// a temperature softmax. The end distribution uses the same window shifted
/// right by one, biasing ends to sit at or after starts. With no question
/// word in the context at all, both distributions are uniform.
pub fn keyword_rc(
    ctx: &TokenizedText,
    question: &TokenizedText,
    cfg: &RcOracleConfig,
) -> Result<SpanDistributions> {
    if ctx.is_empty() {
        return Err(Error::EmptyInput("context"));
    }
    if question.is_empty() {
        return Err(Error::EmptyInput("question"));
    }
    cfg.validate()?;
    let keywords: BTreeSet<&str> = question.tokens.iter().map(|t| t.surface.as_str()).collect();
    let t = ctx.len();
    let is_keyword: Vec<bool> = ctx
        .tokens
        .iter()
        .map(|tok| keywords.contains(tok.surface.as_str()))
        .collect();
    let count_window = |center: usize, shift: isize| -> f64 {
        let lo = center as isize + shift - cfg.window as isize;
        let hi = center as isize + shift + cfg.window as isize;
        (lo.max(0)..=hi.min(t as isize - 1))
            .filter(|&i| is_keyword[i as usize])
            .count() as f64
    };
    let start_scores: Vec<f64> = (0..t).map(|i| count_window(i, 0) / cfg.temperature).collect();
    let end_scores: Vec<f64> = (0..t).map(|i| count_window(i, 1) / cfg.temperature).collect();
    SpanDistributions::new(softmax(&start_scores)?, softmax(&end_scores)?)
}

/// Drops each target token with probability `rate` (seeded), removing the
/// dropped tokens' attention columns, renormalizing the kept ones, and
/// rebuilding target offsets. Sentence-block target ranges contract to the
/// survivors. At `rate = 0` the record is returned unchanged, byte for byte.
pub fn inject_under_translation(
    rec: &TranslationRecord,
    rate: f64,
    seed: u64,
) -> Result<TranslationRecord> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidConfig(format!("rate {rate} outside [0, 1]")));
    }
    if rate == 0.0 {
        return Ok(rec.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kept: Vec<bool> = (0..rec.target.len())
        .map(|_| rng.random::<f64>() >= rate)
        .collect();

    let surfaces: Vec<String> = rec
        .target
        .tokens
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(t, _)| t.surface.clone())
        .collect();
    if surfaces.is_empty() {
        let mut out = empty_target_record(rec.source.clone(), rec.target.language.clone())?;
        out.sentence_blocks = rec.sentence_blocks.as_ref().map(|blocks| {
            blocks
                .iter()
                .map(|b| {
                    let mut b = *b;
                    b.target_start = 0;
                    b.target_end = 0;
                    b
                })
                .collect()
        });
        return Ok(out);
    }

    let t_src = rec.attention.source_len();
    let mut rows = vec![Vec::with_capacity(surfaces.len()); t_src];
    for (j, &keep) in kept.iter().enumerate() {
        if !keep {
            continue;
        }
        let sum: f64 = rec.attention.column(j).sum();
        for (i, row) in rows.iter_mut().enumerate() {
            row.push(rec.attention.get(i, j) / sum);
        }
    }
    let sentence_blocks = rec.sentence_blocks.as_ref().map(|blocks| {
        let mut survivors_before = vec![0usize; rec.target.len() + 1];
        for j in 0..rec.target.len() {
            survivors_before[j + 1] = survivors_before[j] + kept[j] as usize;
        }
        blocks
            .iter()
            .map(|b| {
                let mut nb = *b;
                nb.target_start = survivors_before[b.target_start];
                nb.target_end = survivors_before[b.target_end];
                nb
            })
            .collect()
    });
    Ok(TranslationRecord {
        source: rec.source.clone(),
        target: TokenizedText::from_surfaces(&surfaces, rec.target.language.clone()),
        attention: AttentionMatrix::from_rows(rows)?,
        sentence_blocks,
    })
}

/// Replaces target-token surfaces with their synonyms at the given rate
/// (seeded); only words in the synonym map are eligible. The attention and
/// alignment are untouched — the meaning stays put while the surface
/// changes — and target offsets are rebuilt around the new surfaces,
/// preserving the raw text between tokens. At `rate = 0` the record is
/// returned unchanged, byte for byte.
pub fn inject_paraphrase(
    rec: &TranslationRecord,
    rate: f64,
    synonyms: &BTreeMap<String, String>,
    seed: u64,
) -> Result<TranslationRecord> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidConfig(format!("rate {rate} outside [0, 1]")));
    }
    if rate == 0.0 {
        return Ok(rec.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = String::new();
    let mut tokens = Vec::with_capacity(rec.target.len());
    let mut old_pos = 0usize;
    let mut new_pos = 0usize;
    for tok in &rec.target.tokens {
        let gap = char_slice(&rec.target.raw, old_pos, tok.char_start).unwrap_or("");
        raw.push_str(gap);
        new_pos += tok.char_start - old_pos;
        let u: f64 = rng.random();
        let surface = match synonyms.get(&tok.surface) {
            Some(alt) if u < rate => alt.clone(),
            _ => tok.surface.clone(),
        };
        let len = surface.chars().count();
        tokens.push(Token {
            surface: surface.clone(),
            char_start: new_pos,
            char_end: new_pos + len,
        });
        raw.push_str(&surface);
        new_pos += len;
        old_pos = tok.char_end;
    }
    let tail_len = char_slice(&rec.target.raw, old_pos, crate::types::char_len(&rec.target.raw));
    raw.push_str(tail_len.unwrap_or(""));
    Ok(TranslationRecord {
        source: rec.source.clone(),
        target: TokenizedText {
            raw,
            tokens,
            language: rec.target.language.clone(),
        },
        attention: rec.attention.clone(),
        sentence_blocks: rec.sentence_blocks.clone(),
    })
}

/// A generated corpus: SQuAD-style examples in the synthetic source
/// language, the gold answer's token span per example, and the lexicon that
/// defines the synthetic language pair.
#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub examples: Vec<QAExample>,
    /// Gold answer token span in the source context, parallel to `examples`.
    pub gold_spans: Vec<TokenSpan>,
    pub lexicon: SyntheticLexicon,
}

/// Source-language tag used by generated datasets.
pub fn synthetic_language() -> LanguageTag {
    LanguageTag::new("synL").unwrap()
}

/// Generates a deterministic synthetic dataset: contexts of random lexicon
/// words, a gold answer span of 1-3 tokens, and a question built from the
/// words at and around the answer so keyword matching has a signal. Around
/// 15% of lexicon entries have fertility 2 and around 30% of target words
/// get a synonym; the reorder rule is identity or reverse, picked by seed.
/// Every output is a pure function of the four arguments.
pub fn gen_synthetic_dataset(
    n_examples: usize,
    lexicon_size: usize,
    ctx_len: usize,
    seed: u64,
) -> Result<SyntheticDataset> {
    if n_examples == 0 || lexicon_size == 0 || ctx_len == 0 {
        return Err(Error::InvalidConfig(
            "n_examples, lexicon_size and ctx_len must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut forward = BTreeMap::new();
    let mut synonyms = BTreeMap::new();
    for i in 0..lexicon_size {
        let src = format!("s{i:03}");
        let fertile = rng.random::<f64>() < 0.15;
        let expansion = if fertile {
            vec![format!("t{i:03}"), format!("u{i:03}")]
        } else {
            vec![format!("t{i:03}")]
        };
        if rng.random::<f64>() < 0.30 {
            synonyms.insert(format!("t{i:03}"), format!("y{i:03}"));
            if fertile {
                synonyms.insert(format!("u{i:03}"), format!("z{i:03}"));
            }
        }
        forward.insert(src, expansion);
    }
    let reorder = if rng.random::<f64>() < 0.5 {
        ReorderRule::Identity
    } else {
        ReorderRule::Reverse
    };
    let lexicon = SyntheticLexicon::new(forward, reorder, synonyms)?;
    let source_words: Vec<&String> = lexicon.forward.keys().collect();

    let lang = synthetic_language();
    let mut examples = Vec::with_capacity(n_examples);
    let mut gold_spans = Vec::with_capacity(n_examples);
    for idx in 0..n_examples {
        let words: Vec<String> = (0..ctx_len)
            .map(|_| source_words[rng.random_range(0..source_words.len())].clone())
            .collect();
        let context = TokenizedText::from_surfaces(&words, lang.clone());
        let start = rng.random_range(0..ctx_len);
        let max_len = 3.min(ctx_len - start);
        let span = TokenSpan::new(start, start + rng.random_range(0..max_len))?;
        let q_lo = span.start.saturating_sub(1);
        let q_hi = (span.end + 1).min(ctx_len - 1);
        let question_words: Vec<String> = words[q_lo..=q_hi].to_vec();
        let question = TokenizedText::from_surfaces(&question_words, lang.clone());
        let (char_start, _) = context.span_char_range(span)?;
        let answer = context.span_text(span)?.to_string();
        examples.push(QAExample::new(
            format!("syn{idx:05}"),
            context,
            question,
            vec![GoldAnswer {
                text: answer,
                char_start,
            }],
        )?);
        gold_spans.push(span);
    }
    Ok(SyntheticDataset {
        examples,
        gold_spans,
        lexicon,
    })
}
