//! Shared data model: tokenized text, spans, attention matrices, translation
//! records, QA examples and predictions.
//!
//! All character offsets throughout the crate count Unicode scalar values
//! (what Python calls string indices), not bytes. This keeps offsets
//! compatible with SQuAD-style `answer_start` fields for non-ASCII scripts.
//!
//! Everything here is immutable after construction and safe to share across
//! threads.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for attention column sums and probability vector sums.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-9;

/// Returns the number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slices `s` by character (not byte) indices. Returns `None` when the range
/// is out of bounds or inverted.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut iter = s.char_indices();
    let byte_start = if start == 0 {
        0
    } else {
        iter.by_ref().nth(start - 1).map(|(i, c)| i + c.len_utf8())?
    };
    let remaining = end - start;
    let byte_end = if remaining == 0 {
        byte_start
    } else {
        iter.by_ref()
            .nth(remaining - 1)
            .map(|(i, c)| i + c.len_utf8())?
    };
    Some(&s[byte_start..byte_end])
}

/// A short language identifier such as `"ja"`, `"fr"`, `"en"` or a synthetic
/// code like `"synL"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn new(code: impl Into<String>) -> Result<Self> {
        let code = code.into();
        if code.is_empty() {
            return Err(Error::InvalidData("language tag must be non-empty".into()));
        }
        Ok(LanguageTag(code))
    }

    pub fn code(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One token with its character range into the owning text.
/// Serialized as a `[surface, char_start, char_end]` triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "TokenRepr", into = "TokenRepr")]
pub struct Token {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
}

type TokenRepr = (String, usize, usize);

impl From<TokenRepr> for Token {
    fn from((surface, char_start, char_end): TokenRepr) -> Self {
        Token {
            surface,
            char_start,
            char_end,
        }
    }
}

impl From<Token> for TokenRepr {
    fn from(t: Token) -> Self {
        (t.surface, t.char_start, t.char_end)
    }
}

/// A string together with its token segmentation. Token offsets always
/// satisfy: ranges in bounds, non-overlapping, strictly increasing, and each
/// surface equal to the raw substring it covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenizedText {
    pub raw: String,
    pub tokens: Vec<Token>,
    #[serde(rename = "lang")]
    pub language: LanguageTag,
}

impl TokenizedText {
    /// Builds a text after checking every token-offset invariant.
    pub fn new(raw: impl Into<String>, tokens: Vec<Token>, language: LanguageTag) -> Result<Self> {
        let text = TokenizedText {
            raw: raw.into(),
            tokens,
            language,
        };
        let violations = text.offset_violations();
        if violations.is_empty() {
            Ok(text)
        } else {
            Err(Error::InvalidData(violations.join("; ")))
        }
    }

    /// Builds a text from token surfaces, joined by single spaces, with
    /// offsets computed. The inverse of reading `tokens[..].surface` off a
    /// single-spaced text.
    pub fn from_surfaces<S: AsRef<str>>(surfaces: &[S], language: LanguageTag) -> Self {
        let mut raw = String::new();
        let mut tokens = Vec::with_capacity(surfaces.len());
        let mut pos = 0usize;
        for (i, s) in surfaces.iter().enumerate() {
            let s = s.as_ref();
            if i > 0 {
                raw.push(' ');
                pos += 1;
            }
            let len = char_len(s);
            tokens.push(Token {
                surface: s.to_string(),
                char_start: pos,
                char_end: pos + len,
            });
            raw.push_str(s);
            pos += len;
        }
        TokenizedText {
            raw,
            tokens,
            language,
        }
    }

    /// Whitespace-split tokenization with character offsets. Used for
    /// synthetic data and SQuAD ingestion; no language-specific analysis.
    pub fn from_whitespace(raw: impl Into<String>, language: LanguageTag) -> Self {
        let raw = raw.into();
        let mut tokens = Vec::new();
        let mut start = None;
        let mut pos = 0usize;
        for c in raw.chars() {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s, pos));
                }
            } else if start.is_none() {
                start = Some(pos);
            }
            pos += 1;
        }
        if let Some(s) = start {
            tokens.push((s, pos));
        }
        let tokens = tokens
            .into_iter()
            .map(|(s, e)| Token {
                surface: char_slice(&raw, s, e).unwrap().to_string(),
                char_start: s,
                char_end: e,
            })
            .collect();
        TokenizedText {
            raw,
            tokens,
            language,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks the token-offset invariants, returning one description per
    /// violation. Empty means the text is well-formed.
    pub fn offset_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let raw_len = char_len(&self.raw);
        let mut prev_end = 0usize;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.char_start > t.char_end || t.char_end > raw_len {
                v.push(format!(
                    "token {i} range {}..{} out of bounds for raw length {raw_len}",
                    t.char_start, t.char_end
                ));
                continue;
            }
            if i > 0 && t.char_start < prev_end {
                v.push(format!(
                    "token {i} starts at {} before previous token end {prev_end}",
                    t.char_start
                ));
            }
            match char_slice(&self.raw, t.char_start, t.char_end) {
                Some(sub) if sub == t.surface => {}
                Some(sub) => v.push(format!(
                    "token {i} surface {:?} does not match raw substring {:?}",
                    t.surface, sub
                )),
                None => v.push(format!("token {i} range unreachable in raw")),
            }
            prev_end = t.char_end;
        }
        v
    }

    /// Maps a token span to its character range `(char_start, char_end)`.
    /// The covered substring is the answer string for that span.
    pub fn span_char_range(&self, span: TokenSpan) -> Result<(usize, usize)> {
        span.check_for_len(self.tokens.len())?;
        Ok((
            self.tokens[span.start].char_start,
            self.tokens[span.end].char_end,
        ))
    }

    /// The substring covered by a token span.
    pub fn span_text(&self, span: TokenSpan) -> Result<&str> {
        let (s, e) = self.span_char_range(span)?;
        char_slice(&self.raw, s, e)
            .ok_or(Error::InvalidData("span range unreachable in raw".into()))
    }

    /// The smallest token span covering every token that overlaps the
    /// character range `[char_start, char_end)`. `None` when no token
    /// overlaps it — e.g. a range that sits entirely inside whitespace.
    pub fn span_covering(&self, char_start: usize, char_end: usize) -> Option<TokenSpan> {
        if char_start >= char_end {
            return None;
        }
        let mut first = None;
        let mut last = None;
        for (i, t) in self.tokens.iter().enumerate() {
            let overlaps = t.char_start < char_end && char_start < t.char_end;
            if overlaps {
                first.get_or_insert(i);
                last = Some(i);
            }
        }
        Some(TokenSpan {
            start: first?,
            end: last?,
        })
    }
}

/// Maps a token span to a character range; free-function form of
/// [`TokenizedText::span_char_range`].
pub fn span_to_char_range(text: &TokenizedText, span: TokenSpan) -> Result<(usize, usize)> {
    text.span_char_range(span)
}

/// An inclusive token span `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidData(format!(
                "span start {start} after end {end}"
            )));
        }
        Ok(TokenSpan { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn check_for_len(&self, len: usize) -> Result<()> {
        if self.start > self.end {
            return Err(Error::InvalidData(format!(
                "span start {} after end {}",
                self.start, self.end
            )));
        }
        if self.end >= len {
            return Err(Error::OutOfRange {
                what: "span end",
                index: self.end,
                len,
            });
        }
        Ok(())
    }
}

/// A stochastic soft-alignment matrix with `source_len` rows and `target_len`
/// columns. Each column is a probability distribution over source positions.
/// Serialized as a bare nested array of rows.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionMatrix {
    values: Vec<Vec<f64>>,
    source_len: usize,
    target_len: usize,
}

impl AttentionMatrix {
    /// Builds a matrix from rows. Rows must be rectangular; stochasticity is
    /// not enforced here — see [`validate_record`].
    pub fn from_rows(values: Vec<Vec<f64>>) -> Result<Self> {
        let source_len = values.len();
        let target_len = values.first().map_or(0, Vec::len);
        for (i, row) in values.iter().enumerate() {
            if row.len() != target_len {
                return Err(Error::dims(
                    format!("row of length {target_len}"),
                    format!("row {i} of length {}", row.len()),
                ));
            }
        }
        Ok(AttentionMatrix {
            values,
            source_len,
            target_len,
        })
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.values[source][target]
    }

    /// Iterates over one column (fixed target position).
    pub fn column(&self, target: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[target])
    }

    /// Column-sum and range violations, one description each.
    pub fn stochasticity_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (i, row) in self.values.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                    v.push(format!("entry ({i}, {j}) = {x} outside [0, 1]"));
                }
            }
        }
        for j in 0..self.target_len {
            let sum: f64 = self.column(j).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                v.push(format!("column {j} sums to {sum}, expected 1"));
            }
        }
        v
    }
}

impl Serialize for AttentionMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AttentionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<Vec<f64>>::deserialize(deserializer)?;
        AttentionMatrix::from_rows(values).map_err(serde::de::Error::custom)
    }
}

/// A pairing of a source token range with the target token range it was
/// translated to, both half-open. Serialized as `[[ss, se], [ts, te]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BlockRepr", into = "BlockRepr")]
pub struct SentenceBlock {
    pub source_start: usize,
    pub source_end: usize,
    pub target_start: usize,
    pub target_end: usize,
}

type BlockRepr = ((usize, usize), (usize, usize));

impl From<BlockRepr> for SentenceBlock {
    fn from(((ss, se), (ts, te)): BlockRepr) -> Self {
        SentenceBlock {
            source_start: ss,
            source_end: se,
            target_start: ts,
            target_end: te,
        }
    }
}

impl From<SentenceBlock> for BlockRepr {
    fn from(b: SentenceBlock) -> Self {
        ((b.source_start, b.source_end), (b.target_start, b.target_end))
    }
}

impl SentenceBlock {
    pub fn contains_target(&self, j: usize) -> bool {
        (self.target_start..self.target_end).contains(&j)
    }
}

/// One translation: source text, target text and the soft alignment between
/// them. `sentence_blocks` is set when a multi-sentence text was translated
/// sentence by sentence; the attention is then block-diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub source: TokenizedText,
    pub target: TokenizedText,
    pub attention: AttentionMatrix,
    #[serde(default)]
    pub sentence_blocks: Option<Vec<SentenceBlock>>,
}

/// Checks every record invariant and returns one description per violation.
/// An empty list means the record is valid. Violations are data, not errors:
/// this is how ingested records (files, HTTP responses) are vetted.
pub fn validate_record(record: &TranslationRecord) -> Vec<String> {
    let mut v = Vec::new();
    for s in record.source.offset_violations() {
        v.push(format!("source: {s}"));
    }
    for s in record.target.offset_violations() {
        v.push(format!("target: {s}"));
    }
    let (rows, cols) = (record.attention.source_len(), record.attention.target_len());
    if rows != record.source.len() {
        v.push(format!(
            "attention has {rows} rows but source has {} tokens",
            record.source.len()
        ));
    }
    if cols != record.target.len() && !(rows == 0 && record.target.is_empty()) {
        v.push(format!(
            "attention has {cols} columns but target has {} tokens",
            record.target.len()
        ));
    }
    v.extend(record.attention.stochasticity_violations());
    if let Some(blocks) = &record.sentence_blocks {
        v.extend(block_violations(blocks, rows, cols, &record.attention));
    }
    v
}

fn block_violations(
    blocks: &[SentenceBlock],
    rows: usize,
    cols: usize,
    attention: &AttentionMatrix,
) -> Vec<String> {
    let mut v = Vec::new();
    let mut src_pos = 0usize;
    let mut tgt_pos = 0usize;
    for (k, b) in blocks.iter().enumerate() {
        if b.source_start != src_pos || b.source_end < b.source_start {
            v.push(format!(
                "block {k} source range {}..{} does not continue partition at {src_pos}",
                b.source_start, b.source_end
            ));
            return v;
        }
        if b.target_start != tgt_pos || b.target_end < b.target_start {
            v.push(format!(
                "block {k} target range {}..{} does not continue partition at {tgt_pos}",
                b.target_start, b.target_end
            ));
            return v;
        }
        src_pos = b.source_end;
        tgt_pos = b.target_end;
    }
    if src_pos != rows || tgt_pos != cols {
        v.push(format!(
            "blocks cover {src_pos}x{tgt_pos} but attention is {rows}x{cols}"
        ));
        return v;
    }
    for (k, b) in blocks.iter().enumerate() {
        for j in b.target_start..b.target_end {
            for i in 0..rows {
                let inside = (b.source_start..b.source_end).contains(&i);
                let x = attention.get(i, j);
                if !inside && x != 0.0 {
                    v.push(format!(
                        "entry ({i}, {j}) = {x} outside block {k} must be exactly 0"
                    ));
                }
            }
        }
    }
    v
}

/// Start/end probability distributions over the tokens of a pivot-language
/// context, as produced by a reading-comprehension model. Deserialization
/// runs the same validation as [`SpanDistributions::new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpanDistributionsRepr")]
pub struct SpanDistributions {
    p_start: Vec<f64>,
    p_end: Vec<f64>,
}

#[derive(Deserialize)]
struct SpanDistributionsRepr {
    p_start: Vec<f64>,
    p_end: Vec<f64>,
}

impl TryFrom<SpanDistributionsRepr> for SpanDistributions {
    type Error = Error;

    fn try_from(r: SpanDistributionsRepr) -> Result<Self> {
        SpanDistributions::new(r.p_start, r.p_end)
    }
}

impl SpanDistributions {
    pub fn new(p_start: Vec<f64>, p_end: Vec<f64>) -> Result<Self> {
        if p_start.len() != p_end.len() {
            return Err(Error::dims(
                format!("matching lengths (start has {})", p_start.len()),
                format!("end has {}", p_end.len()),
            ));
        }
        for (name, v) in [("p_start", &p_start), ("p_end", &p_end)] {
            if v.is_empty() {
                return Err(Error::EmptyInput("span distributions"));
            }
            if v.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::InvalidData(format!(
                    "{name} contains a negative or non-finite entry"
                )));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::InvalidData(format!(
                    "{name} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(SpanDistributions { p_start, p_end })
    }

    pub fn len(&self) -> usize {
        self.p_start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_start.is_empty()
    }

    pub fn p_start(&self) -> &[f64] {
        &self.p_start
    }

    pub fn p_end(&self) -> &[f64] {
        &self.p_end
    }
}

/// One gold answer: the exact answer string and its character offset into the
/// context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldAnswer {
    pub text: String,
    #[serde(rename = "answer_start")]
    pub char_start: usize,
}

/// A SQuAD-style example: a context, a question and one or more gold answers
/// located in the context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QAExample {
    pub id: String,
    pub context: TokenizedText,
    pub question: TokenizedText,
    #[serde(rename = "answers")]
    pub gold_answers: Vec<GoldAnswer>,
}

impl QAExample {
    /// Builds an example after checking that every gold answer occurs in the
    /// context at its stated offset.
    pub fn new(
        id: impl Into<String>,
        context: TokenizedText,
        question: TokenizedText,
        gold_answers: Vec<GoldAnswer>,
    ) -> Result<Self> {
        let id = id.into();
        for a in &gold_answers {
            let end = a.char_start + char_len(&a.text);
            match char_slice(&context.raw, a.char_start, end) {
                Some(sub) if sub == a.text => {}
                _ => {
                    return Err(Error::InvalidData(format!(
                        "example {id}: answer {:?} not found at offset {}",
                        a.text, a.char_start
                    )))
                }
            }
        }
        Ok(QAExample {
            id,
            context,
            question,
            gold_answers,
        })
    }
}

/// How a predicted answer string was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMode {
    /// Extracted as a span of the target-language context.
    Extractive,
    /// Generated by translating the pivot-language answer in isolation.
    Generated,
}

/// A predicted answer for one example. Extractive predictions always carry
/// the character range of the answer in the target-language context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PredictionRepr", into = "PredictionRepr")]
pub struct Prediction {
    pub example_id: String,
    pub answer_text: String,
    pub char_range: Option<(usize, usize)>,
    pub mode: PredictionMode,
}

#[derive(Serialize, Deserialize)]
struct PredictionRepr {
    id: String,
    answer: String,
    char_start: Option<usize>,
    char_end: Option<usize>,
    mode: PredictionMode,
}

impl From<PredictionRepr> for Prediction {
    fn from(r: PredictionRepr) -> Self {
        Prediction {
            example_id: r.id,
            answer_text: r.answer,
            char_range: r.char_start.zip(r.char_end),
            mode: r.mode,
        }
    }
}

impl From<Prediction> for PredictionRepr {
    fn from(p: Prediction) -> Self {
        PredictionRepr {
            id: p.example_id,
            answer: p.answer_text,
            char_start: p.char_range.map(|(s, _)| s),
            char_end: p.char_range.map(|(_, e)| e),
            mode: p.mode,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(code: &str) -> LanguageTag {
        LanguageTag::new(code).unwrap()
    }

    fn text(raw: &str) -> TokenizedText {
        TokenizedText::from_whitespace(raw, lang("fr"))
    }

    fn uniform_attention(rows: usize, cols: usize) -> AttentionMatrix {
        AttentionMatrix::from_rows(vec![vec![1.0 / rows as f64; cols]; rows]).unwrap()
    }

    #[test]
    fn whitespace_tokenizer_offsets() {
        let t = text("le chat dort");
        assert_eq!(t.tokens.len(), 3);
        assert_eq!(t.tokens[0].surface, "le");
        assert_eq!((t.tokens[1].char_start, t.tokens[1].char_end), (3, 7));
        assert!(t.offset_violations().is_empty());
    }

    #[test]
    fn whitespace_tokenizer_multibyte() {
        let t = TokenizedText::from_whitespace("テスラ は 発明家", lang("ja"));
        assert_eq!(t.tokens.len(), 3);
        assert_eq!(t.tokens[0].surface, "テスラ");
        assert_eq!((t.tokens[2].char_start, t.tokens[2].char_end), (6, 9));
        assert!(t.offset_violations().is_empty());
    }

    #[test]
    fn span_char_range_reads_offsets() {
        let t = text("le chat dort");
        let (s, e) = t.span_char_range(TokenSpan::new(1, 2).unwrap()).unwrap();
        assert_eq!((s, e), (3, 12));
        assert_eq!(char_slice(&t.raw, s, e).unwrap(), "chat dort");
    }

    #[test]
    fn span_char_range_single_token() {
        let t = text("le chat dort");
        assert_eq!(
            t.span_char_range(TokenSpan::new(0, 0).unwrap()).unwrap(),
            (0, 2)
        );
        let one = text("chat");
        assert_eq!(
            one.span_char_range(TokenSpan::new(0, 0).unwrap()).unwrap(),
            (0, 4)
        );
    }

    #[test]
    fn span_out_of_bounds_errors() {
        let t = text("le chat");
        assert!(t.span_char_range(TokenSpan::new(1, 5).unwrap()).is_err());
    }

    #[test]
    fn validate_record_accepts_constructed_valid() {
        let source = text("un deux trois");
        let target = TokenizedText::from_whitespace("one two", lang("en"));
        let attention = AttentionMatrix::from_rows(vec![
            vec![0.5, 0.1],
            vec![0.3, 0.1],
            vec![0.2, 0.8],
        ])
        .unwrap();
        let record = TranslationRecord {
            source,
            target,
            attention,
            sentence_blocks: None,
        };
        assert_eq!(validate_record(&record), Vec::<String>::new());
    }

    #[test]
    fn validate_record_reports_bad_column_sum() {
        let record = TranslationRecord {
            source: text("un deux"),
            target: TokenizedText::from_whitespace("one", lang("en")),
            attention: AttentionMatrix::from_rows(vec![vec![0.5], vec![0.4]]).unwrap(),
            sentence_blocks: None,
        };
        let v = validate_record(&record);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("column 0"), "{v:?}");
        assert!(v[0].contains("0.9"), "{v:?}");
    }

    #[test]
    fn validate_record_reports_dimension_mismatch() {
        let record = TranslationRecord {
            source: text("un deux trois"),
            target: TokenizedText::from_whitespace("one two", lang("en")),
            attention: uniform_attention(2, 2),
            sentence_blocks: None,
        };
        let v = validate_record(&record);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("rows"), "{v:?}");
    }

    #[test]
    fn validate_record_reports_offset_inconsistency() {
        let mut source = text("un deux");
        source.tokens[1].surface = "trois".into();
        let record = TranslationRecord {
            source,
            target: TokenizedText::from_whitespace("one two", lang("en")),
            attention: uniform_attention(2, 2),
            sentence_blocks: None,
        };
        let v = validate_record(&record);
        assert!(v.iter().any(|s| s.starts_with("source:")), "{v:?}");
    }

    #[test]
    fn validate_record_block_diagonal() {
        let source = text("a b c d");
        let target = TokenizedText::from_whitespace("w x y z", lang("en"));
        let mut rows = vec![vec![0.0; 4]; 4];
        for (j, row) in rows.iter_mut().enumerate() {
            row[j] = 1.0;
        }
        let blocks = vec![
            SentenceBlock::from(((0, 2), (0, 2))),
            SentenceBlock::from(((2, 4), (2, 4))),
        ];
        let record = TranslationRecord {
            source: source.clone(),
            target: target.clone(),
            attention: AttentionMatrix::from_rows(rows.clone()).unwrap(),
            sentence_blocks: Some(blocks.clone()),
        };
        assert!(validate_record(&record).is_empty());

        rows[3][0] = 0.0;
        rows[0][0] = 0.5;
        rows[3][0] += 0.5;
        let leaky = TranslationRecord {
            source,
            target,
            attention: AttentionMatrix::from_rows(rows).unwrap(),
            sentence_blocks: Some(blocks),
        };
        let v = validate_record(&leaky);
        assert!(v.iter().any(|s| s.contains("outside block")), "{v:?}");
    }

    #[test]
    fn record_serialization_field_names() {
        let record = TranslationRecord {
            source: text("un"),
            target: TokenizedText::from_whitespace("one", lang("en")),
            attention: uniform_attention(1, 1),
            sentence_blocks: None,
        };
        let json = serde_json::to_value(&record).unwrap();
        assert!(json.get("source").is_some());
        assert!(json.get("target").is_some());
        assert_eq!(json["attention"], serde_json::json!([[1.0]]));
        assert!(json.get("sentence_blocks").is_some());
        assert_eq!(json["source"]["tokens"][0], serde_json::json!(["un", 0, 2]));

        let back: TranslationRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn qa_example_field_names_and_validation() {
        let ctx = text("le chat dort");
        let q = text("qui dort");
        let ex = QAExample::new(
            "q1",
            ctx.clone(),
            q.clone(),
            vec![GoldAnswer {
                text: "chat".into(),
                char_start: 3,
            }],
        )
        .unwrap();
        let json = serde_json::to_value(&ex).unwrap();
        assert_eq!(json["id"], "q1");
        assert_eq!(json["answers"][0]["answer_start"], 3);

        let bad = QAExample::new(
            "q2",
            ctx,
            q,
            vec![GoldAnswer {
                text: "chien".into(),
                char_start: 3,
            }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn prediction_serialization() {
        let p = Prediction {
            example_id: "q1".into(),
            answer_text: "chat".into(),
            char_range: Some((3, 7)),
            mode: PredictionMode::Extractive,
        };
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["id"], "q1");
        assert_eq!(json["answer"], "chat");
        assert_eq!(json["char_start"], 3);
        assert_eq!(json["char_end"], 7);
        assert_eq!(json["mode"], "extractive");

        let gen = Prediction {
            example_id: "q2".into(),
            answer_text: "chien".into(),
            char_range: None,
            mode: PredictionMode::Generated,
        };
        let json = serde_json::to_value(&gen).unwrap();
        assert_eq!(json["char_start"], serde_json::Value::Null);
        let back: Prediction = serde_json::from_value(json).unwrap();
        assert_eq!(back, gen);
    }

    #[test]
    fn span_covering_overlap_cases() {
        let t = text("le chat dort");
        // Exact token range.
        assert_eq!(t.span_covering(3, 7), Some(TokenSpan::new(1, 1).unwrap()));
        // Partial overlap on both sides pulls in both tokens.
        assert_eq!(t.span_covering(1, 4), Some(TokenSpan::new(0, 1).unwrap()));
        // Whole string.
        assert_eq!(t.span_covering(0, 12), Some(TokenSpan::new(0, 2).unwrap()));
        // Only whitespace covered.
        assert_eq!(t.span_covering(2, 3), None);
        // Empty range.
        assert_eq!(t.span_covering(4, 4), None);
    }

    #[test]
    fn char_slice_multibyte() {
        assert_eq!(char_slice("テスラは", 0, 3).unwrap(), "テスラ");
        assert_eq!(char_slice("テスラは", 3, 4).unwrap(), "は");
        assert_eq!(char_slice("abc", 1, 1).unwrap(), "");
        assert!(char_slice("abc", 2, 5).is_none());
    }
}
