//! Span selection over start/end distributions and projection of pivot-side
//! spans back to the source text through attention argmaxes.
//!
//! Selection maximizes `p_start[m] * p_end[n]` over pairs `m <= n` with
//! `n - m + 1 <= max_span_len`. Projection maps each pivot position `j` to
//! `l(j) = argmax_i a[i][j]` and recovers the source span as
//! `[min l(j), max l(j)]` over the selected pivot positions. All argmax ties
//! break toward the lowest index, so results are fully deterministic.

use crate::error::{Error, Result};
use crate::types::{AttentionMatrix, SpanDistributions, TokenSpan, TranslationRecord};

/// Controls span selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SpanSelectConfig {
    /// Maximum answer length in tokens (inclusive). Must be at least 1.
    pub max_span_len: usize,
}

impl Default for SpanSelectConfig {
    fn default() -> Self {
        SpanSelectConfig { max_span_len: 10 }
    }
}

/// Selects the maximum-probability span in `O(T)` using a sliding-window
/// maximum over `p_start`. Ties on the joint probability break toward the
/// lexicographically smallest `(start, end)` pair.
pub fn select_span(dists: &SpanDistributions, cfg: &SpanSelectConfig) -> Result<TokenSpan> {
    if cfg.max_span_len == 0 {
        return Err(Error::InvalidConfig("max_span_len must be at least 1".into()));
    }
    let p_start = dists.p_start();
    let p_end = dists.p_end();
    let t = p_start.len();

    // Monotonic deque of start indices; values decrease from front to back.
    // Equal values are kept so the front is always the smallest index
    // attaining the window maximum.
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut best: Option<(f64, usize, usize)> = None;
    for n in 0..t {
        while deque.back().is_some_and(|&b| p_start[b] < p_start[n]) {
            deque.pop_back();
        }
        deque.push_back(n);
        let window_start = (n + 1).saturating_sub(cfg.max_span_len);
        while *deque.front().unwrap() < window_start {
            deque.pop_front();
        }
        let m = *deque.front().unwrap();
        let joint = p_start[m] * p_end[n];
        let better = match best {
            None => true,
            Some((bj, bm, bn)) => joint > bj || (joint == bj && (m, n) < (bm, bn)),
        };
        if better {
            best = Some((joint, m, n));
        }
    }
    let (_, m, n) = best.ok_or(Error::EmptyInput("span distributions"))?;
    TokenSpan::new(m, n)
}

/// Reference implementation of [`select_span`]: examines every admissible
/// `(start, end)` pair. Quadratic; kept as an independent oracle for tests.
// Index loops on purpose: this is a literal restatement of the argmax over
// (m, n), the form select_span is checked against.
#[allow(clippy::needless_range_loop)]
pub fn select_span_bruteforce(
    dists: &SpanDistributions,
    cfg: &SpanSelectConfig,
) -> Result<TokenSpan> {
    if cfg.max_span_len == 0 {
        return Err(Error::InvalidConfig("max_span_len must be at least 1".into()));
    }
    let p_start = dists.p_start();
    let p_end = dists.p_end();
    let t = p_start.len();
    let mut best: Option<(f64, usize, usize)> = None;
    for m in 0..t {
        for n in m..t.min(m + cfg.max_span_len) {
            let joint = p_start[m] * p_end[n];
            if best.is_none_or(|(bj, _, _)| joint > bj) {
                best = Some((joint, m, n));
            }
        }
    }
    let (_, m, n) = best.ok_or(Error::EmptyInput("span distributions"))?;
    TokenSpan::new(m, n)
}

/// Maps target position `j` to the source position with the highest
/// attention, `l(j) = argmax_i a[i][j]`, lowest index on ties. When the
/// attention is block-diagonal the argmax stays inside `j`'s own block,
/// because entries outside it are exactly zero.
pub fn project_position(attention: &AttentionMatrix, j: usize) -> Result<usize> {
    if j >= attention.target_len() {
        return Err(Error::OutOfRange {
            what: "target position",
            index: j,
            len: attention.target_len(),
        });
    }
    if attention.source_len() == 0 {
        return Err(Error::EmptyInput("attention matrix"));
    }
    let mut best = 0usize;
    for i in 1..attention.source_len() {
        if attention.get(i, j) > attention.get(best, j) {
            best = i;
        }
    }
    Ok(best)
}

/// Projects a target-side token span to the source side: the envelope
/// `[min l(j), max l(j)]` over the span's positions. The envelope absorbs
/// word reordering — a reordered pair projects to the span that covers both.
pub fn project_span(attention: &AttentionMatrix, span: TokenSpan) -> Result<TokenSpan> {
    span.check_for_len(attention.target_len())?;
    let mut lo = usize::MAX;
    let mut hi = 0usize;
    for j in span.start..=span.end {
        let i = project_position(attention, j)?;
        lo = lo.min(i);
        hi = hi.max(i);
    }
    TokenSpan::new(lo, hi)
}

/// A fully resolved answer: the span picked on the pivot side, its projection
/// into the source text, and the source substring it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedAnswer {
    /// Span selected over the pivot (translation target) tokens.
    pub pivot_span: TokenSpan,
    /// Projection of `pivot_span` into the source tokens.
    pub source_span: TokenSpan,
    /// The source substring covered by `source_span`.
    pub answer_text: String,
    /// Character range of `answer_text` in the source raw text.
    pub char_range: (usize, usize),
    /// Token-length ratio of the projected span to the pivot span. Values
    /// above 1 mean the projection widened the span.
    pub dilation: f64,
}

/// Runs the full back-projection step for one translated context: selects the
/// best span under `dists` (defined over `record.target` tokens), projects it
/// through `record.attention`, and reads the answer out of `record.source`.
pub fn extract_answer(
    record: &TranslationRecord,
    dists: &SpanDistributions,
    cfg: &SpanSelectConfig,
) -> Result<ExtractedAnswer> {
    if dists.len() != record.target.len() {
        return Err(Error::dims(
            format!("{} span probabilities (one per target token)", record.target.len()),
            format!("{}", dists.len()),
        ));
    }
    let pivot_span = select_span(dists, cfg)?;
    let source_span = project_span(&record.attention, pivot_span)?;
    let char_range = record.source.span_char_range(source_span)?;
    let answer_text = record.source.span_text(source_span)?.to_string();
    Ok(ExtractedAnswer {
        pivot_span,
        source_span,
        answer_text,
        char_range,
        dilation: source_span.len() as f64 / pivot_span.len() as f64,
    })
}
