//! Bilinear attention math: scores, stable softmax, and construction of
//! soft-alignment matrices from hidden states or from hard alignments.
//!
//! The attention entry for source position `i` and target position `j` is
//!
//! ```text
//! a[i][j] = exp(h_i · W · g_j) / sum_k exp(h_k · W · g_j)
//! ```
//!
//! normalized over the source axis, so every column of the resulting
//! [`AttentionMatrix`] is a probability distribution over source positions.

use crate::error::{Error, Result};
use crate::types::AttentionMatrix;

/// A `T x d` matrix of hidden vectors, one row per token.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenStates {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl HiddenStates {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("hidden states"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::EmptyInput("hidden state dimension"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::dims(
                    format!("vectors of dimension {dim}"),
                    format!("row {i} of dimension {}", row.len()),
                ));
            }
        }
        Ok(HiddenStates { rows, dim })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }
}

/// The `d_src x d_tgt` weight matrix of the bilinear form.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearWeights {
    rows: Vec<Vec<f64>>,
    d_src: usize,
    d_tgt: usize,
}

impl BilinearWeights {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyInput("bilinear weights"));
        }
        let d_tgt = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d_tgt {
                return Err(Error::dims(
                    format!("rows of length {d_tgt}"),
                    format!("row {i} of length {}", row.len()),
                ));
            }
        }
        let d_src = rows.len();
        Ok(BilinearWeights { rows, d_src, d_tgt })
    }

    /// Identity weights for `d x d`, i.e. plain dot-product attention.
    pub fn identity(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyInput("bilinear weights"));
        }
        let rows = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        BilinearWeights::new(rows)
    }

    pub fn d_src(&self) -> usize {
        self.d_src
    }

    pub fn d_tgt(&self) -> usize {
        self.d_tgt
    }
}

/// Computes the raw score matrix `S[i][j] = h_i · W · g_j` with `t_src` rows
/// and `t_tgt` columns.
pub fn bilinear_scores(
    source: &HiddenStates,
    target: &HiddenStates,
    weights: &BilinearWeights,
) -> Result<Vec<Vec<f64>>> {
    if source.dim() != weights.d_src() {
        return Err(Error::dims(
            format!("source dimension {}", weights.d_src()),
            format!("{}", source.dim()),
        ));
    }
    if target.dim() != weights.d_tgt() {
        return Err(Error::dims(
            format!("target dimension {}", weights.d_tgt()),
            format!("{}", target.dim()),
        ));
    }
    // Precompute W · g_j for each target position, then dot with each h_i.
    let projected: Vec<Vec<f64>> = (0..target.len())
        .map(|j| {
            let g = target.row(j);
            (0..weights.d_src())
                .map(|r| {
                    weights.rows[r]
                        .iter()
                        .zip(g)
                        .map(|(w, x)| w * x)
                        .sum::<f64>()
                })
                .collect()
        })
        .collect();
    Ok((0..source.len())
        .map(|i| {
            let h = source.row(i);
            projected
                .iter()
                .map(|p| h.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect())
}

/// Numerically stable softmax: subtracts the maximum before exponentiating,
/// so arbitrarily large scores cannot overflow. Shift-invariant by
/// construction.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("softmax input"));
    }
    if scores.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidData("softmax input contains a non-finite score".into()));
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Computes the full attention matrix from hidden states: bilinear scores,
/// then a softmax over the source axis within each target column.
pub fn attention_from_states(
    source: &HiddenStates,
    target: &HiddenStates,
    weights: &BilinearWeights,
) -> Result<AttentionMatrix> {
    let scores = bilinear_scores(source, target, weights)?;
    let t_src = scores.len();
    let t_tgt = scores[0].len();
    let mut rows = vec![vec![0.0; t_tgt]; t_src];
    for j in 0..t_tgt {
        let column: Vec<f64> = (0..t_src).map(|i| scores[i][j]).collect();
        for (i, p) in softmax(&column)?.into_iter().enumerate() {
            rows[i][j] = p;
        }
    }
    AttentionMatrix::from_rows(rows)
}

/// Builds a near-deterministic attention matrix from a hard alignment: for
/// target position `j` aligned to source position `alignment[j]`, the column
/// puts `1 - epsilon` on the aligned source position and spreads `epsilon`
/// uniformly over the remaining ones. With a single source token the whole
/// mass sits there regardless of `epsilon`.
pub fn attention_from_alignment(
    t_src: usize,
    alignment: &[usize],
    epsilon: f64,
) -> Result<AttentionMatrix> {
    if t_src == 0 {
        return Err(Error::EmptyInput("source length"));
    }
    if alignment.is_empty() {
        return Err(Error::EmptyInput("alignment"));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidConfig(format!(
            "epsilon {epsilon} must be in [0, 1)"
        )));
    }
    for (j, &i) in alignment.iter().enumerate() {
        if i >= t_src {
            return Err(Error::OutOfRange {
                what: "alignment target",
                index: i,
                len: t_src,
            });
        }
        let _ = j;
    }
    let t_tgt = alignment.len();
    let off = if t_src == 1 {
        0.0
    } else {
        epsilon / (t_src - 1) as f64
    };
    let mut rows = vec![vec![off; t_tgt]; t_src];
    for (j, &i) in alignment.iter().enumerate() {
        rows[i][j] = if t_src == 1 { 1.0 } else { 1.0 - epsilon };
    }
    AttentionMatrix::from_rows(rows)
}
