//! Where alignments come from: bilinear attention over hidden states, and
//! the hard-alignment constructor used by the oracle. Both produce matrices
//! whose columns are probability distributions over source tokens.
//!
//!     cargo run --example attention_alignment

use pivotrc::span::project_position;
use pivotrc::{attention_from_alignment, attention_from_states, BilinearWeights, HiddenStates};

fn main() -> pivotrc::Result<()> {
    // Three source tokens and two target tokens in a 2-dimensional state
    // space. The weights score each (source, target) pair; a column-wise
    // softmax turns scores into alignment distributions.
    let source = HiddenStates::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
    ])?;
    let target = HiddenStates::new(vec![vec![2.0, -1.0], vec![-1.0, 2.0]])?;
    let weights = BilinearWeights::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;

    let attention = attention_from_states(&source, &target, &weights)?;
    println!("bilinear attention ({} source x {} target):", attention.source_len(), attention.target_len());
    for (i, row) in attention.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.4}")).collect();
        println!("  row {i}: [{}]", cells.join(", "));
    }
    for j in 0..attention.target_len() {
        let sum: f64 = attention.column(j).sum();
        println!("  column {j} sums to {sum:.12}, argmax source = {}", project_position(&attention, j)?);
    }

    // The oracle builds attention from hard word alignments, optionally
    // smoothed: epsilon probability mass spread over the other source rows.
    let alignment = [2usize, 0, 1];
    for epsilon in [0.0, 0.1] {
        let hard = attention_from_alignment(3, &alignment, epsilon)?;
        println!("\nfrom alignment {alignment:?} with epsilon {epsilon}:");
        for (i, row) in hard.rows().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.3}")).collect();
            println!("  row {i}: [{}]", cells.join(", "));
        }
        let recovered: Vec<usize> = (0..3)
            .map(|j| project_position(&hard, j).unwrap())
            .collect();
        println!("  argmax projection recovers: {recovered:?}");
        assert_eq!(recovered, alignment);
    }
    Ok(())
}
