//! Scoring predictions: character F1 with answer normalization, exact match,
//! the substring-rate diagnostic, and corpus BLEU for translation quality.
//!
//!     cargo run --example evaluate

use pivotrc::cli::render_report;
use pivotrc::{
    char_f1, corpus_bleu, evaluate_dataset, BleuConfig, GoldAnswer, LanguageTag,
    NormalizationConfig, Prediction, QAExample, TokenizedText,
};
use pivotrc::types::PredictionMode;

fn main() -> pivotrc::Result<()> {
    let norm = NormalizationConfig::default();

    // Normalization makes "The Cat!" and "the cat" compare equal; F1 counts
    // overlapping characters, so near misses earn partial credit.
    for (prediction, gold) in [("the cat", "The Cat!"), ("abc", "ab"), ("dog", "cat")] {
        println!(
            "char_f1({prediction:?}, {gold:?}) = {:.4}   exact = {}",
            char_f1(prediction, &[gold], &norm),
            pivotrc::exact_match(prediction, &[gold], &norm)
        );
    }

    let language = LanguageTag::new("fr")?;
    let examples = vec![
        QAExample {
            id: "e1".into(),
            context: TokenizedText::from_whitespace("le chat noir dort", language.clone()),
            question: TokenizedText::from_whitespace("quel animal dort", language.clone()),
            gold_answers: vec![GoldAnswer { text: "chat noir".into(), char_start: 3 }],
        },
        QAExample {
            id: "e2".into(),
            context: TokenizedText::from_whitespace("la tour est haute", language.clone()),
            question: TokenizedText::from_whitespace("quoi est haute", language.clone()),
            gold_answers: vec![GoldAnswer { text: "tour".into(), char_start: 3 }],
        },
    ];
    let predictions = vec![
        Prediction {
            example_id: "e1".into(),
            answer_text: "chat noir".into(),
            char_range: Some((3, 12)),
            mode: PredictionMode::Extractive,
        },
        Prediction {
            example_id: "e2".into(),
            answer_text: "toure".into(), // close, but not a context substring
            char_range: None,
            mode: PredictionMode::Generated,
        },
    ];
    let report = evaluate_dataset(&examples, &predictions, &norm)?;
    println!("\n{}", render_report(&report));

    let hypotheses = ["the cat sat on mat"];
    let references = ["the cat sat on the mat"];
    println!(
        "corpus BLEU for {:?} vs {:?}: {:.2}",
        hypotheses[0],
        references[0],
        corpus_bleu(&hypotheses, &references, &BleuConfig::default())?
    );
    Ok(())
}
