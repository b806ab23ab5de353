//! Corpus preparation: score/length filtering with per-language thresholds,
//! keeping the best-aligned pairs, question oversampling, and a seeded
//! train/dev split.
//!
//!     cargo run --example corpus_prep

use pivotrc::corpus::sort_and_take_best;
use pivotrc::{
    filter_pairs, oversample_questions, split_corpus, AlignedPair, FilterConfig, LanguageTag,
    OversampleConfig,
};

fn pair(src: &str, tgt: &str, score: f64) -> AlignedPair {
    AlignedPair {
        source_sentence: src.split_whitespace().map(String::from).collect(),
        target_sentence: tgt.split_whitespace().map(String::from).collect(),
        alignment_score: score,
    }
}

fn main() -> pivotrc::Result<()> {
    let pairs = vec![
        pair("der schnelle braune fuchs springt hoch", "the quick brown fox jumps high", 0.9),
        pair("zu kurz", "too short", 0.8),
        pair("ein guter satz mit vielen klaren worten", "a good sentence with many clear words", 0.4),
        pair("ein schwach ausgerichteter satz hier drin", "badly aligned words live here now", -0.2),
        pair("noch ein ordentlicher satz zum behalten", "another decent sentence worth keeping", 0.1),
    ];

    let de = filter_pairs(&pairs, &FilterConfig::for_language(&LanguageTag::new("de")?));
    println!("de filter keeps {} of {} pairs:", de.len(), pairs.len());
    for p in &de {
        println!("  score {:+.1}: {}", p.alignment_score, p.source_sentence.join(" "));
    }

    // Japanese corpora run with a lower score threshold (-0.3), so the
    // negatively scored pair survives.
    let ja = filter_pairs(&pairs, &FilterConfig::for_language(&LanguageTag::new("ja")?));
    println!("ja filter keeps {} (threshold -0.3 admits the {:+.1} pair)", ja.len(), -0.2);

    let best = sort_and_take_best(&de, 2)?;
    println!("\ntop 2 by score: {:?}", best.iter().map(|p| p.alignment_score).collect::<Vec<_>>());

    // Question text is rare in translation corpora, so question pairs are
    // oversampled into the training mix.
    let questions = vec![pair("wo springt der fuchs", "where does the fox jump", 0.7)];
    let mixed = oversample_questions(&de, &questions, &OversampleConfig::default());
    println!(
        "oversampling appends each of {} questions x{}: {} -> {} pairs",
        questions.len(),
        OversampleConfig::default().duplication_factor_l,
        de.len(),
        mixed.len()
    );

    let (train, dev) = split_corpus(mixed, 3, 42)?;
    println!("seeded split: {} train / {} dev", train.len(), dev.len());
    Ok(())
}
