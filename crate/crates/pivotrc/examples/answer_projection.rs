//! One answer, step by step: a hand-built French-to-English translation with
//! a word-order swap, reader distributions over the English side, span
//! selection, and projection back through the attention to French characters.
//!
//!     cargo run --example answer_projection

use pivotrc::{
    extract_answer, AttentionMatrix, LanguageTag, SpanDistributions, SpanSelectConfig,
    TokenizedText, TranslationRecord,
};

fn main() -> pivotrc::Result<()> {
    let source = TokenizedText::from_whitespace("le chat noir dort", LanguageTag::new("fr")?);
    let target = TokenizedText::from_whitespace("the black cat sleeps", LanguageTag::new("en")?);

    // Column j is the alignment distribution of English token j over the
    // French tokens. "black" points at "noir" (2) and "cat" at "chat" (1):
    // the adjective order swaps.
    let attention = AttentionMatrix::from_rows(vec![
        vec![0.85, 0.05, 0.05, 0.05], // le
        vec![0.05, 0.05, 0.85, 0.05], // chat <- cat
        vec![0.05, 0.85, 0.05, 0.05], // noir <- black
        vec![0.05, 0.05, 0.05, 0.85], // dort
    ])?;
    let record = TranslationRecord {
        source,
        target,
        attention,
        sentence_blocks: None,
    };
    assert!(pivotrc::types::validate_record(&record).is_empty());

    println!("source: {}", record.source.raw);
    println!("target: {}", record.target.raw);
    for (j, token) in record.target.tokens.iter().enumerate() {
        let weights: Vec<String> = record
            .attention
            .column(j)
            .map(|w| format!("{w:.2}"))
            .collect();
        println!("  {:<6} column {j}: [{}]", token.surface, weights.join(", "));
    }

    // A reader working on the English side: it believes the answer starts at
    // "black" and ends at "cat".
    let dists = SpanDistributions::new(
        vec![0.05, 0.80, 0.10, 0.05],
        vec![0.05, 0.05, 0.85, 0.05],
    )?;

    let extracted = extract_answer(&record, &dists, &SpanSelectConfig::default())?;
    println!(
        "\npivot span  : tokens {}..={} ({:?})",
        extracted.pivot_span.start,
        extracted.pivot_span.end,
        record.target.span_text(extracted.pivot_span)?
    );
    println!(
        "source span : tokens {}..={} (projected envelope)",
        extracted.source_span.start, extracted.source_span.end
    );
    println!(
        "answer      : {:?} at chars {}..{} of the source",
        extracted.answer_text, extracted.char_range.0, extracted.char_range.1
    );
    println!("dilation    : {:.2}", extracted.dilation);

    // The answer is a literal span of the original context — the property
    // that back-translated answers lose.
    let chars: String = record
        .source
        .raw
        .chars()
        .skip(extracted.char_range.0)
        .take(extracted.char_range.1 - extracted.char_range.0)
        .collect();
    assert_eq!(chars, extracted.answer_text);
    println!("\nverbatim substring of the source: confirmed");
    Ok(())
}
