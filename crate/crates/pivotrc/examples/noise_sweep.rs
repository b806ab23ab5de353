//! Noise robustness curves: sweep the oracle translator's drop rate and
//! paraphrase rate while the keyword reader answers, averaging each point
//! over several seeds. Scores degrade as the translation gets noisier.
//!
//!     cargo run --example noise_sweep

use pivotrc::{
    gen_synthetic_dataset, noise_sweep, sweep_to_csv, LexiconSpec, NoiseConfig, PipelineConfig,
    RcBackend, SweepParameter, TranslatorBackend,
};

fn main() -> pivotrc::Result<()> {
    let data = gen_synthetic_dataset(200, 300, 12, 7)?;
    let base = PipelineConfig::new(
        TranslatorBackend::Oracle {
            lexicon: LexiconSpec::Inline(data.lexicon.clone()),
            noise: NoiseConfig::default(),
        },
        RcBackend::Keyword {
            temperature: 1.0,
            window: 2,
        },
    );

    let values = [0.0, 0.1, 0.2, 0.3];
    let seeds = [1, 2, 3, 4, 5];
    for parameter in [SweepParameter::DropRate, SweepParameter::ParaphraseRate] {
        let rows = noise_sweep(&data.examples, &base, parameter, &values, &seeds)?;
        print!("{}", sweep_to_csv(&rows));
        println!();
    }
    println!("each row: mean F1/EM over {} seeds at that noise level", seeds.len());
    Ok(())
}
