//! The file-based interface: write a generated dataset, its lexicon, and a
//! pipeline config to disk in the formats the CLI consumes, then load
//! everything back and run from the config.
//!
//!     cargo run --example dataset_files

use pivotrc::{
    gen_synthetic_dataset, load_squad, run_pipeline, save_squad, LanguageTag, PipelineConfig,
};

fn main() -> pivotrc::Result<()> {
    let dir = std::env::temp_dir().join("pivotrc_dataset_files_example");
    std::fs::create_dir_all(&dir)?;

    let data = gen_synthetic_dataset(20, 30, 10, 3)?;
    save_squad(&dir.join("dataset.json"), &data.examples, "synthetic")?;
    std::fs::write(
        dir.join("lexicon.json"),
        serde_json::to_string_pretty(&data.lexicon)?,
    )?;
    // The same JSON `pipeline run --config` takes; unset fields use defaults.
    std::fs::write(
        dir.join("config.json"),
        serde_json::json!({
            "translator": { "kind": "oracle", "lexicon": "lexicon.json" },
            "rc": { "kind": "perfect", "peak": 1.0 },
            "seed": 3
        })
        .to_string(),
    )?;
    println!("wrote dataset.json, lexicon.json, config.json to {}", dir.display());

    let examples = load_squad(&dir.join("dataset.json"), &LanguageTag::new("synL")?)?;
    println!("loaded {} examples back (offsets validated on load)", examples.len());

    let mut cfg: PipelineConfig =
        serde_json::from_str(&std::fs::read_to_string(dir.join("config.json"))?)?;
    cfg.resolve_paths(&dir); // lexicon.json is relative to the config file
    let run = run_pipeline(&examples, &cfg)?;
    println!(
        "run from config: F1 {:.1}, EM {:.1}, {} failures",
        run.report.f1,
        run.report.em,
        run.failures.len()
    );

    let first = &run.predictions[0];
    println!(
        "first prediction: {:?} -> {:?} at {:?}",
        first.example_id, first.answer_text, first.char_range
    );
    Ok(())
}
