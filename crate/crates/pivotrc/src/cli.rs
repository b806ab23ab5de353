//! Command-line front end. Every subcommand is a thin wrapper over library
//! calls — the same operations the `examples/` directory demonstrates — with
//! JSONL/JSON files on both ends and atomic output writes.
//!
//! Exit codes: 0 success, 1 runtime failure (bad file, failed run), 2 usage
//! error (unknown flags, missing arguments).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    filter_pairs, load_squad, oversample_questions, save_squad, split_corpus, AlignedPair,
    FilterConfig, OversampleConfig,
};
use crate::error::{Error, Result};
use crate::jsonl::{read_jsonl, write_jsonl, write_string_atomic};
use crate::metrics::{evaluate_dataset, EvalReport, NormalizationConfig};
use crate::oracle::gen_synthetic_dataset;
use crate::pipeline::{
    noise_sweep, run_baseline, run_pipeline, sweep_to_csv, PipelineConfig, PipelineMode,
    PipelineRun, SweepParameter,
};
use crate::types::{LanguageTag, Prediction, QAExample};

#[derive(Parser)]
#[command(
    name = "pivotrc",
    version,
    about = "Cross-lingual extractive QA via a pivot language",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare parallel corpora: filter, oversample, split.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Generate or inspect QA datasets.
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
    /// Run the answering pipeline, its baseline, or a noise sweep.
    Pipeline {
        #[command(subcommand)]
        command: PipelineCommand,
    },
    /// Score a prediction file against a dataset.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Keep pairs that pass the score threshold and length band.
    Filter {
        /// Aligned pairs, one JSON object per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Apply this language's score threshold (e.g. ja uses -0.3).
        #[arg(long)]
        language: Option<String>,
        /// Override the score threshold.
        #[arg(long)]
        min_score: Option<f64>,
        /// Override the minimum token length.
        #[arg(long)]
        min_len: Option<usize>,
        /// Override the maximum token length.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Append each question pair to the corpus several times.
    Oversample {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Copies of each question pair (default 10).
        #[arg(long)]
        factor: Option<usize>,
    },
    /// Shuffle with a seed and split off a dev set.
    Split {
        #[arg(long)]
        input: PathBuf,
        /// Dev-set size; the rest becomes the train set.
        #[arg(long)]
        n_dev: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the train split.
        #[arg(long)]
        train: PathBuf,
        /// Output path for the dev split.
        #[arg(long)]
        dev: PathBuf,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Generate a synthetic dataset and its lexicon.
    Gen {
        /// Number of examples.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        lexicon_size: usize,
        /// Context length in tokens.
        #[arg(long, default_value_t = 30)]
        ctx_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for dataset.json and lexicon.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Load and validate a SQuAD-shaped dataset, printing a summary.
    Load {
        #[arg(long)]
        input: PathBuf,
        /// Language tag for the dataset's contexts and questions.
        #[arg(long)]
        language: String,
    },
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Translate, read, and project answers back (mode from the config).
    Run(RunArgs),
    /// Force the back-translation baseline regardless of the config's mode.
    Baseline(RunArgs),
    /// Re-run the pipeline across noise rates and seeds.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; see the README for the schema.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's pipeline seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for predictions.jsonl, failures.jsonl, report.json
    /// and report.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON run configuration; the translator must be the oracle.
    #[arg(long)]
    config: PathBuf,
    /// Which noise rate to vary: drop_rate or paraphrase_rate.
    #[arg(long, value_parser = parse_sweep_param)]
    param: SweepParameter,
    /// Comma-separated rate values, strictly ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Comma-separated seeds to average over.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Output directory for sweep.csv and sweep.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// SQuAD-shaped dataset with the gold answers.
    #[arg(long)]
    dataset: PathBuf,
    /// Language tag for the dataset.
    #[arg(long)]
    language: String,
    /// Predictions, one JSON object per line.
    #[arg(long)]
    predictions: PathBuf,
    /// Optional directory for report.json and report.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_sweep_param(s: &str) -> std::result::Result<SweepParameter, String> {
    match s {
        "drop_rate" => Ok(SweepParameter::DropRate),
        "paraphrase_rate" => Ok(SweepParameter::ParaphraseRate),
        other => Err(format!(
            "unknown parameter {other:?}; expected drop_rate or paraphrase_rate"
        )),
    }
}

/// The file accepted by `pipeline run --config`: a dataset reference plus
/// the pipeline configuration itself. Relative paths (the dataset and any
/// backend files) resolve against the config file's directory.
#[derive(Serialize, Deserialize)]
struct RunConfigFile {
    dataset: PathBuf,
    language: String,
    #[serde(flatten)]
    pipeline: PipelineConfig,
}

/// Parses `argv` (including the program name) and runs the selected
/// command, returning the process exit code.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Corpus { command } => corpus_command(command),
        Command::Dataset { command } => dataset_command(command),
        Command::Pipeline { command } => pipeline_command(command),
        Command::Eval(args) => eval_command(args),
    }
}

fn corpus_command(command: CorpusCommand) -> Result<()> {
    match command {
        CorpusCommand::Filter {
            input,
            output,
            language,
            min_score,
            min_len,
            max_len,
        } => {
            let mut cfg = match language {
                Some(code) => FilterConfig::for_language(&LanguageTag::new(code)?),
                None => FilterConfig::default(),
            };
            if let Some(v) = min_score {
                cfg.min_score = v;
            }
            if let Some(v) = min_len {
                cfg.min_len = v;
            }
            if let Some(v) = max_len {
                cfg.max_len = v;
            }
            let pairs: Vec<AlignedPair> = read_jsonl(&input)?;
            let kept = filter_pairs(&pairs, &cfg);
            write_jsonl(&output, &kept)?;
            println!("kept {} of {} pairs -> {}", kept.len(), pairs.len(), output.display());
            Ok(())
        }
        CorpusCommand::Oversample {
            corpus,
            questions,
            output,
            factor,
        } => {
            let corpus_pairs: Vec<AlignedPair> = read_jsonl(&corpus)?;
            let question_pairs: Vec<AlignedPair> = read_jsonl(&questions)?;
            let cfg = match factor {
                Some(duplication_factor_l) => OversampleConfig {
                    duplication_factor_l,
                },
                None => OversampleConfig::default(),
            };
            let mix = oversample_questions(&corpus_pairs, &question_pairs, &cfg);
            write_jsonl(&output, &mix)?;
            println!(
                "mixed {} corpus + {} x {} question pairs -> {} ({} total)",
                corpus_pairs.len(),
                question_pairs.len(),
                cfg.duplication_factor_l,
                output.display(),
                mix.len()
            );
            Ok(())
        }
        CorpusCommand::Split {
            input,
            n_dev,
            seed,
            train,
            dev,
        } => {
            let pairs: Vec<AlignedPair> = read_jsonl(&input)?;
            let total = pairs.len();
            let (train_pairs, dev_pairs) = split_corpus(pairs, n_dev, seed)?;
            write_jsonl(&train, &train_pairs)?;
            write_jsonl(&dev, &dev_pairs)?;
            println!(
                "split {total} pairs -> {} train ({}), {} dev ({})",
                train_pairs.len(),
                train.display(),
                dev_pairs.len(),
                dev.display()
            );
            Ok(())
        }
    }
}

fn dataset_command(command: DatasetCommand) -> Result<()> {
    match command {
        DatasetCommand::Gen {
            n,
            lexicon_size,
            ctx_len,
            seed,
            out_dir,
        } => {
            let data = gen_synthetic_dataset(n, lexicon_size, ctx_len, seed)?;
            fs::create_dir_all(&out_dir)?;
            let dataset_path = out_dir.join("dataset.json");
            let lexicon_path = out_dir.join("lexicon.json");
            save_squad(&dataset_path, &data.examples, "synthetic")?;
            write_string_atomic(
                &lexicon_path,
                &serde_json::to_string_pretty(&data.lexicon)?,
            )?;
            println!(
                "generated {} examples -> {} (lexicon: {})",
                data.examples.len(),
                dataset_path.display(),
                lexicon_path.display()
            );
            Ok(())
        }
        DatasetCommand::Load { input, language } => {
            let language = LanguageTag::new(language)?;
            let examples = load_squad(&input, &language)?;
            let answers: usize = examples.iter().map(|e| e.gold_answers.len()).sum();
            let tokens: usize = examples.iter().map(|e| e.context.len()).sum();
            println!(
                "loaded {} examples ({answers} answers, {tokens} context tokens) from {}",
                examples.len(),
                input.display()
            );
            Ok(())
        }
    }
}

fn load_run_config(path: &Path) -> Result<(Vec<QAExample>, PipelineConfig)> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
    })?;
    let mut file: RunConfigFile = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("bad config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    if file.dataset.is_relative() {
        file.dataset = base.join(&file.dataset);
    }
    file.pipeline.resolve_paths(base);
    let language = LanguageTag::new(file.language)?;
    let examples = load_squad(&file.dataset, &language)?;
    Ok((examples, file.pipeline))
}

fn write_run_outputs(out: &Path, run: &PipelineRun) -> Result<()> {
    fs::create_dir_all(out)?;
    write_jsonl(&out.join("predictions.jsonl"), &run.predictions)?;
    write_jsonl(&out.join("failures.jsonl"), &run.failures)?;
    write_string_atomic(
        &out.join("report.json"),
        &serde_json::to_string_pretty(&run.report)?,
    )?;
    write_string_atomic(&out.join("report.txt"), &render_report(&run.report))?;
    Ok(())
}

fn pipeline_command(command: PipelineCommand) -> Result<()> {
    match command {
        PipelineCommand::Run(args) => run_command(args, None),
        PipelineCommand::Baseline(args) => run_command(args, Some(PipelineMode::BackTranslation)),
        PipelineCommand::Sweep(args) => sweep_command(args),
    }
}

fn run_command(args: RunArgs, force_mode: Option<PipelineMode>) -> Result<()> {
    let (examples, mut cfg) = load_run_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(mode) = force_mode {
        cfg.mode = mode;
    }
    let run = match cfg.mode {
        PipelineMode::BackTranslation => run_baseline(&examples, &cfg),
        PipelineMode::RuntimeMt => run_pipeline(&examples, &cfg),
    }?;
    write_run_outputs(&args.out, &run)?;
    print!("{}", render_report(&run.report));
    if !run.failures.is_empty() {
        println!("{} example(s) failed; see failures.jsonl", run.failures.len());
    }
    println!("wrote {}", args.out.join("predictions.jsonl").display());
    Ok(())
}

fn sweep_command(args: SweepArgs) -> Result<()> {
    let (examples, cfg) = load_run_config(&args.config)?;
    let rows = noise_sweep(&examples, &cfg, args.param, &args.values, &args.seeds)?;
    fs::create_dir_all(&args.out)?;
    let csv = sweep_to_csv(&rows);
    write_string_atomic(&args.out.join("sweep.csv"), &csv)?;
    write_string_atomic(
        &args.out.join("sweep.json"),
        &serde_json::to_string_pretty(&rows)?,
    )?;
    print!("{csv}");
    println!("wrote {}", args.out.join("sweep.csv").display());
    Ok(())
}

fn eval_command(args: EvalArgs) -> Result<()> {
    let language = LanguageTag::new(args.language)?;
    let examples = load_squad(&args.dataset, &language)?;
    let predictions: Vec<Prediction> = read_jsonl(&args.predictions)?;
    let report = evaluate_dataset(&examples, &predictions, &NormalizationConfig::default())?;
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        write_string_atomic(&out.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
        write_string_atomic(&out.join("report.txt"), &render_report(&report))?;
    }
    print!("{}", render_report(&report));
    Ok(())
}

/// Renders a report as a two-column aligned text table.
pub fn render_report(report: &EvalReport) -> String {
    let answered = report
        .per_example
        .iter()
        .filter(|p| p.substring.is_some())
        .count();
    let rows: Vec<(&str, String)> = vec![
        ("char_f1", format!("{:.4}", report.f1)),
        ("exact_match", format!("{:.4}", report.em)),
        ("substring_rate", format!("{:.4}", report.substring_rate)),
        ("examples", report.n.to_string()),
        ("answered", answered.to_string()),
    ];
    let name_width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let value_width = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (name, value) in rows {
        out.push_str(&format!("{name:<name_width$}  {value:>value_width$}\n"));
    }
    out
}
