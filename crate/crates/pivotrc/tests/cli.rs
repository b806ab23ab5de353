//! End-to-end CLI tests: every subcommand run through the real argv parser
//! against files on disk, checking exit codes and produced artifacts.

use std::path::{Path, PathBuf};

use pivotrc::cli::cli_main;
use pivotrc::corpus::{filter_pairs, AlignedPair, FilterConfig};
use pivotrc::jsonl::{read_jsonl, write_jsonl};
use pivotrc::metrics::EvalReport;
use pivotrc::types::{LanguageTag, Prediction, PredictionMode, QAExample};

fn run(args: &[&str]) -> i32 {
    let argv: Vec<String> = std::iter::once("pivotrc")
        .chain(args.iter().copied())
        .map(|s| s.to_string())
        .collect();
    cli_main(&argv)
}

fn fixture(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(path)
}

fn sample_pairs(n: usize) -> Vec<AlignedPair> {
    (0..n)
        .map(|i| AlignedPair {
            source_sentence: (0..(i % 60) + 1).map(|k| format!("s{i}_{k}")).collect(),
            target_sentence: (0..(i % 55) + 1).map(|k| format!("t{i}_{k}")).collect(),
            alignment_score: (i as f64 / n as f64) * 2.0 - 1.0,
        })
        .collect()
}

#[test]
fn corpus_filter_defaults_and_language_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pairs.jsonl");
    let pairs = sample_pairs(120);
    write_jsonl(&input, &pairs).unwrap();

    let out_default = dir.path().join("kept.jsonl");
    assert_eq!(
        run(&[
            "corpus",
            "filter",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out_default.to_str().unwrap(),
        ]),
        0
    );
    let kept: Vec<AlignedPair> = read_jsonl(&out_default).unwrap();
    assert_eq!(kept, filter_pairs(&pairs, &FilterConfig::default()));
    assert!(!kept.is_empty() && kept.len() < pairs.len());

    let out_ja = dir.path().join("kept_ja.jsonl");
    assert_eq!(
        run(&[
            "corpus",
            "filter",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out_ja.to_str().unwrap(),
            "--language",
            "ja",
        ]),
        0
    );
    let kept_ja: Vec<AlignedPair> = read_jsonl(&out_ja).unwrap();
    let ja_cfg = FilterConfig::for_language(&LanguageTag::new("ja").unwrap());
    assert_eq!(kept_ja, filter_pairs(&pairs, &ja_cfg));
    assert!(kept_ja.len() > kept.len(), "ja threshold admits more pairs");
}

#[test]
fn corpus_oversample_appends_duplicated_questions() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.jsonl");
    let questions_path = dir.path().join("questions.jsonl");
    let out = dir.path().join("merged.jsonl");
    write_jsonl(&corpus_path, &sample_pairs(30)).unwrap();
    write_jsonl(&questions_path, &sample_pairs(4)).unwrap();

    assert_eq!(
        run(&[
            "corpus",
            "oversample",
            "--corpus",
            corpus_path.to_str().unwrap(),
            "--questions",
            questions_path.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--factor",
            "3",
        ]),
        0
    );
    let merged: Vec<AlignedPair> = read_jsonl(&out).unwrap();
    assert_eq!(merged.len(), 30 + 3 * 4);
    // Corpus first, then each question three times in a row.
    assert_eq!(merged[30], merged[31]);
    assert_eq!(merged[31], merged[32]);
    assert_ne!(merged[32], merged[33]);
}

#[test]
fn corpus_split_partitions_with_seeded_shuffle() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pairs.jsonl");
    let pairs = sample_pairs(50);
    write_jsonl(&input, &pairs).unwrap();
    let train_path = dir.path().join("train.jsonl");
    let dev_path = dir.path().join("dev.jsonl");

    assert_eq!(
        run(&[
            "corpus",
            "split",
            "--input",
            input.to_str().unwrap(),
            "--n-dev",
            "10",
            "--seed",
            "3",
            "--train",
            train_path.to_str().unwrap(),
            "--dev",
            dev_path.to_str().unwrap(),
        ]),
        0
    );
    let train: Vec<AlignedPair> = read_jsonl(&train_path).unwrap();
    let dev: Vec<AlignedPair> = read_jsonl(&dev_path).unwrap();
    assert_eq!(train.len(), 40);
    assert_eq!(dev.len(), 10);
    let mut all: Vec<&AlignedPair> = train.iter().chain(&dev).collect();
    all.sort_by(|a, b| a.source_sentence[0].cmp(&b.source_sentence[0]));
    let mut original: Vec<&AlignedPair> = pairs.iter().collect();
    original.sort_by(|a, b| a.source_sentence[0].cmp(&b.source_sentence[0]));
    assert_eq!(all, original, "split must partition the input");

    // Asking for a dev set as large as the corpus is a usage error.
    assert_eq!(
        run(&[
            "corpus",
            "split",
            "--input",
            input.to_str().unwrap(),
            "--n-dev",
            "50",
            "--train",
            train_path.to_str().unwrap(),
            "--dev",
            dev_path.to_str().unwrap(),
        ]),
        1
    );
}

#[test]
fn dataset_gen_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "dataset",
            "gen",
            "--n",
            "15",
            "--lexicon-size",
            "25",
            "--ctx-len",
            "8",
            "--seed",
            "4",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]),
        0
    );
    assert!(dir.path().join("dataset.json").exists());
    assert!(dir.path().join("lexicon.json").exists());
    assert_eq!(
        run(&[
            "dataset",
            "load",
            "--input",
            dir.path().join("dataset.json").to_str().unwrap(),
            "--language",
            "synL",
        ]),
        0
    );
    let examples = pivotrc::corpus::load_squad(
        &dir.path().join("dataset.json"),
        &LanguageTag::new("synL").unwrap(),
    )
    .unwrap();
    assert_eq!(examples.len(), 15);
}

#[test]
fn dataset_load_rejects_bad_offsets() {
    assert_eq!(
        run(&[
            "dataset",
            "load",
            "--input",
            fixture("squad_bad_offset.json").to_str().unwrap(),
            "--language",
            "fr",
        ]),
        1
    );
}

#[test]
fn pipeline_run_reproduces_golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "pipeline",
            "run",
            "--config",
            fixture("golden/config.json").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]),
        0
    );
    let produced = std::fs::read(dir.path().join("predictions.jsonl")).unwrap();
    let expected = std::fs::read(fixture("golden/expected_predictions.jsonl")).unwrap();
    assert_eq!(produced, expected);

    let report: EvalReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report.em, 100.0);
    assert_eq!(report.n, 3);
    let table = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(table.contains("char_f1"));
    assert!(std::fs::read_to_string(dir.path().join("failures.jsonl")).unwrap().is_empty());
}

#[test]
fn pipeline_baseline_forces_back_translation_mode() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "pipeline",
            "baseline",
            "--config",
            fixture("perfect/config.json").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]),
        0
    );
    let predictions: Vec<Prediction> =
        read_jsonl(&dir.path().join("predictions.jsonl")).unwrap();
    assert_eq!(predictions.len(), 12);
    for p in &predictions {
        assert_eq!(p.mode, PredictionMode::Generated);
        assert_eq!(p.char_range, None);
    }
}

#[test]
fn pipeline_sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "pipeline",
            "sweep",
            "--config",
            fixture("perfect/config.json").to_str().unwrap(),
            "--param",
            "drop_rate",
            "--values",
            "0,0.2",
            "--seeds",
            "1,2",
            "--out",
            dir.path().to_str().unwrap(),
        ]),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,value,f1,em,n_seeds");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("drop_rate,0,"));
    assert!(lines[2].starts_with("drop_rate,0.2,"));
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",2")));

    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["param"], "drop_rate");
    assert_eq!(rows[0]["n_seeds"], 2);
}

#[test]
fn eval_scores_stored_predictions() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "eval",
            "--dataset",
            fixture("golden/dataset.json").to_str().unwrap(),
            "--language",
            "fr",
            "--predictions",
            fixture("golden/expected_predictions.jsonl").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]),
        0
    );
    let report: EvalReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report.f1, 100.0);
    assert_eq!(report.em, 100.0);
    assert_eq!(report.substring_rate, 1.0);
}

#[test]
fn eval_partial_predictions_count_against_em_not_substring() {
    let dir = tempfile::tempdir().unwrap();
    let language = LanguageTag::new("fr").unwrap();
    let examples: Vec<QAExample> =
        pivotrc::corpus::load_squad(&fixture("golden/dataset.json"), &language).unwrap();
    // Keep only the first prediction; the other two examples go unanswered.
    let all: Vec<Prediction> = read_jsonl(&fixture("golden/expected_predictions.jsonl")).unwrap();
    let partial = vec![all[0].clone()];
    let path = dir.path().join("partial.jsonl");
    write_jsonl(&path, &partial).unwrap();

    assert_eq!(
        run(&[
            "eval",
            "--dataset",
            fixture("golden/dataset.json").to_str().unwrap(),
            "--language",
            "fr",
            "--predictions",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]),
        0
    );
    let report: EvalReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report.n, examples.len());
    assert!((report.em - 100.0 / 3.0).abs() < 1e-9);
    // Substring rate is over predictions made, not over examples.
    assert_eq!(report.substring_rate, 1.0);
}

#[test]
fn usage_and_runtime_exit_codes() {
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&[]), 2);
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["pipeline", "run"]), 2); // missing --config
    assert_eq!(
        run(&["pipeline", "run", "--config", "/nonexistent/config.json"]),
        1
    );
    assert_eq!(
        run(&["pipeline", "sweep", "--config", "x.json", "--param", "bogus", "--values", "0", "--seeds", "1"]),
        2
    );
}
