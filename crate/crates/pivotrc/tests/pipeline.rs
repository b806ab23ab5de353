//! Integration tests for the pipeline: file-backed golden run, determinism
//! across worker counts and cache settings, HTTP backends against a local
//! mock server, and failure isolation.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use pivotrc::corpus::load_squad;
use pivotrc::jsonl::read_jsonl;
use pivotrc::metrics::NormalizationConfig;
use pivotrc::oracle::{gen_synthetic_dataset, NoiseConfig};
use pivotrc::pipeline::{
    run_pipeline, translate_remote, LexiconSpec, PipelineConfig, PipelineMode, RcBackend,
    TranslatorBackend,
};
use pivotrc::span::SpanSelectConfig;
use pivotrc::types::{LanguageTag, Prediction};

fn fixture(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(path)
}

fn base_config(translator: TranslatorBackend, rc: RcBackend) -> PipelineConfig {
    PipelineConfig {
        translator,
        back_translator: None,
        rc,
        span_cfg: SpanSelectConfig::default(),
        norm_cfg: NormalizationConfig::default(),
        seed: 7,
        mode: PipelineMode::RuntimeMt,
        workers: 2,
        cache: true,
    }
}

#[test]
fn golden_file_backends_reproduce_handtraced_predictions() {
    let language = LanguageTag::new("fr").unwrap();
    let examples = load_squad(&fixture("golden/dataset.json"), &language).unwrap();
    let cfg = base_config(
        TranslatorBackend::File {
            path: fixture("golden/translations.jsonl"),
        },
        RcBackend::File {
            path: fixture("golden/rc.jsonl"),
        },
    );
    let run = run_pipeline(&examples, &cfg).unwrap();
    assert!(run.failures.is_empty(), "{:?}", run.failures);

    let expected: Vec<Prediction> = read_jsonl(&fixture("golden/expected_predictions.jsonl")).unwrap();
    assert_eq!(run.predictions, expected);
    assert_eq!(run.report.em, 100.0);
    assert_eq!(run.report.f1, 100.0);
    assert_eq!(run.report.substring_rate, 1.0);

    // The hand-traced reordering case: the attention permutes black/cat, so
    // the projected answer is the French order, not the English one.
    assert_eq!(run.predictions[0].answer_text, "chat noir");
    assert_eq!(run.predictions[0].char_range, Some((3, 12)));
}

#[test]
fn identical_output_for_any_worker_count_and_cache_setting() {
    let data = gen_synthetic_dataset(40, 30, 12, 5).unwrap();
    let make = |workers: usize, cache: bool| {
        let mut cfg = base_config(
            TranslatorBackend::Oracle {
                lexicon: LexiconSpec::Inline(data.lexicon.clone()),
                noise: NoiseConfig {
                    drop_rate: 0.2,
                    paraphrase_rate: 0.2,
                    epsilon: 0.05,
                    seed: 0,
                },
            },
            RcBackend::Keyword {
                temperature: 0.5,
                window: 3,
            },
        );
        cfg.workers = workers;
        cfg.cache = cache;
        run_pipeline(&data.examples, &cfg).unwrap()
    };
    let reference = make(1, true);
    for (workers, cache) in [(1, false), (4, true), (8, false), (8, true)] {
        let run = make(workers, cache);
        assert_eq!(run.predictions, reference.predictions, "workers={workers} cache={cache}");
        assert_eq!(
            run.report.per_example, reference.report.per_example,
            "workers={workers} cache={cache}"
        );
    }
}

#[test]
fn total_drop_fails_every_example_but_not_the_run() {
    let data = gen_synthetic_dataset(6, 20, 8, 3).unwrap();
    let cfg = base_config(
        TranslatorBackend::Oracle {
            lexicon: LexiconSpec::Inline(data.lexicon.clone()),
            noise: NoiseConfig {
                drop_rate: 1.0,
                ..NoiseConfig::default()
            },
        },
        RcBackend::Perfect { peak: 1.0 },
    );
    let run = run_pipeline(&data.examples, &cfg).unwrap();
    assert!(run.predictions.is_empty());
    assert_eq!(run.failures.len(), 6);
    assert_eq!(run.report.em, 0.0);
    assert_eq!(run.report.f1, 0.0);
}

#[test]
fn squad_loader_flattens_articles_and_keeps_all_answers() {
    let language = LanguageTag::new("fr").unwrap();
    let examples = load_squad(&fixture("squad_mini.json"), &language).unwrap();
    assert_eq!(examples.len(), 4);
    let ids: Vec<&str> = examples.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["m1", "m2", "m3", "m4"]);
    let multi = &examples[1];
    assert_eq!(multi.gold_answers.len(), 2);
    for e in &examples {
        for g in &e.gold_answers {
            let span = g.char_start..g.char_start + g.text.chars().count();
            let sliced: String = e
                .context
                .raw
                .chars()
                .skip(span.start)
                .take(span.len())
                .collect();
            assert_eq!(sliced, g.text, "offset mismatch in {}", e.id);
        }
    }
}

#[test]
fn squad_loader_rejects_bad_offsets_naming_the_example() {
    let language = LanguageTag::new("fr").unwrap();
    let err = load_squad(&fixture("squad_bad_offset.json"), &language).unwrap_err();
    assert!(err.to_string().contains("bad1"), "{err}");
}

// --- minimal HTTP mock -----------------------------------------------------

type Handler = dyn Fn(usize, serde_json::Value) -> (u16, String) + Send + Sync;

/// Serves HTTP POSTs on a local port, passing each JSON body to `handler`
/// together with a running request count. The server thread is detached; it
/// lives until the test process exits.
fn mock_server(handler: Arc<Handler>) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let count = Arc::new(AtomicUsize::new(0));
    let seen = count.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let Some(body) = read_request_body(&mut stream) else {
                continue;
            };
            let n = seen.fetch_add(1, Ordering::SeqCst);
            let parsed: serde_json::Value = match serde_json::from_slice(&body) {
                Ok(v) => v,
                Err(_) => serde_json::Value::Null,
            };
            let (status, response) = handler(n, parsed);
            let reason = if status == 200 { "OK" } else { "Error" };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{response}",
                response.len()
            );
            let _ = stream.flush();
        }
    });
    (format!("http://{addr}"), count)
}

fn read_request_body(stream: &mut std::net::TcpStream) -> Option<Vec<u8>> {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    let header_end = loop {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            return None;
        }
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
            break pos + 4;
        }
    };
    let headers = String::from_utf8_lossy(&buf[..header_end]).to_lowercase();
    let content_length: usize = headers
        .lines()
        .find_map(|l| l.strip_prefix("content-length:"))
        .and_then(|v| v.trim().parse().ok())?;
    while buf.len() < header_end + content_length {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            return None;
        }
        buf.extend_from_slice(&chunk[..n]);
    }
    Some(buf[header_end..header_end + content_length].to_vec())
}

/// Uppercases each token with an identity one-hot attention — a valid,
/// deterministic "translation service".
fn uppercase_translation(body: &serde_json::Value) -> String {
    let tokens: Vec<String> = body["tokens"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap().to_uppercase())
        .collect();
    let n = tokens.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    serde_json::json!({ "target_tokens": tokens, "attention": rows }).to_string()
}

#[test]
fn http_translator_end_to_end() {
    let handler: Arc<Handler> = Arc::new(|_, body| (200, uppercase_translation(&body)));
    let (endpoint, count) = mock_server(handler);

    let data = gen_synthetic_dataset(4, 15, 6, 9).unwrap();
    let mut cfg = base_config(
        TranslatorBackend::Http {
            endpoint: endpoint.clone(),
        },
        RcBackend::Perfect { peak: 1.0 },
    );
    cfg.workers = 2;
    let run = run_pipeline(&data.examples, &cfg).unwrap();
    assert!(run.failures.is_empty(), "{:?}", run.failures);
    assert_eq!(run.report.em, 100.0);
    assert_eq!(run.report.substring_rate, 1.0);
    // 4 contexts + 4 questions, one request each (responses are cached but
    // every input here is distinct).
    assert_eq!(count.load(Ordering::SeqCst), 8);
}

#[test]
fn http_translator_retries_5xx_then_succeeds() {
    let handler: Arc<Handler> = Arc::new(|n, body| {
        if n < 2 {
            (500, r#"{"error":"transient"}"#.to_string())
        } else {
            (200, uppercase_translation(&body))
        }
    });
    let (endpoint, count) = mock_server(handler);
    let text = pivotrc::types::TokenizedText::from_whitespace(
        "bonjour le monde",
        LanguageTag::new("fr").unwrap(),
    );
    let record = translate_remote(&endpoint, &text).unwrap();
    assert_eq!(record.target.raw, "BONJOUR LE MONDE");
    assert_eq!(count.load(Ordering::SeqCst), 3);
}

#[test]
fn http_translator_rejects_nonstochastic_attention_without_retry() {
    let handler: Arc<Handler> = Arc::new(|_, body| {
        let tokens: Vec<String> = body["tokens"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_str().unwrap().to_string())
            .collect();
        let n = tokens.len();
        let rows = vec![vec![0.5; n]; n];
        (
            200,
            serde_json::json!({ "target_tokens": tokens, "attention": rows }).to_string(),
        )
    });
    let (endpoint, count) = mock_server(handler);
    let text = pivotrc::types::TokenizedText::from_whitespace(
        "un deux trois",
        LanguageTag::new("fr").unwrap(),
    );
    let err = translate_remote(&endpoint, &text).unwrap_err();
    assert!(err.to_string().contains("sums to"), "{err}");
    // Validation failures are not transport errors: exactly one request.
    assert_eq!(count.load(Ordering::SeqCst), 1);
}

#[test]
fn http_translator_gives_up_after_three_attempts() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let text = pivotrc::types::TokenizedText::from_whitespace(
        "sans serveur",
        LanguageTag::new("fr").unwrap(),
    );
    let err = translate_remote(&endpoint, &text).unwrap_err();
    assert!(err.to_string().contains("after 3 attempts"), "{err}");
}

#[test]
fn http_rc_backend_end_to_end() {
    let handler: Arc<Handler> = Arc::new(|_, body| {
        if body.get("tokens").is_some() {
            // Translation request.
            return (200, uppercase_translation(&body));
        }
        // RC request: uniform distributions over the context tokens.
        let n = body["context_tokens"].as_array().unwrap().len();
        let p = vec![1.0 / n as f64; n];
        (
            200,
            serde_json::json!({ "p_start": p, "p_end": p }).to_string(),
        )
    });
    let (endpoint, _) = mock_server(handler);
    let data = gen_synthetic_dataset(3, 12, 5, 2).unwrap();
    let cfg = base_config(
        TranslatorBackend::Http {
            endpoint: endpoint.clone(),
        },
        RcBackend::Http { endpoint },
    );
    let run = run_pipeline(&data.examples, &cfg).unwrap();
    assert!(run.failures.is_empty(), "{:?}", run.failures);
    // Uniform distributions tie everywhere; selection falls back to the
    // lexicographically smallest span, token 0, so every answer is the
    // context's first word.
    for (p, e) in run.predictions.iter().zip(&data.examples) {
        assert_eq!(p.answer_text, e.context.tokens[0].surface);
        assert_eq!(p.char_range, Some((0, e.context.tokens[0].char_end)));
    }
}
