use std::path::Path;
use std::process::{Command, Output};

use elosteer::study::{read_jsonl, DatasetRow};

fn elosteer(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_elosteer"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "elosteer {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_trial(dir: &Path) -> String {
    let cfg = dir.join("trial.toml");
    std::fs::write(&cfg, "learners_per_group = 4\nseries_count = 2\nseed = 5\n").unwrap();
    cfg.to_str().unwrap().to_string()
}

#[test]
fn simulate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_trial(dir.path());
    let log = dir.path().join("log.jsonl");
    let out = elosteer(&["--config", &cfg, "simulate", "--out", log.to_str().unwrap()]);
    let summary = String::from_utf8(out.stdout).unwrap();
    for g in ["NONE ", "CONTROL ", "CONTROL+IMPACT "] {
        assert!(summary.lines().any(|l| l.starts_with(g)), "{summary}");
    }
    let records = read_jsonl(std::fs::read(&log).unwrap().as_slice()).unwrap();
    assert!(!records.is_empty());

    // Same seed, same log; a different seed changes it.
    let again = elosteer(&["--config", &cfg, "simulate"]);
    assert_eq!(again.stdout, std::fs::read(&log).unwrap());
    let other = elosteer(&["--config", &cfg, "--seed", "6", "simulate"]);
    assert_ne!(other.stdout, again.stdout);

    let text = elosteer(&["analyze", "--log", log.to_str().unwrap()]);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("preference_revision"), "{text}");

    let jsonl = elosteer(&["analyze", "--log", log.to_str().unwrap(), "--format", "jsonl", "--welch"]);
    for line in String::from_utf8(jsonl.stdout).unwrap().lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn ingest_and_export_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let catalog = dir.path().join("catalog.jsonl");
    let lines: Vec<String> = (0..8)
        .map(|i| {
            serde_json::json!({
                "id": format!("g{i}"),
                "topic": "geometry",
                "statement": "angle?",
                "choices": ["30", "60"],
                "correct_index": 0,
                "level": "competent",
            })
            .to_string()
        })
        .collect();
    std::fs::write(&catalog, lines.join("\n")).unwrap();
    let out = elosteer(&["--data-dir", data.to_str().unwrap(), "ingest", catalog.to_str().unwrap()]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("ingested 8"));
    assert!(data.join("events.jsonl").exists());
    assert!(data.join("study.json").exists());

    let failed = Command::new(env!("CARGO_BIN_EXE_elosteer"))
        .args(["--data-dir", data.to_str().unwrap(), "ingest", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!failed.status.success());

    // No learners yet: the dataset is empty but valid.
    let ds = dir.path().join("dataset.jsonl");
    elosteer(&["--data-dir", data.to_str().unwrap(), "export-dataset", "--out", ds.to_str().unwrap()]);
    let rows: Vec<DatasetRow> = std::fs::read_to_string(&ds)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(rows.is_empty());
}

#[test]
fn exported_dataset_feeds_the_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_trial(dir.path());
    let data = dir.path().join("data");
    std::fs::create_dir_all(&data).unwrap();
    // A simulated log placed as a data directory's event log.
    let out = elosteer(&["--config", &cfg, "simulate"]);
    std::fs::write(data.join("events.jsonl"), &out.stdout).unwrap();

    let ds = dir.path().join("dataset.jsonl");
    elosteer(&["--data-dir", data.to_str().unwrap(), "export-dataset", "--out", ds.to_str().unwrap()]);
    let from_dataset = elosteer(&["analyze", "--dataset", ds.to_str().unwrap(), "--format", "json"]);
    let from_dir = elosteer(&["--data-dir", data.to_str().unwrap(), "analyze", "--format", "json"]);
    assert_eq!(from_dataset.stdout, from_dir.stdout);
    let report: serde_json::Value = serde_json::from_slice(&from_dir.stdout).unwrap();
    assert_eq!(report["group_sizes"], serde_json::json!([4, 4, 4]));
}
