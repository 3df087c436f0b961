use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const MODELS: [&str; 4] = ["m0", "m1", "m2", "m3"];
const WORDS: [&str; 8] = ["the", "cat", "sat", "on", "a", "red", "mat", "today"];

fn asrcause(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asrcause"))
        .env_remove("ASRCAUSE_JOBS")
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = asrcause(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

fn noisy(rng: &mut ChaCha8Rng, words: &[&str], p: f64) -> String {
    let mut out = Vec::new();
    for &w in words {
        if !rng.random_bool(p) {
            out.push(w);
        } else {
            match rng.random_range(0..3) {
                0 => out.push(WORDS[rng.random_range(0..WORDS.len())]),
                1 => {}
                _ => {
                    out.push(w);
                    out.push("uh");
                }
            }
        }
    }
    out.join(" ")
}

/// Records covering every grade and both genders with covariates filled in.
fn write_corpus(dir: &Path, n: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut lines = Vec::new();
    for i in 0..n {
        let len = rng.random_range(2..=10);
        let words: Vec<&str> = (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
        let grade = i % 11;
        let mut hyps = serde_json::Map::new();
        for (k, m) in MODELS.iter().enumerate() {
            let p = 0.05 + 0.05 * k as f64 + 0.02 * (10 - grade) as f64;
            hyps.insert(m.to_string(), noisy(&mut rng, &words, p).into());
        }
        let record = serde_json::json!({
            "id": format!("utt{i:04}"),
            "speaker_id": format!("spk{}", i % 17),
            "reference": words.join(" "),
            "hypotheses": hyps,
            "grade": if grade == 0 { "K".to_string() } else { grade.to_string() },
            "gender": if i % 2 == 0 { "boy" } else { "girl" },
            "snr_db": rng.random_range(0.0..40.0),
            "gop": -rng.random_range(0.0f64..2.0).powi(2),
            "vocab_difficulty": rng.random_range(5.0..12.0),
        });
        lines.push(record.to_string());
    }
    std::fs::write(dir.join("corpus.jsonl"), lines.join("\n") + "\n").unwrap();
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["report", "--in", "x.json", "--out", "r.json", "--graph", "paper-default", "--graph", "fig3e"][..],
        &["ace", "--treatment", "GoP", "--effect", "SubsErr"][..],
        &["align", "--in", "a", "--out", "b", "--bogus"][..],
        &["--jobs", "0", "synth", "--spec", "copy-pair", "--out", "o.json"][..],
        &[][..],
    ] {
        let out = asrcause(d, args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(asrcause(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn data_error_names_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("bad.jsonl"),
        "{\"id\":\"good\",\"reference\":\"a b\",\"hypotheses\":{\"m\":\"a\"}}\n\
         {\"id\":\"blank-ref\",\"reference\":\"  ...  \",\"hypotheses\":{\"m\":\"a\"}}\n",
    )
    .unwrap();
    let out = asrcause(d, &["align", "--in", "bad.jsonl", "--out", "scored.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "E_EMPTY_REF");
    assert_eq!(err["record"], "blank-ref");

    let out = asrcause(d, &["align", "--in", "missing.jsonl", "--out", "scored.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "E_IO");
}

#[test]
fn correlation_matrix_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d, 60);
    ok(d, &["correlate", "--in", "corpus.jsonl", "--models", "", "--out", "empty.csv"]);
    assert_eq!(read(d, "empty.csv"), "model\n");

    ok(d, &["correlate", "--in", "corpus.jsonl", "--out", "all.csv"]);
    let text = read(d, "all.csv");
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], ["model", "m0", "m1", "m2", "m3"]);
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row.len(), 5);
        assert_eq!(row[i + 1], "1.000000");
        for j in 0..4 {
            assert_eq!(row[j + 1], rows[j + 1][i + 1], "matrix is symmetric");
        }
    }

    ok(d, &["correlate", "--in", "corpus.jsonl", "--models", "m2,m0", "--out", "two.csv"]);
    assert!(read(d, "two.csv").starts_with("model,m0,m2\n"));
}

#[test]
fn grade_grouping_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d, 110);
    ok(
        d,
        &[
            "align", "--in", "corpus.jsonl", "--out", "scored.jsonl", "--summary", "summary.json", "--plot-dir",
            "plots",
        ],
    );
    let table = read(d, "plots/errors_by_group.csv");
    let groups: Vec<&str> = table
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("m0,"))
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(groups, ["K", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
    let summary = json(d, "summary.json");
    assert_eq!(summary["models"].as_array().unwrap().len(), 4);
    assert_eq!(summary["models"][0]["groups"].as_array().unwrap().len(), 11);

    ok(d, &["oracle", "--in", "corpus.jsonl", "--out", "oracle.json", "--selection", "sel.csv"]);
    let oracle = json(d, "oracle.json");
    let oracle_wer = oracle["oracle"]["wer"].as_f64().unwrap();
    for m in summary["models"].as_array().unwrap() {
        assert!(oracle_wer <= m["overall"]["wer"].as_f64().unwrap());
    }
    assert_eq!(read(d, "sel.csv").lines().count(), 111);
}

#[test]
fn align_skips_when_outputs_are_fresh() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d, 20);
    ok(d, &["align", "--in", "corpus.jsonl", "--out", "scored.jsonl"]);
    let fresh = read(d, "scored.jsonl");
    assert_eq!(fresh.lines().count(), 20);
    std::fs::write(d.join("scored.jsonl"), "stale\n").unwrap();

    let out = ok(d, &["align", "--in", "corpus.jsonl", "--out", "scored.jsonl"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("up to date"));
    assert_eq!(read(d, "scored.jsonl"), "stale\n");

    ok(d, &["align", "--in", "corpus.jsonl", "--out", "scored.jsonl", "--force"]);
    assert_eq!(read(d, "scored.jsonl"), fresh);
}

#[test]
fn corpus_pipeline_composes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d, 440);
    ok(d, &["align", "--in", "corpus.jsonl", "--out", "scored.jsonl"]);
    ok(
        d,
        &[
            "discretize", "--in", "scored.jsonl", "--model", "m1", "--out", "m1.json", "--schemes-out",
            "schemes.json",
        ],
    );
    // applying saved schemes reproduces the dataset
    ok(
        d,
        &["discretize", "--in", "scored.jsonl", "--model", "m1", "--out", "again.json", "--schemes-in", "schemes.json"],
    );
    assert_eq!(read(d, "m1.json"), read(d, "again.json"));

    ok(d, &["report", "--in", "m1.json", "--out", "report.json", "--plot-dir", "plots"]);
    let edges = read(d, "plots/edges.csv");
    assert_eq!(edges.lines().count(), 21);
    let report = json(d, "report.json");
    let rec = report["reports"][0]["edges"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["cause"] == "GoP" && e["effect"] == "SubsErr")
        .unwrap()
        .clone();
    assert_eq!(report["reports"][0]["model"], "m1");

    ok(
        d,
        &["ace", "--in", "m1.json", "--treatment", "GoP", "--effect", "SubsErr", "--out", "ace.json"],
    );
    let single = json(d, "ace.json");
    assert_eq!(single["ace"], rec["ace"]);
    assert_eq!(single["ace_per_level"], rec["ace_per_level"]);

    let given = rec["cmi_given"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect::<Vec<_>>()
        .join(",");
    ok(
        d,
        &["cmi", "--in", "m1.json", "--x", "GoP", "--y", "SubsErr", "--given", &given, "--out", "cmi.json"],
    );
    assert_eq!(json(d, "cmi.json")["cmi"], rec["cmi"]);

    ok(d, &["fit", "--in", "m1.json", "--out", "cpts.json"]);
    assert_eq!(json(d, "cpts.json").as_array().unwrap().len(), 9);
}

#[test]
fn synth_writes_truths_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth", "--spec", "copy-pair", "--n", "500", "--seed", "3", "--out", "a.json", "--truths", "t.json",
            "--write-spec", "spec.json",
        ],
    );
    ok(d, &["synth", "--spec", "spec.json", "--out", "b.json"]);
    assert_eq!(read(d, "a.json"), read(d, "b.json"));
    let truths = json(d, "t.json");
    let edges = truths["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 1);
    assert!(edges[0]["ace"].as_f64().unwrap() > 0.9);
}
