use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sst_core::pipeline::list_artifacts;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fixture_1000.jsonl")
}

fn sst(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sst"));
    cmd.args(args);
    for var in ["SST_CONFIG", "SST_TOP_N", "SST_INPUT", "SST_OUTPUT_DIR", "SST_JOBS"] {
        cmd.env_remove(var);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn files_under(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .map(|d| d.map(|e| e.unwrap().file_name().into_string().unwrap()).collect())
        .unwrap_or_default()
}

#[test]
fn ingest_conserves_counts_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    ok(sst(&["ingest", "-i", p(&fixture()), "-o", p(&first)], &[]));
    let rows = csv_rows(&first.join("ingest_summary.csv"));
    let get = |name: &str| -> usize { rows.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
    let read = get("records_read");
    assert_eq!(read, 1000);
    let parts: usize = ["malformed", "non_retweet", "invalid_timestamp", "incomplete", "duplicates", "retained"]
        .iter()
        .map(|n| get(n))
        .sum();
    assert_eq!(parts, read);

    ok(sst(&["ingest", "-i", p(&first.join("corpus.jsonl")), "-o", p(&second)], &[]));
    assert_eq!(
        fs::read(first.join("corpus.jsonl")).unwrap(),
        fs::read(second.join("corpus.jsonl")).unwrap()
    );
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = sst(&["ingest", "-i", "/no/such/file.jsonl", "-o", p(dir.path())], &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.jsonl"));
}

#[test]
fn rank_writes_27_tables_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(sst(&["rank", "-i", p(&fixture()), "-o", p(out)], &[]));
    }
    assert_eq!(files_under(&a.join("metrics")).len(), 27);
    assert_eq!(list_artifacts(&a).unwrap(), list_artifacts(&b).unwrap());
    for f in list_artifacts(&a).unwrap() {
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap());
    }
    let combined = csv_rows(&a.join("metrics_combined.csv"));
    assert_eq!(combined[0].len(), 28);
}

#[test]
fn single_user_corpus_has_one_row_per_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.jsonl");
    fs::write(
        &input,
        r#"{"record_id":"1","retweeter_id":"r1","original_user_id":"solo","timestamp":"2020-05-01T00:00:00Z","text":"hello #x","retweet_count":3,"reply_count":0,"like_count":1,"quote_count":0,"conspiracy_prob":0.95}
{"record_id":"2","retweeter_id":"r2","original_user_id":"solo","timestamp":"2020-05-02T00:00:00Z","text":"again","retweet_count":1,"reply_count":0,"like_count":0,"quote_count":0,"conspiracy_prob":0.2}
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(sst(&["rank", "-i", p(&input), "-o", p(&out)], &[]));
    for f in files_under(&out.join("metrics")) {
        assert_eq!(csv_rows(&out.join("metrics").join(f)).len(), 1);
    }
}

#[test]
fn dismantle_file_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two");
    ok(sst(&["dismantle", "-i", p(&fixture()), "-o", p(&two), "--metrics", "HIndex,g_index"], &[]));
    assert_eq!(files_under(&two.join("curves")), ["g_index.csv", "h_index.csv", "optimal.csv"].map(String::from).into());
    assert_eq!(files_under(&two.join("differences")).len(), 1);
    let cvm = csv_rows(&two.join("cvm_comparison.csv"));
    assert_eq!(cvm.len(), 3);
    for row in &cvm {
        let p_value: f64 = row[4].parse().unwrap();
        assert!((0.0..=1.0).contains(&p_value));
    }

    let ranked_users = csv_rows(&two.join("curves/optimal.csv")).len() - 1;
    let expected = (ranked_users as f64 * 0.001).ceil() as usize;
    assert_eq!(csv_rows(&two.join("superspreaders.csv")).len(), expected);

    let none = dir.path().join("none");
    ok(sst(&["dismantle", "-i", p(&fixture()), "-o", p(&none), "--metrics"], &[]));
    assert_eq!(files_under(&none.join("curves")), ["optimal.csv".to_string()].into());
    assert!(!none.join("differences").exists());
    assert!(!none.join("cvm_comparison.csv").exists());
}

#[test]
fn unknown_metric_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sst(&["dismantle", "-i", p(&fixture()), "-o", p(dir.path()), "--metrics", "k_index"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k_index"));
}

#[test]
fn analyze_skips_missing_toxicity_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let stripped = dir.path().join("no_toxicity.jsonl");
    let lines: Vec<String> = fs::read_to_string(fixture())
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("toxicity");
            v.to_string()
        })
        .collect();
    fs::write(&stripped, lines.join("\n") + "\n").unwrap();

    let out_dir = dir.path().join("out");
    let out = ok(sst(&["analyze", "-i", p(&stripped), "-o", p(&out_dir)], &[]));
    assert!(String::from_utf8_lossy(&out.stderr).contains("toxicity: skipped"));
    assert!(!out_dir.join("toxicity.csv").exists());
    assert!(out_dir.join("sentiment.csv").exists());
    let tests = csv_rows(&out_dir.join("stat_tests.csv"));
    assert!(tests.iter().all(|r| r[1] != "toxicity"));

    let full = dir.path().join("full");
    ok(sst(&["analyze", "-i", p(&fixture()), "-o", p(&full)], &[]));
    assert!(full.join("toxicity.csv").exists());
    let cohorts = csv_rows(&full.join("cohorts.csv"));
    let summary = csv_rows(&full.join("cohort_summary.csv"));
    let total: usize = summary.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(total, cohorts.len());
}

#[test]
fn synth_is_seeded_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(sst(&["synth", "--users", "100", "--seed", "42", "-o", p(out)], &[]));
    }
    let text = fs::read_to_string(a.join("synthetic_corpus.jsonl")).unwrap();
    assert_eq!(text, fs::read_to_string(b.join("synthetic_corpus.jsonl")).unwrap());
    let users: BTreeSet<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["original_user_id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(users.len(), 100);
}

#[test]
fn flag_beats_env_beats_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sst.toml");
    fs::write(&config, "top_n = 3\n").unwrap();
    let all_rows = |out: &Path| {
        csv_rows(&out.join("top_hashtags.csv"))
            .iter()
            .filter(|r| r[0] == "all")
            .count()
    };
    let input = fixture();
    let base = ["analyze", "-i", p(&input), "--config", p(&config)];

    let from_file = dir.path().join("file");
    ok(sst(&[&base[..], &["-o", p(&from_file)]].concat(), &[]));
    assert_eq!(all_rows(&from_file), 3);

    let from_env = dir.path().join("env");
    ok(sst(&[&base[..], &["-o", p(&from_env)]].concat(), &[("SST_TOP_N", "4")]));
    assert_eq!(all_rows(&from_env), 4);

    let from_flag = dir.path().join("flag");
    ok(sst(&[&base[..], &["-o", p(&from_flag), "--top-n", "5"]].concat(), &[("SST_TOP_N", "4")]));
    assert_eq!(all_rows(&from_flag), 5);
}

#[test]
fn outputs_use_lf_line_endings() {
    let dir = tempfile::tempdir().unwrap();
    ok(sst(&["report", "-i", p(&fixture()), "-o", p(dir.path()), "--jobs", "2"], &[]));
    for f in list_artifacts(dir.path()).unwrap() {
        let bytes = fs::read(dir.path().join(&f)).unwrap();
        assert!(!bytes.contains(&b'\r'), "{} has CR", f.display());
    }
}
