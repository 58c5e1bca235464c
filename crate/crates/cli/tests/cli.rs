use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn msdhmm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msdhmm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = msdhmm(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path, name: &str, classes: &str, subjects: &str, seed: &str) {
    ok(
        dir,
        &[
            "synth",
            "--out",
            name,
            "--classes",
            classes,
            "--subjects",
            subjects,
            "--episodes",
            "2",
            "--seed",
            seed,
        ],
    );
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(msdhmm(tmp.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(msdhmm(tmp.path(), &["train", "--data", "x"]).status.code(), Some(1));
    assert_eq!(msdhmm(tmp.path(), &["--help"]).status.code(), Some(0));

    fs::write(tmp.path().join("bad.toml"), "n_states = 8\nnum_states = 4\n").unwrap();
    let out = msdhmm(
        tmp.path(),
        &["--config", "bad.toml", "train", "--data", "d", "--out", "m"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_states"));
}

#[test]
fn data_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        msdhmm(tmp.path(), &["train", "--data", "missing", "--out", "m"])
            .status
            .code(),
        Some(2)
    );

    fs::create_dir(tmp.path().join("d")).unwrap();
    fs::write(tmp.path().join("d/a01_s01_e01_skeleton3D.txt"), "1 2 3\n").unwrap();
    fs::write(tmp.path().join("list.txt"), "a01_s01_e01_skeleton3D.txt\n").unwrap();
    let out = msdhmm(
        tmp.path(),
        &["train", "--data", "d", "--allowlist", "list.txt", "--out", "m"],
    );
    assert_eq!(out.status.code(), Some(2));

    fs::write(tmp.path().join("m.json"), "{\"format\": \"something-else\"}").unwrap();
    fs::write(tmp.path().join("s.txt"), "").unwrap();
    fs::write(tmp.path().join("t.txt"), "").unwrap();
    let out = msdhmm(
        tmp.path(),
        &[
            "eval-online",
            "--model",
            "m.json",
            "--stream",
            "s.txt",
            "--truth",
            "t.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_class_problem_is_perfect() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "ds", "3", "4", "5");
    let out = ok(
        tmp.path(),
        &[
            "eval-offline",
            "--data",
            "ds",
            "--split",
            "fraction-2/3",
            "--out",
            "rep",
        ],
    );
    assert!(out.contains("accuracy         1.0000"), "{out}");
    let report = fs::read_to_string(tmp.path().join("rep/report.jsonl")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(report.lines().next().unwrap()).unwrap();
    assert_eq!(summary["accuracy"], 1.0);
    assert_eq!(summary["split"], "fraction-2/3");
    assert_eq!(summary["model_sha256"].as_array().unwrap().len(), 1);
}

#[test]
fn training_twice_gives_the_same_hash_and_a_loadable_model() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "ds", "1,5", "3", "1");
    let a = ok(tmp.path(), &["train", "--data", "ds", "--out", "a.json"]);
    let b = ok(tmp.path(), &["train", "--data", "ds", "--out", "b.json"]);
    let hash = |s: &str| s.lines().find(|l| l.starts_with("sha256")).unwrap().to_owned();
    assert_eq!(hash(&a), hash(&b));
    assert_eq!(
        fs::read(tmp.path().join("a.json")).unwrap(),
        fs::read(tmp.path().join("b.json")).unwrap()
    );

    let text = fs::read_to_string(tmp.path().join("a.json")).unwrap();
    let model = msdhmm::DualStageModel::from_text(&text).unwrap();
    assert_eq!(model.class_ids(), vec![1, 5]);
    assert_eq!(model.hyper().n_states, 8);
    assert_eq!(model.hyper().levels, 10);
}

#[test]
fn config_and_ablation_flags_reach_the_model() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "ds", "1,2", "2", "1");
    fs::write(
        tmp.path().join("c.toml"),
        "N = 5\nL = 6\n[group_overrides]\n2 = \"UP\"\n",
    )
    .unwrap();
    ok(
        tmp.path(),
        &[
            "--config", "c.toml", "train", "--data", "ds", "--out", "m.json", "--no-fn", "--no-wms",
        ],
    );
    let model = msdhmm::DualStageModel::from_text(&fs::read_to_string(tmp.path().join("m.json")).unwrap()).unwrap();
    assert_eq!((model.hyper().n_states, model.hyper().levels), (5, 6));
    assert!(!model.hyper().normalize && !model.hyper().weighted);
    assert_eq!(model.group_of(2).unwrap().code(), "UP");
}

#[test]
fn exported_stream_is_segmented_and_scored() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "train", "1,2,3,4,5", "4", "1");
    synth(tmp.path(), "test", "1,2,3,4,5", "1", "21");
    ok(tmp.path(), &["train", "--data", "train", "--out", "m.json"]);
    ok(
        tmp.path(),
        &[
            "export-stream",
            "--data",
            "test",
            "--gap",
            "25",
            "--stream",
            "s.txt",
            "--truth",
            "t.txt",
        ],
    );
    let truth = fs::read_to_string(tmp.path().join("t.txt")).unwrap();
    assert_eq!(truth.lines().count(), 10);
    assert!(truth.starts_with("1 25 "));

    ok(
        tmp.path(),
        &[
            "eval-online",
            "--model",
            "m.json",
            "--stream",
            "s.txt",
            "--truth",
            "t.txt",
            "--events-out",
            "e.tsv",
            "--report",
            "r.json",
        ],
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("r.json")).unwrap()).unwrap();
    assert!(report["detection_rate"].as_f64().unwrap() >= 0.8, "{report}");
    assert!(report["recognition_rate"].as_f64().unwrap() >= 0.8, "{report}");
    let events = fs::read_to_string(tmp.path().join("e.tsv")).unwrap();
    for line in events.lines() {
        msdhmm::SegmentEvent::parse_line(line).unwrap();
    }

    // overlapping ground truth is a data error
    fs::write(tmp.path().join("bad.txt"), "1 10 40\n2 30 60\n").unwrap();
    let out = msdhmm(
        tmp.path(),
        &[
            "eval-online",
            "--model",
            "m.json",
            "--stream",
            "s.txt",
            "--truth",
            "bad.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_prints_reference_numbers() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), "ds", "1,2,3,4,5,6", "2", "3");
    ok(tmp.path(), &["train", "--data", "ds", "--out", "m.json"]);
    let out = ok(tmp.path(), &["bench", "--model", "m.json", "--report", "b.json"]);
    assert!(out.contains("reference 80.35 fps"), "{out}");
    assert!(out.contains("reference 4.4e-2 s"), "{out}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("b.json")).unwrap()).unwrap();
    assert!(report["fps"].as_f64().unwrap() > 0.0);
    assert!(report["classifications"].as_u64().unwrap() >= 100);
    assert_eq!(report["sweep"].as_array().unwrap().len(), 1);
}
