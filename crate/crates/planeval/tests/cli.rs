use std::path::Path;
use std::process::{Command, Output};

use planeval::format::load_course;
use planeval::record::read_records;

fn planeval(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_planeval")).args(args).current_dir(dir).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn generate_writes_loadable_instances() {
    let dir = tempfile::tempdir().unwrap();
    planeval(&["generate", "--difficulty", "hard", "--count", "1", "--seed", "9", "--out", "data"], dir.path());
    let file = load_course(&dir.path().join("data/hard_0000.json")).unwrap();
    assert_eq!(file.instance.course_ids().len(), 10);
    assert!(file.solution.is_some() && file.optimal_score.is_some());
    assert!(dir.path().join("data/manifest.json").exists());
}

#[test]
fn same_seed_same_dataset() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        planeval(&["generate", "--difficulty", "medium", "--count", "5", "--seed", "3", "--out", "data"], d.path());
    }
    assert_eq!(read_dir_sorted(&a.path().join("data")), read_dir_sorted(&b.path().join("data")));
    let c = tempfile::tempdir().unwrap();
    planeval(&["generate", "--difficulty", "medium", "--count", "5", "--seed", "4", "--out", "data"], c.path());
    assert_ne!(read_dir_sorted(&a.path().join("data")), read_dir_sorted(&c.path().join("data")));
}

#[test]
fn report_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    planeval(&["rank", "--environment", "course", "--agent", "random", "--n-instances", "30", "--out", "r.jsonl"], dir.path());
    let first = planeval(&["report", "r.jsonl", "--out", "a.json", "--text", "a.txt"], dir.path());
    let second = planeval(&["report", "r.jsonl", "--out", "b.json", "--text", "b.txt"], dir.path());
    assert_eq!(first.stdout, second.stdout);
    let read = |n: &str| std::fs::read_to_string(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a.txt"), read("b.txt"));
    assert!(read("a.txt").contains("Hit@1"));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        r#"environment = "fitness"
role = "verifier"
n_instances = 8
seed = 5
output_path = "from_config.jsonl"
condition = "configured"

[agent]
kind = "scripted"
name = "oracle"
"#,
    )
    .unwrap();
    planeval(&["verify", "--config", "exp.toml", "--n-instances", "3", "--out", "v.jsonl"], dir.path());
    assert!(!dir.path().join("from_config.jsonl").exists());
    let records = read_records(&dir.path().join("v.jsonl")).unwrap();
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r.condition == "configured" && r.agent == "oracle"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_planeval"))
        .args(["rank", "--environment", "course", "--agent", "random", "--n-candidates", "9", "--out", "x.jsonl"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}
