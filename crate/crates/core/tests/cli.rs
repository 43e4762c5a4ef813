use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spontol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spontol"))
        .args(args)
        .env_remove("SPONTOL_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = spontol(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_corpus(dir: &Path) -> String {
    let corpus = dir.join("stories.txt");
    ok(&[
        "gen", "--preset", "small", "--stories", "14", "--out", p(&corpus), "--seed", "3",
    ]);
    p(&corpus).to_string()
}

const FAST: [&str; 4] = ["--num-windows", "8", "--window-size", "5"];

#[test]
fn pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    assert!(dir.path().join("stories.txt.truth").exists());
    assert!(ok(&["validate", "--corpus", &corpus]).contains("14 stories"));

    let model = dir.path().join("model");
    let mut args = vec!["build", "--corpus", &corpus, "--out", p(&model)];
    args.extend(FAST);
    let summary = ok(&args);
    assert!(summary.contains("14 training stories"), "{summary}");
    assert!(summary.contains("window") && summary.contains("schema"));

    let text = ok(&["retrieve", "--model", p(&model), "--corpus", &corpus, "--story", "story000"]);
    assert!(text.starts_with("story story000\n  comparisons "));
    let tsv = ok(&["retrieve", "--model", p(&model), "--corpus", &corpus, "--format", "tsv"]);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "story\tcomparisons\twindow_comparisons\tschemas\tstories\tbaseline");
    assert_eq!(lines.len(), 15);
    assert!(lines[1..].iter().all(|l| l.split('\t').count() == 6));

    let dot = dir.path().join("schema.dot");
    ok(&["export-dot", "--model", p(&model), "--out", p(&dot)]);
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let bad = spontol(&["export-dot", "--model", p(&model), "--level", "middle", "--out", p(&dot)]);
    assert!(!bad.status.success());

    let reports = dir.path().join("reports");
    let mut args = vec![
        "eval", "--corpus", &corpus, "--out", p(&reports), "--train", "10", "--test", "4", "--trials", "1",
    ];
    args.extend(FAST);
    let table = ok(&args);
    assert!(table.contains("accuracy (k=3)") && table.contains("comparisons (baseline)"));
    // a single trial has no standard error
    assert!(!table.contains('±'));
    for f in ["trials.csv", "stories.csv", "report.txt"] {
        assert!(reports.join(f).exists(), "{f}");
    }
}

#[test]
fn failures_leave_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    let out = spontol(&["build", "--corpus", p(&dir.path().join("missing.txt")), "--out", p(&model)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
    assert!(!model.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

    let corpus = small_corpus(dir.path());
    let reports = dir.path().join("reports");
    let out = spontol(&["eval", "--corpus", &corpus, "--out", p(&reports), "--train", "20"]);
    assert!(!out.status.success());
    assert!(!reports.exists());

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let mut args = vec!["build", "--corpus", p(&empty), "--out", p(&model)];
    args.extend(FAST);
    assert!(!spontol(&args).status.success());
    assert!(!model.exists());
}

#[test]
fn strict_flag_rejects_arity_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "story a\nlike x y\nstory b\nlike z\n").unwrap();
    let out = spontol(&["validate", "--corpus", p(&corpus)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("warning: relation `like`"));
    assert!(!spontol(&["validate", "--corpus", p(&corpus), "--strict"]).status.success());
}

#[test]
fn builds_are_byte_identical_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let build = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_spontol"));
        cmd.args(["build", "--corpus", &corpus, "--out", p(&out), "--threads", "2"])
            .args(FAST)
            .env_remove("SPONTOL_SEED");
        if let Some(s) = seed {
            cmd.env("SPONTOL_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let a = build("a", None);
    assert_eq!(a, build("b", None));
    assert_eq!(a, build("c", Some("42")));
    let other = build("d", Some("43"));
    assert_ne!(a, other);
    let params = other.iter().find(|(n, _)| n == "params.txt").unwrap();
    assert!(String::from_utf8_lossy(&params.1).contains("seed 43"));
}
