use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ergomax(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergomax"))
        .args(args)
        .current_dir(dir)
        .env_remove("ERGOMAX_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    write(&dir, "delta.json", r#"{"offset": 0, "values": ["1"]}"#);
    write(&dir, "w.json", r#"{"offset": 0, "values": [1, 4, 1, 4]}"#);
    let ones = vec!["1"; 81].join(",");
    write(
        &dir,
        "flat.json",
        &format!(r#"{{"offset": -40, "values": [{ones}]}}"#),
    );
    write(
        &dir,
        "cycle.json",
        r#"{"masses": ["1/5", "1/5", "1/5", "1/5", "1/5"], "perm": [1, 2, 3, 4, 0]}"#,
    );
    write(&dir, "f.json", r#"{"values": [1, 0, 2, 0, 0]}"#);
    dir
}

#[test]
fn maximal_csv() {
    let dir = fixture();
    let o = ergomax(
        &[
            "maximal",
            "--input",
            "delta.json",
            "--op",
            "centered",
            "--exact",
            "--eval-lo",
            "-1",
            "--eval-hi",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "m,value,witness_lo,witness_hi\n-1,1/3,-2,0\n0,1/3,-1,1\n1,1/3,0,2\n"
    );
    let o = ergomax(
        &[
            "maximal",
            "--input",
            "delta.json",
            "--op",
            "uncentered",
            "--exact",
            "--eval-lo",
            "0",
            "--eval-hi",
            "1",
            "--output",
            "out.csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv, "m,value,witness_lo,witness_hi\n0,1,0,0\n1,1/2,0,1\n");
}

#[test]
fn apconst_and_threshold() {
    let dir = fixture();
    let o = ergomax(
        &["apconst", "--weight", "w.json", "--p", "2", "--exact"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("constant 25/16"), "{out}");
    assert!(out.contains("witness 0 1"), "{out}");
    let over = ergomax(
        &[
            "apconst",
            "--weight",
            "w.json",
            "--p",
            "2",
            "--exact",
            "--threshold",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(over.status.code(), Some(1));
    let under = ergomax(
        &[
            "apconst",
            "--weight",
            "w.json",
            "--p",
            "2",
            "--threshold",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(under.status.code(), Some(0));
}

#[test]
fn cz_lines() {
    let dir = fixture();
    let o = ergomax(
        &["cz", "--input", "delta.json", "--lambda", "1/4", "--exact"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 0 -1 0 1/2\n");
}

#[test]
fn verify_exit_codes() {
    let dir = fixture();
    let pass = ergomax(
        &[
            "verify",
            "weak11",
            "--input",
            "delta.json",
            "--weight",
            "flat.json",
            "--lambda-grid",
            "auto:3",
        ],
        dir.path(),
    );
    assert_eq!(pass.status.code(), Some(0));
    assert_eq!(stdout(&pass).lines().count(), 3);
    for line in stdout(&pass).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true);
    }
    // the weight window cannot hold the superlevel set: a usage-level error
    let short = ergomax(
        &[
            "verify",
            "weak11",
            "--input",
            "delta.json",
            "--weight",
            "w.json",
        ],
        dir.path(),
    );
    assert_eq!(short.status.code(), Some(2));
    let missing = ergomax(
        &[
            "verify",
            "weak11",
            "--input",
            "nope.json",
            "--weight",
            "w.json",
        ],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(ergomax(&["bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(ergomax(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn ergodic_transfer_and_rejections() {
    let dir = fixture();
    let o = ergomax(
        &[
            "ergodic",
            "transfer",
            "--system",
            "cycle.json",
            "--f",
            "f.json",
            "--L",
            "20",
            "--J",
            "3",
            "--exact",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);
    write(&dir, "bad.json", r#"{"masses": [1, 1], "perm": [1, 0]}"#);
    let bad = ergomax(
        &[
            "ergodic", "maximal", "--system", "bad.json", "--f", "f.json", "--exact",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(2));
    let m = ergomax(
        &[
            "ergodic",
            "maximal",
            "--system",
            "cycle.json",
            "--f",
            "f.json",
            "--exact",
        ],
        dir.path(),
    );
    assert_eq!(m.status.code(), Some(0));
    assert_eq!(stdout(&m).lines().count(), 5);
}

#[test]
fn campaign_exit_codes() {
    let dir = fixture();
    write(
        &dir,
        "empty.json",
        r#"{"corpus": {"instances": 0, "trend_windows": [], "trend_cycles": []}}"#,
    );
    let empty = ergomax(
        &["campaign", "--config", "empty.json", "--report", "r.json"],
        dir.path(),
    );
    assert_eq!(empty.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["reports"], 0);

    write(&dir, "bad.json", r#"{"seed": "one"}"#);
    let bad = ergomax(
        &["campaign", "--config", "bad.json", "--report", "r.json"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(2));

    write(
        &dir,
        "mutant.json",
        r#"{"checks": ["weak11"], "constants": {"weak11": "1"}}"#,
    );
    let mutant = ergomax(
        &["campaign", "--config", "mutant.json", "--report", "m.json"],
        dir.path(),
    );
    assert_eq!(mutant.status.code(), Some(1));
    assert!(stdout(&mutant).contains("weak11"));
}

#[test]
fn campaign_is_deterministic_and_seed_overridable() {
    let dir = fixture();
    write(
        &dir,
        "c.json",
        r#"{"checks": ["operator_comparison", "weak11", "transference"], "corpus": {"instances": 4}}"#,
    );
    let run = |report: &str, seed: Option<&str>, jobs: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ergomax"));
        cmd.args([
            "campaign", "--config", "c.json", "--report", report, "--jobs", jobs,
        ])
        .current_dir(dir.path())
        .env_remove("ERGOMAX_SEED");
        if let Some(s) = seed {
            cmd.env("ERGOMAX_SEED", s);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        fs::read(dir.path().join(report)).unwrap()
    };
    let a = run("a.json", None, "1");
    let b = run("b.json", None, "3");
    assert_eq!(a, b);
    let c = run("c1.json", Some("77"), "1");
    assert_ne!(a, c);
    let summary: serde_json::Value = serde_json::from_slice(&c).unwrap();
    assert_eq!(summary["summary"]["seed"], 77);
    let mut bad = Command::new(env!("CARGO_BIN_EXE_ergomax"));
    bad.args(["campaign", "--config", "c.json", "--report", "x.json"])
        .current_dir(dir.path())
        .env("ERGOMAX_SEED", "seven");
    assert_eq!(bad.output().unwrap().status.code(), Some(2));
}
