use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use bsynth::partition::PartitionReport;
use bsynth::{parse_design, serialize_design};

fn designs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/designs")
}

fn design(name: &str) -> String {
    designs().join(name).to_string_lossy().into_owned()
}

fn bsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsynth")).args(args).output().expect("bsynth runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn validate_accepts_bundled_design() {
    let o = bsynth(&["validate", &design("reference.ebk")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("reference: valid"));
}

#[test]
fn validate_rejects_undriven_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ebk");
    fs::write(&path, "design bad\nblock a compute.not\n").unwrap();
    let o = bsynth(&["validate", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("violation:"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn partition_reference_paredown() {
    let o = bsynth(&[
        "partition",
        &design("reference.ebk"),
        "--algo",
        "paredown",
        "--inputs",
        "2",
        "--outputs",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: PartitionReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.partitions, vec![vec!["a".to_string(), "b".to_string()]]);
    assert_eq!(r.unassigned, vec!["c".to_string()]);
    assert_eq!(r.total_inner_after, 2);
}

#[test]
fn partition_reference_exhaustive_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bsynth(&["partition", &design("reference.ebk"), "--algo", "exhaustive", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let r: PartitionReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.partitions, vec![vec!["b".to_string(), "c".to_string()]]);
    assert!(r.optimal);
    let back = r.into_result().unwrap();
    assert_eq!(back.to_json().trim_end(), text.trim_end());
}

#[test]
fn equiv_reports_identical_traces() {
    let o = bsynth(&[
        "equiv",
        &design("reference.ebk"),
        "--stimulus",
        &design("reference.stim"),
        "--inputs",
        "2",
        "--outputs",
        "2",
        "--convex",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("traces identical"));
}

#[test]
fn equiv_with_generated_stimulus() {
    for algo in ["paredown", "exhaustive", "aggregate"] {
        let o = bsynth(&["equiv", &design("podium_timer_3.ebk"), "--algo", algo, "--seed", "7"]);
        assert!(o.status.success(), "{algo}: {}", stderr(&o));
    }
}

#[test]
fn simulate_garage_at_night() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = bsynth(&[
        "simulate",
        &design("garage.ebk"),
        "--stimulus",
        &design("night.stim"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.ends_with("10,z,out0,1\n"), "{csv}");
}

#[test]
fn simulate_fails_on_wrong_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let stim = dir.path().join("wrong.stim");
    fs::write(&stim, "init c 1\ninit l 1\nrun until 3\nexpect 2 z.out0 == 0\n").unwrap();
    let o = bsynth(&["simulate", &design("garage.ebk"), "--stimulus", stim.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("expectation failed"), "{}", stderr(&o));
}

#[test]
fn synth_writes_programs_and_rewritten_design() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = bsynth(&["synth", &design("podium_timer_3.ebk"), "--convex", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("P1.c").exists());
    assert!(out.join("P2.c").exists());
    let text = fs::read_to_string(out.join("podium_timer_3.ebk")).unwrap();
    let d = parse_design(&text).unwrap();
    assert_eq!(serialize_design(&d), text);
    assert!(fs::read_to_string(out.join("P1.c")).unwrap().contains("on_wake"));
}

#[test]
fn gen_is_deterministic_and_valid() {
    let a = bsynth(&["gen", "--seed", "11", "-n", "9"]);
    let b = bsynth(&["gen", "--seed", "11", "-n", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    parse_design(&stdout(&a)).unwrap();
    let c = bsynth(&["gen", "--seed", "12", "-n", "9"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bench_bundled_suite_has_zero_overhead() {
    let o = bsynth(&["bench", "--jobs", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,inner_original,algo,total_after,prog_count,elapsed_ms,optimal"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 8);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        assert_eq!(pair[0][2], "exhaustive");
        assert_eq!(pair[0][6], "true");
        assert_eq!(pair[0][3], pair[1][3], "overhead on {}", pair[0][0]);
    }
}

#[test]
fn bench_suite_dir_and_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        let o = bsynth(&["gen", "--seed", &seed.to_string(), "-n", "6"]);
        fs::write(dir.path().join(format!("g{seed}.ebk")), o.stdout).unwrap();
    }
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let csv = dir.path().join("out.csv");
    let o = bsynth(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--algos",
        "paredown,aggregate",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.lines().nth(1).unwrap().starts_with("g0,6,paredown,"));
    assert!(stdout(&o).contains("designs"));
}

#[test]
fn bench_sweep_is_deterministic_across_jobs() {
    let strip = |o: &Output| -> Vec<String> {
        stdout(o)
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                if f.len() == 7 {
                    f[5] = "-";
                }
                f.join(",")
            })
            .collect()
    };
    let a = bsynth(&["bench", "--sizes", "3-5", "--per-size", "5", "--jobs", "1"]);
    let b = bsynth(&["bench", "--sizes", "3-5", "--per-size", "5", "--jobs", "0"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a).len(), 1 + 15 * 2);
}

#[test]
fn bench_rejects_empty_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsynth(&["bench", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty suite"));
}

#[test]
fn missing_file_is_an_error() {
    let o = bsynth(&["validate", "/nonexistent/x.ebk"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error: reading"));
}
