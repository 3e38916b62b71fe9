use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn burstsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burstsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("BURSTSIM_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = burstsim(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(path: PathBuf) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(str::to_owned).collect()
}

fn small_random(dir: &Path, name: &str) {
    ok(dir, &["gen", "--pattern", "random", "--procs", "8", "--total", "256MiB", "--req", "256KiB", "--out", name]);
}

#[test]
fn strided_trace_has_one_row_per_request() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen", "--pattern", "strided", "--procs", "16", "--total", "16GiB", "--req", "256KiB", "--out", "t.csv"]);
    assert_eq!(rows(dir.path().join("t.csv")).len(), 65536);
}

#[test]
fn contiguous_trace_rows() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen", "--pattern", "contig", "--procs", "4", "--total", "4MiB", "--req", "1MiB", "--out", "t.csv"]);
    let lines = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(lines.lines().next(), Some("seq,proc,file,offset,size"));
    assert_eq!(rows(dir.path().join("t.csv")).len(), 4);
}

#[test]
fn gen_without_out_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = burstsim(dir.path(), &["gen", "--pattern", "contig", "--procs", "4", "--total", "4MiB", "--req", "1MiB"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));
}

#[test]
fn decimal_units_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = burstsim(dir.path(), &["gen", "--pattern", "contig", "--procs", "4", "--total", "4MB", "--req", "1MiB", "--out", "t.csv"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn analyze_writes_stats_and_mean() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen", "--pattern", "contig", "--procs", "16", "--total", "64MiB", "--req", "256KiB", "--out", "t.csv"]);
    let stdout = ok(dir.path(), &["analyze", "t.csv", "--window", "128", "--out", "s.csv"]);
    let stats = rows(dir.path().join("s.csv"));
    assert_eq!(stats.len(), 2);
    assert!(stats[0].starts_with("0,128,15,"), "{}", stats[0]);
    assert!(stdout.starts_with("mean_percentage 0.118"), "{stdout}");
}

#[test]
fn analyze_empty_trace_warns() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("e.csv"), "seq,proc,file,offset,size\n").unwrap();
    let out = burstsim(dir.path(), &["analyze", "e.csv", "--out", "s.csv"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(rows(dir.path().join("s.csv")).is_empty());
}

#[test]
fn window_of_one_is_rejected() {
    let dir = TempDir::new().unwrap();
    small_random(dir.path(), "t.csv");
    let out = burstsim(dir.path(), &["analyze", "t.csv", "--window", "1", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.csv"), "seq,proc,file,offset,size\n0,0,0,0,4096\n1,0,0,oops,4096\n").unwrap();
    let out = burstsim(dir.path(), &["analyze", "bad.csv", "--out", "s.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn compare_emits_four_rows() {
    let dir = TempDir::new().unwrap();
    small_random(dir.path(), "t.csv");
    ok(dir.path(), &["compare", "t.csv", "--out", "m.csv"]);
    let rows = rows(dir.path().join("m.csv"));
    assert_eq!(rows.len(), 4);
    let frac = |mode: &str| -> f64 {
        let row = rows.iter().find(|r| r.starts_with(&format!("{mode},"))).unwrap();
        row.split(',').nth(3).unwrap().parse().unwrap()
    };
    assert_eq!(frac("hdd-only"), 0.0);
    assert_eq!(frac("full-bb"), 1.0);
    assert!(frac("ssdup-adaptive") <= frac("full-bb"));
}

#[test]
fn simulate_logs_decisions() {
    let dir = TempDir::new().unwrap();
    small_random(dir.path(), "t.csv");
    ok(dir.path(), &["simulate", "t.csv", "--mode", "ssdup-adaptive", "--out", "m.csv", "--log-decisions", "d.csv"]);
    assert_eq!(rows(dir.path().join("m.csv")).len(), 1);
    let decisions = rows(dir.path().join("d.csv"));
    assert_eq!(decisions.len(), 8);
    assert!(decisions[0].ends_with(",hdd"));
    assert!(decisions[1].ends_with(",ssd"));
}

#[test]
fn simulate_accepts_several_traces_with_a_gap() {
    let dir = TempDir::new().unwrap();
    small_random(dir.path(), "a.csv");
    ok(dir.path(), &["gen", "--pattern", "contig", "--procs", "4", "--total", "64MiB", "--req", "256KiB", "--file", "1", "--out", "b.csv"]);
    ok(dir.path(), &["simulate", "a.csv", "b.csv", "--gap", "2", "--mode", "full-bb", "--out", "m.csv"]);
    assert!(rows(dir.path().join("m.csv"))[0].starts_with("full-bb,"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let trace = format!("t{tag}.csv");
        let metrics = format!("m{tag}.csv");
        ok(dir.path(), &["gen", "--pattern", "random", "--procs", "8", "--total", "128MiB", "--req", "256KiB", "--seed", "7", "--interleave", "random", "--out", &trace]);
        ok(dir.path(), &["compare", &trace, "--out", &metrics]);
        (fs::read(dir.path().join(trace)).unwrap(), fs::read(dir.path().join(metrics)).unwrap())
    };
    assert_eq!(run("1"), run("2"));
}

#[test]
fn seed_variable_overrides_flag() {
    let dir = TempDir::new().unwrap();
    let gen = |seed: &str, env: Option<&str>, out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_burstsim"));
        cmd.current_dir(dir.path()).env_remove("BURSTSIM_SEED");
        if let Some(v) = env {
            cmd.env("BURSTSIM_SEED", v);
        }
        let out_status = cmd
            .args(["gen", "--pattern", "random", "--procs", "2", "--total", "8MiB", "--req", "256KiB", "--seed", seed, "--out", out])
            .output()
            .unwrap();
        assert!(out_status.status.success());
        fs::read(dir.path().join(out)).unwrap()
    };
    let plain = gen("9", None, "a.csv");
    let other = gen("1", None, "b.csv");
    let forced = gen("1", Some("9"), "c.csv");
    assert_ne!(plain, other);
    assert_eq!(plain, forced);
}

#[test]
fn mixed_trace_contains_both_inputs() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen", "--pattern", "contig", "--procs", "2", "--total", "8MiB", "--req", "256KiB", "--file", "1", "--out", "a.csv"]);
    ok(dir.path(), &["gen", "--pattern", "random", "--procs", "2", "--total", "8MiB", "--req", "256KiB", "--mix", "a.csv", "--out", "m.csv"]);
    let rows = rows(dir.path().join("m.csv"));
    assert_eq!(rows.len(), 64);
    let files: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.split(',').nth(2).unwrap()).collect();
    assert_eq!(files.into_iter().collect::<Vec<_>>(), ["0", "1"]);
}

fn config(window: u32, low: f64, extra: &str) -> String {
    format!(
        r#"{{
  "devices": {{
    "hdd": {{ "seq_bw": 270e6, "seek_base": 0.0018, "seek_per_byte": 0.0, "per_req_overhead": 0.0 }},
    "ssd": {{ "seq_bw": 240e6, "seek_base": 0.0, "seek_per_byte": 0.0, "per_req_overhead": 0.0 }}
  }},
  "window_W": {window},
  "percent_list_capacity": 10,
  "default_threshold": 0.5,
  "region_bytes": 67108864,
  "gate_check_interval_s": 1.0,
  "cfq_Q": 128,
  "static_high": 0.45,
  "static_low": {low},
  "seed": 42{extra}
}}"#
    )
}

#[test]
fn custom_config_is_used() {
    let dir = TempDir::new().unwrap();
    small_random(dir.path(), "t.csv");
    fs::write(dir.path().join("c.json"), config(128, 0.30, "")).unwrap();
    ok(dir.path(), &["simulate", "t.csv", "--config", "c.json", "--mode", "ssdup-static", "--out", "m.csv"]);
    assert!(rows(dir.path().join("m.csv"))[0].starts_with("ssdup-static,"));
}

#[test]
fn bad_config_lists_offending_keys() {
    let dir = TempDir::new().unwrap();
    small_random(dir.path(), "t.csv");
    let cases = [
        (config(128, 0.30, ",\n  \"surprise\": true"), vec!["surprise"]),
        (config(1, 0.9, ""), vec!["window_W", "static_low"]),
    ];
    for (text, keys) in cases {
        fs::write(dir.path().join("bad.json"), text).unwrap();
        let out = burstsim(dir.path(), &["simulate", "t.csv", "--config", "bad.json", "--out", "m.csv"]);
        assert_eq!(out.status.code(), Some(1));
        let err = String::from_utf8_lossy(&out.stderr);
        for key in keys {
            assert!(err.contains(key), "{key} missing from {err}");
        }
        assert!(!dir.path().join("m.csv").exists());
    }
}
