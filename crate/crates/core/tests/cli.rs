//! Command-line round trips and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sinrcast"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sinrcast-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_run_verify_round_trip() {
    let dir = scratch("round-trip");
    let net = dir.join("net.json");
    let trace = dir.join("trace.jsonl");
    assert_eq!(code(bin().args(["gen", "chain:6:0.9", "--out", s(&net)])), 0);
    for alg in ["gran-ubr", "diam-ubr", "size-ubr", "general"] {
        let run = bin()
            .args(["run", "--net", s(&net), "--alg", alg, "--snapshots", "boundaries", "--out", s(&trace)])
            .output()
            .unwrap();
        assert_eq!(run.status.code(), Some(0), "{alg}: {}", String::from_utf8_lossy(&run.stderr));
        let summary: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
        assert_eq!(summary["informed"], 6);
        assert_eq!(code(bin().args(["verify", s(&trace), "--net", s(&net), "--alg", alg])), 0, "{alg}");
    }
    let progress = std::fs::read_to_string(dir.join("trace.jsonl.progress.csv")).unwrap();
    assert!(progress.starts_with("block,informed,groups,tuples,stable_blocks,pi\n"));
}

#[test]
fn exhausted_budget_exits_two() {
    assert_eq!(code(bin().args(["run", "--net", "chain:8:0.9", "--alg", "gran-ubr", "--max-rounds", "10"])), 2);
}

#[test]
fn bad_input_exits_four() {
    assert_eq!(code(bin().args(["gen", "chain:x:0.9"])), 4);
    assert_eq!(code(bin().args(["run", "--net", "chain:4:0.9", "--alg", "no-such-alg"])), 4);
    assert_eq!(code(bin().args(["run", "--net", "chain:4:0.9", "--alg", "general", "--alpha", "2"])), 4);
    assert_eq!(code(bin().args(["run", "--net", "chain:4:1.5", "--alg", "gran-ubr"])), 4);
}

#[test]
fn corrupted_trace_exits_three() {
    let dir = scratch("corrupt");
    let trace = dir.join("trace.jsonl");
    assert_eq!(code(bin().args(["run", "--net", "chain:5:0.9", "--alg", "size-ubr", "--out", s(&trace)])), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let corrupted: String = text
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if let Some(d) = v.get_mut("deliveries").and_then(|d| d.as_array_mut()) {
                d.clear();
            }
            v.to_string() + "\n"
        })
        .collect();
    std::fs::write(&trace, corrupted).unwrap();
    assert_eq!(code(bin().args(["verify", s(&trace), "--net", "chain:5:0.9"])), 3);
}

#[test]
fn ssf_generation_writes_the_family_format() {
    let out = bin().args(["gen", "ssf:12:3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["N"], 12);
    assert_eq!(v["k"], 3);
    assert!(!v["sets"].as_array().unwrap().is_empty());
}

#[test]
fn bench_writes_one_row_per_pair() {
    let dir = scratch("bench");
    let suite = dir.join("suite.json");
    let csv = dir.join("bench.csv");
    std::fs::write(&suite, r#"{"networks":["chain:4:0.9","grid:3:3:0.6"],"algorithms":["gran-ubr","size-ubr"]}"#).unwrap();
    let status = bin().args(["bench", s(&suite), "--out", s(&csv)]).env("SINRCAST_THREADS", "2").status().unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("algorithm,n,N,D,Delta,g,rounds,informed,wall_time"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("gran-ubr,4,256,3,"));
    assert!(rows[3].starts_with("size-ubr,9,256,"));
}

#[test]
fn adversary_writes_results_and_members() {
    let dir = scratch("adversary");
    let out = bin().args(["adversary", "fan:8:5", "--alg", "probe-sequential", "--out", s(&dir)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("family,delta,D,algorithm,forced_rounds,bound\nfan,8,5,probe-sequential,"));
    assert!(dir.join("manifest.json").is_file());
    assert!(dir.join("member_000.json").is_file());
}
