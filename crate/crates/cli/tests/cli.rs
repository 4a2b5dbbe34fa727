use std::path::Path;
use std::process::{Command, Output};

use consensus_cli::report::strip_wallclock;

fn consensus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_consensus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn k3_file(dir: &Path) -> String {
    let p = dir.join("k3.graph");
    std::fs::write(&p, "undirected 3\n1 2 1\n1 3 1\n2 3 1\n").unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn eigenstep_on_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let g = k3_file(dir.path());
    let prefix = dir.path().join("k3");
    let out = consensus(&[
        "run",
        "-a",
        "eigenstep",
        "-g",
        &g,
        "-i",
        "values:1,2,3",
        "-o",
        prefix.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&prefix.with_extension("csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,error_db,wallclock_ns");
    assert_eq!(lines.len(), 3);
    let last: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(last[0], "1");
    assert!(last[1].parse::<f64>().unwrap() <= -120.0);

    let json: serde_json::Value =
        serde_json::from_str(&read(&prefix.with_extension("json"))).unwrap();
    assert_eq!(json["algorithm"], "eigenstep");
    assert_eq!(json["eigen"]["distinct"], 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    let mut jsons = Vec::new();
    for k in 0..2 {
        let prefix = dir.path().join(format!("cmp{k}"));
        let out = consensus(&[
            "compare",
            "-a",
            "nag,fixed,eigenstep,exact-additions,exact-backsub,graph-filter,power",
            "-g",
            "random:15:0.3:11",
            "-i",
            "random:5",
            "-o",
            prefix.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        csvs.push(strip_wallclock(
            &std::fs::read(prefix.with_extension("csv")).unwrap(),
        ));
        jsons.push(std::fs::read(prefix.with_extension("json")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(jsons[0], jsons[1]);
    let algos: Vec<&str> = csvs[0]
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let mut sorted = algos.clone();
    sorted.sort();
    assert_eq!(algos, sorted);
}

#[test]
fn additions_counters_on_random_graph() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("add");
    let out = consensus(&[
        "run",
        "-a",
        "exact-additions",
        "-g",
        "random:20:0.25:3",
        "-i",
        "random:1",
        "-o",
        prefix.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&read(&prefix.with_extension("json"))).unwrap();
    let counters = &json["counters"];
    assert_eq!(counters["adds"], 19);
    assert!(json["final_error_db"].as_f64().unwrap() < -200.0);

    // independent count: nodes whose smallest higher-numbered neighbor, after
    // the same RCM relabeling, is the last node
    let g = consensus_core::graph::random_connected(20, 0.25, 3).unwrap();
    let p = consensus_core::graph::rcm_order(&g).unwrap();
    let h = g.relabel(&p).unwrap();
    let nbrs = h.skeleton_neighbors();
    let feeding_last = (0..19)
        .filter(|&l| nbrs[l].iter().copied().filter(|&j| j > l).min() == Some(19))
        .count();
    assert_eq!(counters["mults"], feeding_last + 1);
}

#[test]
fn unknown_algorithm_fails() {
    let out = consensus(&[
        "run",
        "-a",
        "gossip",
        "-g",
        "random:5:0.5:1",
        "-i",
        "random:1",
        "-o",
        "/tmp/never",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown algorithm"));
}

#[test]
fn parse_error_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.graph");
    std::fs::write(&p, "undirected 3\n1 2 1\n2 3 x\n").unwrap();
    let out = consensus(&["graph", "inspect", "-g", p.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn inspect_reports_bandwidth() {
    let out = consensus(&["graph", "inspect", "-g", "random:12:0.3:4"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["n"], 12);
    assert_eq!(json["connected"], true);
    assert!(
        json["bandwidth_after_rcm"].as_u64().unwrap() <= json["bandwidth_before"].as_u64().unwrap()
    );
}

#[test]
fn diffuse_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("lms");
    let out = consensus(&[
        "diffuse",
        "-g",
        "random:10:0.4:2",
        "--seed",
        "9",
        "--steps",
        "200",
        "-o",
        prefix.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(read(&prefix.with_extension("csv")).lines().count(), 202);
    let json: serde_json::Value =
        serde_json::from_str(&read(&prefix.with_extension("json"))).unwrap();
    assert_eq!(json["diverged"], false);
}
