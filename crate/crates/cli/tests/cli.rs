use std::path::{Path, PathBuf};
use std::process::Command;

use isodag_cli::run;
use serde_json::{json, Value};
use tempfile::TempDir;

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

struct Fixtures {
    dir: TempDir,
    chain: PathBuf,
    fork: PathBuf,
    collider: PathBuf,
    /// Markov equivalent to `chain`.
    mid_fork: PathBuf,
}

fn fixtures() -> Fixtures {
    let dir = TempDir::new().unwrap();
    let chain = write(dir.path(), "chain.json", &json!({"n": 3, "edges": [[0, 1], [1, 2]]}));
    let fork = write(dir.path(), "fork.json", &json!({"n": 3, "edges": [[0, 1], [0, 2]]}));
    let collider = write(dir.path(), "collider.json", &json!({"n": 3, "edges": [[0, 2], [1, 2]]}));
    let mid_fork = write(dir.path(), "mid_fork.json", &json!({"n": 3, "edges": [[1, 0], [1, 2]]}));
    Fixtures {
        dir,
        chain,
        fork,
        collider,
        mid_fork,
    }
}

fn call(args: &[&str]) -> (i32, Value) {
    let out = run(std::iter::once("isodag").chain(args.iter().copied()));
    let v = if out.code == 2 {
        serde_json::from_str(&out.stderr).expect("errors are JSON")
    } else {
        serde_json::from_str(&out.stdout).expect("output is JSON")
    };
    (out.code, v)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn iso_verdicts_and_exit_codes() {
    let f = fixtures();
    let (code, v) = call(&["iso", s(&f.chain), s(&f.fork), "--m", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["answer"], "yes");
    assert_eq!(v["params"]["m"], 5);
    assert_eq!(v["params"]["q"], 2147483647u64);
    assert!(v["params"]["d_bound"].is_u64());
    assert!(v["params"]["seed"].is_u64());
    let (code, v) = call(&["iso", s(&f.chain), s(&f.collider), "--m", "5"]);
    assert_eq!(code, 1);
    assert_eq!(v["answer"], "no");
    assert_eq!(v["refuting_round"], 1);
}

#[test]
fn eps_chooses_rounds() {
    let f = fixtures();
    let (code, v) = call(&["equiv", s(&f.chain), s(&f.mid_fork), "--eps", "1e-30"]);
    assert_eq!(code, 0);
    let m = v["params"]["m"].as_u64().unwrap();
    assert!(m >= 2, "{m}");
    assert!(v["failure_bound"]["approx"].as_f64().unwrap() <= 1e-30);
    let (code, v) = call(&["equiv", s(&f.chain), s(&f.fork), "--eps", "zero"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"], "invalid");
}

#[test]
fn equiv_distinguishes_collider() {
    let f = fixtures();
    assert_eq!(call(&["equiv", s(&f.chain), s(&f.mid_fork)]).0, 0);
    assert_eq!(call(&["equiv", s(&f.chain), s(&f.fork)]).0, 1);
    assert_eq!(call(&["equiv", s(&f.fork), s(&f.collider)]).0, 1);
}

#[test]
fn dsep_and_one_based_ids() {
    let f = fixtures();
    let (code, v) = call(&["dsep", s(&f.chain), "--i", "0", "--j", "2", "--cond", "1"]);
    assert_eq!((code, v), (0, json!({"d_separated": true})));
    let (_, v) = call(&["dsep", s(&f.chain), "--i", "0", "--j", "2"]);
    assert_eq!(v, json!({"d_separated": false}));
    let one = write(f.dir.path(), "chain1.json", &json!({"n": 3, "edges": [[1, 2], [2, 3]]}));
    let (_, v) = call(&["--one-based", "dsep", s(&one), "--i", "1", "--j", "3", "--cond", "2"]);
    assert_eq!(v, json!({"d_separated": true}));
    let (code, _) = call(&["--one-based", "dsep", s(&one), "--i", "0", "--j", "3"]);
    assert_eq!(code, 2);
}

#[test]
fn relations_kinds() {
    let f = fixtures();
    let (_, v) = call(&["relations", s(&f.chain)]);
    assert_eq!(v, json!({"relations": [{"i": 2, "j": 0, "cond": [1]}]}));
    let (_, v) = call(&["relations", s(&f.chain), "--kind", "minors"]);
    assert_eq!(v, json!({"minors": [{"rows": [2, 1], "cols": [0, 1]}]}));
    let (_, v) = call(&["relations", s(&f.chain), "--kind", "implied"]);
    assert_eq!(v, json!({"relations": [{"i": 0, "j": 2, "cond": [1]}]}));
    let (_, v) = call(&["relations", s(&f.chain), "--kind", "tree"]);
    assert_eq!(
        v,
        json!({"generators": [{"kind": "quadratic", "i": 2, "j": 0, "k": 1}]})
    );
    let (_, v) = call(&["relations", s(&f.fork), "--kind", "marginal", "--marginalize", "0"]);
    assert_eq!(v, json!({"removed": [0], "relations": []}));
}

#[test]
fn sample_is_reproducible_and_feeds_ci_gaussian() {
    let f = fixtures();
    let a = run(["isodag", "sample", s(&f.chain), "--seed", "9"]);
    let b = run(["isodag", "sample", s(&f.chain), "--seed", "9"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(["isodag", "sample", s(&f.chain), "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
    let point = f.dir.path().join("point.json");
    std::fs::write(&point, &a.stdout).unwrap();
    let (_, v) = call(&["ci-gaussian", "--matrix", s(&point), "--a", "0", "--b", "2", "--c", "1"]);
    assert_eq!(v, json!({"holds": true}));
    let (_, v) = call(&["ci-gaussian", "--matrix", s(&point), "--a", "0", "--b", "2"]);
    assert_eq!(v, json!({"holds": false}));

    let (_, v) = call(&["sample", s(&f.chain), "--rational"]);
    assert_eq!(v["q"], "rational");
    let exact = f.dir.path().join("exact.json");
    std::fs::write(&exact, v.to_string()).unwrap();
    let (_, v) = call(&["ci-gaussian", "--matrix", s(&exact), "--a", "0", "--b", "2", "--c", "1"]);
    assert_eq!(v, json!({"holds": true}));
}

#[test]
fn iso_output_is_byte_identical_for_a_seed() {
    let f = fixtures();
    for verb in ["iso", "equiv"] {
        let a = run(["isodag", verb, s(&f.chain), s(&f.fork), "--seed", "3"]);
        let b = run(["isodag", verb, s(&f.chain), s(&f.fork), "--seed", "3"]);
        assert_eq!(a, b);
    }
}

#[test]
fn singular_limit_matrix() {
    let f = fixtures();
    let m = write(
        f.dir.path(),
        "limit.json",
        &json!([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]),
    );
    let (_, v) = call(&["ci-gaussian", "--matrix", s(&m), "--a", "0", "--b", "2", "--c", "1,3"]);
    assert_eq!(v, json!({"holds": false}));
    let (_, v) = call(&["ci-gaussian", "--matrix", s(&m), "--a", "0", "--b", "1"]);
    assert_eq!(v, json!({"holds": true}));
}

#[test]
fn lies_below() {
    let f = fixtures();
    let diamond = write(
        f.dir.path(),
        "diamond.json",
        &json!({"n": 4, "edges": [[0, 1], [0, 2], [1, 3], [2, 3]]}),
    );
    let (_, v) = call(&["lies-below", s(&f.fork), s(&diamond), "--embed", "0,1,2"]);
    assert_eq!(v, json!({"lies_below": true}));
    let (_, v) = call(&["lies-below", s(&f.chain), s(&diamond), "--embed", "0,2,3"]);
    assert_eq!(v, json!({"lies_below": false}));
    let (code, v) = call(&["lies-below", s(&f.chain), s(&diamond), "--embed", "0,0,1"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"], "invalid");
}

#[test]
fn classify_trees_report() {
    let (code, v) = call(&["classify-trees", "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["class_count"], 1);
    let (_, v) = call(&["classify-trees", "--n", "4", "--mode", "cross-check"]);
    assert_eq!(v["class_count"], 5);
    assert_eq!(v["total_dags"], 128);
    let f = fixtures();
    let out = f.dir.path().join("report.json");
    let o = run(["isodag", "classify-trees", "--n", "3", "--out", s(&out)]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["class_count"], 2);
    assert_eq!(report["representatives"][0]["n"], 3);
}

#[test]
fn input_errors_are_structured() {
    let f = fixtures();
    let cyclic = write(f.dir.path(), "cyclic.json", &json!({"n": 2, "edges": [[0, 1], [1, 0]]}));
    let (code, v) = call(&["relations", s(&cyclic)]);
    assert_eq!(code, 2);
    assert_eq!(v["error"], "invalid");
    let garbage = f.dir.path().join("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    assert_eq!(call(&["relations", s(&garbage)]).1["error"], "parse");
    assert_eq!(call(&["relations", "/nonexistent/x.json"]).1["error"], "io");
    assert_eq!(call(&["frobnicate"]).1["error"], "usage");
    assert_eq!(call(&["classify-trees", "--n", "9"]).1["error"], "invalid");
    let big = write(f.dir.path(), "big.json", &json!({"n": 11, "edges": []}));
    assert_eq!(call(&["iso", s(&big), s(&big)]).1["error"], "invalid");
}

#[test]
fn dag_files_round_trip_normalized() {
    let f = fixtures();
    let messy = write(f.dir.path(), "messy.json", &json!({"n": 3, "edges": [[1, 2], [0, 1]]}));
    let (_, v) = call(&["classify-trees", "--n", "1"]);
    assert_eq!(v["representatives"], json!([{"n": 1, "edges": []}]));
    // relations are computed on the normalized graph regardless of edge order
    assert_eq!(call(&["relations", s(&messy)]).1, call(&["relations", s(&f.chain)]).1);
}

#[test]
fn binary_exit_codes() {
    let f = fixtures();
    let bin = env!("CARGO_BIN_EXE_isodag");
    let yes = Command::new(bin)
        .args(["iso", s(&f.chain), s(&f.fork)])
        .output()
        .unwrap();
    assert_eq!(yes.status.code(), Some(0));
    let no = Command::new(bin)
        .args(["iso", s(&f.chain), s(&f.collider)])
        .output()
        .unwrap();
    assert_eq!(no.status.code(), Some(1));
    let err = Command::new(bin).args(["iso", s(&f.chain)]).output().unwrap();
    assert_eq!(err.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&err.stderr).unwrap();
    assert_eq!(v["error"], "usage");
}
