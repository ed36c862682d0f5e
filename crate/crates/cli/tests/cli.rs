use std::path::Path;
use std::process::{Command, Output};

use blackboard_core::Graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn blackboard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blackboard")).args(args).output().expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_graph(dir: &Path, name: &str, graph: &Graph) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(graph).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_toy_instance_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = blackboard(&["gen", "--variant", "mis", "--k", "1", "--r", "1", "--toy-f", "1", "--toy-p", "2", "--seed", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("n_r=10"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(json_file(&a)["n"], 10);
}

#[test]
fn gen_base_instance_uses_the_fixed_pairing() {
    let o = blackboard(&["gen", "--variant", "mis", "--k", "2", "--r", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 4);
    for e in v["edges"].as_array().unwrap() {
        let pair = (e[0].as_u64().unwrap(), e[1].as_u64().unwrap());
        assert!(pair == (0, 1) || pair == (2, 3), "{pair:?}");
    }
}

#[test]
fn full_scale_gen_overflows() {
    let o = blackboard(&["gen", "--k", "2", "--r", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("16777216"));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(blackboard(&["gen", "--variant", "mis"]).status.code(), Some(2));
    assert_eq!(blackboard(&["gen", "--k", "1", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(blackboard(&["run", "--k", "1"]).status.code(), Some(2));
    assert_eq!(blackboard(&["run", "--k", "1", "--protocol", "nope"]).status.code(), Some(2));
    assert_eq!(blackboard(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(blackboard(&["verify"]).status.code(), Some(2));
    assert_eq!(blackboard(&["gen", "--k", "1", "--r", "1", "--toy-f", "1"]).status.code(), Some(2));
}

#[test]
fn luby_is_valid_on_a_random_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = Graph::gnp(16, 0.5, &mut ChaCha8Rng::seed_from_u64(16));
    let path = write_graph(dir.path(), "g16.json", &graph);
    let out = dir.path().join("run.json");
    let o = blackboard(&["run", "--instance", &path, "--protocol", "luby", "--trials", "100", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_file(&out);
    assert_eq!(v["validity_rate"], 1.0);
    assert!(v["max_bits"].as_u64().unwrap() <= 2);
}

#[test]
fn zero_round_referee_succeeds_a_quarter_of_the_time() {
    let o = blackboard(&["run", "--variant", "mis", "--k", "2", "--r", "0", "--protocol", "zero-round", "--trials", "10000", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rate = v["validity_rate"].as_f64().unwrap();
    assert!((rate - 0.25).abs() <= 0.03, "{rate}");
}

#[test]
fn bipartite_greedy_keeps_a_quarter_of_the_matching() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(dir.path(), "k4.json", &Graph::complete(4));
    let o = blackboard(&["run", "--variant", "apx", "--instance", &path, "--protocol", "bipartite:greedy", "--trials", "2000", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let mean = v["mean_valid_edges"].as_f64().unwrap();
    assert!(mean >= 2.0 / 4.0, "{mean}");
    assert_eq!(v["mean_max_matching"], 2.0);
}

#[test]
fn bandwidth_violation_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_graph(dir.path(), "k4.json", &Graph::complete(4));
    let o = blackboard(&["run", "--instance", &path, "--protocol", "full-broadcast:1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn run_csv_is_versioned_and_reproducible() {
    let args = ["run", "--variant", "apx", "--k", "2", "--r", "1", "--toy-f", "1", "--toy-p", "1", "--protocol", "greedy", "--trials", "50", "--seed", "4", "--format", "csv"];
    let a = blackboard(&args);
    let b = blackboard(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("schema=1"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn verify_base_cases_reports_budgets() {
    let o = blackboard(&["verify", "--suite", "base-cases"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let entries = v["entries"].as_array().unwrap();
    let k4 = entries.iter().find(|e| e["name"].as_str().unwrap().starts_with("mis k=4")).unwrap();
    assert_eq!(k4["exact"], "1/16");
    assert_eq!(k4["budget_exact"], "1/16");
}

#[test]
fn verify_infotheory_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = blackboard(&["verify", "--suite", "infotheory", "--trials", "100", "--seed", "9", "--format", "csv", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some("schema=1"));
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_embedding_for_one_protocol() {
    let o = blackboard(&[
        "verify", "--suite", "embedding", "--variant", "mis", "--k", "1", "--toy-f", "1", "--toy-p", "2", "--protocol", "xor:directed_round1", "--trials", "2000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = v["entries"].as_array().unwrap();
    let find = |s: &str| entries.iter().find(|e| e["name"].as_str().unwrap().contains(s)).unwrap_or_else(|| panic!("{s}"));
    assert_eq!(find("product property")["exact"], "0/1");
    assert_eq!(find("joint leakage")["pass"], true);
    assert_eq!(find("Pinsker")["pass"], true);
}
