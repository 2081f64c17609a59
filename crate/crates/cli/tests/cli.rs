use std::path::Path;
use std::process::{Command, Output};

fn graphmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphmatch")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = graphmatch(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn gen(dir: &Path) -> String {
    let out = dir.join("inst");
    ok(&["gen", "--source", "ba", "--n", "600", "--m", "4", "--s", "0.7", "--seed-size", "30", "--rng", "3", "--out", out.to_str().unwrap()]);
    out.to_str().unwrap().to_owned()
}

#[test]
fn gen_writes_instance_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path());
    for f in ["g1.edges", "g2.edges", "truth.tsv", "seed.tsv", "meta.json"] {
        assert!(Path::new(&inst).join(f).exists(), "{f}");
    }
    let seed = std::fs::read_to_string(Path::new(&inst).join("seed.tsv")).unwrap();
    assert_eq!(seed.lines().filter(|l| !l.starts_with('#')).count(), 30);
}

#[test]
fn gen_from_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    std::fs::write(&edges, "# ring\na b\nb c\nc d\nd a\na c\n").unwrap();
    let out = dir.path().join("inst");
    let json = ok(&[
        "gen", "--source", "edges", "--input", edges.to_str().unwrap(), "--s", "1.0", "--seed-size", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(json.contains("\"g1_edges\":5"), "{json}");
}

#[test]
fn run_streams_iterations_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path());
    let trace = dir.path().join("trace.tsv");
    let matching = dir.path().join("matching.tsv");
    let out = ok(&["run", &inst, "--algo", "irma", "--trace", trace.to_str().unwrap(), "--matching", matching.to_str().unwrap()]);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() >= 6);
    assert_eq!(lines[0]["kind"], "initial");
    assert_eq!(lines.iter().filter(|l| l["final"] == true).count(), 1);
    assert_eq!(lines.last().unwrap()["final"], true);
    let tsv = std::fs::read_to_string(&trace).unwrap();
    assert!(tsv.starts_with("step\titeration\tevent"));
    assert!(std::fs::read_to_string(&matching).unwrap().lines().count() >= 30);

    let again = ok(&["run", &inst, "--algo", "irma", "--parallel", "--workers", "4", "--no-explore"]);
    assert!(again.lines().all(|l| !l.contains("\"explore\"")));
    let once = ok(&["run", &inst, "--algo", "expand-once", "--rng", "5"]);
    assert_eq!(once.lines().count(), 1);
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path());
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    ok(&["run", &inst, "--algo", "ews", "--trace", a.to_str().unwrap()]);
    ok(&["run", &inst, "--algo", "ews", "--trace", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

const PLAN: &str = r#"
s_values = [0.6, 0.8]
seed_sizes = [20, 40]
repetitions = 2
algorithms = ["ews", "irma"]
rng_seed = 4

[source]
kind = "er"
n = 500
mean_degree = 8.0
"#;

#[test]
fn sweep_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.toml");
    std::fs::write(&plan, PLAN).unwrap();
    let out = dir.path().join("res");
    let summary = ok(&["sweep", plan.to_str().unwrap(), "--out", out.to_str().unwrap(), "--repetitions", "3"]);
    assert_eq!(summary.lines().count(), 8);
    assert!(summary.lines().all(|l| l.contains("\"runs\":3")));
    let table = ok(&["report", out.to_str().unwrap()]);
    assert_eq!(table.lines().count(), 8);
    for f in ["plot_seed_size.csv", "plot_iteration.csv", "plot_precision_delta.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let again = dir.path().join("res2");
    ok(&["sweep", plan.to_str().unwrap(), "--out", again.to_str().unwrap(), "--repetitions", "3"]);
    assert_eq!(std::fs::read(out.join("results.csv")).unwrap(), std::fs::read(again.join("results.csv")).unwrap());
}

#[test]
fn partial_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"source": {"kind": "ba", "n": 300, "m": 3}, "s_values": [0.7], "seed_sizes": [10, 100000],
            "repetitions": 1, "algorithms": ["ews"]}"#,
    )
    .unwrap();
    let out = graphmatch(&["sweep", plan.to_str().unwrap(), "--out", dir.path().join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let errors = std::fs::read_to_string(dir.path().join("r/errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 2);
}

#[test]
fn fatal_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(graphmatch(&["run", dir.path().join("nope").to_str().unwrap()]).status.code(), Some(1));
    let plan = dir.path().join("bad.json");
    std::fs::write(&plan, r#"{"source": {"kind": "er", "n": 100, "mean_degree": 5}, "s_values": [1.5], "seed_sizes": [5], "repetitions": 1}"#).unwrap();
    assert_eq!(graphmatch(&["sweep", plan.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(graphmatch(&["report", dir.path().to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(graphmatch(&["sweep", plan.to_str().unwrap(), "--algorithms", "pgm"]).status.code(), Some(1));
}

#[test]
fn theorem_prints_summary() {
    let out = ok(&["theorem", "--n", "200", "--theta", "0.05", "--runs", "3", "--seed-size", "15"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    assert_eq!(v["config"]["seed_size"], 15);
}
