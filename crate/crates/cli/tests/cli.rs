use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hanoi-migrate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const PROBLEM: &str = "\
<GOAL> on d1 peg2, clear d1, on d2 peg1, clear d2, clear peg3
<INIT> smaller peg1 d1, smaller peg1 d2, smaller peg2 d1, smaller peg2 d2,
smaller peg3 d1, smaller peg3 d2, smaller d2 d1, on d1 d2, clear d1,
on d2 peg3, clear peg1, clear peg2
<ACTION> move
<PRE> smaller to disc, on disc from, clear disc, clear to
<EFFECT> clear from, on disc to, not on disc from, not clear to
";

#[test]
fn solve_prints_optimal_plan() {
    let o = run(&["solve", "--disks", "4", "--solver", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 15);
    let o = run(&["solve", "--disks", "2", "--format", "csv"]);
    assert_eq!(stdout(&o), "step,action\n1,move d1 d2 peg2\n2,move d2 peg1 peg3\n3,move d1 peg2 d2\n");
}

#[test]
fn solve_migration_names_components() {
    let o = run(&["solve", "--disks", "2", "--migration"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("migrate service-0 from cloud to local-edge"));
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(run(&["solve", "--solver", "oracle"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--disks", "0"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["bench", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.hanoi-problem");
    fs::write(&problem, PROBLEM).unwrap();
    let good = dir.path().join("good.hanoi-plan");
    fs::write(&good, "move d1 d2 peg2\nmove d2 peg3 peg1\n").unwrap();
    let bad = dir.path().join("bad.hanoi-plan");
    fs::write(&bad, "move d2 peg3 peg1\n").unwrap();
    let broken = dir.path().join("broken.hanoi-plan");
    fs::write(&broken, "move\n").unwrap();
    let p = problem.to_str().unwrap();

    let o = run(&["validate", p, good.to_str().unwrap(), "--optimal", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("optimal: true"));
    let o = run(&["validate", p, bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("invalid at step 0"));
    assert_eq!(run(&["validate", p, broken.to_str().unwrap()]).status.code(), Some(1));
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    fs::write(
        &path,
        r#"
version = 1
seeds = [0, 1]
instances = [{ disks = 2 }, { disks = 3 }]

[output]
dir = "out"

[[solver]]
name = "exact"

[[solver]]
name = "neurosolver"
exploration_steps = 2000

[[solver]]
name = "strips_learner"

[[solver]]
name = "ncm"
"#,
    )
    .unwrap();
    path
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let o = run(&["bench", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(table.contains("| **State Space** | RSG | CSF | CSF | RSG |"), "{table}");
    let out = dir.path().join("out");
    for f in ["runs.csv", "table.csv", "table.md"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 3 * 4 + 1);

    let o = run(&["bench", "--config", config.to_str().unwrap(), "--format", "csv", "--out", dir.path().join("again").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("metric,Exact (BFS),Neurosolver"));
}

#[test]
fn score_reports_corpus() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.hanoi-problem"), PROBLEM).unwrap();
    fs::write(dir.path().join("a.hanoi-plan"), "move d1 d2 peg2\nmove d2 peg3 peg1\n").unwrap();
    fs::write(dir.path().join("a.hanoi-ref"), "move d1 d2 peg2\nmove d2 peg3 peg1\n").unwrap();
    fs::write(dir.path().join("b.hanoi-problem"), PROBLEM).unwrap();
    fs::write(dir.path().join("b.hanoi-plan"), "move d2 peg3 peg1\n").unwrap();
    let report = dir.path().join("report.csv");
    let o = run(&["score", dir.path().to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("| validity | 50.00% |"), "{text}");
    assert!(text.contains("| ROUGE-L | 1.0000 |"));
    assert!(fs::read_to_string(report).unwrap().contains("TOTAL,2,"));
    assert_eq!(run(&["score", "/nonexistent-dir"]).status.code(), Some(1));
}
