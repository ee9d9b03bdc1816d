use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn visitnet(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_visitnet"));
    cmd.args(args);
    for (flag, p) in paths {
        cmd.arg(flag).arg(p);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn simulate(dir: &TempDir, args: &[&str]) -> PathBuf {
    let out = dir.path().join("sim");
    let o = visitnet(&[&["simulate"], args].concat(), &[("--out", &out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out.join("transactions.csv")
}

fn node_lines(dot: &str) -> usize {
    dot.lines().filter(|l| l.trim_end().ends_with("\";") && !l.contains("--") && !l.contains("->")).count()
}

const SMALL: &str = "subject_id,item_code,date,status\n\
c1,M040,2012-01-05,0\n\
c1,M040,2012-03-01,0\n\
c1,M072,2012-02-10,0\n\
c2,M072,2012-04-01,2\n\
c3,M040,2012-05-01,1\n\
c3,M999,2012-05-02,1\n";

#[test]
fn summary_counts() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "log.csv", SMALL);
    let o = visitnet(&["summary"], &[("--input", &input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for line in ["subjects\t3", "items\t3", "records\t6", "visits\t5", "M040\t2\t", "M072\t2\t", "M999\t1\t"] {
        assert!(text.contains(line), "missing {line:?} in\n{text}");
    }
}

#[test]
fn header_only_log_summarizes_to_zero() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "log.csv", "subject_id,item_code,date,status\n");
    let o = visitnet(&["summary"], &[("--input", &input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("subjects\t0\nitems\t0\n"));
}

#[test]
fn data_errors_exit_two_with_line_number() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.csv", "subject_id,item_code,date,status\nc1,M040,2012-01-05,0\nc2,M040,2012-01-06,7\n");
    let o = visitnet(&["summary"], &[("--input", &input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(visitnet(&["learn-forest"], &[]).status.code(), Some(1));
    assert_eq!(visitnet(&["summary", "--percentile", "abc"], &[]).status.code(), Some(1));
    assert_eq!(visitnet(&["no-such-command"], &[]).status.code(), Some(1));
    assert_eq!(visitnet(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn single_item_gives_single_node() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "one.csv", "subject_id,item_code,date,status\nc1,M040,2012-01-05,0\nc2,M040,2012-02-05,1\n");
    let out = dir.path().join("out");
    let o = visitnet(&["learn-forest"], &[("--input", &input), ("--out", &out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("forest.dot")).unwrap(), "graph forest {\n  \"M040\";\n}\n");
}

#[test]
fn include_status_adds_one_node() {
    let dir = TempDir::new().unwrap();
    let input = simulate(&dir, &["--items", "6", "--subjects", "800", "--seed", "2"]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(visitnet(&["learn-forest", "--all-items"], &[("--input", &input), ("--out", &a)]).status.success());
    assert!(visitnet(&["learn-forest", "--all-items", "--include-status"], &[("--input", &input), ("--out", &b)])
        .status
        .success());
    let without = node_lines(&fs::read_to_string(a.join("forest.dot")).unwrap());
    let with = node_lines(&fs::read_to_string(b.join("forest.dot")).unwrap());
    assert_eq!((without, with), (6, 7));
}

#[test]
fn tree_model_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = simulate(&dir, &["--model", "tree", "--items", "8", "--subjects", "20000", "--seed", "11"]);
    let out = dir.path().join("out");
    let o = visitnet(&["learn-forest", "--all-items"], &[("--input", &input), ("--out", &out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("forest.dot")).unwrap(),
        fs::read_to_string(dir.path().join("sim/truth.dot")).unwrap()
    );
    let metrics = fs::read_to_string(out.join("metrics.tsv")).unwrap();
    assert_eq!(metrics.lines().count(), 9);
}

#[test]
fn learn_dag_outputs_and_causal_order_agreement() {
    let dir = TempDir::new().unwrap();
    let input = simulate(&dir, &["--items", "6", "--subjects", "3000", "--seed", "4", "--density", "0.5"]);
    let out = dir.path().join("out");
    let o = visitnet(&["learn-dag", "--all-items", "--restarts", "10", "--min-support", "1"], &[("--input", &input), ("--out", &out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let score = fs::read_to_string(out.join("score.txt")).unwrap();
    assert!(score.starts_with("score\t"));
    let agreement = fs::read_to_string(out.join("agreement.tsv")).unwrap();
    assert!(agreement.starts_with("parent\tchild\tn_parent_first\tn_child_first\tn_tied\tverdict\n"));
    let dot = fs::read_to_string(out.join("dag.dot")).unwrap();
    assert!(dot.starts_with("digraph dag {\n"));
    assert_eq!(node_lines(&dot), 6);
}

#[test]
fn huge_penalty_gives_empty_dag() {
    let dir = TempDir::new().unwrap();
    let input = simulate(&dir, &["--items", "5", "--subjects", "1000", "--seed", "9"]);
    let out = dir.path().join("out");
    let o = visitnet(
        &["learn-dag", "--all-items", "--penalty", "10000", "--restarts", "5"],
        &[("--input", &input), ("--out", &out)],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let dot = fs::read_to_string(out.join("dag.dot")).unwrap();
    assert!(!dot.contains("->"), "{dot}");
    let score = fs::read_to_string(out.join("score.txt")).unwrap();
    assert!(score.contains("\narcs\t0\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let input = simulate(&dir, &["--items", "5", "--subjects", "1000", "--seed", "9"]);
    let cfg = write(&dir, "run.conf", &format!("input={}\npenalty=10000\nall-items=true\nrestarts=3\n", input.display()));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(visitnet(&["learn-dag"], &[("--config", &cfg), ("--out", &a)]).status.success());
    assert!(visitnet(&["learn-dag", "--penalty", "0"], &[("--config", &cfg), ("--out", &b)]).status.success());
    let empty = fs::read_to_string(a.join("score.txt")).unwrap();
    let dense = fs::read_to_string(b.join("score.txt")).unwrap();
    assert!(empty.contains("\npenalty\t10000\n") && empty.contains("\narcs\t0\n"));
    assert!(dense.contains("\npenalty\t0\n") && !dense.contains("\narcs\t0\n"));
}

#[test]
fn metrics_and_temporal_print_tables() {
    let dir = TempDir::new().unwrap();
    let input = simulate(&dir, &["--items", "5", "--subjects", "500", "--seed", "1"]);
    let m = visitnet(&["metrics", "--all-items"], &[("--input", &input)]);
    assert!(m.status.success(), "{}", stderr(&m));
    assert!(stdout(&m).starts_with("node\tdegree\tbetweenness\tcloseness\n"));
    assert_eq!(stdout(&m).lines().count(), 6);
    let t = visitnet(&["temporal", "--all-items"], &[("--input", &input)]);
    assert!(t.status.success(), "{}", stderr(&t));
    assert_eq!(stdout(&t).lines().count(), 1 + 10);
}

#[test]
fn simulate_is_deterministic() {
    let (d1, d2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let a = simulate(&d1, &["--items", "7", "--subjects", "300", "--seed", "5"]);
    let b = simulate(&d2, &["--items", "7", "--subjects", "300", "--seed", "5"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}
