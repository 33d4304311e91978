use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use folda::fixtures;
use folda::io::{write_pnml, write_traces};

fn folda(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folda"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FOLDA_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn running_example(dir: &Path) {
    fs::write(dir.join("model.pnml"), write_pnml(&fixtures::concurrent_choice_model(), "running")).unwrap();
    fs::write(dir.join("trace.json"), write_traces(&[fixtures::concurrent_trace()])).unwrap();
}

#[test]
fn align_running_example() {
    let dir = tempfile::tempdir().unwrap();
    running_example(dir.path());
    for v in ["foldn", "foldh", "dijkstra", "astar"] {
        let o = folda(&["align", "model.pnml", "trace.json", "--variant", v, "--dot", "a.dot"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{v}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).trim(), "trace 0: cost 0 sync 4 log 0 model 0 silent 0");
        let dot = fs::read_to_string(dir.path().join("a.dot")).unwrap();
        assert_eq!(dot.matches("shape=box").count(), 4);
    }
    let dot = fs::read_to_string(dir.path().join("a.dot")).unwrap();
    assert_eq!(dot.matches(" -> ").count(), 3, "chain for a sequential aligner");
    folda(&["align", "model.pnml", "trace.json", "--variant", "foldh", "--dot", "a.dot"], dir.path());
    let dot = fs::read_to_string(dir.path().join("a.dot")).unwrap();
    assert_eq!(dot.matches(" -> ").count(), 4, "diamond");
}

#[test]
fn align_writes_process_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    running_example(dir.path());
    for _ in 0..2 {
        let o = folda(&["align", "model.pnml", "trace.json", "--dot-prefix", "bp", "--metrics", "m.csv"], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let csv = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "one header, one row per run");
    assert!(lines[0].starts_with("variant,model_id"));
    assert!(lines[1].starts_with("foldh,model,0,none,"));
    assert!(fs::read_to_string(dir.path().join("bp0.dot")).unwrap().contains("style=\"filled,bold\""));
}

#[test]
fn timeout_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = folda(&["gen", "--construct", "C", "--breadth", "4", "--depth", "4", "--traces", "2", "--out", "g"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = folda(
        &["align", "g/model.pnml", "g/traces.txt", "--variant", "dijkstra", "--timeout", "0.000001", "--metrics", "m.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1")), "{csv}");
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    running_example(dir.path());
    assert_eq!(folda(&["align", "missing.pnml", "trace.json"], dir.path()).status.code(), Some(1));
    assert_eq!(folda(&["align", "model.pnml", "trace.json", "--variant", "bfs"], dir.path()).status.code(), Some(1));
    assert_eq!(folda(&["frobnicate"], dir.path()).status.code(), Some(1));
    fs::write(dir.path().join("bad.txt"), "A,,B\n").unwrap();
    assert_eq!(folda(&["align", "model.pnml", "bad.txt"], dir.path()).status.code(), Some(1));
    let o = folda(&["gen", "--construct", "C", "--breadth", "0", "--depth", "2", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(folda(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn unalignable_trace_names_its_index() {
    let dir = tempfile::tempdir().unwrap();
    let mut b = folda::net::NetBuilder::new();
    let (i, f) = (b.place("i"), b.place("f"));
    b.initial(i, 1).final_tokens(f, 1);
    fs::write(dir.path().join("dead.pnml"), write_pnml(&b.build().unwrap(), "dead")).unwrap();
    fs::write(dir.path().join("t.txt"), "A\n").unwrap();
    let o = folda(&["align", "dead.pnml", "t.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace 0"));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["gen", "--construct", "C", "--breadth", "3", "--depth", "5", "--traces", "5", "--seed", "11", "--deviation", "end", "--out", out]
    };
    assert_eq!(folda(&args("a"), dir.path()).status.code(), Some(0));
    assert_eq!(folda(&args("b"), dir.path()).status.code(), Some(0));
    for f in ["model.pnml", "traces.txt"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let model = fs::read_to_string(dir.path().join("a/model.pnml")).unwrap();
    assert_eq!(model.matches("<transition ").count(), 17);
    let nested = folda(
        &["gen", "--construct", "EN", "--depth", "2", "--nesting-factor", "2", "--nesting-breadth", "2", "--nesting-depth", "2", "--out", "n"],
        dir.path(),
    );
    assert_eq!(nested.status.code(), Some(0));
    let looped = folda(&["gen", "--construct", "L", "--depth", "3", "--out", "l"], dir.path());
    assert_eq!(looped.status.code(), Some(0));
}

fn without_elapsed(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(8);
            f.join(",")
        })
        .collect()
}

#[test]
fn bench_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("m.txt"),
        "construct=C breadth=2 depth=2 seed=3 traces=5\nconstruct=E breadth=3 depth=2 seed=4 traces=5\n",
    )
    .unwrap();
    let run = |out: &str, jobs: &str| {
        folda(&["bench", "--manifest", "m.txt", "--variants", "foldh,astar", "--jobs", jobs, "--out", out], dir.path())
    };
    assert_eq!(run("a.csv", "1").status.code(), Some(0));
    assert_eq!(run("b.csv", "3").status.code(), Some(0));
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a.lines().count(), 1 + 2 * 4 * 2 * 5);
    assert_eq!(without_elapsed(&a), without_elapsed(&b));
    let o = folda(&["bench", "--manifest", "nope.txt", "--out", "c.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}
