use std::path::Path;
use std::process::{Command, Output};

fn followcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_followcast")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn stats_on_three_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c3.txt", "1 2\n2 3\n3 1\n");
    let o = followcast(&["stats", "--graph", &g]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("N=3\n"));
    assert!(text.contains("E=3\n"));
    assert!(text.contains("<k>=1\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(followcast(&["stats", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(
        followcast(&["select", "--synthetic", "2.5,50,1,5", "--p", "0.1", "--k", "1", "--strategy", "best"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        followcast(&["estimate", "--synthetic", "2.5,50,1,5", "--p", "0.1", "--nodes", "1", "--metric", "likes"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(followcast(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one() {
    let o = followcast(&["stats", "--graph", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn analyze_regular_graph() {
    let o = followcast(&["analyze", "--synthetic", "2.5,1000,100,100", "--p", "1e-2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("p_c=0.01\n"));
}

#[test]
fn select_high_degree_fixture() {
    let dir = tempfile::tempdir().unwrap();
    // 10 has four followers, 20 three, 30 two, 40 one
    let g = write(dir.path(), "g.txt", "10 1\n10 2\n10 3\n10 4\n20 1\n20 2\n20 3\n30 1\n30 2\n40 1\n");
    let out = dir.path().join("curve.csv");
    let o = followcast(&[
        "select",
        "--graph",
        &g,
        "--p",
        "0.5",
        "--k",
        "3",
        "--strategy",
        "high_degree",
        "--samples",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("picks=10,20,30\n"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("strategy,K_prefix,mean,stderr,ci_low,ci_high,picks\n"));
    assert!(csv.contains("high_degree,3,"));
    assert!(csv.trim_end().ends_with("10;20;30"));
}

#[test]
fn generate_then_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    let cache = dir.path().join("g.bin");
    let bank = dir.path().join("g.bank");
    assert!(followcast(&["generate", "--synthetic", "2.3,500,2,50", "--seed", "3", "--out", edges.to_str().unwrap()])
        .status
        .success());
    let a = stdout(&followcast(&["stats", "--graph", edges.to_str().unwrap()]));
    let o = followcast(&[
        "prune-cache",
        "--graph",
        edges.to_str().unwrap(),
        "--out",
        cache.to_str().unwrap(),
        "--p",
        "0.1",
        "--bank",
        bank.to_str().unwrap(),
        "--samples",
        "5",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("samples=5"));
    assert!(bank.exists());
    let b = stdout(&followcast(&["stats", "--graph", cache.to_str().unwrap()]));
    assert_eq!(a.lines().nth(1), b.lines().nth(1));
    assert_eq!(a.lines().last(), b.lines().last());
}

#[test]
fn experiment_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let config = write(
        dir.path(),
        "run.cfg",
        &format!(
            "# small run\nsynthetic = 2.3,400,2,40\np = 0.2\nk_grid = 1,2\nstrategies = greedy\nsamples = 10\nout = {}\n",
            dir.path().join("ignored.csv").display()
        ),
    );
    let run = |threads: &str| {
        let o = followcast(&[
            "--threads",
            threads,
            "experiment",
            "--config",
            &config,
            "--strategies",
            "greedy,random",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(&out).unwrap()
    };
    let one = run("1");
    let two = run("2");
    assert!(!dir.path().join("ignored.csv").exists());
    assert_eq!(one.lines().count(), 1 + 2 * 2 * 2);
    assert!(one.lines().any(|l| l.starts_with("random,0.2,retweeters,2,")));
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&one), strip(&two));
    assert!(out.with_extension("manifest.json").exists());
}

#[test]
fn experiment_bad_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.cfg", "p = 0.1\nwhatever = 3\n");
    assert_eq!(followcast(&["experiment", "--config", &config]).status.code(), Some(2));
}
