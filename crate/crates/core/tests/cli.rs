use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn metamax(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metamax"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn run_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    fs::write(
        &cfg,
        "# small synthetic comparison\nbenchmark = synthetic:1.0,0.5,0.8@0.3\nstrategies = metamax, unif, rand\nbudget = 300\nruns = 3\nseed = 7\nstrategy.k = 3\n",
    )
    .unwrap();
    let out = metamax(&["run", "--config", "exp.conf", "--out", "res"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["curves.csv", "traces.csv", "rounds.csv"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let curves = fs::read_to_string(dir.path().join("res/curves.csv")).unwrap();
    assert!(curves.starts_with("strategy,checkpoint_evals,mean_error,std,ci99_halfwidth,runs\n"));

    let growth = metamax(&["report", "growth", "--in", "res/rounds.csv"], dir.path());
    assert_eq!(code(&growth), 0, "{}", String::from_utf8_lossy(&growth.stderr));
    assert!(String::from_utf8_lossy(&growth.stdout).starts_with("strategy,run,round,total_steps,ratio\n"));
}

#[test]
fn overrides_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = metamax(
        &[
            "run",
            "--benchmark",
            "griewank_mod:2",
            "--strategy",
            "metamax,luby",
            "--budget",
            "600",
            "--runs",
            "2",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("metamax") && stdout.contains("luby"), "{stdout}");
}

#[test]
fn invalid_configs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        r#"{"benchmark": {"kind": "griewank_mod", "d": 2}, "strategies": [], "budget": 10, "colour": 1}"#,
    )
    .unwrap();
    fs::write(dir.path().join("dup.conf"), "budget = 10\nbudget = 20\n").unwrap();
    for args in [
        &["run", "--config", "bad.json"][..],
        &["run", "--config", "dup.conf"],
        &["run", "--config", "missing.conf"],
        &[
            "run",
            "--benchmark",
            "griewank_mod:2",
            "--strategy",
            "nope",
            "--budget",
            "10",
        ],
        &[
            "run",
            "--benchmark",
            "griewank_mod:2",
            "--strategy",
            "unif",
            "--budget",
            "0",
        ],
        &["run", "--strategy", "unif"],
        &["frobnicate"],
    ] {
        let out = metamax(args, dir.path());
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[cfg(unix)]
#[test]
fn failing_objective_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sub.json"),
        r#"{"benchmark": {"kind": "subprocess", "command": ["sh", "-c", "exit 4"], "dimension": 1},
            "strategies": [{"kind": "rand"}], "budget": 5}"#,
    )
    .unwrap();
    let out = metamax(&["run", "--config", "sub.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn growth_report_rejects_fixed_pool_rows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("rounds.csv"),
        "strategy,run,round,leader,leader_steps,total_steps,best_value\nmetamax_k,0,1,0,2,11,0.5\n",
    )
    .unwrap();
    let out = metamax(&["report", "growth", "--in", "rounds.csv"], dir.path());
    assert_eq!(code(&out), 1);
    let missing = metamax(&["report", "growth", "--in", "nothing.csv"], dir.path());
    assert_eq!(code(&missing), 2);
}

#[test]
fn verify_theorems_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = metamax(&["verify", "theorems"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAILED"));
}
