//! Binary-level checks: flag handling, exit codes, file formats, and the
//! determinism contract as seen from outside the process.

use std::path::Path;
use std::process::{Command, Output};

fn zograd(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zograd"));
    cmd.args(args).env_remove("ZOGRAD_SEED");
    cmd
}

fn run_ok(args: &[&str]) -> Output {
    let out = zograd(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = zograd(args).output().expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Trace lines with the wall-clock column blanked: every other byte of a
/// trace is a deterministic function of (problem, config).
fn without_wall(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|line| {
            if line.starts_with('#') || line.starts_with("iter,") {
                line.to_string()
            } else {
                let (head, _wall) = line.rsplit_once(',').unwrap();
                format!("{head},_")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn run_writes_a_self_describing_trace_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let stdout = run_ok(&[
            "run", "--problem", "osborne2", "--noise", "rel", "--sigma", "1e-2", "--method",
            "cgs", "--num-dirs", "4", "--nu", "1e-2", "--alpha", "1e-2", "--budget", "4000",
            "--seed", "5", "--out", out.to_str().unwrap(),
        ])
        .stdout;
        let stdout = String::from_utf8(stdout).unwrap();
        assert!(stdout.contains("final_gap"));
        assert!(stdout.contains("total_evals"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    for needle in [
        "# zograd trace v1",
        "# problem=osborne2",
        "# method=cgs",
        "# num_dirs=4",
        "# nu=1.0000000000000000e-2",
        "# theta=9.0000000000000002e-1",
        "# seed=5",
        "# noise=rel",
        "# status=complete",
        "iter,cum_evals,F,gap,batch_size,grad_norm,wall_ms",
    ] {
        assert!(text.contains(needle), "trace must echo {needle:?}");
    }
    assert_eq!(without_wall(&a), without_wall(&b));
}

#[test]
fn usage_errors_exit_2() {
    let (code, err) = exit_code(&[
        "run", "--problem", "nosuch", "--method", "cfd", "--nu", "1e-2", "--alpha", "1e-2",
        "--budget", "1000",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown problem"));

    // more coordinate directions than dimensions
    let (code, err) = exit_code(&[
        "run", "--problem", "cube", "--method", "crc", "--num-dirs", "100", "--nu", "1e-2",
        "--alpha", "1e-2", "--budget", "10000",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("num_dirs"));

    let (code, err) = exit_code(&[
        "run", "--problem", "logreg", "--method", "cfd", "--nu", "1e-2", "--alpha", "1e-2",
        "--budget", "1000",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("--data"));

    let (code, _) = exit_code(&["run", "--problem", "cube", "--method", "cfd", "--nu", "1e-2"]);
    assert_eq!(code, 2, "missing required flags is a usage error");

    let (code, _) = exit_code(&["nosuchcommand"]);
    assert_eq!(code, 2);
}

#[test]
fn aborted_runs_exit_1_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aborted.csv");
    let (code, err) = exit_code(&[
        "run", "--problem", "quadratic", "--dim", "4", "--sigma", "0.1", "--method", "cfd",
        "--nu", "1e-2", "--alpha", "1e200", "--budget", "10000", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("aborted"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# status=aborted:"), "partial trace must be flagged");
}

#[test]
fn malformed_data_files_exit_1_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.libsvm");
    std::fs::write(&data, "1 1:0.5\n-1 3:1 2:4\n").unwrap();
    let (code, err) = exit_code(&[
        "run", "--problem", "logreg", "--data", data.to_str().unwrap(), "--method", "cfd",
        "--nu", "1e-2", "--alpha", "1e-1", "--budget", "10000",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "parse errors carry positions: {err}");
}

#[test]
fn seed_comes_from_flag_then_env_then_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let base = [
        "run", "--problem", "cube", "--method", "cfd", "--nu", "1e-2", "--alpha", "1e-5",
        "--budget", "200",
    ];
    let seed_line = |extra: &[&str], env: Option<&str>| {
        let mut cmd = zograd(&base);
        cmd.args(["--out", out.to_str().unwrap()]).args(extra);
        if let Some(v) = env {
            cmd.env("ZOGRAD_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read_to_string(&out)
            .unwrap()
            .lines()
            .find(|l| l.starts_with("# seed="))
            .unwrap()
            .to_string()
    };
    assert_eq!(seed_line(&[], None), "# seed=0");
    assert_eq!(seed_line(&[], Some("42")), "# seed=42");
    assert_eq!(seed_line(&["--seed", "7"], Some("42")), "# seed=7");

    let mut cmd = zograd(&base);
    cmd.args(["--out", out.to_str().unwrap()]).env("ZOGRAD_SEED", "not-a-number");
    assert_eq!(cmd.output().unwrap().status.code(), Some(2));
}

#[test]
fn problems_list_shows_the_registry() {
    let out = run_ok(&["problems", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for (id, d, p) in [
        ("bdqrtic", "50", "92"),
        ("cube", "20", "20"),
        ("chebyquad", "30", "45"),
        ("osborne2", "11", "65"),
    ] {
        let row = text.lines().find(|l| l.starts_with(id)).expect(id);
        assert!(row.contains(d) && row.contains(p), "row {row:?}");
    }
    assert!(text.contains("logreg"));
    // bare `problems` defaults to list
    let bare = run_ok(&["problems"]);
    assert_eq!(bare.stdout, text.as_bytes());
}

#[test]
fn validate_quick_passes_on_a_fresh_build() {
    let out = run_ok(&["validate", "--quick"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS affine-exactness"));
    assert!(text.contains("0 failed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn aggregate_checks_configs_and_orders_quantiles() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces");
    std::fs::create_dir(&traces).unwrap();
    let run_trace = |seed: &str, alpha: &str, name: &str| {
        run_ok(&[
            "run", "--problem", "quadratic", "--dim", "5", "--sigma", "0.3", "--method", "css",
            "--num-dirs", "2", "--nu", "1e-2", "--alpha", alpha, "--budget", "2000", "--seed",
            seed, "--out", traces.join(name).to_str().unwrap(),
        ]);
    };
    for (seed, name) in [("1", "s1.csv"), ("2", "s2.csv"), ("3", "s3.csv")] {
        run_trace(seed, "2e-1", name);
    }
    let glob_arg = format!("{}/s*.csv", traces.display());
    let summary = dir.path().join("summary.csv");
    run_ok(&["aggregate", "--glob", &glob_arg, "--out", summary.to_str().unwrap()]);
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.starts_with("# zograd summary v1\n# runs=3\n"));
    for line in text.lines().skip(4) {
        let f: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!(f[1] <= f[0] && f[0] <= f[2], "gap quantiles ordered in {line}");
        assert!(f[4] <= f[3] && f[3] <= f[5], "batch quantiles ordered in {line}");
    }

    // a trace with a different step size poisons the set ...
    run_trace("4", "1e-1", "s4.csv");
    let (code, err) = exit_code(&[
        "aggregate", "--glob", &glob_arg, "--out", summary.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("mixed configs") && err.contains("--force"));

    // ... unless forced, which labels the summary as mixed
    run_ok(&[
        "aggregate", "--glob", &glob_arg, "--out", summary.to_str().unwrap(), "--force",
    ]);
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.contains("# config=mixed (2 configs)"));
}

#[test]
fn tune_emits_twenty_traces_plus_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "tune", "--problem", "quadratic", "--dim", "4", "--sigma", "0.2", "--method", "cfd",
        "--budget", "1000", "--grid-nu", "1e-2", "--grid-alpha", "5e-1,1e-3", "--master-seed",
        "3", "--jobs", "2", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("best num_dirs=4"));
    let entries: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let n_traces = entries.iter().filter(|n| n.contains("_seed")).count();
    assert_eq!(n_traces, 20);
    assert!(entries.iter().any(|n| n == "quadratic_cfd_summary.csv"));
}
