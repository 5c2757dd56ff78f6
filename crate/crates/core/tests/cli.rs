mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use waxman::cli::{
    EXIT_DOMAIN, EXIT_NON_MONOTONE, EXIT_OK, EXIT_OUT_OF_RANGE, EXIT_SOLVER, EXIT_USAGE,
};
use waxman::model::from_text;
use waxman::sweep::read_sweep_csv;
use waxman::Branch;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn waxman(dir: &Path, args: &[&str]) -> Out {
    let out = Command::new(env!("CARGO_BIN_EXE_waxman"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    Out {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = waxman(dir, args);
    assert_eq!(o.code, EXIT_OK, "{args:?}: {}", o.stderr);
    o.stdout
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn value<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
}

fn without_timestamp(manifest: &str) -> String {
    manifest
        .lines()
        .filter(|l| !l.starts_with("timestamp="))
        .collect::<Vec<_>>()
        .join("\n")
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn model_fixture_identity() {
    let (_t, d) = setup();
    ok(
        &d,
        &[
            "model",
            "--fixture",
            "identityV",
            "--dim",
            "4",
            "--out",
            "m.txt",
        ],
    );
    let p = from_text(&read(&d, "m.txt")).unwrap();
    assert_eq!(p.dim(), 4);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(p.v.get(i, j), if i == j { 1.0 } else { 0.0 });
        }
    }
    let manifest = read(&d, "m.txt.manifest");
    assert!(
        manifest.contains("command=model")
            && manifest.contains("fixture=identityV")
            && manifest.contains("timestamp=")
    );
}

#[test]
fn model_is_deterministic() {
    let (_t, d) = setup();
    let args = [
        "model", "--dim", "6", "--tmin", "3", "--tstep", "0.5", "--vscale", "0.4", "--seed", "99",
        "--out",
    ];
    ok(&d, &[&args[..], &["a.txt"]].concat());
    ok(&d, &[&args[..], &["b.txt"]].concat());
    assert_eq!(read(&d, "a.txt"), read(&d, "b.txt"));
    assert_eq!(
        without_timestamp(&read(&d, "a.txt.manifest")).replace("a.txt", ""),
        without_timestamp(&read(&d, "b.txt.manifest")).replace("b.txt", "")
    );
}

#[test]
fn model_usage_errors() {
    let (_t, d) = setup();
    assert_eq!(
        waxman(&d, &["model", "--dim", "0", "--out", "m.txt"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        waxman(&d, &["model", "--fixture", "nope", "--out", "m.txt"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        waxman(
            &d,
            &[
                "model",
                "--fixture",
                "easy20",
                "--dim",
                "5",
                "--out",
                "m.txt"
            ]
        )
        .code,
        EXIT_USAGE
    );
    assert_eq!(waxman(&d, &["model", "--dim", "3"]).code, EXIT_USAGE);
    assert_eq!(
        waxman(
            &d,
            &["model", "--dim", "3", "--vscale", "abc", "--out", "m.txt"]
        )
        .code,
        EXIT_USAGE
    );
    assert_eq!(waxman(&d, &["model", "--unknown"]).code, EXIT_USAGE);
}

#[test]
fn solve_identity_v() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "identityV", "--out", "m.txt"]);
    let out = ok(
        &d,
        &[
            "solve",
            "--model",
            "m.txt",
            "--eps",
            "1",
            "--scheme",
            "power",
            "--out",
            "trace.csv",
        ],
    );
    let lambda: f64 = value(&out, "lambda").parse().unwrap();
    assert!(value(&out, "lambda").starts_with("1.0"));
    assert!((lambda - 1.0).abs() < 1e-9);
    assert_eq!(value(&out, "status"), "converged");
    let trace = read(&d, "trace.csv");
    assert_eq!(
        trace.lines().next(),
        Some("n,lambda,eps_n,residual,op_apps")
    );
    assert_eq!(
        trace.lines().count(),
        1 + value(&out, "iterations").parse::<usize>().unwrap()
    );
    assert!(d.join("trace.csv.manifest").exists());

    let o = waxman(&d, &["solve", "--model", "m.txt", "--eps", "2"]);
    assert_eq!(o.code, EXIT_DOMAIN);
    assert!(o.stderr.contains("min(T) = 2"), "{}", o.stderr);
}

#[test]
fn solve_verify_oracle_on_easy20() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "easy20", "--out", "e.txt"]);
    let p = from_text(&read(&d, "e.txt")).unwrap();
    let want = common::lambda_oracle(&p, 9.0, Branch::Highest);
    for scheme in ["power", "2x2"] {
        let out = ok(
            &d,
            &[
                "solve",
                "--model",
                "e.txt",
                "--eps",
                "9",
                "--scheme",
                scheme,
                "--verify-oracle",
            ],
        );
        let lambda: f64 = value(&out, "lambda").parse().unwrap();
        let diff: f64 = value(&out, "rel_diff").parse().unwrap();
        assert!(common::rel(lambda, want) <= 1e-8);
        assert!(diff <= 1e-8);
    }
}

#[test]
fn solve_failures_and_bad_flags() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "identityV", "--out", "m.txt"]);
    let o = waxman(
        &d,
        &["solve", "--model", "m.txt", "--eps", "1", "--start", "0,0"],
    );
    assert_eq!(o.code, EXIT_SOLVER, "{}", o.stderr);
    assert_eq!(
        waxman(
            &d,
            &["solve", "--model", "m.txt", "--eps", "1", "--scheme", "lanczos"]
        )
        .code,
        EXIT_USAGE
    );
    assert_eq!(
        waxman(
            &d,
            &["solve", "--model", "m.txt", "--eps", "1", "--tol", "0"]
        )
        .code,
        EXIT_USAGE
    );
    assert_eq!(
        waxman(&d, &["solve", "--model", "missing.txt", "--eps", "1"]).code,
        EXIT_USAGE
    );
    assert_eq!(waxman(&d, &["solve", "--model", "m.txt"]).code, EXIT_USAGE);
}

#[test]
fn config_file_with_flag_override() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "easy20", "--out", "e.txt"]);
    std::fs::write(
        d.join("run.cfg"),
        "# defaults\nscheme = 2x2\ntol = 1e-6\nmax-iter = 3\n",
    )
    .unwrap();
    let out = ok(
        &d,
        &[
            "--config",
            "run.cfg",
            "solve",
            "--model",
            "e.txt",
            "--eps",
            "9",
            "--max-iter",
            "500",
            "--out",
            "t.csv",
        ],
    );
    assert_eq!(value(&out, "status"), "converged");
    let manifest = read(&d, "t.csv.manifest");
    for line in ["scheme=2x2", "tol=1e-6", "max_iter=500", "eps=9"] {
        assert!(
            manifest.lines().any(|l| l == line),
            "{line} missing from\n{manifest}"
        );
    }
    std::fs::write(d.join("bad.cfg"), "no equals sign\n").unwrap();
    assert_eq!(
        waxman(
            &d,
            &["--config", "bad.cfg", "solve", "--model", "e.txt", "--eps", "9"]
        )
        .code,
        EXIT_USAGE
    );
}

#[test]
fn manifest_replays_the_run() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "hard20", "--out", "h.txt"]);
    ok(
        &d,
        &[
            "sweep", "--model", "h.txt", "--grid", "2:9:8", "--scheme", "2x2", "--tol", "1e-9",
            "--out", "a.csv",
        ],
    );
    std::fs::copy(d.join("a.csv.manifest"), d.join("replay.cfg")).unwrap();
    ok(&d, &["--config", "replay.cfg", "sweep", "--out", "b.csv"]);
    assert_eq!(read(&d, "a.csv"), read(&d, "b.csv"));
}

#[test]
fn sweep_identity_v_plot_rows() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "identityV", "--out", "m.txt"]);
    ok(
        &d,
        &[
            "sweep", "--model", "m.txt", "--grid", "0:1.5:4", "--scheme", "2x2", "--out", "s.csv",
            "--plot", "s.dat",
        ],
    );
    let rows: Vec<(f64, f64)> = read(&d, "s.dat")
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(' ').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows, vec![(0.0, 2.0), (0.5, 1.5), (1.0, 1.0), (1.5, 0.5)]);
    assert_eq!(
        read(&d, "s.csv").lines().next(),
        Some("epsilon,lambda,iterations,op_apps,status")
    );

    let out = ok(&d, &["invert", "--sweep", "s.csv", "--lambda", "1.25"]);
    assert_eq!(out.trim(), "epsilon=0.75");
    assert_eq!(
        waxman(&d, &["invert", "--sweep", "s.csv", "--lambda", "99"]).code,
        EXIT_OUT_OF_RANGE
    );
}

#[test]
fn sweep_grid_errors() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "identityV", "--out", "m.txt"]);
    assert_eq!(
        waxman(
            &d,
            &["sweep", "--model", "m.txt", "--grid", "5:1:3", "--out", "s.csv"]
        )
        .code,
        EXIT_USAGE
    );
    assert_eq!(
        waxman(
            &d,
            &["sweep", "--model", "m.txt", "--grid", "0:3:4", "--out", "s.csv"]
        )
        .code,
        EXIT_DOMAIN
    );
    assert_eq!(
        waxman(
            &d,
            &[
                "sweep",
                "--model",
                "m.txt",
                "--grid",
                "0:1:4",
                "--truncate",
                "9:3",
                "--out",
                "s.csv"
            ]
        )
        .code,
        EXIT_USAGE
    );
    assert_eq!(
        waxman(
            &d,
            &["sweep", "--model", "m.txt", "--grid", "0:1:4", "--jobs", "0", "--out", "s.csv"]
        )
        .code,
        EXIT_USAGE
    );
    assert!(!d.join("s.csv").exists());
}

#[test]
fn sweep_detects_truncated_point_and_reruns_it() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "hard20", "--out", "h.txt"]);
    let out = ok(
        &d,
        &[
            "sweep",
            "--model",
            "h.txt",
            "--grid",
            "2:9:8",
            "--detect",
            "--truncate",
            "3:20",
            "--rerun-flagged",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(value(&out, "flagged"), "1");
    let points = read_sweep_csv(&read(&d, "s.csv")).unwrap();
    let flagged: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.flagged)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(flagged, vec![3]);
    assert!(read(&d, "s.csv")
        .lines()
        .next()
        .unwrap()
        .ends_with(",flagged"));
    assert!(read(&d, "s.csv.smoothness").contains("index=3 "));
    let rerun = read_sweep_csv(&read(&d, "s.csv.rerun.csv")).unwrap();
    assert_eq!(rerun.len(), 1);
    assert!(rerun[0].is_converged());

    // with the flagged point excluded the curve inverts cleanly across it
    let target = 0.5 * (points[2].lambda + points[4].lambda);
    let eps: f64 = value(
        &ok(
            &d,
            &[
                "invert",
                "--sweep",
                "s.csv",
                "--lambda",
                &target.to_string(),
            ],
        ),
        "epsilon",
    )
    .parse()
    .unwrap();
    assert!(eps > 4.0 && eps < 6.0);
}

#[test]
fn sweep_with_every_point_truncated_cannot_run_the_detector() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "hard20", "--out", "h.txt"]);
    let o = waxman(
        &d,
        &[
            "sweep",
            "--model",
            "h.txt",
            "--grid",
            "2:9:8",
            "--detect",
            "--max-iter",
            "20",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(o.code, EXIT_SOLVER);
    assert!(o.stderr.contains("at least 4 converged"));
    assert!(read(&d, "s.csv").contains("max_iterations"));
}

#[test]
fn invert_non_monotone_sweep() {
    let (_t, d) = setup();
    std::fs::write(
        d.join("bad.csv"),
        "epsilon,lambda,iterations,op_apps,status\n0,2,1,1,converged\n1,1,1,1,converged\n2,1.5,1,1,converged\n3,0.5,1,1,converged\n",
    )
    .unwrap();
    let o = waxman(&d, &["invert", "--sweep", "bad.csv", "--lambda", "1.2"]);
    assert_eq!(o.code, EXIT_NON_MONOTONE);
    assert!(o.stderr.contains("--detect"));
}

#[test]
fn compare_outputs() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "easy20", "--out", "e.txt"]);
    let out = ok(
        &d,
        &[
            "compare", "--model", "e.txt", "--grid", "2:9:8", "--out", "c.csv",
        ],
    );
    let ratio: f64 = out
        .split_whitespace()
        .find_map(|w| w.strip_prefix("median_iter_ratio="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio <= 0.7);
    let traces = read(&d, "c.csv.traces.csv");
    assert!(
        traces.lines().any(|l| l.contains(",power,"))
            && traces.lines().any(|l| l.contains(",2x2,"))
    );

    ok(&d, &["model", "--fixture", "hard20", "--out", "h.txt"]);
    ok(
        &d,
        &[
            "compare", "--model", "h.txt", "--grid", "2:9:8", "--out", "h.csv",
        ],
    );
    let csv = read(&d, "h.csv");
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for row in csv.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let iters: u64 = f[col("iter_2x2")].parse().unwrap();
        let apps: u64 = f[col("apps_2x2")].parse().unwrap();
        assert_eq!(apps, iters + 1);
        assert_eq!(f[col("agree")], "1");
    }

    ok(&d, &["model", "--fixture", "identityV", "--out", "i.txt"]);
    ok(
        &d,
        &[
            "compare", "--model", "i.txt", "--grid", "0:1.5:4", "--start", "basis:0", "--out",
            "i.csv",
        ],
    );
    for row in read(&d, "i.csv").lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        assert_ne!(f[10], "nan");
        assert_eq!(f[f.len() - 1], "1");
    }
}

#[test]
fn jobs_do_not_change_output() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "easy20", "--out", "e.txt"]);
    ok(
        &d,
        &[
            "sweep", "--model", "e.txt", "--grid", "2:9:15", "--out", "one.csv",
        ],
    );
    ok(
        &d,
        &[
            "sweep", "--model", "e.txt", "--grid", "2:9:15", "--jobs", "4", "--out", "four.csv",
        ],
    );
    assert_eq!(read(&d, "one.csv"), read(&d, "four.csv"));
    assert_eq!(read(&d, "one.csv.plot"), read(&d, "four.csv.plot"));
}

#[test]
fn warm_start_sweep_agrees_with_independent_runs() {
    let (_t, d) = setup();
    ok(&d, &["model", "--fixture", "easy20", "--out", "e.txt"]);
    ok(
        &d,
        &[
            "sweep", "--model", "e.txt", "--grid", "2:9:8", "--scheme", "2x2", "--out", "cold.csv",
        ],
    );
    ok(
        &d,
        &[
            "sweep",
            "--model",
            "e.txt",
            "--grid",
            "2:9:8",
            "--scheme",
            "2x2",
            "--warm-start",
            "--out",
            "warm.csv",
        ],
    );
    let cold = read_sweep_csv(&read(&d, "cold.csv")).unwrap();
    let warm = read_sweep_csv(&read(&d, "warm.csv")).unwrap();
    for (c, w) in cold.iter().zip(&warm) {
        assert!(common::rel(w.lambda, c.lambda) <= 1e-8);
    }
    assert!(
        warm.iter().skip(1).map(|p| p.iterations).sum::<usize>()
            < cold.iter().skip(1).map(|p| p.iterations).sum::<usize>()
    );
    assert!(read(&d, "warm.csv.manifest")
        .lines()
        .any(|l| l == "warm_start=true"));
}
