//! Command-line front end. [`run`] takes the full argument list and returns
//! the process exit code, so the binary is a one-liner and tests can drive
//! it in-process.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 usage error
//! (bad flags, unreadable or malformed input files), 3 ε outside the
//! bound-state domain, 4 solver failure, 5 interpolation target out of
//! range, 6 non-monotone sweep.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::green::{GreenError, GreenOperator, DEFAULT_GAP_FLOOR};
use crate::io::{parse_key_values, sci, RunManifest};
use crate::model::{self, Fixture, ModelProblem, ModelSpec};
use crate::solver::{solve, Scheme, SolverConfig, StartVector};
use crate::sweep::{
    self, compare_schemes_with, detect_pseudoconvergence, interpolate_eps_of_lambda,
    read_sweep_csv, run_sweep_with, SweepError, SweepOptions, DEFAULT_SMOOTHNESS_THRESHOLD,
};
use crate::Branch;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_OUT_OF_RANGE: i32 = 5;
pub const EXIT_NON_MONOTONE: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "waxman",
    version,
    about = "Green's-operator eigensolvers for bound-state coupling constants"
)]
struct Cli {
    /// `key=value` file with defaults for any flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a model problem file.
    Model(ModelArgs),
    /// Solve for λ at one energy.
    Solve(SolveArgs),
    /// Solve over an ε grid and write the λ(ε) curve.
    Sweep(SweepArgs),
    /// Run both schemes over an ε grid.
    Compare(CompareArgs),
    /// Interpolate ε for a target λ from a sweep CSV.
    Invert(InvertArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Built-in fixture: easy20, hard20 or identityV.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    tmin: Option<String>,
    #[arg(long)]
    tstep: Option<String>,
    #[arg(long)]
    vscale: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// power or 2x2
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// highest or lowest
    #[arg(long)]
    branch: Option<String>,
    /// uniform, basis:<k> or a comma-separated vector
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    breakdown_tol: Option<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    eps: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Trace CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute λ from a dense eigen-decomposition and print the difference.
    #[arg(long)]
    verify_oracle: bool,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// start:stop:count, endpoints included
    #[arg(long)]
    grid: Option<String>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<String>,
    /// Start each point from the previous eigenvector.
    #[arg(long)]
    warm_start: bool,
    /// Cap one grid point's iterations, `<index>:<max_iter>`; repeatable.
    #[arg(long, value_name = "INDEX:ITERS")]
    truncate: Vec<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Run the smoothness check and add a `flagged` column.
    #[arg(long)]
    detect: bool,
    #[arg(long)]
    threshold: Option<String>,
    /// Re-solve flagged points with the other scheme.
    #[arg(long)]
    rerun_flagged: bool,
    /// Sweep CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot file path (default `<out>.plot`).
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Smoothness report path (default `<out>.smoothness`).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Per-point comparison CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace CSV path (default `<out>.traces.csv`).
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn new(code: i32, msg: impl Display) -> Self {
        Self {
            code,
            msg: msg.to_string(),
        }
    }

    fn usage(msg: impl Display) -> Self {
        Self::new(EXIT_USAGE, msg)
    }
}

impl From<GreenError> for CliError {
    fn from(e: GreenError) -> Self {
        match e {
            GreenError::EpsilonInSpectrum { .. } => Self::new(EXIT_DOMAIN, e),
            _ => Self::new(EXIT_SOLVER, e),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Green(g) => g.into(),
            SweepError::InvalidGrid(_) | SweepError::Parse { .. } => Self::usage(e),
            SweepError::Solve(_) | SweepError::TooFewPoints { .. } => Self::new(EXIT_SOLVER, e),
            SweepError::OutOfRange { .. } => Self::new(EXIT_OUT_OF_RANGE, e),
            SweepError::NonMonotone { .. } => Self::new(
                EXIT_NON_MONOTONE,
                format!("{e}; run `sweep --detect` to exclude pseudoconverged points"),
            ),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Flag values merged over the `--config` file; records every effective
/// value for the manifest.
struct Settings {
    file: BTreeMap<String, String>,
    effective: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let file = match path {
            Some(p) => {
                let text = read(p)?;
                parse_key_values(&text)
                    .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
                    .into_iter()
                    .map(|(k, v)| (k.replace('-', "_"), v))
                    .collect()
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            effective: BTreeMap::new(),
        })
    }

    fn raw(&mut self, key: &str, flag: Option<&str>) -> Option<String> {
        let v = flag
            .map(str::to_string)
            .or_else(|| self.file.get(key).cloned())?;
        self.effective.insert(key.to_string(), v.clone());
        Some(v)
    }

    fn get<T: FromStr>(&mut self, key: &str, flag: Option<&str>) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        match self.raw(key, flag) {
            Some(v) => v.parse().map(Some).map_err(|e| {
                CliError::usage(format!("invalid --{}: `{v}`: {e}", key.replace('_', "-")))
            }),
            None => Ok(None),
        }
    }

    fn get_or<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: T,
    ) -> CliResult<T>
    where
        T::Err: Display,
    {
        match self.get(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.effective.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    fn require<T: FromStr>(&mut self, key: &str, flag: Option<&str>) -> CliResult<T>
    where
        T::Err: Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| CliError::usage(format!("missing required --{}", key.replace('_', "-"))))
    }

    fn path(&mut self, key: &str, flag: Option<&Path>) -> Option<PathBuf> {
        let s = flag.map(|p| p.to_string_lossy().into_owned());
        self.raw(key, s.as_deref()).map(PathBuf::from)
    }

    fn require_path(&mut self, key: &str, flag: Option<&Path>) -> CliResult<PathBuf> {
        self.path(key, flag)
            .ok_or_else(|| CliError::usage(format!("missing required --{key}")))
    }

    fn flag(&mut self, key: &str, set: bool) -> CliResult<bool> {
        let v = if set {
            true
        } else {
            self.get(key, None)?.unwrap_or(false)
        };
        self.effective.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn solver(&mut self, a: &SolverArgs) -> CliResult<(Scheme, SolverConfig)> {
        let d = SolverConfig::default();
        let scheme = self.get_or("scheme", a.scheme.as_deref(), Scheme::Power)?;
        let cfg = SolverConfig {
            tol: self.get_or("tol", a.tol.as_deref(), d.tol)?,
            max_iter: self.get_or("max_iter", a.max_iter.as_deref(), d.max_iter)?,
            branch: self.get_or("branch", a.branch.as_deref(), Branch::Highest)?,
            start: self.get_or("start", a.start.as_deref(), StartVector::Uniform)?,
            breakdown_tol: self.get_or(
                "breakdown_tol",
                a.breakdown_tol.as_deref(),
                d.breakdown_tol,
            )?,
        };
        cfg.validate().map_err(CliError::usage)?;
        Ok((scheme, cfg))
    }

    fn grid(&mut self, a: &GridArgs) -> CliResult<(ModelProblem, Vec<f64>, SweepOptions)> {
        let model_path = self.require_path("model", a.model.as_deref())?;
        let problem = load_model(&model_path)?;
        let grid_spec: String = self.require("grid", a.grid.as_deref())?;
        let grid = sweep::parse_grid(&grid_spec)?;
        let jobs: usize = self.get_or("jobs", a.jobs.as_deref(), 1)?;
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        let warm_start = self.flag("warm_start", a.warm_start)?;
        let truncate_flag = (!a.truncate.is_empty()).then(|| a.truncate.join(","));
        let max_iter_at = match self.raw("truncate", truncate_flag.as_deref()) {
            Some(s) => parse_truncations(&s, grid.len())?,
            None => BTreeMap::new(),
        };
        Ok((
            problem,
            grid,
            SweepOptions {
                warm_start,
                jobs,
                max_iter_at,
                gap_floor: DEFAULT_GAP_FLOOR,
            },
        ))
    }

    fn manifest(&self, command: &str, seed: Option<u64>) -> RunManifest {
        RunManifest::new(command, self.effective.clone(), seed)
    }
}

fn parse_truncations(spec: &str, grid_len: usize) -> CliResult<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || {
            CliError::usage(format!(
                "invalid --truncate `{item}`: expected <index>:<max_iter>"
            ))
        };
        let (i, n) = item.split_once(':').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if i >= grid_len || n == 0 {
            return Err(CliError::usage(format!(
                "--truncate `{item}`: index must be below {grid_len} and max_iter at least 1"
            )));
        }
        out.insert(i, n);
    }
    Ok(out)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    write(&with_suffix(out, ".manifest"), &manifest.to_text())
}

fn load_model(path: &Path) -> CliResult<ModelProblem> {
    model::from_text(&read(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_model(s: &mut Settings, a: &ModelArgs) -> CliResult<()> {
    let out = s.require_path("out", a.out.as_deref())?;
    let dim: Option<usize> = s.get("dim", a.dim.as_deref())?;
    if dim == Some(0) {
        return Err(CliError::usage("--dim must be at least 1"));
    }
    let problem = match s.raw("fixture", a.fixture.as_deref()) {
        Some(name) => {
            let which: Fixture = name.parse().map_err(CliError::usage)?;
            model::fixture_with_dim(which, dim).map_err(CliError::usage)?
        }
        None => {
            let dim =
                dim.ok_or_else(|| CliError::usage("either --fixture or --dim is required"))?;
            let spec = ModelSpec::evenly_spaced(
                dim,
                s.get_or("tmin", a.tmin.as_deref(), 10.0)?,
                s.get_or("tstep", a.tstep.as_deref(), 1.0)?,
                s.get_or("vscale", a.vscale.as_deref(), 0.1)?,
                s.get_or("seed", a.seed.as_deref(), 0)?,
                s.get_or("label", a.label.as_deref(), "custom".to_string())?,
            );
            model::generate(&spec).map_err(CliError::usage)?
        }
    };
    write(&out, &model::to_text(&problem))?;
    write_manifest(&out, &s.manifest("model", Some(problem.seed)))?;
    println!(
        "wrote {} (dim={} label={})",
        out.display(),
        problem.dim(),
        problem.label
    );
    Ok(())
}

fn cmd_solve(s: &mut Settings, a: &SolveArgs) -> CliResult<()> {
    let model_path = s.require_path("model", a.model.as_deref())?;
    let eps: f64 = s.require("eps", a.eps.as_deref())?;
    let (scheme, cfg) = s.solver(&a.solver)?;
    let verify = s.flag("verify_oracle", a.verify_oracle)?;
    let out = s.path("out", a.out.as_deref());
    let problem = load_model(&model_path)?;

    let g = GreenOperator::with_gap_floor(&problem, eps, DEFAULT_GAP_FLOOR)?;
    let report = solve(&g, scheme, &cfg).map_err(|e| CliError::new(EXIT_SOLVER, e))?;
    println!("lambda={:?}", report.lambda_final);
    println!("iterations={}", report.iterations);
    println!("op_applications={}", report.op_applications);
    println!("status={}", report.status.name());
    if verify {
        let exact = g.lambda_exact(cfg.branch)?;
        println!("lambda_exact={exact:?}");
        println!(
            "rel_diff={}",
            sci((report.lambda_final - exact).abs() / exact.abs())
        );
    }
    if let Some(out) = out {
        write(&out, &report.trace.to_csv())?;
        write_manifest(&out, &s.manifest("solve", Some(problem.seed)))?;
    }
    Ok(())
}

fn other_scheme(s: Scheme) -> Scheme {
    match s {
        Scheme::Power => Scheme::Modified,
        Scheme::Modified => Scheme::Power,
    }
}

fn cmd_sweep(s: &mut Settings, a: &SweepArgs) -> CliResult<()> {
    let (problem, grid, opts) = s.grid(&a.grid)?;
    let (scheme, cfg) = s.solver(&a.solver)?;
    let detect = s.flag("detect", a.detect)?;
    let threshold: f64 = s.get_or(
        "threshold",
        a.threshold.as_deref(),
        DEFAULT_SMOOTHNESS_THRESHOLD,
    )?;
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(CliError::usage("--threshold must be positive"));
    }
    let rerun = s.flag("rerun_flagged", a.rerun_flagged)?;
    if rerun && !detect {
        return Err(CliError::usage("--rerun-flagged needs --detect"));
    }
    let out = s.require_path("out", a.out.as_deref())?;
    let plot = s
        .path("plot", a.plot.as_deref())
        .unwrap_or_else(|| with_suffix(&out, ".plot"));
    let report_path = s
        .path("report", a.report.as_deref())
        .unwrap_or_else(|| with_suffix(&out, ".smoothness"));

    let mut result = run_sweep_with(&problem, &grid, scheme, &cfg, &opts)?;
    let mut files = Vec::new();
    let mut failure = None;
    if detect {
        match detect_pseudoconvergence(&result.points, threshold) {
            Ok(report) => {
                result.apply_flags(&report);
                if rerun && !report.flags.is_empty() {
                    let idx = report.flagged_indices();
                    let sub: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
                    let plain = SweepOptions {
                        max_iter_at: BTreeMap::new(),
                        ..opts.clone()
                    };
                    let again = run_sweep_with(&problem, &sub, other_scheme(scheme), &cfg, &plain)?;
                    files.push((with_suffix(&out, ".rerun.csv"), again.to_csv(false)));
                }
                println!("flagged={}", report.flags.len());
                files.push((report_path, report.to_text()));
            }
            Err(e @ SweepError::TooFewPoints { .. }) => {
                files.push((
                    report_path,
                    format!("threshold={}\nerror={e}\n", sci(threshold)),
                ));
                failure = Some(CliError::from(e));
            }
            Err(e) => return Err(e.into()),
        }
    }
    files.insert(0, (out.clone(), result.to_csv(detect)));
    files.insert(1, (plot, result.to_plot()));
    for (path, text) in &files {
        write(path, text)?;
    }
    write_manifest(&out, &s.manifest("sweep", Some(problem.seed)))?;
    let converged = result.points.iter().filter(|p| p.is_converged()).count();
    println!("points={} converged={converged}", result.points.len());
    failure.map_or(Ok(()), Err)
}

fn cmd_compare(s: &mut Settings, a: &CompareArgs) -> CliResult<()> {
    let (problem, grid, opts) = s.grid(&a.grid)?;
    let (_, cfg) = s.solver(&a.solver)?;
    let out = s.require_path("out", a.out.as_deref())?;
    let traces = s
        .path("traces", a.traces.as_deref())
        .unwrap_or_else(|| with_suffix(&out, ".traces.csv"));
    let cmp = compare_schemes_with(&problem, &grid, &cfg, &opts)?;
    write(&out, &cmp.to_csv())?;
    write(&traces, &cmp.traces_csv())?;
    write_manifest(&out, &s.manifest("compare", Some(problem.seed)))?;
    println!("{}", cmp.summary());
    Ok(())
}

fn cmd_invert(s: &mut Settings, a: &InvertArgs) -> CliResult<()> {
    let path = s.require_path("sweep", a.sweep.as_deref())?;
    let lambda: f64 = s.require("lambda", a.lambda.as_deref())?;
    let points = read_sweep_csv(&read(&path)?)?;
    let eps = interpolate_eps_of_lambda(&points, lambda)?;
    println!("epsilon={eps:?}");
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut s = Settings::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Model(a) => cmd_model(&mut s, a),
        Command::Solve(a) => cmd_solve(&mut s, a),
        Command::Sweep(a) => cmd_sweep(&mut s, a),
        Command::Compare(a) => cmd_compare(&mut s, a),
        Command::Invert(a) => cmd_invert(&mut s, a),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}
