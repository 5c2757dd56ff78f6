//! λ(ε) sweeps over an energy grid, inversion of the curve by
//! interpolation, and a smoothness check that flags points off the trend.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::green::{make_green, GreenError, GreenOperator, DEFAULT_GAP_FLOOR};
use crate::io::sci;
use crate::linalg::Vector;
use crate::model::ModelProblem;
use crate::solver::{
    solve, ConvergenceReport, IterationTrace, Scheme, SolveError, SolverConfig, StartVector, Status,
};

/// Relative λ agreement required for two schemes to count as agreeing.
pub const AGREEMENT_TOL: f64 = 1e-8;
/// Default relative deviation above which a sweep point is flagged.
pub const DEFAULT_SMOOTHNESS_THRESHOLD: f64 = 1e-3;
const FIT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("need at least 4 converged points, found {found}")]
    TooFewPoints { found: usize },
    #[error("lambda {target} lies outside the converged range [{min}, {max}]")]
    OutOfRange { target: f64, min: f64, max: f64 },
    #[error("converged lambda values are not strictly monotone at point {index}")]
    NonMonotone { index: usize },
    #[error("sweep CSV line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Converged,
    MaxIterations,
    /// Solver error, by short kind code (e.g. `rayleigh_zero`).
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> String {
        match self {
            Self::Converged => "converged".into(),
            Self::MaxIterations => "max_iterations".into(),
            Self::Failed(kind) => format!("error:{kind}"),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(Self::Converged),
            "max_iterations" => Some(Self::MaxIterations),
            _ => s
                .strip_prefix("error:")
                .map(|k| Self::Failed(k.to_string())),
        }
    }
}

impl From<Status> for PointStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => Self::Converged,
            Status::MaxIterations => Self::MaxIterations,
        }
    }
}

fn error_kind(e: &SolveError) -> &'static str {
    match e {
        SolveError::RayleighZero { .. } => "rayleigh_zero",
        SolveError::StartVectorDegenerate => "start_degenerate",
        SolveError::RefOrthogonal { .. } => "ref_orthogonal",
        SolveError::InvalidConfig(_) => "invalid_config",
        SolveError::Linalg(_) => "linalg",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    /// NaN when the solver failed.
    pub lambda: f64,
    pub iterations: usize,
    pub op_applications: u64,
    pub status: PointStatus,
    /// Set by [`SweepResult::apply_flags`].
    pub flagged: bool,
}

impl SweepPoint {
    fn from_run(epsilon: f64, run: &Result<ConvergenceReport, SolveError>) -> Self {
        match run {
            Ok(r) => Self {
                epsilon,
                lambda: r.lambda_final,
                iterations: r.iterations,
                op_applications: r.op_applications,
                status: r.status.into(),
                flagged: false,
            },
            Err(e) => Self {
                epsilon,
                lambda: f64::NAN,
                iterations: 0,
                op_applications: 0,
                status: PointStatus::Failed(error_kind(e).into()),
                flagged: false,
            },
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == PointStatus::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub scheme: Scheme,
    pub problem_label: String,
}

/// Knobs beyond the solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Start each point from the previous point's eigenvector. Forces
    /// sequential execution.
    pub warm_start: bool,
    /// Worker threads; 1 runs inline.
    pub jobs: usize,
    /// Per-point `max_iter` overrides by grid index, used to stop chosen
    /// points early.
    pub max_iter_at: BTreeMap<usize, usize>,
    pub gap_floor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            warm_start: false,
            jobs: 1,
            max_iter_at: BTreeMap::new(),
            gap_floor: DEFAULT_GAP_FLOOR,
        }
    }
}

/// Parses `start:stop:count` into `count` evenly spaced values with both
/// endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, SweepError> {
    let bad = |m: &str| SweepError::InvalidGrid(format!("`{spec}`: {m}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, c] = parts[..] else {
        return Err(bad("expected start:stop:count"));
    };
    let start: f64 = a.trim().parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = b.trim().parse().map_err(|_| bad("stop is not a number"))?;
    let count: usize = c
        .trim()
        .parse()
        .map_err(|_| bad("count is not a non-negative integer"))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(bad("endpoints must be finite"));
    }
    let grid: Vec<f64> = match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect(),
    };
    validate_grid(&grid)?;
    Ok(grid)
}

fn validate_grid(grid: &[f64]) -> Result<(), SweepError> {
    if let Some(i) = grid.iter().position(|x| !x.is_finite()) {
        return Err(SweepError::InvalidGrid(format!("entry {i} is not finite")));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SweepError::InvalidGrid(format!(
            "not strictly increasing at entry {}",
            i + 1
        )));
    }
    Ok(())
}

fn greens<'p>(
    problem: &'p ModelProblem,
    grid: &[f64],
    gap_floor: f64,
) -> Result<Vec<GreenOperator<'p>>, SweepError> {
    validate_grid(grid)?;
    Ok(grid
        .iter()
        .map(|&e| GreenOperator::with_gap_floor(problem, e, gap_floor))
        .collect::<Result<_, _>>()?)
}

fn warm_start_from(prev: &ConvergenceReport, g: &GreenOperator<'_>) -> Option<StartVector> {
    let y: Vec<f64> = prev
        .eigenvector
        .as_slice()
        .iter()
        .zip(g.sqrt_inv_diag())
        .map(|(u, s)| u / s)
        .collect();
    Vector::new(y).ok().map(StartVector::Given)
}

fn run_points<'p>(
    greens: &[GreenOperator<'p>],
    scheme: Scheme,
    cfg: &SolverConfig,
    opts: &SweepOptions,
) -> Vec<Result<ConvergenceReport, SolveError>> {
    let cfg_at = |i: usize| -> SolverConfig {
        let mut c = cfg.clone();
        if let Some(&m) = opts.max_iter_at.get(&i) {
            c.max_iter = m;
        }
        c
    };
    if opts.warm_start {
        let mut out: Vec<Result<ConvergenceReport, SolveError>> = Vec::with_capacity(greens.len());
        for (i, g) in greens.iter().enumerate() {
            let mut c = cfg_at(i);
            if let Some(Ok(prev)) = out.last() {
                if let Some(start) = warm_start_from(prev, g) {
                    c.start = start;
                }
            }
            out.push(solve(g, scheme, &c));
        }
        return out;
    }
    let one = |(i, g): (usize, &GreenOperator<'p>)| solve(g, scheme, &cfg_at(i));
    if opts.jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
        {
            return pool.install(|| greens.par_iter().enumerate().map(one).collect());
        }
    }
    greens.iter().enumerate().map(one).collect()
}

/// One independent solver run per grid point with default options.
pub fn run_sweep(
    problem: &ModelProblem,
    grid: &[f64],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<SweepResult, SweepError> {
    run_sweep_with(problem, grid, scheme, cfg, &SweepOptions::default())
}

/// Solver failures become per-point statuses; only an invalid grid aborts.
pub fn run_sweep_with(
    problem: &ModelProblem,
    grid: &[f64],
    scheme: Scheme,
    cfg: &SolverConfig,
    opts: &SweepOptions,
) -> Result<SweepResult, SweepError> {
    let gs = greens(problem, grid, opts.gap_floor)?;
    let runs = run_points(&gs, scheme, cfg, opts);
    let points = grid
        .iter()
        .zip(&runs)
        .map(|(&e, r)| SweepPoint::from_run(e, r))
        .collect();
    Ok(SweepResult {
        points,
        scheme,
        problem_label: problem.label.clone(),
    })
}

impl SweepResult {
    pub fn apply_flags(&mut self, report: &SmoothnessReport) {
        for f in &report.flags {
            if let Some(p) = self.points.get_mut(f.index) {
                p.flagged = true;
            }
        }
    }

    /// `epsilon,lambda,iterations,op_apps,status`, plus `flagged` when
    /// `with_flags` is set.
    pub fn to_csv(&self, with_flags: bool) -> String {
        let mut s = String::from("epsilon,lambda,iterations,op_apps,status");
        if with_flags {
            s.push_str(",flagged");
        }
        s.push('\n');
        for p in &self.points {
            let _ = write!(
                s,
                "{},{},{},{},{}",
                sci(p.epsilon),
                sci(p.lambda),
                p.iterations,
                p.op_applications,
                p.status.label()
            );
            if with_flags {
                let _ = write!(s, ",{}", u8::from(p.flagged));
            }
            s.push('\n');
        }
        s
    }

    /// Two columns, `epsilon lambda`, for points with a finite λ.
    pub fn to_plot(&self) -> String {
        let mut s = String::new();
        for p in self.points.iter().filter(|p| p.lambda.is_finite()) {
            let _ = writeln!(s, "{} {}", sci(p.epsilon), sci(p.lambda));
        }
        s
    }
}

/// Reads the sweep CSV written by [`SweepResult::to_csv`]. A missing
/// `flagged` column means nothing is flagged.
pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepPoint>, SweepError> {
    let perr = |line: usize, msg: String| SweepError::Parse { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| perr(1, format!("missing column `{name}`")))
    };
    let (ie, il, ii, ia, is) = (
        idx("epsilon")?,
        idx("lambda")?,
        idx("iterations")?,
        idx("op_apps")?,
        idx("status")?,
    );
    let iflag = cols.iter().position(|c| *c == "flagged");

    let mut out = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != cols.len() {
            return Err(perr(
                n + 1,
                format!("expected {} fields, found {}", cols.len(), f.len()),
            ));
        }
        let num = |k: usize| {
            f[k].parse::<f64>()
                .map_err(|e| perr(n + 1, format!("`{}`: {e}", f[k])))
        };
        let int = |k: usize| {
            f[k].parse::<u64>()
                .map_err(|e| perr(n + 1, format!("`{}`: {e}", f[k])))
        };
        out.push(SweepPoint {
            epsilon: num(ie)?,
            lambda: num(il)?,
            iterations: int(ii)? as usize,
            op_applications: int(ia)?,
            status: PointStatus::parse(f[is])
                .ok_or_else(|| perr(n + 1, format!("unknown status `{}`", f[is])))?,
            flagged: match iflag {
                Some(k) => f[k] == "1" || f[k] == "true",
                None => false,
            },
        });
    }
    Ok(out)
}

/// ε at which the piecewise-linear interpolant through the converged,
/// unflagged `(λ, ε)` pairs reaches `lambda_target`.
pub fn interpolate_eps_of_lambda(
    points: &[SweepPoint],
    lambda_target: f64,
) -> Result<f64, SweepError> {
    let used: Vec<(usize, &SweepPoint)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_converged() && !p.flagged && p.lambda.is_finite())
        .collect();
    let (min, max) = used
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, p)| {
            (lo.min(p.lambda), hi.max(p.lambda))
        });
    if used.len() >= 2 {
        let increasing = used[1].1.lambda > used[0].1.lambda;
        for w in used.windows(2) {
            let ok = if increasing {
                w[1].1.lambda > w[0].1.lambda
            } else {
                w[1].1.lambda < w[0].1.lambda
            };
            if !ok {
                return Err(SweepError::NonMonotone { index: w[1].0 });
            }
        }
    }
    if !(lambda_target >= min && lambda_target <= max) {
        return Err(SweepError::OutOfRange {
            target: lambda_target,
            min,
            max,
        });
    }
    if let Some((_, p)) = used.iter().find(|(_, p)| p.lambda == lambda_target) {
        return Ok(p.epsilon);
    }
    for w in used.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        let (lo, hi) = if a.lambda < b.lambda {
            (a.lambda, b.lambda)
        } else {
            (b.lambda, a.lambda)
        };
        if lambda_target > lo && lambda_target < hi {
            let t = (lambda_target - a.lambda) / (b.lambda - a.lambda);
            return Ok(a.epsilon + t * (b.epsilon - a.epsilon));
        }
    }
    unreachable!("target inside [min, max] of a monotone sequence lies on a segment or a node")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessFlag {
    pub index: usize,
    pub epsilon: f64,
    pub lambda_observed: f64,
    pub lambda_fit: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub flags: Vec<SmoothnessFlag>,
    pub threshold: f64,
}

impl SmoothnessReport {
    pub fn flagged_indices(&self) -> Vec<usize> {
        self.flags.iter().map(|f| f.index).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "threshold={}\nflags={}\n",
            sci(self.threshold),
            self.flags.len()
        );
        for f in &self.flags {
            let _ = writeln!(
                s,
                "index={} epsilon={} lambda_observed={} lambda_fit={} relative_deviation={}",
                f.index,
                sci(f.epsilon),
                sci(f.lambda_observed),
                sci(f.lambda_fit),
                sci(f.relative_deviation)
            );
        }
        s
    }
}

/// Value at `x0` of the least-squares quadratic through `pts` (exact
/// interpolation for three points).
#[allow(clippy::needless_range_loop)]
fn quadratic_fit_at(pts: &[(f64, f64)], x0: f64) -> f64 {
    let h = pts.iter().map(|(x, _)| (x - x0).abs()).fold(0.0, f64::max);
    let h = if h > 0.0 { h } else { 1.0 };
    // normal equations in u = (x − x0)/h; the value at x0 is the constant term
    let mut m = [[0.0; 4]; 3];
    for &(x, y) in pts {
        let u = (x - x0) / h;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            m[r][3] += basis[r] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        m.swap(col, piv);
        for r in (col + 1)..3 {
            let f = m[r][col] / m[col][col];
            for c in col..4 {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut coef = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|c| m[r][c] * coef[c]).sum();
        coef[r] = (m[r][3] - s) / m[r][r];
    }
    coef[0]
}

/// Leave-one-out fits for every unflagged point with a finite λ and pool
/// neighbors on both sides.
fn local_fits(
    points: &[SweepPoint],
    in_pool: &[bool],
    flagged: &[bool],
) -> Vec<Option<SmoothnessFlag>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if flagged[i] || !p.lambda.is_finite() {
                return None;
            }
            let left: Vec<usize> = (0..i).rev().filter(|&j| in_pool[j]).take(2).collect();
            let right: Vec<usize> = ((i + 1)..points.len())
                .filter(|&j| in_pool[j])
                .take(2)
                .collect();
            if left.is_empty() || right.is_empty() || left.len() + right.len() < 3 {
                return None;
            }
            let pts: Vec<(f64, f64)> = left
                .iter()
                .chain(&right)
                .map(|&j| (points[j].epsilon, points[j].lambda))
                .collect();
            let fit = quadratic_fit_at(&pts, p.epsilon);
            let dev = (p.lambda - fit).abs() / fit.abs().max(FIT_FLOOR);
            Some(SmoothnessFlag {
                index: i,
                epsilon: p.epsilon,
                lambda_observed: p.lambda,
                lambda_fit: fit,
                relative_deviation: dev,
            })
        })
        .collect()
}

fn excess(fits: &[Option<SmoothnessFlag>], threshold: f64) -> f64 {
    fits.iter()
        .flatten()
        .map(|f| f.relative_deviation)
        .filter(|&d| d > threshold)
        .sum()
}

/// Flags sweep points whose λ departs from the local trend.
///
/// Each point with a finite λ and converged neighbors on both sides is
/// compared against the quadratic fitted through up to two converged
/// neighbors on each side (at least three in total), leaving the point
/// itself out. An outlier also spoils the fits of its neighbors, so
/// points are flagged one at a time: among those above `threshold`, the
/// one whose removal from the neighbor pool leaves the smallest total
/// excess deviation is flagged, and the scan repeats until nothing
/// exceeds the threshold.
pub fn detect_pseudoconvergence(
    points: &[SweepPoint],
    threshold: f64,
) -> Result<SmoothnessReport, SweepError> {
    let converged = points
        .iter()
        .filter(|p| p.is_converged() && p.lambda.is_finite())
        .count();
    if converged < 4 {
        return Err(SweepError::TooFewPoints { found: converged });
    }
    let mut in_pool: Vec<bool> = points
        .iter()
        .map(|p| p.is_converged() && p.lambda.is_finite())
        .collect();
    let mut flagged = vec![false; points.len()];
    let mut flags = Vec::new();

    loop {
        let fits = local_fits(points, &in_pool, &flagged);
        let mut best: Option<(f64, SmoothnessFlag)> = None;
        for f in fits
            .iter()
            .flatten()
            .filter(|f| f.relative_deviation > threshold)
        {
            let (mut pool, mut fl) = (in_pool.clone(), flagged.clone());
            pool[f.index] = false;
            fl[f.index] = true;
            let left_over = excess(&local_fits(points, &pool, &fl), threshold);
            // ties: larger own deviation, then lower index (iteration order)
            let better = match &best {
                None => true,
                Some((e, b)) => {
                    left_over < *e
                        || (left_over == *e && f.relative_deviation > b.relative_deviation)
                }
            };
            if better {
                best = Some((left_over, f.clone()));
            }
        }
        let Some((_, f)) = best else { break };
        flagged[f.index] = true;
        in_pool[f.index] = false;
        flags.push(f);
    }
    flags.sort_by_key(|f| f.index);
    Ok(SmoothnessReport { flags, threshold })
}

/// Per-point outcome of running both schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparedPoint {
    pub epsilon: f64,
    pub power: SweepPoint,
    pub modified: SweepPoint,
    /// `|λ_power − λ_2x2| / |λ_2x2|`
    pub lambda_rel_diff: f64,
    /// Both converged and agree to [`AGREEMENT_TOL`].
    pub agree: bool,
}

impl ComparedPoint {
    /// `iterations_2x2 / iterations_power` when both runs produced a λ.
    pub fn iteration_ratio(&self) -> Option<f64> {
        (self.power.lambda.is_finite()
            && self.modified.lambda.is_finite()
            && self.power.iterations > 0)
            .then(|| self.modified.iterations as f64 / self.power.iterations as f64)
    }

    pub fn application_ratio(&self) -> Option<f64> {
        (self.power.lambda.is_finite()
            && self.modified.lambda.is_finite()
            && self.power.op_applications > 0)
            .then(|| self.modified.op_applications as f64 / self.power.op_applications as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub problem_label: String,
    pub points: Vec<ComparedPoint>,
    /// `(epsilon, trace)` per scheme in grid order; empty for failed runs.
    pub power_traces: Vec<(f64, Option<IterationTrace>)>,
    pub modified_traces: Vec<(f64, Option<IterationTrace>)>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

impl Comparison {
    pub fn median_iteration_ratio(&self) -> Option<f64> {
        median(
            &mut self
                .points
                .iter()
                .filter_map(ComparedPoint::iteration_ratio)
                .collect::<Vec<_>>(),
        )
    }

    pub fn median_application_ratio(&self) -> Option<f64> {
        median(
            &mut self
                .points
                .iter()
                .filter_map(ComparedPoint::application_ratio)
                .collect::<Vec<_>>(),
        )
    }

    pub fn all_agree(&self) -> bool {
        self.points.iter().all(|p| p.agree)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,iter_power,iter_2x2,apps_power,apps_2x2,status_power,status_2x2,lambda_power,lambda_2x2,lambda_rel_diff,iter_ratio,agree\n");
        for p in &self.points {
            let ratio = p.iteration_ratio().map(sci).unwrap_or_else(|| "nan".into());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                sci(p.epsilon),
                p.power.iterations,
                p.modified.iterations,
                p.power.op_applications,
                p.modified.op_applications,
                p.power.status.label(),
                p.modified.status.label(),
                sci(p.power.lambda),
                sci(p.modified.lambda),
                sci(p.lambda_rel_diff),
                ratio,
                u8::from(p.agree)
            );
        }
        s
    }

    /// Convergence histories of both schemes, one row per iteration:
    /// `epsilon,scheme,n,lambda,eps_n,residual,op_apps`.
    pub fn traces_csv(&self) -> String {
        let mut s = String::from("epsilon,scheme,n,lambda,eps_n,residual,op_apps\n");
        for (scheme, traces) in [
            (Scheme::Power, &self.power_traces),
            (Scheme::Modified, &self.modified_traces),
        ] {
            for (eps, trace) in traces {
                for st in trace.iter().flat_map(|t| &t.steps) {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        sci(*eps),
                        scheme.name(),
                        st.n,
                        sci(st.lambda),
                        sci(st.eps_n),
                        sci(st.residual),
                        st.op_applications
                    );
                }
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "nan".into());
        format!(
            "points={} median_iter_ratio={} median_apps_ratio={} all_agree={}",
            self.points.len(),
            fmt(self.median_iteration_ratio()),
            fmt(self.median_application_ratio()),
            self.all_agree()
        )
    }
}

/// Runs both schemes at every grid point.
pub fn compare_schemes(
    problem: &ModelProblem,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<Comparison, SweepError> {
    compare_schemes_with(problem, grid, cfg, &SweepOptions::default())
}

pub fn compare_schemes_with(
    problem: &ModelProblem,
    grid: &[f64],
    cfg: &SolverConfig,
    opts: &SweepOptions,
) -> Result<Comparison, SweepError> {
    let gs = greens(problem, grid, opts.gap_floor)?;
    let power = run_points(&gs, Scheme::Power, cfg, opts);
    let modified = run_points(&gs, Scheme::Modified, cfg, opts);
    let points = grid
        .iter()
        .zip(power.iter().zip(&modified))
        .map(|(&e, (rp, rm))| {
            let p = SweepPoint::from_run(e, rp);
            let m = SweepPoint::from_run(e, rm);
            let diff = (p.lambda - m.lambda).abs() / m.lambda.abs();
            let agree = p.is_converged() && m.is_converged() && diff <= AGREEMENT_TOL;
            ComparedPoint {
                epsilon: e,
                power: p,
                modified: m,
                lambda_rel_diff: diff,
                agree,
            }
        })
        .collect();
    let traces = |runs: Vec<Result<ConvergenceReport, SolveError>>| {
        grid.iter()
            .copied()
            .zip(runs.into_iter().map(|r| r.ok().map(|r| r.trace)))
            .collect()
    };
    Ok(Comparison {
        problem_label: problem.label.clone(),
        points,
        power_traces: traces(power),
        modified_traces: traces(modified),
    })
}

/// Convenience wrapper used by the examples: `λ(ε)` from a fresh Green's
/// operator with the default gap floor.
pub fn solve_at(
    problem: &ModelProblem,
    epsilon: f64,
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport, SweepError> {
    let g = make_green(problem, epsilon)?;
    Ok(solve(&g, scheme, cfg)?)
}
