//! Iteration schemes for `λ⁻¹ |u⟩ = G_εV |u⟩`.
//!
//! * [`power_solve`]: the original scheme. Apply the operator, take the
//!   Rayleigh quotient `εₙ = ⟨n|A|n⟩ = λₙ⁻¹`, renormalize.
//! * [`power_solve_ref`]: the same fixed point reached by normalizing
//!   against a reference vector, `⟨ref|n⟩ = 1`, with `λₙ = ⟨ref|A|n⟩⁻¹`.
//! * [`modified_solve`]: project onto `span{|n⟩, |n⊥⟩}` with
//!   `|n⊥⟩ ∝ A|n⟩ − εₙ|n⟩`, diagonalize the 2×2 projection and continue with
//!   the extreme eigenvector. Along the highest branch the `εₙ` rise
//!   monotonically towards the top of the spectrum.
//!
//! All schemes run on a [`SymmetricOperator`]; for a [`GreenOperator`]
//! that is the symmetrized `A`, and reported eigenvectors are mapped back
//! to the coordinates of `G_εV`.
//!
//! [`GreenOperator`]: crate::green::GreenOperator

use std::fmt::Write as _;

use thiserror::Error;

use crate::green::{Branch, SymmetricOperator};
use crate::io::sci;
use crate::linalg::{dot_slices, eig_sym_2x2, norm, LinalgError, Vector};

/// `|εₙ|` at or below this makes `λₙ` undefined.
pub const RAYLEIGH_FLOOR: f64 = 1e-14;
/// Norms at or below this count as zero for start and reference vectors.
pub const DEGENERATE_NORM: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("Rayleigh quotient vanished at step {step}; lambda is undefined")]
    RayleighZero { step: usize },
    #[error("start vector has (near) zero norm")]
    StartVectorDegenerate,
    #[error("reference vector is orthogonal to the iterate at step {step}")]
    RefOrthogonal { step: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Power,
    Modified,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Power => "power",
            Self::Modified => "2x2",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "power" => Ok(Self::Power),
            "2x2" | "modified" => Ok(Self::Modified),
            other => Err(format!("unknown scheme `{other}` (expected power or 2x2)")),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Start vector, given in the coordinates the scheme iterates in.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StartVector {
    /// `(1, …, 1)/√n`
    #[default]
    Uniform,
    Basis(usize),
    Given(Vector),
}

impl StartVector {
    fn resolve(&self, dim: usize) -> Result<Vec<f64>, SolveError> {
        let v = match self {
            Self::Uniform => Vector::uniform(dim)?,
            Self::Basis(k) => Vector::basis(dim, *k)?,
            Self::Given(v) => {
                if v.dim() != dim {
                    return Err(LinalgError::DimensionMismatch {
                        expected: dim,
                        found: v.dim(),
                    }
                    .into());
                }
                v.clone()
            }
        };
        Ok(v.into_inner())
    }
}

impl std::str::FromStr for StartVector {
    type Err = String;

    /// `uniform`, `basis:<k>` or a comma-separated list of numbers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "uniform" {
            return Ok(Self::Uniform);
        }
        if let Some(k) = s.strip_prefix("basis:") {
            return k
                .parse()
                .map(Self::Basis)
                .map_err(|e| format!("basis index `{k}`: {e}"));
        }
        let xs = s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("start entry `{x}`: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Vector::new(xs).map(Self::Given).map_err(|e| e.to_string())
    }
}

impl std::fmt::Display for StartVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform => f.write_str("uniform"),
            Self::Basis(k) => write!(f, "basis:{k}"),
            Self::Given(v) => {
                let parts: Vec<String> = v.as_slice().iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once `|λₙ − λₙ₋₁| ≤ tol·|λₙ|`.
    pub tol: f64,
    pub max_iter: usize,
    pub branch: Branch,
    pub start: StartVector,
    /// The 2×2 scheme stops when `‖A|n⟩ − εₙ|n⟩‖ ≤ breakdown_tol·‖A|n⟩‖`.
    pub breakdown_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            branch: Branch::Highest,
            start: StartVector::Uniform,
            breakdown_tol: 1e-13,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(SolveError::InvalidConfig(format!(
                "tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolveError::InvalidConfig(
                "max_iter must be at least 1".into(),
            ));
        }
        if self.breakdown_tol.is_nan() || self.breakdown_tol < 0.0 {
            return Err(SolveError::InvalidConfig(format!(
                "breakdown_tol must be non-negative, got {}",
                self.breakdown_tol
            )));
        }
        Ok(())
    }
}

/// The projected problem of one 2×2 step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceStep {
    /// `εₙ = ⟨n|A|n⟩`
    pub eps_n: f64,
    /// `vₙ = ⟨n|A|n⊥⟩`
    pub coupling: f64,
    /// `‖A|n⟩ − εₙ|n⟩‖`, equal to `vₙ` in exact arithmetic.
    pub residual_norm: f64,
    /// `αₙ = ⟨n⊥|A|n⊥⟩`
    pub alpha: f64,
    pub ritz_low: f64,
    pub ritz_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub n: usize,
    pub lambda: f64,
    /// `1/λₙ`
    pub eps_n: f64,
    /// `‖A|n⟩ − εₙ|n⟩‖` for the unit iterate this step reports on.
    pub residual: f64,
    /// Cumulative operator applications.
    pub op_applications: u64,
    /// Power scheme only: `⟨n|n+1⟩` for the un-renormalized update
    /// `|n+1⟩ = A|n⟩ / ⟨n|A|n⟩`.
    pub unit_overlap: Option<f64>,
    /// 2×2 scheme only.
    pub subspace: Option<SubspaceStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub scheme: Scheme,
    pub branch: Branch,
    /// Shift `s` of the iterated operator `±A + sI` (power schemes; zero
    /// for the 2×2 scheme).
    pub shift: f64,
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    fn new(scheme: Scheme, branch: Branch, shift: f64) -> Self {
        Self {
            scheme,
            branch,
            shift,
            steps: Vec::new(),
        }
    }

    pub const CSV_HEADER: &'static str = "n,lambda,eps_n,residual,op_apps";

    /// One row per iteration, numbers at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for st in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                st.n,
                sci(st.lambda),
                sci(st.eps_n),
                sci(st.residual),
                st.op_applications
            );
        }
        s
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub status: Status,
    pub lambda_final: f64,
    /// Unit eigenvector estimate in the problem's coordinates.
    pub eigenvector: Vector,
    /// Final unit iterate in the operator's coordinates.
    pub iterate: Vector,
    pub iterations: usize,
    pub op_applications: u64,
    /// The 2×2 scheme stopped on an invariant direction (`|n⊥⟩` undefined).
    pub breakdown: bool,
    pub trace: IterationTrace,
}

/// Operator applications spent by a run.
pub fn count_applications(report: &ConvergenceReport) -> u64 {
    report.op_applications
}

/// Wraps an operator with a per-run application counter.
pub struct Counted<'o, O: ?Sized> {
    op: &'o O,
    applications: u64,
}

impl<'o, O: SymmetricOperator + ?Sized> Counted<'o, O> {
    pub fn new(op: &'o O) -> Self {
        Self {
            op,
            applications: 0,
        }
    }

    pub fn apply_into(&mut self, x: &[f64], out: &mut [f64]) {
        self.applications += 1;
        self.op.apply_into(x, out);
    }

    pub fn applications(&self) -> u64 {
        self.applications
    }
}

impl<'o, 'p> Counted<'o, crate::green::GreenOperator<'p>> {
    /// `G_εV x` on the unsymmetrized operator.
    pub fn apply_gv_into(&mut self, x: &[f64], out: &mut [f64]) {
        self.applications += 1;
        self.op.apply_gv_into(x, out);
    }
}

/// Runs `scheme` with its default normalization.
pub fn solve<O: SymmetricOperator + ?Sized>(
    op: &O,
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport, SolveError> {
    match scheme {
        Scheme::Power => power_solve(op, cfg),
        Scheme::Modified => modified_solve(op, cfg),
    }
}

fn start_vector<O: SymmetricOperator + ?Sized>(
    op: &O,
    cfg: &SolverConfig,
) -> Result<Vec<f64>, SolveError> {
    cfg.validate()?;
    let mut x = cfg.start.resolve(op.dim())?;
    let n = norm(&x);
    if n <= DEGENERATE_NORM {
        return Err(SolveError::StartVectorDegenerate);
    }
    x.iter_mut().for_each(|v| *v /= n);
    Ok(x)
}

/// Fraction of the half-width `(d − g)/2` added on top of the midpoint
/// shift in [`power_shift`].
const SHIFT_MARGIN: f64 = 0.25;

/// Sign and shift turning the target end of the spectrum into the
/// dominant eigenvalue of `sign·A + s·I`.
///
/// With Gershgorin lower bound `g` and largest diagonal entry `d` of
/// `sign·A`, the target eigenvalue is at least `d` and every other one at
/// least `g`, so any `s > −(d + g)/2` puts the target strictly on top in
/// magnitude. The extra margin keeps the ratio of the two candidates at or
/// below `(1 − m)/(1 + m)` when both bounds happen to be attained.
/// Operators with a positive definite target side get `s = 0`.
fn power_shift<O: SymmetricOperator + ?Sized>(op: &O, branch: Branch) -> (f64, f64) {
    let b = op.bounds();
    let (sign, g, d) = match branch {
        Branch::Highest => (1.0, b.gershgorin_low, b.diag_max),
        Branch::Lowest => (-1.0, -b.gershgorin_high, -b.diag_min),
    };
    let s = -(d + g) / 2.0 + SHIFT_MARGIN * (d - g) / 2.0;
    (sign, s.max(0.0))
}

fn finish<O: SymmetricOperator + ?Sized>(
    op: &O,
    status: Status,
    iterate: Vec<f64>,
    applications: u64,
    breakdown: bool,
    trace: IterationTrace,
) -> Result<ConvergenceReport, SolveError> {
    let mut original = op.to_original(&iterate);
    let n = norm(&original);
    original.iter_mut().for_each(|v| *v /= n);
    let lambda_final = trace.steps.last().map(|s| s.lambda).unwrap_or(f64::NAN);
    Ok(ConvergenceReport {
        status,
        lambda_final,
        eigenvector: Vector::new(original)?,
        iterate: Vector::new(iterate)?,
        iterations: trace.steps.len(),
        op_applications: applications,
        breakdown,
        trace,
    })
}

fn converged(lambda: f64, prev: f64, tol: f64) -> bool {
    (lambda - prev).abs() <= tol * lambda.abs()
}

/// Original power iteration, `|n+1⟩ = A|n⟩ / ⟨n|A|n⟩` followed by
/// renormalization. One operator application per iteration.
pub fn power_solve<O: SymmetricOperator + ?Sized>(
    op: &O,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport, SolveError> {
    let mut x = start_vector(op, cfg)?;
    let (sign, shift) = power_shift(op, cfg.branch);
    let mut counted = Counted::new(op);
    let mut trace = IterationTrace::new(Scheme::Power, cfg.branch, shift);
    let dim = x.len();
    let mut w = vec![0.0; dim];
    let mut prev = f64::NAN;

    for it in 1..=cfg.max_iter {
        counted.apply_into(&x, &mut w);
        for (wi, xi) in w.iter_mut().zip(&x) {
            *wi = sign * *wi + shift * xi;
        }
        let q = dot_slices(&x, &w);
        let eps_n = sign * (q - shift);
        if eps_n.abs() <= RAYLEIGH_FLOOR || q == 0.0 {
            return Err(SolveError::RayleighZero { step: it });
        }
        let inv_q = 1.0 / q;
        let unit_overlap = x.iter().zip(&w).map(|(a, b)| a * (b * inv_q)).sum();
        let residual = norm(&w.iter().zip(&x).map(|(a, b)| a - q * b).collect::<Vec<_>>());
        let lambda = 1.0 / eps_n;
        trace.steps.push(TraceStep {
            n: it,
            lambda,
            eps_n,
            residual,
            op_applications: counted.applications(),
            unit_overlap: Some(unit_overlap),
            subspace: None,
        });

        let wn = norm(&w);
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi = wi / wn;
        }
        if it > 1 && converged(lambda, prev, cfg.tol) {
            return finish(
                op,
                Status::Converged,
                x,
                counted.applications(),
                false,
                trace,
            );
        }
        prev = lambda;
    }
    finish(
        op,
        Status::MaxIterations,
        x,
        counted.applications(),
        false,
        trace,
    )
}

/// Power iteration normalized against a reference vector,
/// `|n+1⟩ = A|n⟩ / ⟨ref|A|n⟩` with `λₙ = ⟨ref|A|n⟩⁻¹`. `reference` lives in
/// the operator's coordinates.
pub fn power_solve_ref<O: SymmetricOperator + ?Sized>(
    op: &O,
    reference: &Vector,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport, SolveError> {
    let mut x = start_vector(op, cfg)?;
    if reference.dim() != x.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: x.len(),
            found: reference.dim(),
        }
        .into());
    }
    let r = reference.as_slice();
    let d = dot_slices(r, &x);
    if d.abs() <= DEGENERATE_NORM {
        return Err(SolveError::RefOrthogonal { step: 0 });
    }
    x.iter_mut().for_each(|v| *v /= d);

    let (sign, shift) = power_shift(op, cfg.branch);
    let mut counted = Counted::new(op);
    let mut trace = IterationTrace::new(Scheme::Power, cfg.branch, shift);
    let mut w = vec![0.0; x.len()];
    let mut prev = f64::NAN;
    let mut status = Status::MaxIterations;

    for it in 1..=cfg.max_iter {
        counted.apply_into(&x, &mut w);
        for (wi, xi) in w.iter_mut().zip(&x) {
            *wi = sign * *wi + shift * xi;
        }
        let q = dot_slices(r, &w);
        if q.abs() <= DEGENERATE_NORM {
            return Err(SolveError::RefOrthogonal { step: it });
        }
        // ⟨ref|x⟩ = 1, so ⟨ref|A x⟩ = sign·(q − s).
        let mu = sign * (q - shift);
        if mu.abs() <= RAYLEIGH_FLOOR {
            return Err(SolveError::RayleighZero { step: it });
        }
        let xn = norm(&x);
        let residual = norm(&w.iter().zip(&x).map(|(a, b)| a - q * b).collect::<Vec<_>>()) / xn;
        let lambda = 1.0 / mu;
        trace.steps.push(TraceStep {
            n: it,
            lambda,
            eps_n: mu,
            residual,
            op_applications: counted.applications(),
            unit_overlap: None,
            subspace: None,
        });
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi = wi / q;
        }
        if it > 1 && converged(lambda, prev, cfg.tol) {
            status = Status::Converged;
            break;
        }
        prev = lambda;
    }
    let xn = norm(&x);
    x.iter_mut().for_each(|v| *v /= xn);
    let applications = counted.applications();
    finish(op, status, x, applications, false, trace)
}

/// The 2×2 subspace scheme.
///
/// Per step: `w = A|n⟩`, `εₙ = ⟨n|w⟩`, `r = w − εₙ|n⟩`,
/// `|n⊥⟩ = r/‖r‖`, `z = A|n⊥⟩`, then diagonalize
/// `[[εₙ, ⟨n|z⟩], [⟨n|z⟩, ⟨n⊥|z⟩]]` and move to `c₁|n⟩ + c₂|n⊥⟩`. The next
/// `w` is `c₁w + c₂z` by linearity, so after the first application each
/// step costs one application. A run of `k` full steps therefore spends
/// `k + 1` applications.
///
/// The trace holds one entry per 2×2 step, reporting the Rayleigh quotient
/// of the new iterate. If the start vector is already invariant the run
/// ends at once with a single entry for it.
pub fn modified_solve<O: SymmetricOperator + ?Sized>(
    op: &O,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport, SolveError> {
    let mut n = start_vector(op, cfg)?;
    let dim = n.len();
    let mut counted = Counted::new(op);
    let mut trace = IterationTrace::new(Scheme::Modified, cfg.branch, 0.0);

    let mut w = vec![0.0; dim];
    counted.apply_into(&n, &mut w);
    let mut eps = dot_slices(&n, &w);
    if eps.abs() <= RAYLEIGH_FLOOR {
        return Err(SolveError::RayleighZero { step: 0 });
    }
    let mut prev = 1.0 / eps;
    let mut z = vec![0.0; dim];

    loop {
        let mut r: Vec<f64> = w.iter().zip(&n).map(|(a, b)| a - eps * b).collect();
        // second Gram-Schmidt pass; ⟨n|r⟩ would otherwise stay at rounding
        // level while ‖r‖ shrinks
        let drift = dot_slices(&n, &r);
        r.iter_mut().zip(&n).for_each(|(ri, ni)| *ri -= drift * ni);
        let rn = norm(&r);
        if rn <= cfg.breakdown_tol * norm(&w) {
            if trace.steps.is_empty() {
                trace.steps.push(TraceStep {
                    n: 1,
                    lambda: 1.0 / eps,
                    eps_n: eps,
                    residual: rn,
                    op_applications: counted.applications(),
                    unit_overlap: None,
                    subspace: None,
                });
            }
            return finish(
                op,
                Status::Converged,
                n,
                counted.applications(),
                true,
                trace,
            );
        }
        if trace.steps.len() >= cfg.max_iter {
            return finish(
                op,
                Status::MaxIterations,
                n,
                counted.applications(),
                false,
                trace,
            );
        }

        let perp: Vec<f64> = r.iter().map(|x| x / rn).collect();
        counted.apply_into(&perp, &mut z);
        let coupling = dot_slices(&n, &z);
        let alpha = dot_slices(&perp, &z);
        let pair = eig_sym_2x2(eps, coupling, alpha)?;
        let (c1, c2) = match cfg.branch {
            Branch::Highest => pair.eigvec_high,
            Branch::Lowest => pair.eigvec_low,
        };
        for i in 0..dim {
            n[i] = c1 * n[i] + c2 * perp[i];
            w[i] = c1 * w[i] + c2 * z[i];
        }
        let nn = norm(&n);
        for i in 0..dim {
            n[i] /= nn;
            w[i] /= nn;
        }

        let step = SubspaceStep {
            eps_n: eps,
            coupling,
            residual_norm: rn,
            alpha,
            ritz_low: pair.eigenvalue_low,
            ritz_high: pair.eigenvalue_high,
        };
        eps = dot_slices(&n, &w);
        if eps.abs() <= RAYLEIGH_FLOOR {
            return Err(SolveError::RayleighZero {
                step: trace.steps.len() + 1,
            });
        }
        let lambda = 1.0 / eps;
        let residual = norm(
            &w.iter()
                .zip(&n)
                .map(|(a, b)| a - eps * b)
                .collect::<Vec<_>>(),
        );
        trace.steps.push(TraceStep {
            n: trace.steps.len() + 1,
            lambda,
            eps_n: eps,
            residual,
            op_applications: counted.applications(),
            unit_overlap: None,
            subspace: Some(step),
        });
        if converged(lambda, prev, cfg.tol) {
            return finish(
                op,
                Status::Converged,
                n,
                counted.applications(),
                false,
                trace,
            );
        }
        prev = lambda;
    }
}
