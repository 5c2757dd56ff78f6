//! Model Hamiltonians: a diagonal unperturbed spectrum `T` and a symmetric
//! potential `V`, plus the fixed fixtures used in tests and examples.
//!
//! Random potentials are drawn with xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Each draw takes the top 53 bits
//! of the next `u64`, `u = (x >> 11) · 2⁻⁵³`, and maps it to
//! `v_scale · (2u − 1)`. Entries are filled row by row over the upper
//! triangle including the diagonal, so any implementation of those two
//! published generators reproduces `V` bit for bit.

use std::fmt::Write as _;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

use crate::linalg::{LinalgError, SymMatrix, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("unknown fixture `{0}` (expected easy20, hard20 or identityV)")]
    UnknownFixture(String),
    #[error("model file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Recipe for a random model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    /// Diagonal of `T`, strictly increasing.
    pub t_spectrum: Vec<f64>,
    /// Bound on `|V_ij|`.
    pub v_scale: f64,
    pub seed: u64,
    pub label: String,
}

impl ModelSpec {
    /// Evenly spaced spectrum `t_min, t_min + t_step, …`.
    pub fn evenly_spaced(
        dim: usize,
        t_min: f64,
        t_step: f64,
        v_scale: f64,
        seed: u64,
        label: impl Into<String>,
    ) -> Self {
        Self {
            dim,
            t_spectrum: (0..dim).map(|k| t_min + t_step * k as f64).collect(),
            v_scale,
            seed,
            label: label.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dim == 0 {
            return Err(ModelError::InvalidSpec("dim must be at least 1".into()));
        }
        if self.t_spectrum.len() != self.dim {
            return Err(ModelError::InvalidSpec(format!(
                "t_spectrum has {} entries, dim is {}",
                self.t_spectrum.len(),
                self.dim
            )));
        }
        validate_spectrum(&self.t_spectrum)?;
        if !(self.v_scale > 0.0 && self.v_scale.is_finite()) {
            return Err(ModelError::InvalidSpec(format!(
                "v_scale must be positive, got {}",
                self.v_scale
            )));
        }
        Ok(())
    }
}

fn validate_spectrum(t: &[f64]) -> Result<(), ModelError> {
    if t.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::InvalidSpec(
            "t_spectrum has a non-finite entry".into(),
        ));
    }
    if let Some(w) = t.windows(2).position(|w| w[1] <= w[0]) {
        return Err(ModelError::InvalidSpec(format!(
            "t_spectrum not strictly increasing at index {}",
            w + 1
        )));
    }
    Ok(())
}

/// The pair `(T, V)` of `(T − λV)|u⟩ = ε|u⟩`, with `T` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelProblem {
    pub t_diag: Vector,
    pub v: SymMatrix,
    pub seed: u64,
    pub label: String,
}

impl ModelProblem {
    pub fn new(
        t_diag: Vector,
        v: SymMatrix,
        seed: u64,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        if t_diag.dim() != v.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: t_diag.dim(),
                found: v.dim(),
            }
            .into());
        }
        validate_spectrum(t_diag.as_slice())?;
        Ok(Self {
            t_diag,
            v,
            seed,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.t_diag.dim()
    }

    /// Smallest diagonal entry of `T`.
    pub fn t_min(&self) -> f64 {
        self.t_diag[0]
    }
}

/// Uniform draws on `[-scale, scale)` from the documented generator.
struct UniformStream(Xoshiro256StarStar);

impl UniformStream {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    fn next(&mut self, scale: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        scale * (2.0 * u - 1.0)
    }
}

fn random_symmetric(dim: usize, scale: f64, seed: u64) -> Result<SymMatrix, ModelError> {
    let mut v = SymMatrix::zeros(dim)?;
    let mut rng = UniformStream::new(seed);
    for i in 0..dim {
        for j in i..dim {
            v.set(i, j, rng.next(scale));
        }
    }
    Ok(v)
}

/// `T = diag(t_spectrum)` and `V_ij` i.i.d. uniform on `[−v_scale, v_scale)`.
pub fn generate(spec: &ModelSpec) -> Result<ModelProblem, ModelError> {
    spec.validate()?;
    let v = random_symmetric(spec.dim, spec.v_scale, spec.seed)?;
    ModelProblem::new(
        Vector::new(spec.t_spectrum.clone())?,
        v,
        spec.seed,
        spec.label.clone(),
    )
}

/// Named fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Well-separated spectrum, weakly perturbed attractive potential.
    Easy20,
    /// Two `T` levels 5·10⁻⁴ apart with a weak coupling between them; the
    /// uniform start vector sits almost on the lower member of the pair.
    Hard20,
    /// `V = I`, so `G_εV` is diagonal and `λ(ε) = t_min − ε`.
    IdentityV,
}

impl std::str::FromStr for Fixture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy20" => Ok(Self::Easy20),
            "hard20" => Ok(Self::Hard20),
            "identityV" => Ok(Self::IdentityV),
            other => Err(ModelError::UnknownFixture(other.to_string())),
        }
    }
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Self::Easy20 => "easy20",
            Self::Hard20 => "hard20",
            Self::IdentityV => "identityV",
        }
    }

    /// ε grid used by the experiments: eight points from `t_min − 8` to
    /// `t_min − 1`.
    pub fn standard_grid(self) -> Vec<f64> {
        let t_min = match self {
            Self::Easy20 | Self::Hard20 => 10.0,
            Self::IdentityV => 2.0,
        };
        (0..8).map(|k| t_min - 8.0 + k as f64).collect()
    }
}

pub const EASY20_SEED: u64 = 7;
pub const HARD20_SEED: u64 = 11;
/// Separation of the clustered `T` pair in `hard20`.
pub const HARD20_T_GAP: f64 = 5e-4;
/// `-V_01` in `hard20`.
pub const HARD20_COUPLING: f64 = 0.02;

/// Fixture with its default size (`identityV` is 2×2 with `t = (2, 3)`).
pub fn fixture(name: &str) -> Result<ModelProblem, ModelError> {
    fixture_with_dim(name.parse()?, None)
}

/// `dim` only applies to `identityV` (spectrum `2, 3, …`); the 20×20
/// fixtures reject any other size.
pub fn fixture_with_dim(which: Fixture, dim: Option<usize>) -> Result<ModelProblem, ModelError> {
    match which {
        Fixture::IdentityV => {
            let dim = dim.unwrap_or(2);
            if dim == 0 {
                return Err(ModelError::InvalidSpec("dim must be at least 1".into()));
            }
            let t = Vector::new((0..dim).map(|k| 2.0 + k as f64).collect())?;
            ModelProblem::new(t, SymMatrix::identity(dim)?, 0, which.name())
        }
        Fixture::Easy20 | Fixture::Hard20 => {
            if let Some(d) = dim.filter(|&d| d != 20) {
                return Err(ModelError::InvalidSpec(format!(
                    "{} is fixed at dim 20, got {d}",
                    which.name()
                )));
            }
            if which == Fixture::Easy20 {
                let t: Vec<f64> = (0..20).map(|k| 10.0 + k as f64).collect();
                let v = identity_plus_noise(20, 0.1, EASY20_SEED)?;
                ModelProblem::new(Vector::new(t)?, v, EASY20_SEED, which.name())
            } else {
                let mut t = vec![10.0, 10.0 + HARD20_T_GAP];
                t.extend((0..18).map(|k| 11.0 + k as f64));
                let mut v = identity_plus_noise(20, 0.02, HARD20_SEED)?;
                v.set(0, 0, 1.0);
                v.set(1, 1, 1.0);
                v.set(0, 1, -HARD20_COUPLING);
                ModelProblem::new(Vector::new(t)?, v, HARD20_SEED, which.name())
            }
        }
    }
}

fn identity_plus_noise(dim: usize, scale: f64, seed: u64) -> Result<SymMatrix, ModelError> {
    let mut v = random_symmetric(dim, scale, seed)?;
    for i in 0..dim {
        v.set(i, i, 1.0 + v.get(i, i));
    }
    Ok(v)
}

/// Renders the plain-text model format:
///
/// ```text
/// dim=<n> seed=<s> label=<text>
/// T t_0 t_1 … t_{n-1}
/// V_00 V_01 … V_0{n-1}
/// …
/// ```
///
/// Numbers use Rust's shortest round-trip rendering, so reading the file
/// back reproduces every entry exactly.
pub fn to_text(p: &ModelProblem) -> String {
    let n = p.dim();
    let mut s = String::new();
    let _ = writeln!(s, "dim={} seed={} label={}", n, p.seed, p.label);
    s.push('T');
    for x in p.t_diag.as_slice() {
        let _ = write!(s, " {x}");
    }
    s.push('\n');
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| p.v.get(i, j).to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn from_text(text: &str) -> Result<ModelProblem, ModelError> {
    let perr = |line: usize, msg: String| ModelError::Parse { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let (mut dim, mut seed, mut label) = (None, None, String::new());
    let mut rest = header.trim();
    while !rest.is_empty() {
        if let Some(l) = rest.strip_prefix("label=") {
            label = l.to_string();
            break;
        }
        let (tok, tail) = rest.split_once(' ').unwrap_or((rest, ""));
        rest = tail.trim_start();
        match tok.split_once('=') {
            Some(("dim", v)) => {
                dim = Some(
                    v.parse::<usize>()
                        .map_err(|e| perr(hl + 1, format!("dim: {e}")))?,
                )
            }
            Some(("seed", v)) => {
                seed = Some(
                    v.parse::<u64>()
                        .map_err(|e| perr(hl + 1, format!("seed: {e}")))?,
                )
            }
            _ => return Err(perr(hl + 1, format!("unexpected header token `{tok}`"))),
        }
    }
    let dim = dim.ok_or_else(|| perr(hl + 1, "missing dim".into()))?;
    let seed = seed.ok_or_else(|| perr(hl + 1, "missing seed".into()))?;

    let parse_row = |line: usize, s: &str| -> Result<Vec<f64>, ModelError> {
        let row = s
            .split_whitespace()
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|e| perr(line, format!("`{x}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != dim {
            return Err(perr(
                line,
                format!("expected {dim} numbers, found {}", row.len()),
            ));
        }
        Ok(row)
    };

    let (tl, tline) = lines
        .next()
        .ok_or_else(|| perr(hl + 2, "missing T line".into()))?;
    let t_body = tline
        .trim_start()
        .strip_prefix('T')
        .ok_or_else(|| perr(tl + 1, "expected line starting with `T`".into()))?;
    let t = parse_row(tl + 1, t_body)?;

    let mut rows = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (l, s) = lines
            .next()
            .ok_or_else(|| perr(0, format!("expected {dim} rows of V")))?;
        rows.push(parse_row(l + 1, s)?);
    }
    if let Some((l, _)) = lines.next() {
        return Err(perr(l + 1, "trailing content".into()));
    }
    let v = SymMatrix::from_rows(&rows)?;
    ModelProblem::new(Vector::new(t)?, v, seed, label)
}
