//! The Green's operator `G_ε = (T − ε)⁻¹` for diagonal `T`, and the
//! symmetrized composite `A = G_ε^{1/2} V G_ε^{1/2}` the solvers iterate on.
//!
//! `A` is similar to `G_εV` (`A = G_ε^{-1/2} (G_εV) G_ε^{1/2}`), so both
//! share eigenvalues. An eigenvector `y` of `A` maps back to the
//! eigenvector `G_ε^{1/2} y` of `G_εV`.

use thiserror::Error;

use crate::linalg::{eig_sym_dense, LinalgError, SymMatrix, Vector};
use crate::model::ModelProblem;

/// Default minimum distance between ε and the bottom of `T`'s spectrum.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-8;

/// Which end of the spectrum of `G_εV` a run targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Highest,
    Lowest,
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "highest" => Ok(Self::Highest),
            "lowest" => Ok(Self::Lowest),
            other => Err(format!(
                "unknown branch `{other}` (expected highest or lowest)"
            )),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Highest => "highest",
            Self::Lowest => "lowest",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("epsilon {epsilon} is not below min(T) = {t_min} by at least {gap_floor:e}")]
    EpsilonInSpectrum {
        epsilon: f64,
        t_min: f64,
        gap_floor: f64,
    },
    #[error("selected eigenvalue {mu} of G_eps V is too close to zero; lambda is unbounded")]
    DegenerateBranch { mu: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Spectral enclosure data of a symmetric operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub gershgorin_low: f64,
    pub gershgorin_high: f64,
    pub diag_min: f64,
    pub diag_max: f64,
}

/// A real symmetric linear operator the iteration schemes can run on.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `out = A·x`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn bounds(&self) -> SpectralBounds;

    /// Maps a vector from the operator's coordinates back to the problem's.
    fn to_original(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}

impl SymmetricOperator for SymMatrix {
    fn dim(&self) -> usize {
        SymMatrix::dim(self)
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.mul_into(x, out)
    }

    fn bounds(&self) -> SpectralBounds {
        let (lo, hi) = self.gershgorin();
        let diag = (0..self.dim()).map(|i| self.get(i, i));
        SpectralBounds {
            gershgorin_low: lo,
            gershgorin_high: hi,
            diag_min: diag.clone().fold(f64::INFINITY, f64::min),
            diag_max: diag.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Factorized `(T − ε)⁻¹` bound to one model problem.
#[derive(Debug, Clone)]
pub struct GreenOperator<'p> {
    problem: &'p ModelProblem,
    epsilon: f64,
    inv_diag: Vec<f64>,
    sqrt_inv_diag: Vec<f64>,
}

/// Builds `G_ε` with the default gap floor.
pub fn make_green(problem: &ModelProblem, epsilon: f64) -> Result<GreenOperator<'_>, GreenError> {
    GreenOperator::with_gap_floor(problem, epsilon, DEFAULT_GAP_FLOOR)
}

impl<'p> GreenOperator<'p> {
    pub fn with_gap_floor(
        problem: &'p ModelProblem,
        epsilon: f64,
        gap_floor: f64,
    ) -> Result<Self, GreenError> {
        let t_min = problem.t_min();
        if !(epsilon.is_finite() && epsilon < t_min - gap_floor) {
            return Err(GreenError::EpsilonInSpectrum {
                epsilon,
                t_min,
                gap_floor,
            });
        }
        let inv_diag: Vec<f64> = problem
            .t_diag
            .as_slice()
            .iter()
            .map(|t| 1.0 / (t - epsilon))
            .collect();
        let sqrt_inv_diag = problem
            .t_diag
            .as_slice()
            .iter()
            .map(|t| 1.0 / (t - epsilon).sqrt())
            .collect();
        Ok(Self {
            problem,
            epsilon,
            inv_diag,
            sqrt_inv_diag,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn problem(&self) -> &'p ModelProblem {
        self.problem
    }

    /// Entries `1/(tᵢ − ε)`.
    pub fn inv_diag(&self) -> &[f64] {
        &self.inv_diag
    }

    /// Entries `(tᵢ − ε)^{-1/2}`.
    pub fn sqrt_inv_diag(&self) -> &[f64] {
        &self.sqrt_inv_diag
    }

    fn check_dim(&self, x: &Vector) -> Result<(), LinalgError> {
        if x.dim() != self.problem.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.problem.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn apply_gv_into(&self, x: &[f64], out: &mut [f64]) {
        self.problem.v.mul_into(x, out);
        for (o, g) in out.iter_mut().zip(&self.inv_diag) {
            *o *= g;
        }
    }

    /// `G_ε V x`.
    pub fn apply_gv(&self, x: &Vector) -> Result<Vector, GreenError> {
        self.check_dim(x)?;
        let mut out = vec![0.0; x.dim()];
        self.apply_gv_into(x.as_slice(), &mut out);
        Ok(Vector::new(out)?)
    }

    /// `A y` with `A = G_ε^{1/2} V G_ε^{1/2}`.
    pub fn apply_sym(&self, y: &Vector) -> Result<Vector, GreenError> {
        self.check_dim(y)?;
        let mut out = vec![0.0; y.dim()];
        self.apply_into(y.as_slice(), &mut out);
        Ok(Vector::new(out)?)
    }

    /// `A` as a dense matrix.
    pub fn dense_sym(&self) -> SymMatrix {
        let n = self.problem.dim();
        let mut a = SymMatrix::zeros(n).expect("problem dim is at least 1");
        let s = &self.sqrt_inv_diag;
        for i in 0..n {
            a.set(i, i, self.inv_diag[i] * self.problem.v.get(i, i));
            for j in (i + 1)..n {
                a.set(i, j, s[i] * self.problem.v.get(i, j) * s[j]);
            }
        }
        a
    }

    /// Brute-force `λ = 1/μ`, with `μ` the largest (or smallest) eigenvalue
    /// of `A`, from a dense eigen-decomposition.
    pub fn lambda_exact(&self, branch: Branch) -> Result<f64, GreenError> {
        Ok(1.0 / self.mu_exact(branch)?)
    }

    /// The selected extreme eigenvalue `μ` of `G_εV`.
    pub fn mu_exact(&self, branch: Branch) -> Result<f64, GreenError> {
        let (values, _) = eig_sym_dense(&self.dense_sym())?;
        let mu = match branch {
            Branch::Highest => values[values.dim() - 1],
            Branch::Lowest => values[0],
        };
        if mu.abs() <= 1e-12 {
            return Err(GreenError::DegenerateBranch { mu });
        }
        Ok(mu)
    }
}

impl SymmetricOperator for GreenOperator<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    // diagonal through inv_diag rather than s_i·s_i, matching dense_sym
    fn apply_into(&self, y: &[f64], out: &mut [f64]) {
        let s = &self.sqrt_inv_diag;
        let v = &self.problem.v;
        let scaled: Vec<f64> = y.iter().zip(s).map(|(a, b)| a * b).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let off: f64 = (0..scaled.len())
                .filter(|&j| j != i)
                .map(|j| v.get(i, j) * scaled[j])
                .sum();
            *o = self.inv_diag[i] * v.get(i, i) * y[i] + s[i] * off;
        }
    }

    fn bounds(&self) -> SpectralBounds {
        self.dense_sym().bounds()
    }

    fn to_original(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.sqrt_inv_diag)
            .map(|(a, b)| a * b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fixture, fixture_with_dim, generate, Fixture, ModelSpec};

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn make_green_examples() {
        let p = fixture("identityV").unwrap();
        assert_eq!(make_green(&p, 1.0).unwrap().inv_diag(), &[1.0, 0.5]);
        assert_eq!(make_green(&p, 0.0).unwrap().inv_diag(), &[0.5, 1.0 / 3.0]);
        assert!(matches!(
            make_green(&p, 2.0),
            Err(GreenError::EpsilonInSpectrum { .. })
        ));
        assert!(matches!(
            make_green(&p, 2.0 - 1e-9),
            Err(GreenError::EpsilonInSpectrum { .. })
        ));
        assert!(make_green(&p, f64::NAN).is_err());
    }

    #[test]
    fn apply_examples_identity_v() {
        let p = fixture("identityV").unwrap();
        let g = make_green(&p, 1.0).unwrap();
        assert_eq!(g.apply_gv(&v(&[1.0, 1.0])).unwrap().as_slice(), &[1.0, 0.5]);
        assert_eq!(g.apply_gv(&v(&[0.0, 0.0])).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(
            g.apply_sym(&v(&[1.0, 0.0])).unwrap().as_slice(),
            &[1.0, 0.0]
        );
        assert!(matches!(
            g.apply_sym(&v(&[1.0])),
            Err(GreenError::Linalg(LinalgError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn gv_equals_sym_when_v_is_identity() {
        let p = fixture_with_dim(Fixture::IdentityV, Some(5)).unwrap();
        let g = make_green(&p, -0.3).unwrap();
        let x = v(&[0.3, -1.0, 2.0, 0.5, 7.0]);
        let a = g.apply_gv(&x).unwrap();
        let b = g.apply_sym(&x).unwrap();
        for i in 0..5 {
            assert!((a[i] - b[i]).abs() <= 1e-15 * a[i].abs().max(1.0));
        }
    }

    #[test]
    fn apply_gv_matches_dense_product() {
        let p = generate(&ModelSpec::evenly_spaced(5, 1.0, 0.5, 1.0, 3, "")).unwrap();
        let eps = p.t_min() - 1.0;
        let g = make_green(&p, eps).unwrap();
        let got = g.apply_gv(&Vector::basis(5, 0).unwrap()).unwrap();
        // (T − εI)⁻¹ V e₁ written out densely
        let rows = p.v.to_rows();
        for i in 0..5 {
            let want = rows[i][0] / (p.t_diag[i] - eps);
            assert!((got[i] - want).abs() <= 1e-13 * want.abs().max(1e-300));
        }
    }

    #[test]
    fn lambda_exact_examples() {
        let p = fixture("identityV").unwrap();
        assert_eq!(
            make_green(&p, 1.0)
                .unwrap()
                .lambda_exact(Branch::Highest)
                .unwrap(),
            1.0
        );
        assert_eq!(
            make_green(&p, 0.0)
                .unwrap()
                .lambda_exact(Branch::Highest)
                .unwrap(),
            2.0
        );
        assert_eq!(
            make_green(&p, 0.0)
                .unwrap()
                .lambda_exact(Branch::Lowest)
                .unwrap(),
            3.0
        );
    }

    #[test]
    fn degenerate_branch() {
        let t = Vector::new(vec![1.0, 2.0]).unwrap();
        let p = ModelProblem::new(t, SymMatrix::zeros(2).unwrap(), 0, "zero").unwrap();
        let g = make_green(&p, 0.0).unwrap();
        assert!(matches!(
            g.lambda_exact(Branch::Highest),
            Err(GreenError::DegenerateBranch { .. })
        ));
    }

    #[test]
    fn to_original_maps_eigenvectors() {
        let p = generate(&ModelSpec::evenly_spaced(6, 3.0, 1.0, 1.0, 5, "")).unwrap();
        let g = make_green(&p, 1.0).unwrap();
        let (vals, vecs) = eig_sym_dense(&g.dense_sym()).unwrap();
        let y = &vecs[5];
        let u = Vector::new(g.to_original(y.as_slice())).unwrap();
        let gu = g.apply_gv(&u).unwrap();
        for i in 0..6 {
            assert!((gu[i] - vals[5] * u[i]).abs() < 1e-12);
        }
    }
}
