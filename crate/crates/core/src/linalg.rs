//! Dense real linear algebra for small symmetric problems.
//!
//! Only what the iteration schemes and the brute-force oracle need: a
//! checked vector type, a symmetric matrix stored as one triangle, the
//! closed-form 2×2 symmetric eigenproblem and a cyclic Jacobi solver.

use thiserror::Error;

/// Largest dimension accepted by [`eig_sym_dense`].
pub const DENSE_DIM_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("dimension must be at least 1")]
    Empty,
    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("dimension {dim} exceeds the dense cap of {max}")]
    TooLarge { dim: usize, max: usize },
}

/// A real vector with at least one entry, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::Empty);
        }
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite(i));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Result<Self, LinalgError> {
        Self::new(vec![0.0; dim])
    }

    /// Unit vector along coordinate `k`.
    pub fn basis(dim: usize, k: usize) -> Result<Self, LinalgError> {
        if k >= dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                found: k + 1,
            });
        }
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self::new(v)
    }

    /// `(1, …, 1)/√dim`.
    pub fn uniform(dim: usize) -> Result<Self, LinalgError> {
        let x = 1.0 / (dim as f64).sqrt();
        Self::new(vec![x; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_dims(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected != found {
        return Err(LinalgError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Inner product ⟨a|b⟩.
pub fn dot(a: &Vector, b: &Vector) -> Result<f64, LinalgError> {
    check_dims(a.dim(), b.dim())?;
    Ok(dot_slices(&a.0, &b.0))
}

/// `a / ‖a‖₂`.
pub fn normalize(a: &Vector) -> Result<Vector, LinalgError> {
    let n = a.norm();
    if n == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    Ok(Vector(a.0.iter().map(|x| x / n).collect()))
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    // Scaled accumulation keeps tiny residuals (≈1e-160 and below) from
    // underflowing to zero when squared.
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = a.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// Dense symmetric matrix. Only the upper triangle is stored, so
/// `get(i, j) == get(j, i)` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        Ok(Self {
            dim,
            upper: vec![0.0; dim * (dim + 1) / 2],
        })
    }

    pub fn identity(dim: usize) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    /// Builds from the upper triangle of a square row-major array. The
    /// lower triangle is ignored.
    pub fn from_upper(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut m = Self::zeros(dim)?;
        for (i, row) in rows.iter().enumerate() {
            check_dims(dim, row.len())?;
            for (j, &x) in row.iter().enumerate().skip(i) {
                if !x.is_finite() {
                    return Err(LinalgError::NonFinite(i * dim + j));
                }
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    /// Builds from a full square array, requiring exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let m = Self::from_upper(rows)?;
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate().take(i) {
                if x != m.get(i, j) {
                    return Err(LinalgError::Asymmetric(i, j));
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        r * self.dim - r * (r + 1) / 2 + c
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.upper[k] = value;
    }

    /// `out = M·x`.
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|j| self.get(i, j) * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector, LinalgError> {
        check_dims(self.dim, x.dim())?;
        let mut out = vec![0.0; self.dim];
        self.mul_into(x.as_slice(), &mut out);
        Vector::new(out)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    /// Gershgorin enclosure `(lower, upper)` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let radius: f64 = (0..self.dim)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(self.get(i, i) - radius);
            hi = hi.max(self.get(i, i) + radius);
        }
        (lo, hi)
    }
}

/// Both eigenpairs of `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair2x2 {
    pub eigenvalue_low: f64,
    pub eigenvalue_high: f64,
    pub eigvec_low: (f64, f64),
    pub eigvec_high: (f64, f64),
}

/// Closed-form eigen-decomposition of the symmetric 2×2 matrix
/// `[[a, b], [b, c]]`.
///
/// The eigenvalue offsets from the diagonal are formed as
/// `b² / (rad + |half|)` rather than `rad − |half|`, so the strict
/// bracketing `low < a < high` survives rounding whenever `b ≠ 0` and the
/// offset is representable. `eigvec_high` has a non-negative first
/// component.
pub fn eig_sym_2x2(a: f64, b: f64, c: f64) -> Result<Eigenpair2x2, LinalgError> {
    for (k, x) in [a, b, c].iter().enumerate() {
        if !x.is_finite() {
            return Err(LinalgError::NonFinite(k));
        }
    }
    let half = 0.5 * (a - c);
    let rad = half.hypot(b);
    if rad == 0.0 {
        return Ok(Eigenpair2x2 {
            eigenvalue_low: a,
            eigenvalue_high: a,
            eigvec_low: (0.0, 1.0),
            eigvec_high: (1.0, 0.0),
        });
    }
    // `big` is the larger of rad ± half, `small_off` the cancellation-free
    // distance of the eigenvalues from the nearer diagonal entry.
    let big = rad + half.abs();
    let small_off = b * b / big;
    let (low, high, hv) = if half >= 0.0 {
        // a ≥ c: high sits just above a, low just below c.
        (c - small_off, a + small_off, (big, b))
    } else {
        (a - small_off, c + small_off, (b, big))
    };
    let hn = hv.0.hypot(hv.1);
    let mut high_vec = (hv.0 / hn, hv.1 / hn);
    if high_vec.0 < 0.0 || (high_vec.0 == 0.0 && high_vec.1 < 0.0) {
        high_vec = (-high_vec.0, -high_vec.1);
    }
    let low_vec = (-high_vec.1, high_vec.0);
    Ok(Eigenpair2x2 {
        eigenvalue_low: low,
        eigenvalue_high: high,
        eigvec_low: low_vec,
        eigvec_high: high_vec,
    })
}

/// Full eigen-decomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Eigenvalues come back ascending with their unit eigenvectors
/// in matching order.
#[allow(clippy::needless_range_loop)]
pub fn eig_sym_dense(m: &SymMatrix) -> Result<(Vector, Vec<Vector>), LinalgError> {
    let n = m.dim();
    if n > DENSE_DIM_CAP {
        return Err(LinalgError::TooLarge {
            dim: n,
            max: DENSE_DIM_CAP,
        });
    }
    let mut a = m.to_rows();
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let scale = m.frobenius_norm();
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p][r];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akr = a[k][r];
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let ark = a[r][k];
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
                a[p][r] = 0.0;
                a[r][p] = 0.0;
                for row in q.iter_mut() {
                    let qp = row[p];
                    let qr = row[r];
                    row[p] = c * qp - s * qr;
                    row[r] = s * qp + c * qr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = Vector::new(order.iter().map(|&i| a[i][i]).collect())?;
    let vectors = order
        .iter()
        .map(|&k| Vector::new(q.iter().map(|row| row[k]).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((values, vectors))
}
