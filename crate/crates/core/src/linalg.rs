//! Dense real linear algebra on small square matrices.
//!
//! Singular values come from nalgebra's SVD and eigenvalues from its real
//! Schur decomposition. Kronecker products, exterior powers and the
//! singular value function are built on top of those.

use std::fmt;
use std::ops::Mul;

use itertools::Itertools;
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative invertibility threshold: `|det M| < INVERTIBILITY_TOL · ‖M‖^d` is singular.
pub const INVERTIBILITY_TOL: f64 = 1e-12;

const SCHUR_MAX_ITER: usize = 10_000;

/// A finite real square matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.to_rows())
    }
}

impl Matrix {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}×{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::try_from_dmatrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("matrix rows must form a square".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(dim, &flat)
    }

    pub fn try_from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch("matrix must be square and nonempty".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Matrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        Matrix(DMatrix::identity(dim, dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        Matrix(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// Planar rotation by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.to_rows().concat()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Matrix(self.0.transpose())
    }

    pub fn scale(&self, c: f64) -> Self {
        Matrix(&self.0 * c)
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Operator norm induced by the Euclidean norm.
    pub fn norm(&self) -> f64 {
        singular_values(self).map(|s| s.values[0]).unwrap_or(f64::NAN)
    }

    /// Largest absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        (&self.0 - &other.0).amax()
    }

    pub fn check_invertible(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let det = self.det();
        let norm = self.norm();
        if !(det.abs() >= INVERTIBILITY_TOL * norm.powi(self.dim() as i32)) || norm == 0.0 {
            return Err(Error::Singular { det });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.check_invertible()?;
        self.0.clone().try_inverse().map(Matrix).ok_or(Error::Singular { det: self.det() })
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.dim());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 * &rhs.0)
    }
}

/// Singular values `σ_1 ≥ … ≥ σ_d ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

/// Eigenvalue moduli `λ_1 ≥ … ≥ λ_d ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenModuli {
    pub values: Vec<f64>,
}

/// `log` of the singular value function for a sorted spectrum.
///
/// For `s ≤ d` this is `Σ_{i ≤ ⌊s⌋} log σ_i + (s − ⌊s⌋) log σ_{⌈s⌉}`; above `d`
/// it is `(s/d) log |det|`. Zero exponents contribute nothing even when the
/// corresponding value is zero.
fn log_phi_from_sorted(values: &[f64], s: f64) -> f64 {
    let d = values.len();
    if s >= d as f64 {
        let log_det: f64 = values.iter().map(|v| v.ln()).sum();
        return s / d as f64 * log_det;
    }
    let whole = s.floor() as usize;
    let frac = s - whole as f64;
    let mut acc: f64 = values[..whole].iter().map(|v| v.ln()).sum();
    if frac > 0.0 {
        acc += frac * values[whole].ln();
    }
    acc
}

impl SingularSpectrum {
    pub fn norm(&self) -> f64 {
        self.values[0]
    }

    /// `σ_1 ⋯ σ_k`, the norm of the `k`-th exterior power.
    pub fn top_product(&self, k: usize) -> f64 {
        self.values[..k].iter().product()
    }

    pub fn phi_s(&self, s: f64) -> f64 {
        self.log_phi_s(s).exp()
    }

    pub fn log_phi_s(&self, s: f64) -> f64 {
        log_phi_from_sorted(&self.values, s)
    }
}

impl EigenModuli {
    /// The singular value function with eigenvalue moduli in place of
    /// singular values. This is the growth rate of `φ^s(Mⁿ)^{1/n}`.
    pub fn phi_s(&self, s: f64) -> f64 {
        self.log_phi_s(s).exp()
    }

    pub fn log_phi_s(&self, s: f64) -> f64 {
        log_phi_from_sorted(&self.values, s)
    }

    pub fn top_product(&self, k: usize) -> f64 {
        self.values[..k].iter().product()
    }
}

pub fn singular_values(m: &Matrix) -> Result<SingularSpectrum> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut values: Vec<f64> = m.0.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(SingularSpectrum { values })
}

/// Complex eigenvalues from the real Schur form.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex<f64>>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.0.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn eigen_moduli(m: &Matrix) -> Result<EigenModuli> {
    let mut values: Vec<f64> = eigenvalues(m)?.iter().map(|z| z.norm()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(EigenModuli { values })
}

/// Kronecker product in block layout `a_ij · B`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (da, db) = (a.dim(), b.dim());
    let mut out = DMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a.0[(i, j)];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b.0[(k, l)];
                }
            }
        }
    }
    Matrix(out)
}

/// Index sets `i_1 < ⋯ < i_k` of `{0..dim}` in lexicographic order.
pub fn wedge_basis(dim: usize, k: usize) -> Vec<Vec<usize>> {
    (0..dim).combinations(k).collect()
}

/// Matrix of `A^{∧k}` in the lexicographic basis `e_{i_1} ∧ ⋯ ∧ e_{i_k}`.
///
/// Entry `(I, J)` is the minor of `A` on rows `I` and columns `J`.
pub fn exterior_power(a: &Matrix, k: usize) -> Result<Matrix> {
    let d = a.dim();
    if k == 0 || k > d {
        return Err(Error::BadRank { k, dim: d });
    }
    let basis = wedge_basis(d, k);
    let size = basis.len();
    let mut out = DMatrix::zeros(size, size);
    for (r, rows) in basis.iter().enumerate() {
        for (c, cols) in basis.iter().enumerate() {
            let minor = DMatrix::from_fn(k, k, |i, j| a.0[(rows[i], cols[j])]);
            out[(r, c)] = minor.determinant();
        }
    }
    Ok(Matrix(out))
}

/// The singular value function `φ^s(M)` from singular values.
pub fn phi_s(m: &Matrix, s: f64) -> Result<f64> {
    check_exponent(s)?;
    m.check_invertible()?;
    Ok(singular_values(m)?.phi_s(s))
}

/// `φ^s(M) = ‖M^{∧⌊s⌋}‖^{1+⌊s⌋−s} ‖M^{∧⌈s⌉}‖^{s−⌊s⌋}` for `0 ≤ s ≤ d`.
///
/// Independent of [`phi_s`]: it never looks at the singular values of `M`
/// itself, only at the norms of its exterior powers.
pub fn phi_s_via_exterior(m: &Matrix, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let d = m.dim();
    if s > d as f64 {
        return Err(Error::OutOfRangeS { s, range: "[0, d]" });
    }
    m.check_invertible()?;
    let wedge_norm = |k: usize| -> Result<f64> {
        if k == 0 {
            Ok(1.0)
        } else {
            Ok(exterior_power(m, k)?.norm())
        }
    };
    let lo = s.floor() as usize;
    let hi = s.ceil() as usize;
    let frac = s - lo as f64;
    Ok(wedge_norm(lo)?.powf(1.0 - frac) * wedge_norm(hi)?.powf(frac))
}

fn check_exponent(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRangeS { s, range: "[0, ∞)" })
    }
}

/// Numerical rank: singular values above `rel_tol · σ_1`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.max();
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &v)| top > 0.0 && v > rel_tol * top)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of the right null space of a square or
/// tall matrix `m`.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    // Pad short matrices so the SVD returns a full V.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.max();
    let cols: Vec<_> = (0..n)
        .filter(|&i| {
            let v = svd.singular_values[i];
            top == 0.0 || v <= rel_tol * top
        })
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
