//! Explicit matrix systems used throughout the tests and the CLI.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::words::{MatrixTuple, SymbolPermutation};

/// Default parameters of the four-dimensional example.
pub const ALPHA1: f64 = 0.44;
pub const ALPHA2: f64 = 0.2;
pub const THETA: f64 = 1.0;

/// Radius `1 + √(3/2)` of the closed ball used for separation.
pub fn separation_radius() -> f64 {
    1.0 + 1.5f64.sqrt()
}

/// `(B_1, B_2) = (diag(α₁, α₂), R(θ))` with the swap, so that
/// `A_1 = diag(α₁, α₂) ⊗ R(θ)` and `A_2 = R(θ) ⊗ diag(α₁, α₂)`.
pub fn kronecker_pair_base(alpha1: f64, alpha2: f64, theta: f64) -> Result<(MatrixTuple, SymbolPermutation)> {
    let base = MatrixTuple::new(vec![Matrix::diag(&[alpha1, alpha2]), Matrix::rotation(theta)])?;
    Ok((base, SymbolPermutation::from_one_based(&[2, 1])?))
}

/// The pair `(A_1, A_2)` acting on ℝ⁴.
pub fn kronecker_pair(alpha1: f64, alpha2: f64, theta: f64) -> Result<MatrixTuple> {
    let (base, iota) = kronecker_pair_base(alpha1, alpha2, theta)?;
    base.kronecker_with(&iota)
}

/// Base for the four-map system `(A_1, A_1, A_2, A_2)`: `(D, D, R, R)` with
/// `ι = (1 3)(2 4)`.
pub fn four_map_base(alpha1: f64, alpha2: f64, theta: f64) -> Result<(MatrixTuple, SymbolPermutation)> {
    let d = Matrix::diag(&[alpha1, alpha2]);
    let r = Matrix::rotation(theta);
    let base = MatrixTuple::new(vec![d.clone(), d, r.clone(), r])?;
    Ok((base, SymbolPermutation::from_one_based(&[3, 4, 1, 2])?))
}

pub fn four_map(alpha1: f64, alpha2: f64, theta: f64) -> Result<MatrixTuple> {
    let (base, iota) = four_map_base(alpha1, alpha2, theta)?;
    base.kronecker_with(&iota)
}

/// Translations `v_1..v_4`, pairwise at Euclidean distance 2.
pub fn four_map_translations() -> Vec<Vec<f64>> {
    let h = FRAC_1_SQRT_2;
    vec![vec![1.0, 0.0, h, 0.0], vec![-1.0, 0.0, h, 0.0], vec![0.0, 1.0, -h, 0.0], vec![0.0, -1.0, -h, 0.0]]
}

/// The irreducible but not strongly irreducible 3×3 pair with entries ½ and ⅔.
pub fn eq1_tuple() -> Result<MatrixTuple> {
    let (h, t) = (0.5, 2.0 / 3.0);
    MatrixTuple::new(vec![
        Matrix::from_row_slice(3, &[0.0, 0.0, h, t, 0.0, 0.0, 0.0, h, 0.0])?,
        Matrix::from_row_slice(3, &[0.0, t, 0.0, 0.0, 0.0, h, h, 0.0, 0.0])?,
    ])
}

/// Change of basis on `∧²ℝ⁴` from the lexicographic basis
/// `(e12, e13, e14, e23, e24, e34)` to the block basis
/// `(e12, e34, e14 − e23, e13, e24, e14 + e23)`. Columns are the new vectors.
pub fn wedge2_block_basis() -> Matrix {
    #[rustfmt::skip]
    let cols = [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
    ];
    let m = nalgebra::DMatrix::from_fn(6, 6, |r, c| cols[c][r]);
    Matrix::try_from_dmatrix(m).expect("finite constant matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{exterior_power, singular_values};

    #[test]
    fn kronecker_pair_matches_displayed_matrix() {
        let (a1, a2, th) = (ALPHA1, ALPHA2, THETA);
        let (s, c) = th.sin_cos();
        let t = kronecker_pair(a1, a2, th).unwrap();
        #[rustfmt::skip]
        let want1 = Matrix::from_row_slice(4, &[
            a1 * c, -a1 * s, 0.0, 0.0,
            a1 * s, a1 * c, 0.0, 0.0,
            0.0, 0.0, a2 * c, -a2 * s,
            0.0, 0.0, a2 * s, a2 * c,
        ]).unwrap();
        #[rustfmt::skip]
        let want2 = Matrix::from_row_slice(4, &[
            a1 * c, 0.0, -a1 * s, 0.0,
            0.0, a2 * c, 0.0, -a2 * s,
            a1 * s, 0.0, a1 * c, 0.0,
            0.0, a2 * s, 0.0, a2 * c,
        ]).unwrap();
        assert!(t.get(0).max_abs_diff(&want1) < 1e-15);
        assert!(t.get(1).max_abs_diff(&want2) < 1e-15);
    }

    #[test]
    fn kronecker_pair_singular_values() {
        let t = kronecker_pair(ALPHA1, ALPHA2, THETA).unwrap();
        for m in t.matrices() {
            let sv = singular_values(m).unwrap().values;
            for (got, want) in sv.iter().zip([0.44, 0.44, 0.2, 0.2]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wedge_block_form() {
        let t = kronecker_pair(ALPHA1, ALPHA2, THETA).unwrap();
        let p = wedge2_block_basis();
        let pinv = p.inverse().unwrap();
        let (a1, a2) = (ALPHA1, ALPHA2);
        for (idx, m) in t.matrices().iter().enumerate() {
            let block = &(&pinv * &exterior_power(m, 2).unwrap()) * &p;
            for r in 0..6 {
                for c in 0..6 {
                    if (r < 3) != (c < 3) {
                        assert!(block.get(r, c).abs() < 1e-14, "off-block entry ({r},{c})");
                    }
                }
            }
            // The diagonal block diag(α₁², α₂², α₁α₂) sits first for A_1, second for A_2.
            let off = if idx == 0 { 0 } else { 3 };
            for (k, want) in [a1 * a1, a2 * a2, a1 * a2].iter().enumerate() {
                assert!((block.get(off + k, off + k) - want).abs() < 1e-14);
            }
        }
    }
}
