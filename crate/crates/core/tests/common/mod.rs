#![allow(dead_code)]

use proptest::prelude::*;
use selfaffine::{Matrix, MatrixTuple};

/// Relative difference scaled by the larger magnitude.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Square matrices with entries in `[-1, 1]` and reciprocal condition above `1e-3`.
pub fn matrix(dim: usize) -> impl Strategy<Value = Matrix> {
    conditioned(dim, 1e-3)
}

/// Square matrices with entries in `[-1, 1]` and reciprocal condition above `rcond`.
pub fn conditioned(dim: usize, rcond: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, dim * dim).prop_map(move |e| Matrix::from_row_slice(dim, &e).unwrap()).prop_filter(
        "well conditioned",
        move |m| {
            let sv = selfaffine::linalg::singular_values(m).unwrap().values;
            sv[sv.len() - 1] > rcond * sv[0]
        },
    )
}

/// Matrix of dimension 1 to 4.
pub fn any_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..=4).prop_flat_map(matrix)
}

/// Contracting matrix: norm in `[0.1, 0.9]`.
pub fn contraction(dim: usize) -> impl Strategy<Value = Matrix> {
    (matrix(dim), 0.1f64..0.9).prop_map(|(m, r)| m.scale(r / m.norm()))
}

pub fn contracting_tuple(dim: usize, alphabet: usize) -> impl Strategy<Value = MatrixTuple> {
    prop::collection::vec(contraction(dim), alphabet).prop_map(|ms| MatrixTuple::new(ms).unwrap())
}

/// One-based word over `{1..alphabet}` of length `1..=max_len`.
pub fn word(alphabet: usize, max_len: usize) -> impl Strategy<Value = selfaffine::Word> {
    prop::collection::vec(1..=alphabet, 1..=max_len).prop_map(|s| selfaffine::Word::from_symbols(&s).unwrap())
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
