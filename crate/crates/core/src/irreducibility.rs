//! Numerical witnesses for reducibility and for the failure of
//! quasi-multiplicativity, plus spectral obstructions to projective
//! conjugacy.
//!
//! Every search here is one-sided. A returned witness is checked to the
//! stated residual; `None` means only that nothing was found up to the
//! requested depth.

use std::fmt::{self, Write as _};

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{column_space, eigenvalues, kronecker, rank, singular_values, Matrix};
use crate::words::{apply_permutation, enumerate_words, word_matrix, Budget, MatrixTuple, SymbolPermutation, Word};

/// Most subspaces tracked in one orbit before giving up on it.
pub const ORBIT_CAP: usize = 48;

/// Relative spacing below which eigenvalues are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-6;

/// Relative rank tolerance for the Kronecker intersection check.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Single,
    FiniteUnion,
}

/// A finite family of subspaces permuted by every generator.
///
/// In single mode the family has exactly one member.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceWitness {
    /// Orthonormal bases, one matrix of columns per subspace.
    pub subspaces: Vec<DMatrix<f64>>,
    /// Largest sine of a principal angle between `A_i V` and the nearest member.
    pub residual: f64,
    /// Matrix whose spectral subspaces supplied the seed.
    pub seed: Seed,
}

/// Source of a candidate subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    /// The product `A_w`.
    Word(Word),
    /// A fixed generic linear combination of all `A_w` with `|w| ≤ depth`.
    Combination { depth: usize },
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seed::Word(w) => write!(f, "word {w}"),
            Seed::Combination { depth } => write!(f, "combination of words up to length {depth}"),
        }
    }
}

#[derive(Serialize)]
struct WitnessDoc {
    seed: Seed,
    residual: f64,
    dimensions: Vec<usize>,
    bases: Vec<Vec<Vec<f64>>>,
}

impl SubspaceWitness {
    pub fn dims(&self) -> Vec<usize> {
        self.subspaces.iter().map(|q| q.ncols()).collect()
    }

    /// `max ‖QᵀQ − I‖` over members, entrywise.
    pub fn gram_deviation(&self) -> f64 {
        self.subspaces.iter().map(|q| (q.transpose() * q - DMatrix::identity(q.ncols(), q.ncols())).amax()).fold(0.0, f64::max)
    }

    /// Bases written as lists of column vectors.
    pub fn to_json(&self) -> serde_json::Value {
        let bases = self.subspaces.iter().map(|q| q.column_iter().map(|c| c.iter().copied().collect()).collect()).collect();
        serde_json::to_value(WitnessDoc { seed: self.seed.clone(), residual: self.residual, dimensions: self.dims(), bases })
            .expect("plain data serializes")
    }
}

/// Orthogonal projector onto a subspace, compared in Frobenius norm.
struct Subspace {
    basis: DMatrix<f64>,
    projector: DMatrix<f64>,
}

impl Subspace {
    fn new(basis: DMatrix<f64>) -> Self {
        let projector = &basis * basis.transpose();
        Subspace { basis, projector }
    }

    fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `‖P − P'‖_F ≤ √2·tol` forces every principal angle to have sine ≤ tol.
    fn close(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.projector - &other.projector).norm() <= std::f64::consts::SQRT_2 * tol
    }

    fn image(&self, m: &Matrix) -> Subspace {
        Subspace::new(column_space(&(m.as_dmatrix() * &self.basis), 1e-13))
    }
}

/// Sine of the largest principal angle between two subspaces of equal dimension.
pub fn principal_angle_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    let residual = a - b * (b.transpose() * a);
    residual.singular_values().max().min(1.0)
}

/// Real generalized eigenspaces of `m`, one per eigenvalue cluster, with a
/// conjugate pair counted as a single two-dimensional cluster.
fn spectral_subspaces(m: &Matrix) -> Result<Vec<DMatrix<f64>>> {
    let d = m.dim();
    let scaled = m.scale(1.0 / m.norm());
    let eig = eigenvalues(&scaled)?;
    let tol = CLUSTER_TOL * eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut clusters: Vec<(Complex<f64>, usize)> = Vec::new();
    for z in eig.iter().filter(|z| z.im >= -tol) {
        let z = if z.im.abs() <= tol { Complex::new(z.re, 0.0) } else { *z };
        match clusters.iter_mut().find(|(c, _)| (c - z).norm() <= tol) {
            Some((_, count)) => *count += 1,
            None => clusters.push((z, 1)),
        }
    }
    let a = scaled.as_dmatrix();
    let id = DMatrix::<f64>::identity(d, d);
    let mut out = Vec::with_capacity(clusters.len());
    for (z, count) in clusters {
        let (factor, dim) =
            if z.im == 0.0 { (a - &id * z.re, count) } else { (a * a - a * (2.0 * z.re) + &id * z.norm_sqr(), 2 * count) };
        let mut power = factor.clone();
        for _ in 1..count {
            power = &power * &factor;
        }
        out.push(smallest_right_singular(&power, dim));
    }
    Ok(out)
}

fn smallest_right_singular(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let cols: Vec<_> = order[..k.min(n)].iter().map(|&i| v_t.row(i).transpose()).collect();
    DMatrix::from_columns(&cols)
}

/// Proper nonzero sums of spectral subspaces, smallest dimension first.
fn candidates(m: &Matrix) -> Result<Vec<Subspace>> {
    let blocks = spectral_subspaces(m)?;
    let d = m.dim();
    let mut out = Vec::new();
    for mask in 1u32..(1 << blocks.len()) {
        let cols: Vec<_> = blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .flat_map(|(_, b)| b.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
            .collect();
        if cols.len() >= d {
            continue;
        }
        let basis = column_space(&DMatrix::from_columns(&cols), 1e-10);
        if basis.ncols() == cols.len() {
            out.push(Subspace::new(basis));
        }
    }
    out.sort_by_key(Subspace::dim);
    Ok(out)
}

fn residual_of(tuple: &MatrixTuple, family: &[Subspace]) -> f64 {
    let mut worst = 0.0f64;
    for v in family {
        for m in tuple.matrices() {
            let img = v.image(m);
            let best = family
                .iter()
                .filter(|w| w.dim() == img.dim())
                .map(|w| principal_angle_sine(&img.basis, &w.basis))
                .fold(1.0, f64::min);
            worst = worst.max(best);
        }
    }
    worst
}

/// Closes `start` under the generators, or gives up at `ORBIT_CAP` members.
fn orbit(tuple: &MatrixTuple, start: Subspace, tol: f64) -> Option<Vec<Subspace>> {
    let mut family = vec![start];
    let mut next = 0;
    while next < family.len() {
        for m in tuple.matrices() {
            let img = family[next].image(m);
            if !family.iter().any(|w| w.close(&img, tol)) {
                if family.len() == ORBIT_CAP {
                    return None;
                }
                family.push(img);
            }
        }
        next += 1;
    }
    Some(family)
}

/// Word products up to `depth`, plus one generic element of their linear
/// span per length. Spans of single products can miss invariant subspaces
/// when every product has a repeated eigenvalue straddling them.
fn seeds(tuple: &MatrixTuple, depth: usize) -> Result<Vec<(Seed, Subspace)>> {
    let mut tried: Vec<Subspace> = Vec::new();
    let mut out = Vec::new();
    let mut push = |seed: &Seed, m: &Matrix, out: &mut Vec<(Seed, Subspace)>| -> Result<()> {
        for cand in candidates(m)? {
            if !tried.iter().any(|t| t.close(&cand, 1e-9)) {
                tried.push(Subspace::new(cand.basis.clone()));
                out.push((seed.clone(), cand));
            }
        }
        Ok(())
    };
    let d = tuple.dim();
    let mut combination = DMatrix::<f64>::zeros(d, d);
    let mut count = 0usize;
    for n in 1..=depth {
        for word in enumerate_words(tuple.alphabet(), n, Budget::default())? {
            let m = word_matrix(tuple, &word)?;
            count += 1;
            // Weyl sequence coefficients in [1, 2), normalized per product.
            let c = 1.0 + (count as f64 * 0.618_033_988_749_894_9).fract();
            combination += m.as_dmatrix() * (c / m.norm());
            push(&Seed::Word(word), &m, &mut out)?;
        }
        let generic = Matrix::try_from_dmatrix(combination.clone())?;
        if generic.check_invertible().is_ok() {
            push(&Seed::Combination { depth: n }, &generic, &mut out)?;
        }
    }
    Ok(out)
}

fn search(tuple: &MatrixTuple, mode: SearchMode, depth: usize, tol: f64, first_only: bool) -> Result<Vec<SubspaceWitness>> {
    if depth == 0 {
        return Err(Error::InvalidInput("search depth must be at least 1".into()));
    }
    let mut found = Vec::new();
    for (seed, cand) in seeds(tuple, depth)? {
        let family = match mode {
            SearchMode::Single => vec![cand],
            SearchMode::FiniteUnion => match orbit(tuple, cand, tol) {
                Some(f) => f,
                None => continue,
            },
        };
        let residual = residual_of(tuple, &family);
        if residual <= tol {
            found.push(SubspaceWitness { subspaces: family.into_iter().map(|s| s.basis).collect(), residual, seed });
            if first_only {
                break;
            }
        }
    }
    Ok(found)
}

/// First invariant subspace (single mode) or finite invariant family
/// (finite-union mode) seeded by spectral subspaces of word products up to
/// `depth` and by generic elements of their span.
pub fn invariant_subspace_search(
    tuple: &MatrixTuple,
    mode: SearchMode,
    depth: usize,
    tol: f64,
) -> Result<Option<SubspaceWitness>> {
    Ok(search(tuple, mode, depth, tol, true)?.into_iter().next())
}

/// Every distinct common invariant subspace seeded up to `depth`.
pub fn all_invariant_subspaces(tuple: &MatrixTuple, depth: usize, tol: f64) -> Result<Vec<SubspaceWitness>> {
    search(tuple, SearchMode::Single, depth, tol, false)
}

/// `ratio_n = max_{|k| ≤ n0} φ^s(A_{1ⁿ} A_k A_{2ⁿ}) / (φ^s(A_{1ⁿ}) φ^s(A_{2ⁿ}))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QMProfile {
    pub s: f64,
    pub n0: usize,
    pub rows: Vec<(usize, f64)>,
}

impl QMProfile {
    /// Least-squares slope of `log ratio_n` against `n` over rows with `n ≥ from`.
    pub fn fitted_slope(&self, from: usize) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.0 >= from).map(|&(n, r)| (n as f64, r.ln())).collect();
        let k = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    pub fn ratio(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.0 == n).map(|r| r.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,ratio\n");
        for (n, r) in &self.rows {
            writeln!(out, "{n},{r:e}").expect("writing to a String");
        }
        out
    }
}

pub fn quasi_multiplicativity_profile(tuple: &MatrixTuple, s: f64, n0: usize, n_max: usize, budget: Budget) -> Result<QMProfile> {
    if tuple.alphabet() < 2 {
        return Err(Error::InvalidInput("the profile uses symbols 1 and 2".into()));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::OutOfRangeS { s, range: "[0, ∞)" });
    }
    budget.check(tuple.alphabet(), n0)?;
    let mut connectors = vec![Matrix::identity(tuple.dim())];
    for k in 1..=n0 {
        for word in enumerate_words(tuple.alphabet(), k, budget)? {
            connectors.push(word_matrix(tuple, &word)?);
        }
    }
    let (a, b) = (tuple.get(0), tuple.get(1));
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (an, bn) = (a.pow(n as u32), b.pow(n as u32));
        let denom = singular_values(&an)?.phi_s(s) * singular_values(&bn)?.phi_s(s);
        let ratios = Exec::default().map(connectors.len(), |k| {
            let m = &(&an * &connectors[k]) * &bn;
            singular_values(&m).map(|sv| sv.phi_s(s) / denom)
        });
        let mut best = 0.0f64;
        for r in ratios {
            best = best.max(r?);
        }
        if !(best.is_finite() && best > 0.0) {
            return Err(Error::NonFinite);
        }
        rows.push((n, best));
    }
    Ok(QMProfile { s, n0, rows })
}

/// Ranks of `PX₁ ⊗ X₂P` and `X₁ ⊗ X₂P`, and `dim(U₂ ∩ (X₁ ⊗ X₂)V₁)`, where
/// `P = diag(1, 0)`, `V₁ = span(e₁, e₃)` and `U₂ = span(e₃, e₄)`.
pub fn kronecker_intersection_check(x1: &Matrix, x2: &Matrix) -> Result<(usize, usize, usize)> {
    if x1.dim() != 2 || x2.dim() != 2 {
        return Err(Error::DimensionMismatch("the intersection check takes 2×2 matrices".into()));
    }
    x1.check_invertible()?;
    x2.check_invertible()?;
    let p = Matrix::diag(&[1.0, 0.0]);
    let id = Matrix::identity(2);
    let x = kronecker(x1, x2);
    let right = &x * &kronecker(&id, &p);
    let both = &kronecker(&p, &id) * &right;
    let rank_a = rank(both.as_dmatrix(), RANK_TOL);
    let rank_b = rank(right.as_dmatrix(), RANK_TOL);
    let image = column_space(right.as_dmatrix(), RANK_TOL);
    let u2 = DMatrix::from_fn(4, 2, |r, c| if r == c + 2 { 1.0 } else { 0.0 });
    let mut stacked = DMatrix::zeros(4, 2 + image.ncols());
    stacked.columns_mut(0, 2).copy_from(&u2);
    stacked.columns_mut(2, image.ncols()).copy_from(&image);
    let intersection = 2 + image.ncols() - rank(&stacked, RANK_TOL);
    Ok((rank_a, rank_b, intersection))
}

/// Outcome of the spectral test for one conjugacy hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", content = "word", rename_all = "snake_case")]
pub enum Obstruction {
    /// Spectra of this word rule out every projective conjugacy.
    Obstructed(Word),
    /// No word up to the depth separates the spectra.
    Inconclusive,
}

impl Obstruction {
    pub fn word(&self) -> Option<&Word> {
        match self {
            Obstruction::Obstructed(w) => Some(w),
            Obstruction::Inconclusive => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub depth: usize,
    /// Against `B_w ~ h B_{ι(w)} h⁻¹`.
    pub conjugate: Obstruction,
    /// Against `B_w ~ h (B_{ι(w)}⁻¹)ᵀ h⁻¹`.
    pub inverse_transpose: Obstruction,
}

impl ConjugacyReport {
    pub fn both_obstructed(&self) -> bool {
        self.conjugate.word().is_some() && self.inverse_transpose.word().is_some()
    }
}

/// `spec(a) = c·spec(b)` for some real `c ≠ 0`, as multisets.
fn projectively_equal(a: &[Complex<f64>], b: &[Complex<f64>]) -> bool {
    let top = |v: &[Complex<f64>]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = top(a) / top(b);
    [scale, -scale].iter().any(|&c| {
        let mut unused: Vec<Complex<f64>> = b.iter().map(|z| z * c).collect();
        let tol = 1e-6 * top(a);
        a.iter().all(|z| match unused.iter().position(|w| (w - z).norm() <= tol) {
            Some(i) => {
                unused.swap_remove(i);
                true
            }
            None => false,
        })
    })
}

/// Searches words up to `depth` whose projective spectra separate `B_w` from
/// `B_{ι(w)}` and from `(B_{ι(w)}⁻¹)ᵀ`.
pub fn conjugacy_obstruction(base: &MatrixTuple, iota: &SymbolPermutation, depth: usize) -> Result<ConjugacyReport> {
    base.check_permutation(iota)?;
    if depth == 0 {
        return Err(Error::InvalidInput("search depth must be at least 1".into()));
    }
    let (mut conjugate, mut inverse_transpose) = (Obstruction::Inconclusive, Obstruction::Inconclusive);
    'outer: for n in 1..=depth {
        for word in enumerate_words(base.alphabet(), n, Budget::default())? {
            let m = eigenvalues(&word_matrix(base, &word)?)?;
            let other = eigenvalues(&word_matrix(base, &apply_permutation(iota, &word)?)?)?;
            if conjugate.word().is_none() && !projectively_equal(&m, &other) {
                conjugate = Obstruction::Obstructed(word.clone());
            }
            let inv: Vec<Complex<f64>> = other.iter().map(|z| z.inv()).collect();
            if inverse_transpose.word().is_none() && !projectively_equal(&m, &inv) {
                inverse_transpose = Obstruction::Obstructed(word);
            }
            if conjugate.word().is_some() && inverse_transpose.word().is_some() {
                break 'outer;
            }
        }
    }
    Ok(ConjugacyReport { depth, conjugate, inverse_transpose })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::fixtures;

    fn w(s: &[usize]) -> Word {
        Word::from_symbols(s).unwrap()
    }

    #[test]
    fn diagonal_pair_has_axis_witness() {
        let t = MatrixTuple::new(vec![Matrix::diag(&[0.5, 0.2]), Matrix::diag(&[0.3, 0.4])]).unwrap();
        let wit = invariant_subspace_search(&t, SearchMode::Single, 1, 1e-8).unwrap().unwrap();
        assert_eq!(wit.dims(), vec![1]);
        assert!(wit.residual <= 1e-12);
        assert!(wit.gram_deviation() <= 1e-10);
    }

    #[test]
    fn rotation_pair_has_no_real_invariant_line() {
        let t = MatrixTuple::new(vec![Matrix::rotation(1.0).scale(0.5), Matrix::rotation(0.3).scale(0.4)]).unwrap();
        assert!(invariant_subspace_search(&t, SearchMode::Single, 3, 1e-8).unwrap().is_none());
    }

    #[test]
    fn eq1_is_irreducible_but_permutes_axes() {
        let t = fixtures::eq1_tuple().unwrap();
        assert!(invariant_subspace_search(&t, SearchMode::Single, 4, 1e-8).unwrap().is_none());
        let wit = invariant_subspace_search(&t, SearchMode::FiniteUnion, 4, 1e-8).unwrap().unwrap();
        assert_eq!(wit.subspaces.len(), 3);
        assert!(wit.residual <= 1e-8);
    }

    #[test]
    fn jordan_block_cluster() {
        let m = Matrix::from_row_slice(3, &[0.5, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.2]).unwrap();
        let blocks = spectral_subspaces(&m).unwrap();
        let mut dims: Vec<usize> = blocks.iter().map(|b| b.ncols()).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
    }

    #[test]
    fn principal_angle_of_axes() {
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let diag = DMatrix::from_column_slice(2, 1, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((principal_angle_sine(&e1, &diag) - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(principal_angle_sine(&e1, &e1), 0.0);
    }

    #[test]
    fn similarities_are_quasi_multiplicative() {
        let t = MatrixTuple::new(vec![Matrix::rotation(0.7).scale(0.5), Matrix::rotation(-1.1).scale(0.3)]).unwrap();
        let profile = quasi_multiplicativity_profile(&t, 1.5, 2, 6, Budget::default()).unwrap();
        for (_, r) in &profile.rows {
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qm_csv_has_one_row_per_level() {
        let t = fixtures::kronecker_pair(0.44, 0.2, 1.0).unwrap();
        let profile = quasi_multiplicativity_profile(&t, 2.0, 1, 4, Budget::default()).unwrap();
        assert_eq!(profile.to_csv().lines().count(), 5);
    }

    #[test]
    fn kronecker_intersection_identity() {
        let id = Matrix::identity(2);
        assert_eq!(kronecker_intersection_check(&id, &id).unwrap(), (1, 2, 1));
        let singular = Matrix::from_row_slice(2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(kronecker_intersection_check(&singular, &id), Err(Error::Singular { .. })));
    }

    #[test]
    fn kronecker_pair_obstructs_both_hypotheses() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let report = conjugacy_obstruction(&base, &iota, 1).unwrap();
        assert_eq!(report.conjugate, Obstruction::Obstructed(w(&[1])));
        assert_eq!(report.inverse_transpose, Obstruction::Obstructed(w(&[1])));
    }

    #[test]
    fn identity_permutation_never_obstructs_conjugacy() {
        let (base, _) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let report = conjugacy_obstruction(&base, &SymbolPermutation::identity(2), 5).unwrap();
        assert_eq!(report.conjugate, Obstruction::Inconclusive);
    }

    #[test]
    fn transpose_partner_is_inconclusive() {
        let b = Matrix::from_row_slice(2, &[0.4, 0.3, -0.1, 0.2]).unwrap();
        let base = MatrixTuple::new(vec![b.clone(), b.transpose()]).unwrap();
        let swap = SymbolPermutation::from_one_based(&[2, 1]).unwrap();
        let report = conjugacy_obstruction(&base, &swap, 5).unwrap();
        assert_eq!(report.conjugate, Obstruction::Inconclusive);
    }

    #[test]
    fn obstruction_is_projective() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let scaled = MatrixTuple::new(vec![base.get(0).scale(-3.0), base.get(1).scale(0.5)]).unwrap();
        assert_eq!(conjugacy_obstruction(&base, &iota, 3).unwrap(), conjugacy_obstruction(&scaled, &iota, 3).unwrap());
    }
}
