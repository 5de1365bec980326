//! Submultiplicative potentials on words.
//!
//! Three families are supported:
//!
//! * `φ^s` of the word products of one tuple;
//! * products of powered norms `Π_j ‖A^{(j)}_w‖^{β_j}` over several tuples;
//! * the two factor potentials of a Kronecker tuple `A_i = B_i ⊗ B_{ι(i)}`,
//!   evaluated from the `d`-dimensional `B` products only:
//!
//!   `Φ⁽¹⁾(w) = ‖B_w‖^s ‖B_{ι(w)}‖^{2−s} ‖B_{ι(w)}^{∧2}‖^{s−1}`
//!   `Φ⁽²⁾(w) = ‖B_{ι(w)}‖^s ‖B_w‖^{2−s} ‖B_w^{∧2}‖^{s−1}`
//!
//! For `1 < s ≤ 2`, `φ^s(A_w) = max{Φ⁽¹⁾(w), Φ⁽²⁾(w)}` for every word.

use crate::error::{Error, Result};
use crate::linalg::{eigen_moduli, singular_values, Matrix};
use crate::words::{apply_permutation, word_matrix, Budget, MatrixTuple, ProductTree, SymbolPermutation, Word};

/// Relative tolerance of [`max_identity_check`].
pub const MAX_IDENTITY_TOL: f64 = 1e-8;

/// Which of the two factor potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    PhiS { s: f64 },
    NormProduct { betas: Vec<f64> },
    Factor { iota: SymbolPermutation, s: f64, which: Factor },
}

/// A potential `Φ: words → (0, ∞)` built from word products.
///
/// The product tuples are fixed at construction: one tuple for `φ^s`, one per
/// factor for norm products, and `(B_i)` together with `(B_{ι(i)})` for the
/// factor potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    tuples: Vec<MatrixTuple>,
    evidence: Option<String>,
}

impl Potential {
    pub fn phi_s(tuple: MatrixTuple, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::OutOfRangeS { s, range: "[0, ∞)" });
        }
        Ok(Potential { kind: PotentialKind::PhiS { s }, tuples: vec![tuple], evidence: None })
    }

    pub fn norm_product(tuples: Vec<MatrixTuple>, betas: Vec<f64>) -> Result<Self> {
        if tuples.is_empty() || tuples.len() != betas.len() {
            return Err(Error::InvalidInput("need one positive exponent per tuple".into()));
        }
        if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidInput("norm-product exponents must be positive".into()));
        }
        let n = tuples[0].alphabet();
        if tuples.iter().any(|t| t.alphabet() != n) {
            return Err(Error::DimensionMismatch("all tuples must share the alphabet size".into()));
        }
        Ok(Potential { kind: PotentialKind::NormProduct { betas }, tuples, evidence: None })
    }

    /// Factor potential of the Kronecker tuple `B_i ⊗ B_{ι(i)}`; requires `1 < s ≤ 2`.
    pub fn factor(base: MatrixTuple, iota: SymbolPermutation, s: f64, which: Factor) -> Result<Self> {
        check_factor_range(s)?;
        let permuted = base.permuted(&iota)?;
        Ok(Potential { kind: PotentialKind::Factor { iota, s, which }, tuples: vec![base, permuted], evidence: None })
    }

    /// Attaches a free-form note on what irreducibility evidence is known for
    /// the tuples. The strong irreducibility that the Gibbs bounds assume
    /// cannot be certified numerically; this only records what was checked.
    pub fn with_evidence(mut self, note: impl Into<String>) -> Self {
        self.evidence = Some(note.into());
        self
    }

    pub fn evidence(&self) -> Option<&str> {
        self.evidence.as_deref()
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Tuples whose prefix products [`Potential::eval_products`] consumes.
    pub fn tuples(&self) -> &[MatrixTuple] {
        &self.tuples
    }

    pub fn alphabet(&self) -> usize {
        self.tuples[0].alphabet()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            PotentialKind::PhiS { s } => format!("phi^{s}"),
            PotentialKind::NormProduct { betas } => format!("norm-product{betas:?}"),
            PotentialKind::Factor { s, which: Factor::First, .. } => format!("factor1(s={s})"),
            PotentialKind::Factor { s, which: Factor::Second, .. } => format!("factor2(s={s})"),
        }
    }

    /// The same potential with the other factor selected. Identity for other kinds.
    pub fn other_factor(&self) -> Self {
        let mut out = self.clone();
        if let PotentialKind::Factor { which, .. } = &mut out.kind {
            *which = match which {
                Factor::First => Factor::Second,
                Factor::Second => Factor::First,
            };
        }
        out
    }

    /// `Φ(w)`, multiplying the word products from scratch.
    pub fn eval(&self, word: &Word) -> Result<f64> {
        let prods = self.tuples.iter().map(|t| word_matrix(t, word)).collect::<Result<Vec<_>>>()?;
        Ok(self.eval_products(&prods))
    }

    /// `Φ(w)` from the products of `w` in each of [`Potential::tuples`].
    pub fn eval_products(&self, prods: &[Matrix]) -> f64 {
        self.log_eval_products(prods).exp()
    }

    pub fn log_eval_products(&self, prods: &[Matrix]) -> f64 {
        let spectra: Vec<Vec<f64>> =
            prods.iter().map(|m| singular_values(m).map(|s| s.values).unwrap_or_else(|_| vec![f64::NAN; m.dim()])).collect();
        self.log_from_values(&spectra)
    }

    /// `Φ` with eigenvalue moduli in place of singular values: the exponential
    /// growth rate of `Φ(wᵏ)^{1/k}` as `k → ∞`.
    pub fn log_spectral_products(&self, prods: &[Matrix]) -> Result<f64> {
        let moduli: Vec<Vec<f64>> = prods.iter().map(|m| eigen_moduli(m).map(|e| e.values)).collect::<Result<_>>()?;
        Ok(self.log_from_values(&moduli))
    }

    /// Shared formula over sorted values (singular values or eigenvalue moduli).
    fn log_from_values(&self, values: &[Vec<f64>]) -> f64 {
        match &self.kind {
            PotentialKind::PhiS { s } => log_phi(&values[0], *s),
            PotentialKind::NormProduct { betas } => values.iter().zip(betas).map(|(v, b)| b * v[0].ln()).sum(),
            PotentialKind::Factor { s, which, .. } => {
                let (lead, tail) = match which {
                    Factor::First => (&values[0], &values[1]),
                    Factor::Second => (&values[1], &values[0]),
                };
                s * lead[0].ln() + (2.0 - s) * tail[0].ln() + (s - 1.0) * (tail[0] * tail[1]).ln()
            }
        }
    }
}

fn log_phi(sorted: &[f64], s: f64) -> f64 {
    crate::linalg::SingularSpectrum { values: sorted.to_vec() }.log_phi_s(s)
}

fn check_factor_range(s: f64) -> Result<()> {
    if s > 1.0 && s <= 2.0 {
        Ok(())
    } else {
        Err(Error::OutOfRangeS { s, range: "(1, 2]" })
    }
}

/// Outcome of comparing `φ^s(A_w)` with `max{Φ⁽¹⁾(w), Φ⁽²⁾(w)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxIdentity {
    pub lhs: f64,
    pub factor1: f64,
    pub factor2: f64,
    pub holds: bool,
}

/// Checks `φ^s(A_w) = max{Φ⁽¹⁾(w), Φ⁽²⁾(w)}` for `A_i = B_i ⊗ B_{ι(i)}`.
///
/// The left side comes from the SVD of the `d² × d²` product, the right side
/// from the `d × d` factors.
pub fn max_identity_check(base: &MatrixTuple, iota: &SymbolPermutation, s: f64, word: &Word) -> Result<MaxIdentity> {
    check_factor_range(s)?;
    let kron = base.kronecker_with(iota)?;
    let lhs = singular_values(&word_matrix(&kron, word)?)?.phi_s(s);
    let factor1 = Potential::factor(base.clone(), iota.clone(), s, Factor::First)?.eval(word)?;
    let factor2 = Potential::factor(base.clone(), iota.clone(), s, Factor::Second)?.eval(word)?;
    Ok(MaxIdentity { lhs, factor1, factor2, holds: identity_holds(lhs, factor1, factor2) })
}

fn identity_holds(lhs: f64, f1: f64, f2: f64) -> bool {
    let rhs = f1.max(f2);
    (lhs - rhs).abs() <= MAX_IDENTITY_TOL * lhs.abs().max(rhs.abs())
}

/// Result of checking the max identity on every word of one length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxIdentityScan {
    pub level: usize,
    pub words: u64,
    pub failures: u64,
    /// Largest `|φ^s − max| / φ^s` seen.
    pub max_rel_error: f64,
}

/// [`max_identity_check`] over all words of length `level`. Each word pays
/// one `d² × d²` SVD, which is the cross-check route.
pub fn max_identity_scan(
    base: &MatrixTuple,
    iota: &SymbolPermutation,
    s: f64,
    level: usize,
    budget: Budget,
) -> Result<MaxIdentityScan> {
    check_factor_range(s)?;
    let kron = base.kronecker_with(iota)?;
    let f1 = Potential::factor(base.clone(), iota.clone(), s, Factor::First)?;
    let f2 = f1.other_factor();
    let tuples = vec![kron, base.clone(), base.permuted(iota)?];
    let tree = ProductTree::new(&tuples, level, budget)?;
    let errs = tree.leaves(|p| {
        let lhs = singular_values(&p[0]).map(|sv| sv.phi_s(s)).unwrap_or(f64::NAN);
        let a = f1.eval_products(&p[1..]);
        let b = f2.eval_products(&p[1..]);
        (lhs - a.max(b)).abs() / lhs
    })?;
    let failures = errs.iter().filter(|e| !(**e <= MAX_IDENTITY_TOL)).count() as u64;
    let max_rel_error = errs.iter().copied().fold(0.0, f64::max);
    Ok(MaxIdentityScan { level, words: errs.len() as u64, failures, max_rel_error })
}

/// The dual of a Kronecker system, trading `s ∈ [d²−2, d²−1)` for `s' = d² − s ∈ (1, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualizedSystem {
    pub primal_s: f64,
    pub dual_s: f64,
    pub dual_tuple: MatrixTuple,
    pub iota: SymbolPermutation,
}

impl DualizedSystem {
    /// The Kronecker tuple `A'_i = B'_i ⊗ B'_{ι(i)}`.
    pub fn dual_kronecker(&self) -> Result<MatrixTuple> {
        self.dual_tuple.kronecker_with(&self.iota)
    }
}

/// Builds `B'_i = |det B_i|^{d/(d²−s)} (B_i^{-1})^⊤`.
///
/// With this scaling `B'_i ⊗ B'_{ι(i)} = |det A_i|^{1/(d²−s)} (A_i^{-1})^⊤`,
/// and `φ^{s'}(A'_w) = φ^s(A_w)` for every word.
pub fn dualize(base: &MatrixTuple, iota: &SymbolPermutation, s: f64) -> Result<DualizedSystem> {
    base.check_permutation(iota)?;
    let d = base.dim() as f64;
    let top = d * d;
    if !(s >= top - 2.0 && s < top - 1.0) {
        return Err(Error::OutOfRangeS { s, range: "[d²−2, d²−1)" });
    }
    let dual_s = top - s;
    let dual_tuple = base.map(|b| {
        let inv_t = b.inverse().expect("tuple matrices are invertible").transpose();
        inv_t.scale(b.det().abs().powf(d / dual_s))
    })?;
    Ok(DualizedSystem { primal_s: s, dual_s, dual_tuple, iota: iota.clone() })
}

/// Checks `Φ⁽²⁾(w) = Φ⁽¹⁾(ι(w))`, which holds whenever `ι` is an involution.
pub fn factor_relabel_gap(base: &MatrixTuple, iota: &SymbolPermutation, s: f64, word: &Word) -> Result<f64> {
    let f1 = Potential::factor(base.clone(), iota.clone(), s, Factor::First)?;
    let f2 = f1.other_factor();
    let a = f2.eval(word)?;
    let b = f1.eval(&apply_permutation(iota, word)?)?;
    Ok((a - b).abs() / a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn w(s: &[usize]) -> Word {
        Word::from_symbols(s).unwrap()
    }

    #[test]
    fn phi_zero_is_constant_one() {
        let p = Potential::phi_s(fixtures::kronecker_pair(0.44, 0.2, 1.0).unwrap(), 0.0).unwrap();
        for word in [w(&[1]), w(&[1, 2, 2]), w(&[2, 1, 2, 1, 1])] {
            assert!((p.eval(&word).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn factor_potential_on_single_symbol() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let f1 = Potential::factor(base.clone(), iota.clone(), 1.5, Factor::First).unwrap();
        let v = f1.eval(&w(&[1])).unwrap();
        assert!((v - 0.44f64.powf(1.5)).abs() < 1e-12 * v);
        assert!((v - 0.29186).abs() < 1e-5);
    }

    #[test]
    fn factor_rejects_out_of_range_s() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        for s in [1.0, 0.5, 2.5] {
            assert!(matches!(Potential::factor(base.clone(), iota.clone(), s, Factor::First), Err(Error::OutOfRangeS { .. })));
        }
        assert!(Potential::factor(base, iota, 2.0, Factor::Second).is_ok());
    }

    #[test]
    fn max_identity_on_first_symbol() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let r = max_identity_check(&base, &iota, 1.5, &w(&[1])).unwrap();
        assert!(r.holds);
        assert!((r.lhs - 0.44 * 0.44f64.sqrt()).abs() < 1e-12);
        assert!((r.factor1 - 0.29186).abs() < 1e-5);
        assert!(r.factor2 < r.factor1);
        // Φ⁽²⁾(1) = ‖R‖^s ‖D‖^{2−s} ‖D^{∧2}‖^{s−1} = 0.44^{0.5} · 0.088^{0.5}
        assert!((r.factor2 - (0.44f64 * 0.088).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn max_identity_with_orthogonal_partner() {
        // Second singular value of B_w ⊗ B_ι(w) for orthogonal B_2.
        let base =
            MatrixTuple::new(vec![Matrix::from_row_slice(2, &[0.5, 0.2, -0.1, 0.3]).unwrap(), Matrix::rotation(0.9)]).unwrap();
        let iota = SymbolPermutation::from_one_based(&[2, 1]).unwrap();
        for word in [w(&[1, 2]), w(&[1, 1, 2, 1]), w(&[2, 2, 1])] {
            assert!(max_identity_check(&base, &iota, 1.7, &word).unwrap().holds);
            let b = singular_values(&word_matrix(&base, &word).unwrap()).unwrap().values;
            let bi = singular_values(&word_matrix(&base, &apply_permutation(&iota, &word).unwrap()).unwrap()).unwrap().values;
            let a = singular_values(&word_matrix(&base.kronecker_with(&iota).unwrap(), &word).unwrap()).unwrap().values;
            let want = (b[0] * bi[1]).max(b[1] * bi[0]);
            assert!((a[1] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn max_identity_scan_exhaustive_small() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let scan = max_identity_scan(&base, &iota, 1.5, 8, Budget::default()).unwrap();
        assert_eq!(scan.words, 256);
        assert_eq!(scan.failures, 0);
    }

    #[test]
    fn second_factor_is_relabelled_first() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        for word in [w(&[1, 2, 2]), w(&[2, 1, 1, 1, 2]), w(&[2])] {
            assert!(factor_relabel_gap(&base, &iota, 1.3, &word).unwrap() < 1e-14);
        }
    }

    #[test]
    fn dualize_examples() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let dual = dualize(&base, &iota, 2.5).unwrap();
        assert_eq!(dual.dual_s, 1.5);
        // Self-dual midpoint.
        let mid = dualize(&base, &iota, 2.0).unwrap();
        assert_eq!(mid.dual_s, 2.0);
        assert!(matches!(dualize(&base, &iota, 3.0), Err(Error::OutOfRangeS { .. })));
        assert!(matches!(dualize(&base, &iota, 1.9), Err(Error::OutOfRangeS { .. })));
        // Orthogonal matrices are their own duals.
        let orth = MatrixTuple::new(vec![Matrix::rotation(0.3), Matrix::rotation(-1.2)]).unwrap();
        let d = dualize(&orth, &iota, 2.5).unwrap();
        for (a, b) in d.dual_tuple.matrices().iter().zip(orth.matrices()) {
            assert!(a.max_abs_diff(b) < 1e-14);
        }
    }

    #[test]
    fn dual_kronecker_is_scaled_inverse_transpose() {
        let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
        let s = 2.5;
        let dual = dualize(&base, &iota, s).unwrap();
        let primal = base.kronecker_with(&iota).unwrap();
        for (a_dual, a) in dual.dual_kronecker().unwrap().matrices().iter().zip(primal.matrices()) {
            let want = a.inverse().unwrap().transpose().scale(a.det().abs().powf(1.0 / (4.0 - s)));
            assert!(a_dual.max_abs_diff(&want) < 1e-13);
        }
    }
}
