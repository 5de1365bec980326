//! Finite-level pressure, periodic-orbit lower bounds and the affinity
//! dimension.
//!
//! `P_n(Φ) = (1/n) log Σ_{|w|=n} Φ(w)` is computed exactly from the product
//! tree. Subadditivity of `log Σ` gives `P ≤ min_m P_m`; periodic orbits give
//! `P ≥ max_{|w|=n} (1/n) log Φ_λ(w)` where `Φ_λ` uses eigenvalue moduli. The
//! gap between the two is reported, never closed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::pairwise_sum;
use crate::linalg::singular_values;
use crate::potentials::{Factor, Potential, PotentialKind};
use crate::words::{Budget, MatrixTuple, ProductTree};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub level: usize,
    /// `P_n`.
    pub value: f64,
    /// `min_{m ≤ n} P_m`, an upper bound on the pressure.
    pub upper: f64,
    /// Periodic-orbit lower bound at level `n`.
    pub lower: f64,
    pub word_count: u64,
    /// `P_1, …, P_n`.
    pub levels: Vec<f64>,
}

/// Pressure estimate at level `n` together with every lower level.
pub fn level_pressure(potential: &Potential, level: usize, budget: Budget) -> Result<PressureEstimate> {
    let tree = ProductTree::new(potential.tuples(), level, budget)?;
    let sums = tree.level_sums(|p| potential.eval_products(p))?;
    let levels: Vec<f64> = sums.iter().enumerate().map(|(m, s)| s.ln() / (m + 1) as f64).collect();
    if levels.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let value = levels[level - 1];
    let upper = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let lower = lower_bound_periodic(potential, level, budget)?;
    Ok(PressureEstimate { level, value, upper, lower, word_count: budget.check(potential.alphabet(), level)?, levels })
}

/// `max_{|w|=n} (1/n) log Φ_λ(w)`, the best pressure lower bound from
/// periodic-orbit measures of period `n`. These carry zero entropy, so for
/// `n = 1` on a similarity system the bound sits exactly `log N` below the
/// pressure.
pub fn lower_bound_periodic(potential: &Potential, level: usize, budget: Budget) -> Result<f64> {
    let tree = ProductTree::new(potential.tuples(), level, budget)?;
    let rates = tree.leaves(|p| potential.log_spectral_products(p))?;
    let mut best = f64::NEG_INFINITY;
    for r in rates {
        best = best.max(r? / level as f64);
    }
    // Adding zero turns a negative zero positive.
    Ok(best + 0.0)
}

/// Largest violation of `(n+m) P_{n+m} ≤ n P_n + m P_m` over all computed pairs.
pub fn subadditivity_defect(levels: &[f64]) -> f64 {
    let total = |k: usize| levels[k - 1] * k as f64;
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=levels.len() {
        for m in 1..=levels.len() - n {
            worst = worst.max(total(n + m) - total(n) - total(m));
        }
    }
    worst
}

/// Singular spectra (as logs) of every level-`n` word product, in
/// lexicographic order. Lets bisection evaluate `P_n(φ^s)` for many `s`
/// without re-walking the tree.
pub(crate) struct SpectrumTable {
    pub level: usize,
    pub dim: usize,
    pub log_sv: Vec<f64>,
}

impl SpectrumTable {
    pub fn build(tuple: &MatrixTuple, level: usize, budget: Budget) -> Result<Self> {
        let tuples = [tuple.clone()];
        let tree = ProductTree::new(&tuples, level, budget)?;
        let rows = tree.leaves(|p| singular_values(&p[0]).map(|s| s.values))?;
        let mut log_sv = Vec::with_capacity(rows.len() * tuple.dim());
        for row in rows {
            log_sv.extend(row?.iter().map(|v| v.ln()));
        }
        if log_sv.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SpectrumTable { level, dim: tuple.dim(), log_sv })
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.log_sv.chunks(self.dim)
    }

    pub fn log_phi(row: &[f64], s: f64) -> f64 {
        let d = row.len();
        if s >= d as f64 {
            return s / d as f64 * row.iter().sum::<f64>();
        }
        let whole = s.floor() as usize;
        let frac = s - whole as f64;
        let mut acc: f64 = row[..whole].iter().sum();
        if frac > 0.0 {
            acc += frac * row[whole];
        }
        acc
    }

    /// `P_n(φ^s)` with a max-shifted pairwise sum.
    pub fn pressure(&self, s: f64) -> f64 {
        let logs: Vec<f64> = self.rows().map(|r| Self::log_phi(r, s)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        (top + pairwise_sum(&shifted).ln()) / self.level as f64
    }
}

/// Bracket around a root found by bisection on a level-`n` objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionResult {
    pub lo: f64,
    pub hi: f64,
    pub level: usize,
    pub iterations: usize,
    /// Objective at `lo` (≥ 0) and at `hi` (≤ 0).
    pub objective_lo: f64,
    pub objective_hi: f64,
    /// Whether the objective was non-increasing on every evaluated point.
    pub monotone: bool,
    /// Evaluated `(s, objective)` pairs in evaluation order.
    pub samples: Vec<(f64, f64)>,
    /// Periodic-orbit lower bound on the pressure at the bracket midpoint,
    /// when computed. A negative value means the true root may lie below `lo`.
    pub periodic_lower_at_mid: Option<f64>,
    /// How to read the bracket.
    pub semantics: String,
}

impl DimensionResult {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

const MONOTONE_SLACK: f64 = 1e-12;

/// Bisection of a non-increasing objective on `[lo, hi]` down to width `tol`.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64, level: usize) -> Result<DimensionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let mut samples = Vec::new();
    let mut eval = |s: f64, samples: &mut Vec<(f64, f64)>| {
        let v = f(s);
        samples.push((s, v));
        v
    };
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = eval(lo, &mut samples);
    let mut f_hi = eval(hi, &mut samples);
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::NonFinite);
    }
    if f_lo < 0.0 {
        return Err(Error::InvalidInput(format!("objective is negative at s = {lo} ({f_lo})")));
    }
    if f_hi > 0.0 {
        return Err(Error::InvalidInput(format!("objective is positive at s = {hi} ({f_hi})")));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let v = eval(mid, &mut samples);
        if v >= 0.0 {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
            f_hi = v;
        }
        iterations += 1;
    }
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1 + MONOTONE_SLACK);
    Ok(DimensionResult {
        lo,
        hi,
        level,
        iterations,
        objective_lo: f_lo,
        objective_hi: f_hi,
        monotone,
        samples,
        periodic_lower_at_mid: None,
        semantics: String::new(),
    })
}

pub(crate) fn check_contracting(tuple: &MatrixTuple) -> Result<()> {
    for (i, m) in tuple.matrices().iter().enumerate() {
        let norm = m.norm();
        if !(norm < 1.0) {
            return Err(Error::NotContracting { index: i + 1, norm });
        }
    }
    Ok(())
}

/// Bisection for the zero of `s ↦ P_n(φ^s)` on `[0, 2d]`.
///
/// `P_n` over-estimates the pressure, so the bracket over-estimates the
/// affinity dimension by the finite-level gap.
pub fn affinity_dimension(tuple: &MatrixTuple, level: usize, tol: f64, budget: Budget) -> Result<DimensionResult> {
    check_contracting(tuple)?;
    let table = SpectrumTable::build(tuple, level, budget)?;
    let mut result = bisect(|s| table.pressure(s), 0.0, 2.0 * tuple.dim() as f64, tol, level)?;
    let mid = result.mid();
    let phi = Potential::phi_s(tuple.clone(), mid)?;
    result.periodic_lower_at_mid = Some(lower_bound_periodic(&phi, level, budget)?);
    result.semantics =
        "P_n(phi^lo) >= 0 >= P_n(phi^hi); P_n upper-bounds the pressure, so the bracket over-estimates the dimension".into();
    Ok(result)
}

/// Level sums of the two factor potentials and of `φ^s` of the Kronecker tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureEquality {
    pub level: usize,
    pub s: f64,
    pub sum_factor1: f64,
    pub sum_factor2: f64,
    pub sum_phi: f64,
    /// `|S₁ − S₂| / max(S₁, S₂)`.
    pub symmetry_gap: f64,
    pub symmetric: bool,
    /// `½(S₁ + S₂) ≤ S ≤ S₁ + S₂`.
    pub sandwich: bool,
}

/// Relative tolerance on `S₁ = S₂`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Compares level-`n` sums of `Φ⁽¹⁾`, `Φ⁽²⁾` and `φ^s(A_w)`. Both potentials
/// must be factor potentials over the same base, permutation and exponent.
pub fn pressure_equality_check(first: &Potential, second: &Potential, level: usize, budget: Budget) -> Result<PressureEquality> {
    let (iota, s) = match (first.kind(), second.kind()) {
        (PotentialKind::Factor { iota, s, which: w1 }, PotentialKind::Factor { iota: iota2, s: s2, which: w2 })
            if iota == iota2 && s == s2 && w1 != w2 && first.tuples() == second.tuples() =>
        {
            (iota.clone(), *s)
        }
        _ => return Err(Error::InvalidInput("pressure equality needs the two factor potentials of one system".into())),
    };
    let (f1, f2) = match first.kind() {
        PotentialKind::Factor { which: Factor::First, .. } => (first, second),
        _ => (second, first),
    };
    let base = &first.tuples()[0];
    let tuples = vec![base.kronecker_with(&iota)?, base.clone(), first.tuples()[1].clone()];
    let tree = ProductTree::new(&tuples, level, budget)?;
    let rows = tree.leaves(|p| {
        let phi = singular_values(&p[0]).map(|sv| sv.phi_s(s)).unwrap_or(f64::NAN);
        (f1.eval_products(&p[1..]), f2.eval_products(&p[1..]), phi)
    })?;
    let col = |k: usize| -> f64 {
        let v: Vec<f64> = rows.iter().map(|r| [r.0, r.1, r.2][k]).collect();
        pairwise_sum(&v)
    };
    let (s1, s2, total) = (col(0), col(1), col(2));
    if ![s1, s2, total].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let symmetry_gap = (s1 - s2).abs() / s1.max(s2);
    let slack = SYMMETRY_TOL * total;
    Ok(PressureEquality {
        level,
        s,
        sum_factor1: s1,
        sum_factor2: s2,
        sum_phi: total,
        symmetry_gap,
        symmetric: symmetry_gap <= SYMMETRY_TOL,
        sandwich: 0.5 * (s1 + s2) <= total + slack && total <= s1 + s2 + slack,
    })
}
