//! Level-`n` approximations of equilibrium states and the diagnostics that
//! tell two of them apart.
//!
//! An equilibrium state with the Gibbs property satisfies
//! `μ([w]) ≍ e^{−|w| P(Φ)} Φ(w)` up to a constant that is not computable
//! here, so the level-`n` cylinder weights `Φ(w) / Σ_{|v|=n} Φ(v)` are the
//! finite object this module works with.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::pairwise_sum;
use crate::linalg::eigen_moduli;
use crate::potentials::{Factor, Potential};
use crate::pressure::{bisect, check_contracting, DimensionResult, SpectrumTable};
use crate::words::{apply_permutation, enumerate_words, word_matrix, Budget, MatrixTuple, ProductTree, SymbolPermutation, Word};

/// Witness tolerance on `log(λ₁/λ₂)`, relative to `max(1, |a|, |b|)`.
pub const WITNESS_TOL: f64 = 1e-6;

/// Probability of every length-`n` cylinder, in lexicographic word order.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDistribution {
    pub level: usize,
    pub alphabet: usize,
    pub weights: Vec<f64>,
    pub source: String,
}

#[derive(Serialize)]
struct DistributionDoc<'a> {
    schema_version: u32,
    source: &'a str,
    alphabet: usize,
    level: usize,
    weights: Vec<WeightRow>,
}

#[derive(Serialize)]
struct WeightRow {
    word: String,
    weight: f64,
}

impl LevelDistribution {
    pub fn weight(&self, word: &Word) -> Option<f64> {
        (word.len() == self.level && word.max_symbol() <= self.alphabet).then(|| self.weights[word.rank(self.alphabet) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        self.weights.iter().enumerate().map(|(r, w)| (Word::from_rank(self.alphabet, self.level, r as u64), *w))
    }

    pub fn total_variation(&self, other: &LevelDistribution) -> Result<f64> {
        if self.level != other.level || self.alphabet != other.alphabet {
            return Err(Error::DimensionMismatch("distributions live on different levels".into()));
        }
        let diffs: Vec<f64> = self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).collect();
        Ok(0.5 * pairwise_sum(&diffs))
    }

    /// `word,weight` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,weight\n");
        for (word, weight) in self.iter() {
            writeln!(out, "{word},{weight:e}").expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = DistributionDoc {
            schema_version: 1,
            source: &self.source,
            alphabet: self.alphabet,
            level: self.level,
            weights: self.iter().map(|(w, weight)| WeightRow { word: w.to_string(), weight }).collect(),
        };
        serde_json::to_value(doc).expect("plain data serializes")
    }
}

/// `μ_n([w]) = Φ(w) / Σ_{|v|=n} Φ(v)`.
pub fn gibbs_level_weights(potential: &Potential, level: usize, budget: Budget) -> Result<LevelDistribution> {
    let tree = ProductTree::new(potential.tuples(), level, budget)?;
    let values = tree.leaves(|p| potential.eval_products(p))?;
    let total = pairwise_sum(&values);
    if !(total.is_finite() && total > 0.0) || values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::NonFinite);
    }
    Ok(LevelDistribution {
        level,
        alphabet: potential.alphabet(),
        weights: values.iter().map(|v| v / total).collect(),
        source: potential.label(),
    })
}

/// Spread of one-step conditional weights `μ_{n+1}([wj]) / μ_n([w])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsSpread {
    pub level: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl GibbsSpread {
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

pub fn gibbs_spread(potential: &Potential, level: usize, budget: Budget) -> Result<GibbsSpread> {
    let coarse = gibbs_level_weights(potential, level, budget)?;
    let fine = gibbs_level_weights(potential, level + 1, budget)?;
    let n = coarse.alphabet;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (r, w) in fine.weights.iter().enumerate() {
        let ratio = w / coarse.weights[r / n];
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(GibbsSpread { level, min_ratio: lo, max_ratio: hi })
}

/// A Bernoulli measure on the full shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernoulliMeasure {
    p: Vec<f64>,
}

impl BernoulliMeasure {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 || p.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput("Bernoulli weights must be positive".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("Bernoulli weights sum to {total}, not 1")));
        }
        Ok(BernoulliMeasure { p })
    }

    pub fn uniform(alphabet: usize) -> Result<Self> {
        Self::new(vec![1.0 / alphabet as f64; alphabet])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `h(μ) = −Σ p_i log p_i`.
    pub fn entropy(&self) -> f64 {
        -self.p.iter().map(|p| p * p.ln()).sum::<f64>()
    }

    pub fn cylinder(&self, word: &Word) -> f64 {
        word.indices().iter().map(|&s| self.p[s as usize]).product()
    }
}

/// Bisection for the zero of `s ↦ h(μ) + (1/n) Σ_{|w|=n} μ([w]) log φ^s(A_w)`.
///
/// The level-`n` Lyapunov term decreases to its limit along doubling, so the
/// bracket over-estimates the Lyapunov dimension.
pub fn lyapunov_dimension(
    tuple: &MatrixTuple,
    measure: &BernoulliMeasure,
    level: usize,
    tol: f64,
    budget: Budget,
) -> Result<DimensionResult> {
    if measure.probabilities().len() != tuple.alphabet() {
        return Err(Error::DimensionMismatch("measure and tuple use different alphabets".into()));
    }
    check_contracting(tuple)?;
    let table = SpectrumTable::build(tuple, level, budget)?;
    let weights: Vec<f64> = enumerate_words(tuple.alphabet(), level, budget)?.map(|w| measure.cylinder(&w)).collect();
    let entropy = measure.entropy();
    let objective = |s: f64| {
        let terms: Vec<f64> = table.rows().zip(&weights).map(|(r, p)| p * SpectrumTable::log_phi(r, s)).collect();
        entropy + pairwise_sum(&terms) / level as f64
    };
    let mut result = bisect(objective, 0.0, 2.0 * tuple.dim() as f64, tol, level)?;
    result.semantics = "h + Lambda_n(phi^lo) >= 0 >= h + Lambda_n(phi^hi); Lambda_n decreases with n, so the bracket over-estimates the Lyapunov dimension".into();
    Ok(result)
}

/// Normalized log-ratios of the two factor potentials along powers of a word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioDiagnostic {
    pub base_word: String,
    pub s: f64,
    /// `(n, r_n)` with `r_n = (1/n) log(Φ⁽¹⁾(w₀ⁿ) / Φ⁽²⁾(w₀ⁿ))`.
    pub rows: Vec<(usize, f64)>,
    /// `(s − 1) log[(λ₁/λ₂)(B_{w₀}) / (λ₁/λ₂)(B_{ι(w₀)})]`.
    pub asymptote: f64,
}

impl RatioDiagnostic {
    pub fn last(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.1)
    }

    /// `log(Φ⁽¹⁾/Φ⁽²⁾)` at `w₀^{n_max}`; if the two equilibrium states agreed
    /// this would stay bounded.
    pub fn unnormalized_last(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |&(n, r)| n as f64 * r)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log_ratio_per_n\n");
        for (n, r) in &self.rows {
            writeln!(out, "{n},{r:e}").expect("writing to a String");
        }
        out
    }
}

/// `log(λ₁/λ₂)` of a matrix.
fn log_gap(m: &crate::linalg::Matrix) -> Result<f64> {
    let e = eigen_moduli(m)?;
    Ok((e.values[0] / e.values[1]).ln())
}

fn differs(a: f64, b: f64) -> bool {
    (a - b).abs() > WITNESS_TOL * a.abs().max(b.abs()).max(1.0)
}

pub fn distinctness_diagnostic(
    base: &MatrixTuple,
    iota: &SymbolPermutation,
    s: f64,
    word: &Word,
    n_max: usize,
) -> Result<RatioDiagnostic> {
    if base.dim() < 2 {
        return Err(Error::InvalidInput("distinctness needs matrices of dimension at least 2".into()));
    }
    let f1 = Potential::factor(base.clone(), iota.clone(), s, Factor::First)?;
    let f2 = f1.other_factor();
    let b = word_matrix(base, word)?;
    let bi = word_matrix(base, &apply_permutation(iota, word)?)?;
    let (gap, gap_i) = (log_gap(&b)?, log_gap(&bi)?);
    if !differs(gap, gap_i) {
        return Err(Error::NotAWitness);
    }
    let mut rows = Vec::with_capacity(n_max);
    let (mut pb, mut pbi) = (b.clone(), bi.clone());
    for n in 1..=n_max {
        if n > 1 {
            pb = &pb * &b;
            pbi = &pbi * &bi;
        }
        let prods = [pb.clone(), pbi.clone()];
        let r = (f1.log_eval_products(&prods) - f2.log_eval_products(&prods)) / n as f64;
        if !r.is_finite() {
            return Err(Error::NonFinite);
        }
        rows.push((n, r));
    }
    Ok(RatioDiagnostic { base_word: word.to_string(), s, rows, asymptote: (s - 1.0) * (gap - gap_i) })
}

/// First word (by length, then lexicographically) whose top eigenvalue gap
/// differs between `B_w` and `B_{ι(w)}`.
pub fn benoist_witness(base: &MatrixTuple, iota: &SymbolPermutation, depth: usize) -> Result<Option<Word>> {
    base.check_permutation(iota)?;
    if base.dim() < 2 {
        return Err(Error::InvalidInput("eigenvalue gaps need dimension at least 2".into()));
    }
    for n in 1..=depth {
        for word in enumerate_words(base.alphabet(), n, Budget::default())? {
            let a = log_gap(&word_matrix(base, &word)?)?;
            let b = log_gap(&word_matrix(base, &apply_permutation(iota, &word)?)?)?;
            if differs(a, b) {
                return Ok(Some(word));
            }
        }
    }
    Ok(None)
}
