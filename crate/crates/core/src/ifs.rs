//! Affine iterated function systems `T_i x = A_i x + v_i`: separation
//! certificates, attractor sampling and the end-to-end check of the
//! four-map example in ℝ⁴.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::{
    benoist_witness, distinctness_diagnostic, gibbs_level_weights, lyapunov_dimension, BernoulliMeasure, RatioDiagnostic,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fixtures;
use crate::potentials::{Factor, Potential};
use crate::pressure::{affinity_dimension, check_contracting, level_pressure, DimensionResult};
use crate::words::{Budget, MatrixTuple, Word};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineIFS {
    linear: MatrixTuple,
    translations: Vec<DVector<f64>>,
}

impl AffineIFS {
    pub fn new(linear: MatrixTuple, translations: Vec<Vec<f64>>) -> Result<Self> {
        if translations.len() != linear.alphabet() {
            return Err(Error::DimensionMismatch(format!("{} maps but {} translations", linear.alphabet(), translations.len())));
        }
        if let Some(v) = translations.iter().find(|v| v.len() != linear.dim()) {
            return Err(Error::DimensionMismatch(format!("translation of length {} in dimension {}", v.len(), linear.dim())));
        }
        if translations.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        check_contracting(&linear)?;
        let translations = translations.into_iter().map(DVector::from_vec).collect();
        Ok(AffineIFS { linear, translations })
    }

    pub fn linear(&self) -> &MatrixTuple {
        &self.linear
    }

    pub fn translation(&self, i: usize) -> &DVector<f64> {
        &self.translations[i]
    }

    pub fn apply(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        self.linear.get(i).as_dmatrix() * x + &self.translations[i]
    }

    /// `max_i ‖A_i‖`.
    pub fn contraction(&self) -> f64 {
        self.linear.max_norm()
    }

    /// Radius of an origin-centred ball containing the attractor.
    pub fn attractor_radius(&self) -> f64 {
        let v = self.translations.iter().map(|v| v.norm()).fold(0.0, f64::max);
        v / (1.0 - self.contraction())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    /// `T_i(B)` is not inside `B` by `excess`.
    Containment { map: usize, excess: f64 },
    /// Image balls `i` and `j` overlap or touch, `gap ≤ 0`.
    Disjointness { first: usize, second: usize, gap: f64 },
}

/// Ball-based sufficient test for the strong separation condition.
///
/// A pass proves strong separation. A failure proves nothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationCertificate {
    pub center: Vec<f64>,
    pub radius: f64,
    pub images: Vec<ImageBall>,
    pub violations: Vec<Violation>,
}

impl SeparationCertificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates_containment(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, Violation::Containment { .. }))
    }

    pub fn violates_disjointness(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, Violation::Disjointness { .. }))
    }
}

/// Checks `T_i(B) ⊂ B` and pairwise disjointness of the balls
/// `B(T_i c, ‖A_i‖ r) ⊇ T_i(B)` for the closed ball `B = B(c, r)`.
pub fn separation_certificate(ifs: &AffineIFS, center: &[f64], radius: f64) -> Result<SeparationCertificate> {
    if center.len() != ifs.linear.dim() {
        return Err(Error::DimensionMismatch("centre has the wrong dimension".into()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let c = DVector::from_column_slice(center);
    let balls: Vec<(DVector<f64>, f64)> =
        (0..ifs.linear.alphabet()).map(|i| (ifs.apply(i, &c), ifs.linear.get(i).norm() * radius)).collect();
    let mut violations = Vec::new();
    for (i, (ci, ri)) in balls.iter().enumerate() {
        let excess = (ci - &c).norm() + ri - radius;
        if excess > 0.0 {
            violations.push(Violation::Containment { map: i + 1, excess });
        }
    }
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let gap = (&balls[i].0 - &balls[j].0).norm() - balls[i].1 - balls[j].1;
            if gap <= 0.0 {
                violations.push(Violation::Disjointness { first: i + 1, second: j + 1, gap });
            }
        }
    }
    Ok(SeparationCertificate {
        center: center.to_vec(),
        radius,
        images: balls.into_iter().map(|(c, r)| ImageBall { center: c.iter().copied().collect(), radius: r }).collect(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorSample {
    pub seed: u64,
    pub depth: usize,
    pub points: Vec<Vec<f64>>,
    /// Distance from any sampled point to the attractor point with the same
    /// coding prefix is at most this.
    pub truncation_bound: f64,
}

impl AttractorSample {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
            writeln!(out, "{}", row.join(",")).expect("writing to a String");
        }
        out
    }
}

/// Symbols of the coding word for point `index`; longer depths extend
/// shorter ones.
pub fn sample_word(alphabet: usize, depth: usize, seed: u64, index: u64) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let symbols: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=alphabet)).collect();
    Word::from_symbols(&symbols).expect("depth is positive")
}

/// `count` points `T_{x_1} ∘ ⋯ ∘ T_{x_depth}(0)` for independent uniform words.
pub fn attractor_sample(ifs: &AffineIFS, depth: usize, count: usize, seed: u64) -> Result<AttractorSample> {
    attractor_sample_with(ifs, depth, count, seed, Exec::default())
}

pub fn attractor_sample_with(ifs: &AffineIFS, depth: usize, count: usize, seed: u64, exec: Exec) -> Result<AttractorSample> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let d = ifs.linear.dim();
    let points = exec.map(count, |k| {
        let word = sample_word(ifs.linear.alphabet(), depth, seed, k as u64);
        let mut x = DVector::zeros(d);
        for &s in word.indices().iter().rev() {
            x = ifs.apply(s as usize, &x);
        }
        x.iter().copied().collect()
    });
    Ok(AttractorSample { seed, depth, points, truncation_bound: ifs.contraction().powi(depth as i32) * ifs.attractor_radius() })
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `P_n`.
    pub value: f64,
    pub bound: f64,
    /// `P_1, …, P_n`.
    pub levels: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctnessCheck {
    pub witness: Option<Word>,
    pub diagnostic: Option<RatioDiagnostic>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalVariationTable {
    pub s: f64,
    pub rows: Vec<(usize, f64)>,
    pub non_decreasing: bool,
    pub pass: bool,
}

/// Every check of the four-map example at one parameter choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub alpha1: f64,
    pub alpha2: f64,
    pub theta: f64,
    pub level: usize,
    pub tol: f64,
    /// `P_n(φ¹) ≥ ½ log(16 α₁ α₂) > 0`.
    pub pressure_phi1: BoundCheck,
    /// `P_m(φ²) ≤ 2 log(2 α₁) < 0` for every `m ≤ n`, with equality at `m = 1`.
    pub pressure_phi2: BoundCheck,
    pub dimension: DimensionResult,
    pub dimension_in_unit_interval: bool,
    pub separation: SeparationCertificate,
    pub distinctness: DistinctnessCheck,
    pub total_variation: TotalVariationTable,
    pub lyapunov_uniform: DimensionResult,
    pub notes: Vec<String>,
}

impl PipelineReport {
    pub fn all_pass(&self) -> bool {
        self.pressure_phi1.pass
            && self.pressure_phi2.pass
            && self.dimension_in_unit_interval
            && self.separation.passed()
            && self.distinctness.pass
            && self.total_variation.pass
    }
}

/// Validates `0 < α₂ < α₁ < 1/(1 + √(3/2))`, `α₁ α₂ > 1/16` and `θ ∉ (π/2)ℤ`.
pub fn check_four_map_hypotheses(alpha1: f64, alpha2: f64, theta: f64) -> Result<()> {
    let limit = 1.0 / fixtures::separation_radius();
    let fail = |msg: String| Err(Error::HypothesisViolation(msg));
    if !(alpha1.is_finite() && alpha2.is_finite() && theta.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(alpha2 > 0.0) {
        return fail(format!("need α₂ > 0, got α₂ = {alpha2}"));
    }
    if !(alpha2 < alpha1) {
        return fail(format!("need α₂ < α₁, got α₂ = {alpha2}, α₁ = {alpha1}"));
    }
    if !(alpha1 < limit) {
        return fail(format!("need α₁ < 1/(1+√(3/2)) = {limit}, got α₁ = {alpha1}"));
    }
    if !(alpha1 * alpha2 > 1.0 / 16.0) {
        return fail(format!("need α₁α₂ > 1/16, got α₁α₂ = {}", alpha1 * alpha2));
    }
    let q = theta / FRAC_PI_2;
    if (q - q.round()).abs() <= 1e-12 * q.abs().max(1.0) {
        return fail(format!("need θ ∉ (π/2)ℤ, got θ = {theta}"));
    }
    Ok(())
}

/// Runs the pressure bounds, dimension bracket, separation certificate,
/// distinctness diagnostic and total-variation growth for the four-map
/// system at level `n`.
pub fn four_map_pipeline(alpha1: f64, alpha2: f64, theta: f64, level: usize, tol: f64, budget: Budget) -> Result<PipelineReport> {
    check_four_map_hypotheses(alpha1, alpha2, theta)?;
    if level == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    let tuple = fixtures::four_map(alpha1, alpha2, theta)?;
    let (base, iota) = fixtures::four_map_base(alpha1, alpha2, theta)?;

    let p1 = level_pressure(&Potential::phi_s(tuple.clone(), 1.0)?, level, budget)?;
    let bound1 = 0.5 * (16.0 * alpha1 * alpha2).ln();
    let pressure_phi1 =
        BoundCheck { value: p1.value, bound: bound1, pass: bound1 > 0.0 && p1.value >= bound1, levels: p1.levels };

    let p2 = level_pressure(&Potential::phi_s(tuple.clone(), 2.0)?, level, budget)?;
    let bound2 = 2.0 * (2.0 * alpha1).ln();
    let pass2 = bound2 < 0.0 && p2.levels.iter().all(|&v| v <= bound2 + 1e-9);
    let pressure_phi2 = BoundCheck { value: p2.value, bound: bound2, pass: pass2, levels: p2.levels };

    let dimension = affinity_dimension(&tuple, level, tol, budget)?;
    let dimension_in_unit_interval = dimension.lo > 1.0 && dimension.hi < 2.0;
    let s = dimension.mid().clamp(1.0 + 1e-9, 2.0);

    let ifs = AffineIFS::new(tuple.clone(), fixtures::four_map_translations())?;
    let separation = separation_certificate(&ifs, &[0.0; 4], fixtures::separation_radius())?;

    let witness = benoist_witness(&base, &iota, 3)?;
    let diagnostic = match &witness {
        Some(w) => Some(distinctness_diagnostic(&base, &iota, s, w, 24)?),
        None => None,
    };
    let distinctness = DistinctnessCheck {
        pass: diagnostic.as_ref().is_some_and(|d| (d.last() - d.asymptote).abs() <= 0.1 * d.asymptote.abs()),
        witness,
        diagnostic,
    };

    let first = Potential::factor(base, iota, s, Factor::First)?;
    let second = first.other_factor();
    let mut rows = Vec::new();
    for n in (2..=level).step_by(2) {
        let tv = gibbs_level_weights(&first, n, budget)?.total_variation(&gibbs_level_weights(&second, n, budget)?)?;
        rows.push((n, tv));
    }
    let non_decreasing = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    let total_variation =
        TotalVariationTable { s, pass: non_decreasing && rows.last().is_some_and(|r| r.1 > 0.0), rows, non_decreasing };

    let lyapunov_uniform = lyapunov_dimension(&tuple, &BernoulliMeasure::uniform(4)?, level, tol, budget)?;

    let notes = vec![
        "dimension brackets are level-n pressure estimates, not certified enclosures".into(),
        "total-variation growth is finite-level evidence; the ratio diagnostic is the certifying route".into(),
        "equality of Hausdorff and Lyapunov dimension for almost every translation tuple is not checked here".into(),
    ];

    Ok(PipelineReport {
        schema_version: REPORT_SCHEMA_VERSION,
        alpha1,
        alpha2,
        theta,
        level,
        tol,
        pressure_phi1,
        pressure_phi2,
        dimension,
        dimension_in_unit_interval,
        separation,
        distinctness,
        total_variation,
        lyapunov_uniform,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn four_map_ifs() -> AffineIFS {
        AffineIFS::new(fixtures::four_map(0.44, 0.2, 1.0).unwrap(), fixtures::four_map_translations()).unwrap()
    }

    #[test]
    fn translations_are_two_apart() {
        let v = fixtures::four_map_translations();
        for i in 0..4 {
            for j in i + 1..4 {
                let d: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                assert!((d - 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn certificate_passes_at_the_constructed_radius() {
        let cert = separation_certificate(&four_map_ifs(), &[0.0; 4], fixtures::separation_radius()).unwrap();
        assert!(cert.passed(), "{:?}", cert.violations);
    }

    #[test]
    fn large_radius_breaks_disjointness() {
        let cert = separation_certificate(&four_map_ifs(), &[0.0; 4], 10.0).unwrap();
        assert!(!cert.passed());
        assert!(cert.violates_disjointness());
        assert!(!cert.violates_containment());
    }

    #[test]
    fn single_map_containment() {
        let t = MatrixTuple::new(vec![Matrix::identity(2).scale(0.5)]).unwrap();
        let ifs = AffineIFS::new(t, vec![vec![0.5, 0.0]]).unwrap();
        assert!(separation_certificate(&ifs, &[0.0, 0.0], 1.0).unwrap().passed());
        let cert = separation_certificate(&ifs, &[0.0, 0.0], 0.9).unwrap();
        assert!(cert.violates_containment());
    }

    #[test]
    fn rejects_expanding_maps() {
        let t = MatrixTuple::new(vec![Matrix::identity(2).scale(1.5), Matrix::identity(2).scale(0.5)]).unwrap();
        assert!(matches!(AffineIFS::new(t, vec![vec![0.0; 2]; 2]), Err(Error::NotContracting { index: 1, .. })));
    }

    #[test]
    fn sampled_words_extend() {
        let short = sample_word(4, 30, 7, 3);
        let long = sample_word(4, 40, 7, 3);
        assert_eq!(short.indices(), &long.indices()[..30]);
        assert_ne!(sample_word(4, 30, 7, 4), short);
    }

    #[test]
    fn hypothesis_violations() {
        assert!(
            matches!(four_map_pipeline(0.3, 0.1, 1.0, 2, 1e-2, Budget::default()), Err(Error::HypothesisViolation(m)) if m.contains("1/16"))
        );
        assert!(matches!(check_four_map_hypotheses(0.44, 0.2, FRAC_PI_2), Err(Error::HypothesisViolation(m)) if m.contains('θ')));
        assert!(matches!(check_four_map_hypotheses(0.2, 0.44, 1.0), Err(Error::HypothesisViolation(_))));
        assert!(matches!(check_four_map_hypotheses(0.45, 0.2, 1.0), Err(Error::HypothesisViolation(_))));
        assert!(check_four_map_hypotheses(0.44, 0.2, 1.0).is_ok());
    }
}
