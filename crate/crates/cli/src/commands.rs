//! One handler per subcommand. Each returns the JSON result and a CSV table;
//! the caller picks one and wraps it with provenance.

use serde_json::{json, Value};

use selfaffine::equilibrium::{benoist_witness, distinctness_diagnostic, gibbs_level_weights, gibbs_spread};
use selfaffine::fixtures;
use selfaffine::ifs::{attractor_sample, four_map_pipeline, separation_certificate, AffineIFS};
use selfaffine::irreducibility::{
    conjugacy_obstruction, invariant_subspace_search, kronecker_intersection_check, quasi_multiplicativity_profile, SearchMode,
};
use selfaffine::potentials::Factor;
use selfaffine::pressure::{affinity_dimension, level_pressure, subadditivity_defect};
use selfaffine::{Budget, Potential, Word};

use crate::config::{self, System};
use crate::report::{table, Meta};
use crate::CliError;

pub struct Artifact {
    pub meta: Meta,
    pub json: Value,
    pub csv: String,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn meta(command: &'static str, sys: &System, seed: u64, level: Option<usize>, tolerance: Option<f64>) -> Meta {
    Meta { command, system: sys.name.clone(), config_hash: sys.hash.clone(), seed, level, tolerance }
}

fn base(sys: &System, command: &str) -> Result<(selfaffine::MatrixTuple, selfaffine::SymbolPermutation), CliError> {
    sys.base
        .clone()
        .ok_or_else(|| CliError::Usage(format!("`{command}` needs a Kronecker system (`kronecker = true` with `iota`)")))
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PotentialChoice {
    /// φ^s of the iterated maps.
    Phi,
    /// First factor potential of a Kronecker system.
    Factor1,
    /// Second factor potential of a Kronecker system.
    Factor2,
}

fn potential(sys: &System, choice: PotentialChoice, s: f64, command: &str) -> Result<Potential, CliError> {
    Ok(match choice {
        PotentialChoice::Phi => Potential::phi_s(sys.tuple.clone(), s)?,
        PotentialChoice::Factor1 | PotentialChoice::Factor2 => {
            let (b, iota) = base(sys, command)?;
            let which = if matches!(choice, PotentialChoice::Factor1) { Factor::First } else { Factor::Second };
            Potential::factor(b, iota, s, which)?
        }
    })
}

pub fn pressure(
    sys: &System,
    seed: u64,
    choice: PotentialChoice,
    s: f64,
    n: usize,
    budget: Budget,
) -> Result<Artifact, CliError> {
    let p = potential(sys, choice, s, "pressure")?;
    let est = level_pressure(&p, n, budget)?;
    let json = json!({
        "potential": p.label(),
        "s": s,
        "estimate": to_value(&est),
        "subadditivity_defect": subadditivity_defect(&est.levels),
    });
    let csv = table("n,pressure", est.levels.iter().enumerate().map(|(k, v)| ((k + 1).to_string(), vec![*v])));
    Ok(Artifact { meta: meta("pressure", sys, seed, Some(n), None), json, csv })
}

pub fn dimaff(sys: &System, seed: u64, n: usize, tol: f64, budget: Budget) -> Result<Artifact, CliError> {
    let dim = affinity_dimension(&sys.tuple, n, tol, budget)?;
    let mut samples = dim.samples.clone();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let csv = table("s,objective", samples.iter().map(|(s, f)| (format!("{s:e}"), vec![*f])));
    Ok(Artifact { meta: meta("dimaff", sys, seed, Some(n), Some(tol)), json: to_value(&dim), csv })
}

pub fn gibbs(sys: &System, seed: u64, s: f64, n: usize, budget: Budget) -> Result<Artifact, CliError> {
    let potentials = match &sys.base {
        Some((b, iota)) => {
            let first = Potential::factor(b.clone(), iota.clone(), s, Factor::First)?;
            let second = first.other_factor();
            vec![first, second]
        }
        None => vec![Potential::phi_s(sys.tuple.clone(), s)?],
    };
    let dists = potentials.iter().map(|p| gibbs_level_weights(p, n, budget)).collect::<Result<Vec<_>, _>>()?;
    let spreads = potentials.iter().map(|p| gibbs_spread(p, n, budget)).collect::<Result<Vec<_>, _>>()?;
    let tv = match dists.as_slice() {
        [a, b] => Some(a.total_variation(b)?),
        _ => None,
    };
    let json = json!({
        "s": s,
        "distributions": dists.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
        "spreads": spreads.iter().map(|g| json!({
            "level": g.level, "min_ratio": g.min_ratio, "max_ratio": g.max_ratio, "spread": g.spread(),
        })).collect::<Vec<_>>(),
        "total_variation": tv,
    });
    let header = if dists.len() == 2 { "word,weight_first,weight_second" } else { "word,weight" };
    let rows = (0..dists[0].weights.len())
        .map(|r| (Word::from_rank(dists[0].alphabet, n, r as u64).to_string(), dists.iter().map(|d| d.weights[r]).collect()));
    Ok(Artifact { meta: meta("gibbs", sys, seed, Some(n), None), json, csv: table(header, rows) })
}

/// Depth of the witness search used when no base word is given.
const WITNESS_DEPTH: usize = 6;

pub fn distinct(sys: &System, seed: u64, s: f64, word: Option<&str>, n_max: usize) -> Result<Artifact, CliError> {
    let (b, iota) = base(sys, "distinct")?;
    let w = match word {
        Some(text) => Word::parse(text)?,
        None => benoist_witness(&b, &iota, WITNESS_DEPTH)?
            .ok_or_else(|| CliError::Usage(format!("no spectral witness up to length {WITNESS_DEPTH}; pass --word")))?,
    };
    let diag = distinctness_diagnostic(&b, &iota, s, &w, n_max)?;
    let json = json!({ "diagnostic": to_value(&diag), "unnormalized_last": diag.unnormalized_last() });
    Ok(Artifact { meta: meta("distinct", sys, seed, Some(n_max), None), json, csv: diag.to_csv() })
}

pub fn qm(sys: &System, seed: u64, s: f64, n0: usize, n_max: usize, budget: Budget) -> Result<Artifact, CliError> {
    let profile = quasi_multiplicativity_profile(&sys.tuple, s, n0, n_max, budget)?;
    let slope = (profile.rows.len() >= 2).then(|| profile.fitted_slope(1));
    let json = json!({ "profile": to_value(&profile), "fitted_log_slope": slope });
    Ok(Artifact { meta: meta("qm", sys, seed, Some(n_max), None), json, csv: profile.to_csv() })
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ModeChoice {
    Single,
    FiniteUnion,
    Both,
}

pub fn irred(
    sys: &System,
    seed: u64,
    depth: usize,
    tol: f64,
    mode: ModeChoice,
    wedge: Option<usize>,
) -> Result<Artifact, CliError> {
    let tuple = match wedge {
        Some(k) => sys.tuple.exterior_power(k)?,
        None => sys.tuple.clone(),
    };
    let modes: &[SearchMode] = match mode {
        ModeChoice::Single => &[SearchMode::Single],
        ModeChoice::FiniteUnion => &[SearchMode::FiniteUnion],
        ModeChoice::Both => &[SearchMode::Single, SearchMode::FiniteUnion],
    };
    let mut searches = Vec::new();
    let mut rows = Vec::new();
    for &m in modes {
        let found = invariant_subspace_search(&tuple, m, depth, tol)?;
        let label = to_value(&m);
        if let Some(w) = &found {
            rows.push((label.as_str().unwrap_or_default().to_string(), vec![w.subspaces.len() as f64, w.residual]));
        }
        searches.push(json!({ "mode": label, "witness": found.as_ref().map(|w| w.to_json()) }));
    }
    let mut doc = json!({ "wedge": wedge, "depth": depth, "searches": searches });
    if let Some((b, iota)) = &sys.base {
        doc["benoist_witness"] = to_value(&benoist_witness(b, iota, depth)?);
        doc["conjugacy"] = to_value(&conjugacy_obstruction(b, iota, depth)?);
        if b.dim() == 2 {
            let checks: Vec<Value> = (0..b.alphabet())
                .map(|i| {
                    let j = iota.image(i);
                    let found = kronecker_intersection_check(b.get(i), b.get(j)).ok();
                    json!({ "symbol": i + 1, "partner": j + 1, "ranks_and_intersection": found })
                })
                .collect();
            doc["kronecker_intersection"] = Value::Array(checks);
        }
    }
    let csv = table("mode,members,residual", rows);
    Ok(Artifact { meta: meta("irred", sys, seed, Some(depth), Some(tol)), json: doc, csv })
}

fn ifs(sys: &System, command: &str) -> Result<AffineIFS, CliError> {
    let t = sys
        .translations
        .clone()
        .ok_or_else(|| CliError::Usage(format!("`{command}` needs `translations` in the system config")))?;
    Ok(AffineIFS::new(sys.tuple.clone(), t)?)
}

pub fn separation(sys: &System, seed: u64, radius: Option<f64>, center: Option<Vec<f64>>) -> Result<Artifact, CliError> {
    let ifs = ifs(sys, "separation")?;
    let radius = match (radius, sys.fixture.as_deref()) {
        (Some(r), _) => r,
        (None, Some("thm2")) => fixtures::separation_radius(),
        (None, _) => return Err(CliError::Usage("`separation` needs --radius for this system".into())),
    };
    let center = center.unwrap_or_else(|| vec![0.0; sys.tuple.dim()]);
    let cert = separation_certificate(&ifs, &center, radius)?;
    let json = json!({ "passed": cert.passed(), "certificate": to_value(&cert) });
    let d = sys.tuple.dim();
    let header = (1..=d).map(|k| format!("c{k}")).fold(String::from("map"), |h, c| h + "," + &c) + ",radius";
    let rows = cert.images.iter().enumerate().map(|(i, b)| {
        let mut v = b.center.clone();
        v.push(b.radius);
        ((i + 1).to_string(), v)
    });
    Ok(Artifact { meta: meta("separation", sys, seed, None, None), json, csv: table(&header, rows) })
}

pub fn attractor(sys: &System, seed: u64, depth: usize, count: usize) -> Result<Artifact, CliError> {
    let sample = attractor_sample(&ifs(sys, "attractor")?, depth, count, seed)?;
    let header = (1..=sys.tuple.dim()).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",");
    let csv = format!("{header}\n{}", sample.to_csv());
    Ok(Artifact { meta: meta("attractor", sys, seed, Some(depth), None), json: to_value(&sample), csv })
}

pub fn thm2(seed: u64, alpha1: f64, alpha2: f64, theta: f64, n: usize, tol: f64, budget: Budget) -> Result<Artifact, CliError> {
    let text = format!("fixture = \"thm2\"\nalpha1 = {alpha1:?}\nalpha2 = {alpha2:?}\ntheta = {theta:?}\n");
    let sys = config::parse(&text, None)?;
    let report = four_map_pipeline(alpha1, alpha2, theta, n, tol, budget)?;
    let json = json!({ "all_pass": report.all_pass(), "report": to_value(&report) });
    let csv = table("n,total_variation", report.total_variation.rows.iter().map(|(k, v)| (k.to_string(), vec![*v])));
    Ok(Artifact { meta: meta("thm2", &sys, seed, Some(n), Some(tol)), json, csv })
}
