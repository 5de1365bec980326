//! System descriptions read from TOML files or named fixtures.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use selfaffine::fixtures::{self, ALPHA1, ALPHA2, THETA};
use selfaffine::{Matrix, MatrixTuple, SymbolPermutation};

pub const FIXTURES: [&str; 3] = ["thm1", "thm2", "eq1-3x3"];

/// A config file as written. Matrix, translation and ι fields keep their
/// source spans so validation errors can point at a line.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: Option<String>,
    pub fixture: Option<Spanned<String>>,
    pub dimension: Option<usize>,
    pub alphabet: Option<usize>,
    pub matrices: Option<Vec<Spanned<Vec<f64>>>>,
    /// When set, `matrices` are the base `B_i` and the system is `B_i ⊗ B_ι(i)`.
    #[serde(default)]
    pub kronecker: bool,
    pub iota: Option<Spanned<Vec<usize>>>,
    pub translations: Option<Vec<Spanned<Vec<f64>>>>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// Radians.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(p) = &self.path {
            write!(f, " in {}", p.display())?;
        }
        if let Some(l) = self.line {
            write!(f, " at line {l}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ", field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Canonical content hashed into every report. Fixtures and equivalent
/// files hash identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Canonical {
    pub name: String,
    pub dimension: usize,
    pub alphabet: usize,
    pub matrices: Vec<Vec<f64>>,
    pub kronecker: bool,
    pub iota: Option<Vec<usize>>,
    pub translations: Option<Vec<Vec<f64>>>,
}

/// A validated system ready for computation.
#[derive(Debug, Clone)]
pub struct System {
    pub name: String,
    pub fixture: Option<String>,
    /// The maps actually iterated.
    pub tuple: MatrixTuple,
    /// `(B, ι)` when the tuple is `B_i ⊗ B_ι(i)`.
    pub base: Option<(MatrixTuple, SymbolPermutation)>,
    pub translations: Option<Vec<Vec<f64>>>,
    pub hash: String,
}

struct Locator<'a> {
    path: Option<&'a Path>,
    text: &'a str,
}

impl Locator<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn error(&self, span: Option<std::ops::Range<usize>>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.path.map(Path::to_path_buf),
            line: span.map(|s| self.line(s.start)),
            field: Some(field.into()),
            message: message.into(),
        }
    }
}

pub fn load_file(path: &Path) -> Result<System, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: Some(path.to_path_buf()),
        line: None,
        field: None,
        message: e.to_string(),
    })?;
    parse(&text, Some(path))
}

pub fn parse(text: &str, path: Option<&Path>) -> Result<System, ConfigError> {
    let loc = Locator { path, text };
    let raw: SystemConfig = toml::from_str(text).map_err(|e| ConfigError {
        path: path.map(Path::to_path_buf),
        line: e.span().map(|s| loc.line(s.start)),
        field: None,
        message: e.message().trim().to_string(),
    })?;
    resolve(raw, &loc)
}

pub fn fixture(name: &str) -> Result<System, ConfigError> {
    let text = format!("fixture = {:?}\n", name);
    parse(&text, None)
}

fn resolve(raw: SystemConfig, loc: &Locator) -> Result<System, ConfigError> {
    if let Some(name) = &raw.fixture {
        return resolve_fixture(&raw, name, loc);
    }
    for (set, field) in [(raw.alpha1.is_some(), "alpha1"), (raw.alpha2.is_some(), "alpha2"), (raw.theta.is_some(), "theta")] {
        if set {
            return Err(loc.error(None, field, "parameters apply only to named fixtures"));
        }
    }
    let d = raw.dimension.ok_or_else(|| loc.error(None, "dimension", "missing (or give `fixture`)"))?;
    let n = raw.alphabet.ok_or_else(|| loc.error(None, "alphabet", "missing (or give `fixture`)"))?;
    let entries = raw.matrices.as_ref().ok_or_else(|| loc.error(None, "matrices", "missing (or give `fixture`)"))?;
    if d == 0 || n == 0 {
        return Err(loc.error(None, if d == 0 { "dimension" } else { "alphabet" }, "must be positive"));
    }
    if entries.len() != n {
        return Err(loc.error(None, "matrices", format!("alphabet is {n} but {} matrices are given", entries.len())));
    }
    let mut matrices = Vec::with_capacity(n);
    for (i, m) in entries.iter().enumerate() {
        let field = format!("matrices[{i}]");
        if m.get_ref().len() != d * d {
            let msg = format!("expected {} entries for a {d}×{d} matrix, found {}", d * d, m.get_ref().len());
            return Err(loc.error(Some(m.span()), field, msg));
        }
        matrices.push(Matrix::from_row_slice(d, m.get_ref()).map_err(|e| loc.error(Some(m.span()), field, e.to_string()))?);
    }
    let tuple = MatrixTuple::new(matrices).map_err(|e| loc.error(None, "matrices", e.to_string()))?;

    let iota = match &raw.iota {
        Some(p) => Some(
            SymbolPermutation::from_one_based(p.get_ref())
                .and_then(|perm| {
                    if perm.len() == n {
                        Ok(perm)
                    } else {
                        Err(selfaffine::Error::InvalidInput(format!("ι has {} images but the alphabet is {n}", perm.len())))
                    }
                })
                .map_err(|e| loc.error(Some(p.span()), "iota", e.to_string()))?,
        ),
        None => None,
    };
    let (tuple, base) = match (raw.kronecker, iota) {
        (true, Some(iota)) => {
            let kron = tuple.kronecker_with(&iota).map_err(|e| loc.error(None, "kronecker", e.to_string()))?;
            (kron, Some((tuple, iota)))
        }
        (true, None) => return Err(loc.error(None, "iota", "required when `kronecker = true`")),
        (false, Some(_)) => {
            return Err(loc.error(raw.iota.as_ref().map(Spanned::span), "iota", "only meaningful with `kronecker = true`"))
        }
        (false, None) => (tuple, None),
    };

    let dim = tuple.dim();
    let translations = match &raw.translations {
        Some(list) => {
            if list.len() != n {
                return Err(loc.error(
                    None,
                    "translations",
                    format!("alphabet is {n} but {} translations are given", list.len()),
                ));
            }
            for (i, v) in list.iter().enumerate() {
                if v.get_ref().len() != dim {
                    let msg = format!("expected {dim} coordinates, found {}", v.get_ref().len());
                    return Err(loc.error(Some(v.span()), format!("translations[{i}]"), msg));
                }
                if v.get_ref().iter().any(|x| !x.is_finite()) {
                    return Err(loc.error(Some(v.span()), format!("translations[{i}]"), "coordinates must be finite"));
                }
            }
            Some(list.iter().map(|v| v.get_ref().clone()).collect())
        }
        None => None,
    };

    let canonical = Canonical {
        name: raw.name.clone().unwrap_or_else(|| "unnamed".into()),
        dimension: d,
        alphabet: n,
        matrices: entries.iter().map(|m| m.get_ref().clone()).collect(),
        kronecker: raw.kronecker,
        iota: raw.iota.as_ref().map(|p| p.get_ref().clone()),
        translations: translations.clone(),
    };
    Ok(System { name: canonical.name.clone(), fixture: None, tuple, base, translations, hash: hash(&canonical) })
}

fn resolve_fixture(raw: &SystemConfig, name: &Spanned<String>, loc: &Locator) -> Result<System, ConfigError> {
    let explicit = [
        (raw.dimension.is_some(), "dimension"),
        (raw.alphabet.is_some(), "alphabet"),
        (raw.matrices.is_some(), "matrices"),
        (raw.kronecker, "kronecker"),
        (raw.iota.is_some(), "iota"),
        (raw.translations.is_some(), "translations"),
    ];
    if let Some((_, field)) = explicit.iter().find(|e| e.0) {
        return Err(loc.error(None, *field, "cannot be combined with `fixture`"));
    }
    let (a1, a2, th) = (raw.alpha1.unwrap_or(ALPHA1), raw.alpha2.unwrap_or(ALPHA2), raw.theta.unwrap_or(THETA));
    let lib = |e: selfaffine::Error| loc.error(None, "fixture", e.to_string());
    let (base, iota, translations) = match name.get_ref().as_str() {
        "thm1" => {
            let (b, i) = fixtures::kronecker_pair_base(a1, a2, th).map_err(lib)?;
            (b, Some(i), None)
        }
        "thm2" => {
            let (b, i) = fixtures::four_map_base(a1, a2, th).map_err(lib)?;
            (b, Some(i), Some(fixtures::four_map_translations()))
        }
        "eq1-3x3" => {
            if raw.alpha1.is_some() || raw.alpha2.is_some() || raw.theta.is_some() {
                return Err(loc.error(None, "fixture", "eq1-3x3 takes no parameters"));
            }
            (fixtures::eq1_tuple().map_err(lib)?, None, None)
        }
        other => {
            let msg = format!("unknown fixture `{other}`; expected one of {}", FIXTURES.join(", "));
            return Err(loc.error(Some(name.span()), "fixture", msg));
        }
    };
    let canonical = Canonical {
        name: raw.name.clone().unwrap_or_else(|| name.get_ref().clone()),
        dimension: base.dim(),
        alphabet: base.alphabet(),
        matrices: base.matrices().iter().map(|m| m.to_rows().concat()).collect(),
        kronecker: iota.is_some(),
        iota: iota.as_ref().map(SymbolPermutation::one_based),
        translations: translations.clone(),
    };
    let (tuple, base) = match iota {
        Some(i) => (base.kronecker_with(&i).map_err(lib)?, Some((base, i))),
        None => (base, None),
    };
    Ok(System {
        name: canonical.name.clone(),
        fixture: Some(name.get_ref().clone()),
        tuple,
        base,
        translations,
        hash: hash(&canonical),
    })
}

/// SHA-256 of the canonical JSON, hex encoded.
pub fn hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("plain data serializes");
    hex::encode(Sha256::digest(&bytes))
}
