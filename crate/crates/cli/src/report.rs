//! Report envelopes shared by every subcommand.

use std::fmt::Write as _;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Provenance carried by every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: &'static str,
    pub system: String,
    pub config_hash: String,
    pub seed: u64,
    pub level: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    version: &'static str,
    #[serde(flatten)]
    meta: &'a Meta,
    result: &'a T,
}

pub fn json<T: Serialize>(meta: &Meta, result: &T) -> String {
    let env = Envelope { schema_version: SCHEMA_VERSION, version: selfaffine::VERSION, meta, result };
    let mut out = serde_json::to_string_pretty(&env).expect("plain data serializes");
    out.push('\n');
    out
}

/// Prefixes `table` with `#` comment lines, which gnuplot skips.
pub fn csv(meta: &Meta, table: &str) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
    let mut out = String::new();
    let lines = [
        ("schema_version", SCHEMA_VERSION.to_string()),
        ("version", selfaffine::VERSION.to_string()),
        ("command", meta.command.to_string()),
        ("system", meta.system.clone()),
        ("config_hash", meta.config_hash.clone()),
        ("seed", meta.seed.to_string()),
        ("level", opt(meta.level.map(|n| n.to_string()))),
        ("tolerance", opt(meta.tolerance.map(|t| format!("{t:e}")))),
    ];
    for (k, v) in lines {
        writeln!(out, "# {k}={v}").expect("writing to a String");
    }
    out.push_str(table);
    out
}

/// Header plus rows of `{:e}`-formatted numbers, the first column an index.
pub fn table(header: &str, rows: impl IntoIterator<Item = (String, Vec<f64>)>) -> String {
    let mut out = format!("{header}\n");
    for (key, values) in rows {
        out.push_str(&key);
        for v in values {
            write!(out, ",{v:e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}
