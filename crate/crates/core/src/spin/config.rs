//! TOML ingestion and canonical serialization of system specifications.
//!
//! ```toml
//! field_tesla = [0.0, 0.0, 0.5]
//!
//! [[sites]]
//! spin = 3.5
//! g = 2.0            # or [gx, gy, gz]
//! D_ghz = 1.0
//! E_ghz = 0.0
//! nuclear_spin = 1.5 # optional, with A_ghz and p_ghz
//!
//! [[couplings]]
//! sites = [0, 1]
//! J_ghz = 0.2
//! ```

use serde::{Deserialize, Serialize};

use super::hamiltonian::{Coupling, GFactor, NuclearSpin, SpinSite, SpinSystemSpec};
use super::operators::Spin;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawG {
    Scalar(f64),
    Diagonal([f64; 3]),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSite {
    spin: f64,
    #[serde(default = "default_g")]
    g: RawG,
    #[serde(rename = "D_ghz", default)]
    d_ghz: f64,
    #[serde(rename = "E_ghz", default)]
    e_ghz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    nuclear_spin: Option<f64>,
    #[serde(rename = "A_ghz", skip_serializing_if = "Option::is_none")]
    a_ghz: Option<f64>,
    #[serde(rename = "p_ghz", skip_serializing_if = "Option::is_none")]
    p_ghz: Option<f64>,
}

fn default_g() -> RawG {
    RawG::Scalar(2.0)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    sites: [usize; 2],
    #[serde(rename = "J_ghz")]
    j_ghz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSpec {
    #[serde(default)]
    field_tesla: [f64; 3],
    sites: Vec<RawSite>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    couplings: Vec<RawCoupling>,
}

/// Byte offset → 1-based (line, column).
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

pub(crate) fn describe_toml_error(text: &str, err: &toml::de::Error) -> String {
    let msg = err.message().trim().to_string();
    match err.span() {
        Some(span) => {
            let (line, col) = line_col(text, span.start);
            format!("line {line}, column {col}: {msg}")
        }
        None => msg,
    }
}

fn site_from_raw(k: usize, raw: RawSite) -> Result<SpinSite> {
    let spin = Spin::new(raw.spin).map_err(|_| {
        Error::InvalidSpec(vec![format!("site {k}: spin {} is not a half-integer", raw.spin)])
    })?;
    let g = match raw.g {
        RawG::Scalar(g) => GFactor::Isotropic(g),
        RawG::Diagonal(g) => GFactor::Diagonal(g),
    };
    let nuclear = match raw.nuclear_spin {
        Some(i) => {
            let spin = Spin::new(i).map_err(|_| {
                Error::InvalidSpec(vec![format!("site {k}: nuclear_spin {i} is not a half-integer")])
            })?;
            Some(NuclearSpin {
                spin,
                a_ghz: raw.a_ghz.unwrap_or(0.0),
                p_ghz: raw.p_ghz.unwrap_or(0.0),
            })
        }
        None => {
            if raw.a_ghz.is_some() || raw.p_ghz.is_some() {
                return Err(Error::InvalidSpec(vec![format!(
                    "site {k}: A_ghz/p_ghz given without nuclear_spin"
                )]));
            }
            None
        }
    };
    Ok(SpinSite {
        spin,
        g,
        d_ghz: raw.d_ghz,
        e_ghz: raw.e_ghz,
        nuclear,
    })
}

/// Reads `sites`, `couplings` and `field_tesla` from a parsed table; other
/// keys are left to the caller.
pub fn spec_from_table(table: &toml::Table) -> Result<SpinSystemSpec> {
    let mut sub = toml::Table::new();
    for key in ["field_tesla", "sites", "couplings"] {
        if let Some(v) = table.get(key) {
            sub.insert(key.to_string(), v.clone());
        }
    }
    let raw: RawSpec = toml::Value::Table(sub)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_string()))?;
    let sites = raw
        .sites
        .into_iter()
        .enumerate()
        .map(|(k, s)| site_from_raw(k, s))
        .collect::<Result<Vec<_>>>()?;
    let couplings = raw
        .couplings
        .into_iter()
        .map(|c| Coupling {
            i: c.sites[0],
            j: c.sites[1],
            j_ghz: c.j_ghz,
        })
        .collect();
    Ok(SpinSystemSpec {
        sites,
        couplings,
        field_tesla: raw.field_tesla,
    })
}

pub fn parse_spec(text: &str) -> Result<SpinSystemSpec> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| Error::Config(describe_toml_error(text, &e)))?;
    spec_from_table(&table)
}

pub fn spec_to_table(spec: &SpinSystemSpec) -> toml::Table {
    let raw = RawSpec {
        field_tesla: spec.field_tesla,
        sites: spec
            .sites
            .iter()
            .map(|s| RawSite {
                spin: s.spin.value(),
                g: match s.g {
                    GFactor::Isotropic(g) => RawG::Scalar(g),
                    GFactor::Diagonal(g) => RawG::Diagonal(g),
                },
                d_ghz: s.d_ghz,
                e_ghz: s.e_ghz,
                nuclear_spin: s.nuclear.map(|n| n.spin.value()),
                a_ghz: s.nuclear.map(|n| n.a_ghz),
                p_ghz: s.nuclear.map(|n| n.p_ghz),
            })
            .collect(),
        couplings: spec
            .couplings
            .iter()
            .map(|c| RawCoupling {
                sites: [c.i, c.j],
                j_ghz: c.j_ghz,
            })
            .collect(),
    };
    match toml::Value::try_from(raw).expect("spec serializes") {
        toml::Value::Table(t) => t,
        _ => unreachable!("spec serializes to a table"),
    }
}

impl SpinSystemSpec {
    /// Canonical TOML text: sorted keys, shortest round-trip float encoding.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(&spec_to_table(self)).expect("table serializes")
    }
}
