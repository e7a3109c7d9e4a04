//! Run configuration: a system spec plus a `[params]` table.
//!
//! ```toml
//! pipeline = "qec-gain"
//! field_tesla = [0.0, 0.0, 1.0]
//!
//! [[sites]]
//! spin = 0.5
//! nuclear_spin = 1.5
//! A_ghz = 0.1
//! p_ghz = 0.02
//!
//! [params]
//! t2_ns = 1e6
//! ```

use crate::error::{Error, Result};
use crate::spin::describe_toml_error;
use crate::spin::{spec_from_table, spec_to_table, Spin, SpinSystemSpec};

const TOP_LEVEL: [&str; 5] = ["pipeline", "field_tesla", "sites", "couplings", "params"];

#[derive(Debug, Clone, Copy)]
enum Rule {
    Positive,
    NonNegative,
    Finite,
    Count { min: i64 },
    Flag,
    HalfInteger,
    PositiveList,
    NonNegativeList,
    CountList { min: i64, max: i64 },
    Vector3,
    LevelPair,
    Choice(&'static [&'static str]),
}

const RULES: &[(&str, Rule)] = &[
    ("drive_amplitude_ghz", Rule::Positive),
    ("omega_r_ghz", Rule::Positive),
    ("t2_ns", Rule::Positive),
    ("b_values", Rule::NonNegativeList),
    ("b_min_tesla", Rule::NonNegative),
    ("b_max_tesla", Rule::NonNegative),
    ("b_points", Rule::Count { min: 0 }),
    ("qudit_spin", Rule::HalfInteger),
    ("correction_order", Rule::Count { min: 1 }),
    ("ancilla_t2_ns", Rule::Positive),
    ("pulse_rabi_ghz", Rule::Positive),
    ("ideal_pulses", Rule::Flag),
    ("t_over_t2", Rule::PositiveList),
    ("t_over_t2_min", Rule::Positive),
    ("t_over_t2_max", Rule::Positive),
    ("t_over_t2_points", Rule::Count { min: 1 }),
    ("cavity_freq_ghz", Rule::Positive),
    ("kappa_ghz", Rule::NonNegative),
    ("g1_ghz", Rule::NonNegative),
    ("g2_ghz", Rule::NonNegative),
    ("n_max", Rule::Count { min: 2 }),
    ("pair1", Rule::LevelPair),
    ("pair2", Rule::LevelPair),
    ("sum_convention", Rule::Choice(&["positive-gaps", "raw-sum"])),
    ("model", Rule::Choice(&["chain", "spin-boson"])),
    ("chain_j_ghz", Rule::Vector3),
    ("chain_field_ghz", Rule::Vector3),
    ("t_ns", Rule::NonNegative),
    ("n_steps", Rule::CountList { min: 1, max: i64::MAX }),
    ("orders", Rule::CountList { min: 1, max: 2 }),
    ("n_b", Rule::Count { min: 2 }),
    ("mode_ghz", Rule::Finite),
    ("spin_ghz", Rule::Finite),
    ("coupling_ghz", Rule::Finite),
    ("single_rabi_ghz", Rule::Positive),
    ("two_body_ghz", Rule::Positive),
];

fn number(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn numbers(v: &toml::Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(number).collect()
}

fn integers(v: &toml::Value) -> Option<Vec<i64>> {
    v.as_array()?.iter().map(|x| x.as_integer()).collect()
}

fn check(key: &str, rule: Rule, v: &toml::Value) -> Option<String> {
    let bad = |what: &str| Some(format!("parameter {key}: {what}, got {v}"));
    match rule {
        Rule::Positive => match number(v) {
            Some(x) if x > 0.0 && x.is_finite() => None,
            Some(_) => bad("range violation, must be positive"),
            None => bad("expected a number"),
        },
        Rule::NonNegative => match number(v) {
            Some(x) if x >= 0.0 && x.is_finite() => None,
            Some(_) => bad("range violation, must be non-negative"),
            None => bad("expected a number"),
        },
        Rule::Finite => match number(v) {
            Some(x) if x.is_finite() => None,
            _ => bad("expected a finite number"),
        },
        Rule::Count { min } => match v.as_integer() {
            Some(n) if n >= min => None,
            Some(_) => bad(&format!("range violation, must be an integer ≥ {min}")),
            None => bad("expected an integer"),
        },
        Rule::Flag => v.as_bool().map_or_else(|| bad("expected true or false"), |_| None),
        Rule::HalfInteger => match number(v) {
            Some(x) if x > 0.0 && Spin::new(x).is_ok() => None,
            _ => bad("expected a positive half-integer"),
        },
        Rule::PositiveList | Rule::NonNegativeList => match numbers(v) {
            Some(xs) => {
                let strict = matches!(rule, Rule::PositiveList);
                let ok = |x: &f64| x.is_finite() && if strict { *x > 0.0 } else { *x >= 0.0 };
                if xs.iter().all(ok) {
                    None
                } else if strict {
                    bad("range violation, entries must be positive")
                } else {
                    bad("range violation, entries must be non-negative")
                }
            }
            None => bad("expected a list of numbers"),
        },
        Rule::CountList { min, max } => match integers(v) {
            Some(ns) if ns.iter().all(|&n| n >= min && n <= max) => None,
            Some(_) => bad(&format!("range violation, entries must lie in [{min}, {max}]")),
            None => bad("expected a list of integers"),
        },
        Rule::Vector3 => match numbers(v) {
            Some(xs) if xs.len() == 3 && xs.iter().all(|x| x.is_finite()) => None,
            _ => bad("expected three finite numbers"),
        },
        Rule::LevelPair => match integers(v) {
            Some(ns) if ns.len() == 2 && ns.iter().all(|&n| n >= 0) && ns[0] != ns[1] => None,
            _ => bad("expected two distinct level indices"),
        },
        Rule::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => None,
            _ => bad(&format!("expected one of {}", options.join(", "))),
        },
    }
}

/// Parameter violations, one message per offending key.
pub(crate) fn param_violations(params: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in params {
        match RULES.iter().find(|(k, _)| k == key) {
            Some(&(_, rule)) => out.extend(check(key, rule, value)),
            None => out.push(format!("unknown parameter {key}")),
        }
    }
    if let (Some(lo), Some(hi)) = (
        params.get("b_min_tesla").and_then(number),
        params.get("b_max_tesla").and_then(number),
    ) {
        if hi < lo {
            out.push(format!("parameter b_max_tesla: range violation, {hi} is below b_min_tesla = {lo}"));
        }
    }
    out
}

/// A parsed run configuration with overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Pipeline named in the file, if any.
    pub pipeline: Option<String>,
    pub spec: SpinSystemSpec,
    pub params: toml::Table,
}

/// Interprets an override value as a TOML literal, falling back to a bare
/// string so `model=chain` works without quotes.
fn override_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Parses `key=value`.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::Config(format!("override {arg:?} is not of the form key=value"))),
    }
}

fn parse_table(text: &str, overrides: &[(String, String)]) -> Result<toml::Table> {
    let mut table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| Error::Config(describe_toml_error(text, &e)))?;
    for (key, raw) in overrides {
        let value = override_value(raw);
        if TOP_LEVEL.contains(&key.as_str()) && key != "params" && key != "sites" && key != "couplings" {
            table.insert(key.clone(), value);
        } else {
            let params = table
                .entry("params")
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match params {
                toml::Value::Table(p) => {
                    p.insert(key.clone(), value);
                }
                _ => return Err(Error::Config("params must be a table".into())),
            }
        }
    }
    Ok(table)
}

/// Every schema and physics violation of a configuration, without running
/// anything. Parse errors come back as `Err`.
pub fn config_violations(text: &str, overrides: &[(String, String)]) -> Result<Vec<String>> {
    let table = parse_table(text, overrides)?;
    let mut out = Vec::new();
    for key in table.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            out.push(format!("unknown top-level key {key}"));
        }
    }
    match table.get("pipeline") {
        Some(toml::Value::String(p)) if super::Pipeline::from_name(p).is_err() => {
            out.push(format!("unknown pipeline {p}"))
        }
        Some(toml::Value::String(_)) | None => {}
        Some(v) => out.push(format!("pipeline must be a string, got {v}")),
    }
    match spec_from_table(&table) {
        Ok(spec) => out.extend(spec.violations()),
        Err(Error::Config(m)) => out.push(m),
        Err(e) => out.push(e.to_string()),
    }
    match table.get("params") {
        Some(toml::Value::Table(p)) => out.extend(param_violations(p)),
        Some(_) => out.push("params must be a table".into()),
        None => {}
    }
    Ok(out)
}

pub fn load_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let violations = config_violations(text, overrides)?;
    if !violations.is_empty() {
        return Err(Error::Config(violations.join("; ")));
    }
    let mut table = parse_table(text, overrides)?;
    let spec = spec_from_table(&table)?;
    let pipeline = table.get("pipeline").and_then(|v| v.as_str()).map(str::to_string);
    let params = match table.remove("params") {
        Some(toml::Value::Table(p)) => p,
        _ => toml::Table::new(),
    };
    Ok(RunConfig { pipeline, spec, params })
}

impl RunConfig {
    /// Canonical TOML echo of the effective configuration.
    pub fn to_canonical_toml(&self) -> String {
        let mut table = spec_to_table(&self.spec);
        if let Some(p) = &self.pipeline {
            table.insert("pipeline".into(), toml::Value::String(p.clone()));
        }
        if !self.params.is_empty() {
            table.insert("params".into(), toml::Value::Table(self.params.clone()));
        }
        toml::to_string(&table).expect("table serializes")
    }

    pub(crate) fn f64_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).and_then(number).unwrap_or(default)
    }

    pub(crate) fn f64_required(&self, pipeline: &str, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .and_then(number)
            .ok_or_else(|| Error::Config(format!("{pipeline}: missing parameter {key}")))
    }

    pub(crate) fn count_or(&self, key: &str, default: usize) -> usize {
        self.params
            .get(key)
            .and_then(|v| v.as_integer())
            .map_or(default, |n| n as usize)
    }

    pub(crate) fn flag(&self, key: &str) -> bool {
        self.params.get(key).and_then(|v| v.as_bool()).unwrap_or(false)
    }

    pub(crate) fn list(&self, key: &str) -> Option<Vec<f64>> {
        self.params.get(key).and_then(numbers)
    }

    pub(crate) fn counts(&self, key: &str) -> Option<Vec<usize>> {
        self.params
            .get(key)
            .and_then(integers)
            .map(|v| v.into_iter().map(|n| n as usize).collect())
    }

    pub(crate) fn vector3(&self, key: &str, default: [f64; 3]) -> [f64; 3] {
        self.list(key).map_or(default, |v| [v[0], v[1], v[2]])
    }

    pub(crate) fn text(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(|v| v.as_str())
    }
}
