//! Batch pipelines behind the command-line front end. Each run turns a
//! [`RunConfig`] into named CSV payloads; writing them is left to the caller.

mod config;

pub use config::{config_violations, load_config, parse_override, RunConfig};

use std::fmt::Write as _;

use crate::cavity::{
    effective_hamiltonian, feasibility, flip_flop_coefficient, synthesize_swap, validate_against_full_model,
    CavityMode, CavityQudit, FeasibilityReport, SpinPhotonCoupling, SumConvention,
};
use crate::dqs::{
    boson_qudit_encoding, resource_compare, trotter_scan, trotterize, ChainModel, HardwareRates, ResourceEstimate,
    SpinBosonModel, TargetModel,
};
use crate::dynamics::PulseMode;
use crate::error::{Error, Result};
use crate::qec::{build_protocol, memory_gain_curve, solve_code_words, QecHardware};
use crate::spin::{Spin, SpinSystemSpec};
use crate::transitions::{field_sweep, SweepSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pipeline {
    UniversalitySweep,
    QecGain,
    CavityGate,
    TrotterScan,
}

impl Pipeline {
    pub const ALL: [Pipeline; 4] = [
        Pipeline::UniversalitySweep,
        Pipeline::QecGain,
        Pipeline::CavityGate,
        Pipeline::TrotterScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::UniversalitySweep => "universality-sweep",
            Pipeline::QecGain => "qec-gain",
            Pipeline::CavityGate => "cavity-gate",
            Pipeline::TrotterScan => "trotter-scan",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown pipeline {name:?}")))
    }
}

/// One output file: name relative to the output directory and its bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Process exit status for an error: 2 for input problems, 3 for a
/// physics contract a module refused.
pub fn exit_status(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) | Error::InvalidSpin(_) | Error::SiteIndex { .. } => 2,
        _ => 3,
    }
}

/// 12 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    fn into_artifact(self, name: &str) -> Artifact {
        Artifact {
            name: name.into(),
            contents: self.text,
        }
    }
}

fn f(x: f64) -> String {
    format_float(x)
}

fn n(x: usize) -> String {
    x.to_string()
}

/// Runs a pipeline on the current rayon pool. `ideal_pulses` forces
/// instantaneous pulses regardless of the config.
pub fn run(pipeline: Pipeline, cfg: &RunConfig, ideal_pulses: bool) -> Result<Vec<Artifact>> {
    match pipeline {
        Pipeline::UniversalitySweep => universality_sweep(cfg),
        Pipeline::QecGain => qec_gain(cfg, ideal_pulses),
        Pipeline::CavityGate => cavity_gate(cfg),
        Pipeline::TrotterScan => trotter(cfg, ideal_pulses),
    }
}

/// As [`run`], inside a dedicated pool of `threads` workers.
pub fn run_with_threads(
    pipeline: Pipeline,
    cfg: &RunConfig,
    ideal_pulses: bool,
    threads: usize,
) -> Result<Vec<Artifact>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run(pipeline, cfg, ideal_pulses))
}

fn field_grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    let mut b = match cfg.list("b_values") {
        Some(v) => v,
        None => {
            let points = cfg.count_or("b_points", 0);
            let lo = cfg.f64_or("b_min_tesla", 0.0);
            let hi = cfg.f64_or("b_max_tesla", lo);
            match points {
                0 => Vec::new(),
                1 => vec![lo],
                _ => (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect(),
            }
        }
    };
    if b.is_empty() {
        return Err(Error::Config("universality-sweep: empty sweep".into()));
    }
    b.sort_by(f64::total_cmp);
    Ok(b)
}

fn universality_sweep(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let name = Pipeline::UniversalitySweep.name();
    let b = field_grid(cfg)?;
    let settings = SweepSettings {
        drive_amplitude_ghz: cfg.f64_required(name, "drive_amplitude_ghz")?,
        omega_r_ghz: cfg.f64_required(name, "omega_r_ghz")?,
        t2_ns: cfg.f64_required(name, "t2_ns")?,
    };
    let reports = field_sweep(&cfg.spec, &b, &settings)?;
    let mut csv = Csv::new(&[
        "B_tesla",
        "u_param",
        "universal",
        "n_edges",
        "min_isolation_ghz",
        "degenerate_pair_count",
    ]);
    for r in &reports {
        csv.row(&[
            f(r.b_tesla),
            f(r.u_param),
            r.universal.to_string(),
            n(r.n_edges),
            f(r.min_isolation_ghz),
            n(r.degenerate_pair_count),
        ]);
    }
    Ok(vec![csv.into_artifact("universality_sweep.csv")])
}

fn memory_grid(cfg: &RunConfig) -> Vec<f64> {
    if let Some(v) = cfg.list("t_over_t2") {
        return v;
    }
    let lo = cfg.f64_or("t_over_t2_min", 1e-3);
    let hi = cfg.f64_or("t_over_t2_max", 1e-1);
    let points = cfg.count_or("t_over_t2_points", 21);
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

fn qec_gain(cfg: &RunConfig, force_ideal: bool) -> Result<Vec<Artifact>> {
    let name = Pipeline::QecGain.name();
    let mut spec = cfg.spec.clone();
    if let Some(s) = cfg.params.get("qudit_spin") {
        let s = s.as_float().or_else(|| s.as_integer().map(|i| i as f64)).unwrap_or(0.0);
        let spin = Spin::new(s)?;
        match spec.sites.first_mut().and_then(|site| site.nuclear.as_mut()) {
            Some(nuc) => nuc.spin = spin,
            None => return Err(Error::Config(format!("{name}: qudit_spin needs a nuclear spin on site 0"))),
        }
    }
    let hw = QecHardware::new(&spec)?;
    let order = cfg.count_or("correction_order", 1);
    let code = solve_code_words(hw.qudit_spin, order)?;
    let t2 = cfg.f64_required(name, "t2_ns")?;
    let pulse_rabi = cfg.f64_required(name, "pulse_rabi_ghz")?;
    let ancilla_t2 = cfg.f64_or("ancilla_t2_ns", t2);
    let mode = if force_ideal || cfg.flag("ideal_pulses") {
        PulseMode::Ideal
    } else {
        PulseMode::Finite
    };
    let protocol = build_protocol(&hw, &code, ancilla_t2, pulse_rabi)?;
    let curve = memory_gain_curve(&hw, &code, &protocol, t2, &memory_grid(cfg), mode)?;

    let mut gain = Csv::new(&["T_over_T2", "E", "E_half", "R"]);
    for r in &curve.rows {
        gain.row(&[f(r.t_over_t2), f(r.e), f(r.e_half), f(r.r)]);
    }
    let mut words = Csv::new(&["m", "zero_L", "one_L"]);
    for k in 0..code.dim() {
        words.row(&[f(code.spin.m(k)), f(code.words[0][k]), f(code.words[1][k])]);
    }
    Ok(vec![gain.into_artifact("qec_gain.csv"), words.into_artifact("code_words.csv")])
}

fn site_spec(spec: &SpinSystemSpec, k: usize) -> SpinSystemSpec {
    SpinSystemSpec::single(spec.sites[k], spec.field_tesla)
}

fn level_pair(cfg: &RunConfig, key: &str) -> (usize, usize) {
    cfg.counts(key).map_or((0, 1), |v| (v[0], v[1]))
}

fn cavity_gate(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let name = Pipeline::CavityGate.name();
    if cfg.spec.sites.len() != 2 || !cfg.spec.couplings.is_empty() {
        return Err(Error::Config(format!(
            "{name}: the spec must hold exactly two uncoupled sites, got {}",
            cfg.spec.sites.len()
        )));
    }
    let cavity = CavityMode::new(
        cfg.f64_required(name, "cavity_freq_ghz")?,
        cfg.f64_or("kappa_ghz", 0.0),
        cfg.count_or("n_max", 8),
    )?;
    let g = [cfg.f64_required(name, "g1_ghz")?, cfg.f64_required(name, "g2_ghz")?];
    let t2 = cfg.f64_required(name, "t2_ns")?;
    let convention = match cfg.text("sum_convention") {
        Some("raw-sum") => SumConvention::RawSum,
        _ => SumConvention::PositiveGaps,
    };
    let q1 = CavityQudit::from_spec(&site_spec(&cfg.spec, 0), SpinPhotonCoupling::new(g[0])?)?;
    let q2 = CavityQudit::from_spec(&site_spec(&cfg.spec, 1), SpinPhotonCoupling::new(g[1])?)?;
    let heff = effective_hamiltonian(&q1, &q2, &cavity, convention)?;
    let report = validate_against_full_model(&q1, &q2, &cavity, &heff)?;
    let (p1, p2) = (level_pair(cfg, "pair1"), level_pair(cfg, "pair2"));
    let swap = synthesize_swap(&heff, p1, p2)?;
    let d2 = q2.dim();
    let exact_ff = report.exact_interaction[(p1.1 * d2 + p2.0, p1.0 * d2 + p2.1)].norm();
    let feas: Vec<FeasibilityReport> = g
        .iter()
        .map(|&gk| feasibility(gk, t2, cavity.kappa_ghz))
        .collect::<Result<_>>()?;

    let mut gate = Csv::new(&[
        "validity_ratio",
        "hermiticity_defect",
        "flip_flop_ghz",
        "exact_flip_flop_ghz",
        "deviation_ghz",
        "relative_deviation",
        "top_photon_population",
        "truncation_warning",
        "swap_time_ns",
        "swap_transfer",
        "swap_leakage",
        "coherence_margin_1",
        "cavity_margin_1",
        "feasible_1",
        "coherence_margin_2",
        "cavity_margin_2",
        "feasible_2",
    ]);
    gate.row(&[
        f(heff.validity_ratio),
        f(heff.hermiticity_defect),
        f(flip_flop_coefficient(&heff, p1, p2).norm()),
        f(exact_ff),
        f(report.deviation_ghz),
        f(report.relative_deviation),
        f(report.top_photon_population),
        report.truncation_warning.to_string(),
        f(swap.time_ns),
        f(swap.transfer),
        f(swap.leakage),
        f(feas[0].coherence_margin),
        f(feas[0].cavity_margin),
        feas[0].feasible().to_string(),
        f(feas[1].coherence_margin),
        f(feas[1].cavity_margin),
        feas[1].feasible().to_string(),
    ]);

    let (d1, _) = heff.dims();
    let mut hj = Csv::new(&["a", "b", "c", "d", "re_ghz", "im_ghz"]);
    let scale = heff.hamiltonian.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for a in 0..d1 {
        for b in 0..d2 {
            for c in 0..d1 {
                for d in 0..d2 {
                    let z = heff.element(a, b, c, d);
                    if z.norm() > 1e-12 * scale {
                        hj.row(&[n(a), n(b), n(c), n(d), f(z.re), f(z.im)]);
                    }
                }
            }
        }
    }
    Ok(vec![gate.into_artifact("cavity_gate.csv"), hj.into_artifact("effective_coupling.csv")])
}

fn target_model(cfg: &RunConfig) -> Result<TargetModel> {
    let spec = &cfg.spec;
    match cfg.text("model").unwrap_or("chain") {
        "spin-boson" => {
            let n_b = cfg.count_or("n_b", 4);
            if spec.sites.len() != 2 || spec.sites[0].spin.twice() != 1 {
                return Err(Error::UnsupportedModel(
                    "spin-boson targets need a spin-1/2 site followed by a qudit site".into(),
                ));
            }
            boson_qudit_encoding(n_b, spec.sites[1].spin)?;
            Ok(TargetModel::SpinBoson(SpinBosonModel {
                n_b,
                mode_ghz: cfg.f64_or("mode_ghz", 1.0),
                spin_ghz: cfg.f64_or("spin_ghz", 1.0),
                coupling_ghz: cfg.f64_or("coupling_ghz", 0.1),
            }))
        }
        _ => {
            if spec.sites.iter().any(|s| s.spin.twice() != 1 || s.nuclear.is_some()) {
                return Err(Error::UnsupportedModel("chain targets need spin-1/2 sites only".into()));
            }
            Ok(TargetModel::Chain(ChainModel {
                sites: spec.sites.len(),
                j_ghz: cfg.vector3("chain_j_ghz", [1.0, 1.0, 1.0]),
                field_ghz: cfg.vector3("chain_field_ghz", [0.0; 3]),
            }))
        }
    }
}

fn resource_row(csv: &mut Csv, encoding: &str, r: &ResourceEstimate) {
    let dims: Vec<String> = r.hardware_dims.iter().map(|d| d.to_string()).collect();
    csv.row(&[
        encoding.into(),
        n(r.single_qudit),
        n(r.two_body),
        n(r.switch_cphase),
        n(r.gate_count()),
        f(r.total_duration_ns),
        dims.join("x"),
        n(r.target_dim),
    ]);
}

fn trotter(cfg: &RunConfig, force_ideal: bool) -> Result<Vec<Artifact>> {
    let name = Pipeline::TrotterScan.name();
    let model = target_model(cfg)?;
    let t = cfg.f64_required(name, "t_ns")?;
    let steps = cfg.counts("n_steps").unwrap_or_else(|| vec![4, 8, 16, 32]);
    let orders: Vec<u8> = cfg
        .counts("orders")
        .unwrap_or_else(|| vec![1, 2])
        .into_iter()
        .map(|o| o as u8)
        .collect();
    let rates = HardwareRates {
        single_rabi_ghz: cfg.f64_or("single_rabi_ghz", 0.01),
        two_body_ghz: cfg.f64_or("two_body_ghz", 0.001),
        ideal: force_ideal || cfg.flag("ideal_pulses"),
    };
    let points = trotter_scan(&model, t, &steps, &orders, &rates)?;
    let mut scan = Csv::new(&["n_steps", "order", "fidelity_error", "gate_count", "total_duration_ns"]);
    for p in &points {
        scan.row(&[n(p.n_steps), p.order.to_string(), f(p.fidelity_error), n(p.gate_count), f(p.total_duration_ns)]);
    }
    let mut res = Csv::new(&[
        "encoding",
        "single_qudit",
        "two_body",
        "switch_cphase",
        "gate_count",
        "total_duration_ns",
        "hardware_dims",
        "target_dim",
    ]);
    match &model {
        TargetModel::SpinBoson(sb) if sb.n_b.is_power_of_two() => {
            let cmp = resource_compare(sb, &rates)?;
            resource_row(&mut res, "qudit", &cmp.qudit);
            resource_row(&mut res, "binary", &cmp.binary);
        }
        _ => resource_row(&mut res, "qudit", &trotterize(&model, 1.0, 1, 1, &rates)?.resources()),
    }
    Ok(vec![scan.into_artifact("trotter_scan.csv"), res.into_artifact("resources.csv")])
}
