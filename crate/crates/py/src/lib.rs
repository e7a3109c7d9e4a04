use std::collections::BTreeMap;

use molqudit_core::cavity::{self, CavityMode, CavityQudit, SpinPhotonCoupling, SumConvention};
use molqudit_core::dqs::{self, ChainModel, HardwareRates, SpinBosonModel, TargetModel};
use molqudit_core::dynamics::PulseMode;
use molqudit_core::pipeline::{self, Pipeline};
use molqudit_core::qec::{self, QecHardware};
use molqudit_core::spin::{parse_spec, Spin, SpinSystemSpec};
use molqudit_core::transitions::{self, SweepSettings};
use molqudit_core::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

/// Input problems become ValueError, refused physics contracts RuntimeError.
fn py_err(e: Error) -> PyErr {
    match pipeline::exit_status(&e) {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn spin(s: f64) -> PyResult<Spin> {
    Spin::new(s).map_err(py_err)
}

#[pyclass(name = "SpinSystem", module = "molqudit", frozen)]
struct PySpinSystem {
    spec: SpinSystemSpec,
}

#[pymethods]
impl PySpinSystem {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let spec = parse_spec(text).map_err(py_err)?;
        spec.validate().map_err(py_err)?;
        Ok(PySpinSystem { spec })
    }

    fn to_toml(&self) -> String {
        self.spec.to_canonical_toml()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    #[getter]
    fn field_tesla(&self) -> [f64; 3] {
        self.spec.field_tesla
    }

    fn with_field(&self, field_tesla: [f64; 3]) -> Self {
        PySpinSystem {
            spec: self.spec.with_field(field_tesla),
        }
    }

    /// Eigenenergies in GHz, ascending.
    fn energies(&self) -> PyResult<Vec<f64>> {
        Ok(self.spec.eigensystem().map_err(py_err)?.energies)
    }

    /// (i, j, frequency_ghz, rabi_ghz) for every eigenstate pair i < j.
    fn transitions(&self, drive_amplitude_ghz: f64) -> PyResult<Vec<(usize, usize, f64, f64)>> {
        let eig = self.spec.eigensystem().map_err(py_err)?;
        let table = transitions::transition_table(&eig, drive_amplitude_ghz).map_err(py_err)?;
        Ok(table.rows.iter().map(|r| (r.i, r.j, r.frequency_ghz, r.rabi_ghz)).collect())
    }

    /// Universality along the field direction: one dict per field value.
    fn field_sweep(
        &self,
        b_values: Vec<f64>,
        drive_amplitude_ghz: f64,
        omega_r_ghz: f64,
        t2_ns: f64,
    ) -> PyResult<Vec<BTreeMap<&'static str, f64>>> {
        let settings = SweepSettings {
            drive_amplitude_ghz,
            omega_r_ghz,
            t2_ns,
        };
        let reports = transitions::field_sweep(&self.spec, &b_values, &settings).map_err(py_err)?;
        Ok(reports
            .iter()
            .map(|r| {
                BTreeMap::from([
                    ("B_tesla", r.b_tesla),
                    ("u_param", r.u_param),
                    ("universal", f64::from(u8::from(r.universal))),
                    ("n_edges", r.n_edges as f64),
                    ("min_isolation_ghz", r.min_isolation_ghz),
                    ("degenerate_pair_count", r.degenerate_pair_count as f64),
                ])
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("SpinSystem(sites={}, dim={})", self.spec.sites.len(), self.spec.dim())
    }
}

#[pyclass(name = "QuditCode", module = "molqudit", frozen)]
struct PyQuditCode {
    code: qec::QuditCode,
}

#[pymethods]
impl PyQuditCode {
    #[staticmethod]
    fn solve(qudit_spin: f64, order: usize) -> PyResult<Self> {
        let code = qec::solve_code_words(spin(qudit_spin)?, order).map_err(py_err)?;
        Ok(PyQuditCode { code })
    }

    #[getter]
    fn m_values(&self) -> Vec<f64> {
        (0..self.code.dim()).map(|k| self.code.spin.m(k)).collect()
    }

    /// Amplitudes of |0_L⟩ and |1_L⟩ on the m values, largest m first.
    #[getter]
    fn words(&self) -> (Vec<f64>, Vec<f64>) {
        (self.code.words[0].as_slice().to_vec(), self.code.words[1].as_slice().to_vec())
    }

    #[getter]
    fn kl_residual(&self) -> f64 {
        self.code.kl_residual
    }

    fn check(&self) -> f64 {
        qec::check_knill_laflamme(&self.code)
    }
}

/// Memory gain rows (T/T2, E, E_half, R) for a qudit+ancilla system.
#[pyfunction]
#[pyo3(signature = (system, t_over_t2, t2_ns, ancilla_t2_ns, pulse_rabi_ghz, order = 1, ideal_pulses = false))]
fn qec_gain_curve(
    system: &PySpinSystem,
    t_over_t2: Vec<f64>,
    t2_ns: f64,
    ancilla_t2_ns: f64,
    pulse_rabi_ghz: f64,
    order: usize,
    ideal_pulses: bool,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let hw = QecHardware::new(&system.spec).map_err(py_err)?;
    let code = qec::solve_code_words(hw.qudit_spin, order).map_err(py_err)?;
    let protocol = qec::build_protocol(&hw, &code, ancilla_t2_ns, pulse_rabi_ghz).map_err(py_err)?;
    let mode = if ideal_pulses { PulseMode::Ideal } else { PulseMode::Finite };
    let curve = qec::memory_gain_curve(&hw, &code, &protocol, t2_ns, &t_over_t2, mode).map_err(py_err)?;
    Ok(curve.rows.iter().map(|r| (r.t_over_t2, r.e, r.e_half, r.r)).collect())
}

/// Logical error of the three-qubit phase-flip code under independent
/// dephasing with probability p per qubit.
#[pyfunction]
fn phase_flip_logical_error(p: f64) -> PyResult<f64> {
    qec::logical_error_probability(&qec::ZErrorModel::Independent(p)).map_err(py_err)
}

/// Cavity-mediated coupling of two systems: returns flip-flop coefficient,
/// validity ratio, exact-model relative deviation and swap time.
#[pyfunction]
#[pyo3(signature = (q1, q2, cavity_freq_ghz, g1_ghz, g2_ghz, n_max = 8, pair1 = (0, 1), pair2 = (0, 1)))]
#[allow(clippy::too_many_arguments)]
fn cavity_coupling(
    q1: &PySpinSystem,
    q2: &PySpinSystem,
    cavity_freq_ghz: f64,
    g1_ghz: f64,
    g2_ghz: f64,
    n_max: usize,
    pair1: (usize, usize),
    pair2: (usize, usize),
) -> PyResult<BTreeMap<&'static str, f64>> {
    let mode = CavityMode::new(cavity_freq_ghz, 0.0, n_max).map_err(py_err)?;
    let a = CavityQudit::from_spec(&q1.spec, SpinPhotonCoupling::new(g1_ghz).map_err(py_err)?).map_err(py_err)?;
    let b = CavityQudit::from_spec(&q2.spec, SpinPhotonCoupling::new(g2_ghz).map_err(py_err)?).map_err(py_err)?;
    let heff = cavity::effective_hamiltonian(&a, &b, &mode, SumConvention::PositiveGaps).map_err(py_err)?;
    let report = cavity::validate_against_full_model(&a, &b, &mode, &heff).map_err(py_err)?;
    let mut out = BTreeMap::from([
        ("flip_flop_ghz", cavity::flip_flop_coefficient(&heff, pair1, pair2).norm()),
        ("validity_ratio", heff.validity_ratio),
        ("relative_deviation", report.relative_deviation),
    ]);
    if let Ok(swap) = cavity::synthesize_swap(&heff, pair1, pair2) {
        out.insert("swap_time_ns", swap.time_ns);
        out.insert("swap_transfer", swap.transfer);
    }
    Ok(out)
}

/// (G·T2, G/κ, feasible) with both strong-coupling inequalities strict.
#[pyfunction]
fn feasibility(g_ghz: f64, t2_ns: f64, kappa_ghz: f64) -> PyResult<(f64, f64, bool)> {
    let r = cavity::feasibility(g_ghz, t2_ns, kappa_ghz).map_err(py_err)?;
    Ok((r.coherence_margin, r.cavity_margin, r.feasible()))
}

/// Trotter error of a spin chain, rows (n_steps, order, error, gates).
#[pyfunction]
#[pyo3(signature = (sites, j_ghz, t_ns, steps, orders = vec![1, 2], field_ghz = [0.0; 3]))]
fn chain_trotter_scan(
    sites: usize,
    j_ghz: [f64; 3],
    t_ns: f64,
    steps: Vec<usize>,
    orders: Vec<u8>,
    field_ghz: [f64; 3],
) -> PyResult<Vec<(usize, u8, f64, usize)>> {
    let model = TargetModel::Chain(ChainModel { sites, j_ghz, field_ghz });
    let pts = dqs::trotter_scan(&model, t_ns, &steps, &orders, &HardwareRates::ideal()).map_err(py_err)?;
    Ok(pts.iter().map(|p| (p.n_steps, p.order, p.fidelity_error, p.gate_count)).collect())
}

/// Two-body gates per Trotter step of the spin-boson model in the qudit and
/// binary encodings.
#[pyfunction]
#[pyo3(signature = (n_b, mode_ghz = 1.0, spin_ghz = 1.0, coupling_ghz = 0.1))]
fn spin_boson_entanglers(n_b: usize, mode_ghz: f64, spin_ghz: f64, coupling_ghz: f64) -> PyResult<(usize, usize)> {
    let model = SpinBosonModel {
        n_b,
        mode_ghz,
        spin_ghz,
        coupling_ghz,
    };
    let cmp = dqs::resource_compare(&model, &HardwareRates::ideal()).map_err(py_err)?;
    Ok((cmp.qudit.two_body, cmp.binary.two_body))
}

/// Runs a pipeline on config text and returns {file name: CSV text}.
#[pyfunction]
#[pyo3(signature = (config_text, pipeline = None, overrides = vec![], threads = 1, ideal_pulses = false))]
fn run_pipeline(
    config_text: &str,
    pipeline: Option<&str>,
    overrides: Vec<String>,
    threads: usize,
    ideal_pulses: bool,
) -> PyResult<BTreeMap<String, String>> {
    let overrides = overrides
        .iter()
        .map(|s| pipeline::parse_override(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let cfg = pipeline::load_config(config_text, &overrides).map_err(py_err)?;
    let name = pipeline
        .map(str::to_string)
        .or_else(|| cfg.pipeline.clone())
        .ok_or_else(|| PyValueError::new_err("no pipeline given"))?;
    let p = Pipeline::from_name(&name).map_err(py_err)?;
    let out = pipeline::run_with_threads(p, &cfg, ideal_pulses, threads.max(1)).map_err(py_err)?;
    Ok(out.into_iter().map(|a| (a.name, a.contents)).collect())
}

/// Every violation in a config; empty when it is valid.
#[pyfunction]
#[pyo3(signature = (config_text, overrides = vec![]))]
fn validate(config_text: &str, overrides: Vec<String>) -> PyResult<Vec<String>> {
    let overrides = overrides
        .iter()
        .map(|s| pipeline::parse_override(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    pipeline::config_violations(config_text, &overrides).map_err(py_err)
}

#[pymodule]
fn molqudit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpinSystem>()?;
    m.add_class::<PyQuditCode>()?;
    m.add_function(wrap_pyfunction!(qec_gain_curve, m)?)?;
    m.add_function(wrap_pyfunction!(phase_flip_logical_error, m)?)?;
    m.add_function(wrap_pyfunction!(cavity_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(chain_trotter_scan, m)?)?;
    m.add_function(wrap_pyfunction!(spin_boson_entanglers, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
