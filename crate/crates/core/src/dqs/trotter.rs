use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::boson::truncated_annihilation;
use crate::error::{Error, Result};
use crate::linalg::{dagger, eigh, identity, kron, kron_all, propagator, spectral_norm, CMatrix};
use crate::spin::{spin_operators, Spin, DEFAULT_MAX_DIM};

/// Nearest-neighbour spin-1/2 chain
/// H = Σ (J_x SˣSˣ + J_y SʸSʸ + J_z SᶻSᶻ) + Σ h·S.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub sites: usize,
    pub j_ghz: [f64; 3],
    pub field_ghz: [f64; 3],
}

impl ChainModel {
    pub fn xx(sites: usize, j: f64) -> Self {
        ChainModel {
            sites,
            j_ghz: [j, j, 0.0],
            field_ghz: [0.0; 3],
        }
    }

    pub fn xy(sites: usize, jx: f64, jy: f64) -> Self {
        ChainModel {
            sites,
            j_ghz: [jx, jy, 0.0],
            field_ghz: [0.0; 3],
        }
    }

    pub fn heisenberg(sites: usize, j: f64) -> Self {
        ChainModel {
            sites,
            j_ghz: [j; 3],
            field_ghz: [0.0; 3],
        }
    }

    /// J SᶻSᶻ with a transverse field h Sˣ.
    pub fn ising(sites: usize, j: f64, transverse: f64) -> Self {
        ChainModel {
            sites,
            j_ghz: [0.0, 0.0, j],
            field_ghz: [transverse, 0.0, 0.0],
        }
    }

    pub fn with_field(mut self, field_ghz: [f64; 3]) -> Self {
        self.field_ghz = field_ghz;
        self
    }
}

/// One spin 1/2 (ε/2 σ_z) and one bosonic mode (ω a†a, n_b levels) with
/// coupling g σ_x (a + a†).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinBosonModel {
    pub n_b: usize,
    pub mode_ghz: f64,
    pub spin_ghz: f64,
    pub coupling_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetModel {
    Chain(ChainModel),
    SpinBoson(SpinBosonModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    SingleQudit,
    TwoBody,
    SwitchCphase,
}

/// exp(−i2π G τ) on consecutive subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Local generator on the targets, GHz.
    pub generator: CMatrix,
    pub time_ns: f64,
    /// Largest relative phase the gate imprints, rad.
    pub angle: f64,
    pub duration_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub dims: Vec<usize>,
    pub gates: Vec<Gate>,
}

/// Rates that turn gate angles into durations with the π-pulse convention
/// t = θ/(2π·rate). `ideal` makes every gate instantaneous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareRates {
    pub single_rabi_ghz: f64,
    pub two_body_ghz: f64,
    pub ideal: bool,
}

impl HardwareRates {
    pub fn ideal() -> Self {
        HardwareRates {
            single_rabi_ghz: 1.0,
            two_body_ghz: 1.0,
            ideal: true,
        }
    }

    fn duration(&self, kind: GateKind, angle: f64) -> f64 {
        if self.ideal {
            return 0.0;
        }
        let rate = match kind {
            GateKind::SingleQudit => self.single_rabi_ghz,
            GateKind::TwoBody | GateKind::SwitchCphase => self.two_body_ghz,
        };
        angle.abs() / (2.0 * PI * rate)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    kind: GateKind,
    targets: Vec<usize>,
    generator: CMatrix,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl TargetModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            TargetModel::Chain(m) if m.sites < 2 => Err(Error::UnsupportedModel(format!(
                "chains need at least 2 sites, got {}",
                m.sites
            ))),
            TargetModel::SpinBoson(m) if m.n_b < 2 => Err(Error::UnsupportedModel(format!(
                "boson truncation needs n_b ≥ 2, got {}",
                m.n_b
            ))),
            _ => {
                let dim: usize = self.dims().iter().product();
                if dim > DEFAULT_MAX_DIM {
                    Err(Error::DimensionOverflow {
                        dim,
                        max: DEFAULT_MAX_DIM,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match self {
            TargetModel::Chain(m) => vec![2; m.sites],
            TargetModel::SpinBoson(m) => vec![2, m.n_b],
        }
    }

    /// Non-commuting term groups; terms inside one group commute.
    fn term_groups(&self) -> Vec<Vec<Term>> {
        match self {
            TargetModel::Chain(m) => {
                let s = spin_operators(Spin::from_twice(1));
                let ops = [&s.sx, &s.sy, &s.sz];
                let mut bond = CMatrix::zeros(4, 4);
                for (k, op) in ops.iter().enumerate() {
                    bond += kron(op, op) * c(m.j_ghz[k]);
                }
                let mut field = CMatrix::zeros(2, 2);
                for (k, op) in ops.iter().enumerate() {
                    field += *op * c(m.field_ghz[k]);
                }
                let bonds = |start: usize| -> Vec<Term> {
                    (start..m.sites - 1)
                        .step_by(2)
                        .map(|i| Term {
                            kind: GateKind::TwoBody,
                            targets: vec![i, i + 1],
                            generator: bond.clone(),
                        })
                        .collect()
                };
                let mut groups = vec![bonds(0), bonds(1)];
                groups.push(
                    (0..m.sites)
                        .map(|i| Term {
                            kind: GateKind::SingleQudit,
                            targets: vec![i],
                            generator: field.clone(),
                        })
                        .collect(),
                );
                groups
                    .into_iter()
                    .map(|g| g.into_iter().filter(|t| t.generator.iter().any(|z| z.norm() > 0.0)).collect::<Vec<_>>())
                    .filter(|g| !g.is_empty())
                    .collect()
            }
            TargetModel::SpinBoson(m) => {
                let s = spin_operators(Spin::from_twice(1));
                let a = truncated_annihilation(m.n_b);
                let number = dagger(&a) * &a;
                let sigma_z = &s.sz * c(2.0);
                let sigma_x = &s.sx * c(2.0);
                let free = vec![
                    Term {
                        kind: GateKind::SingleQudit,
                        targets: vec![0],
                        generator: sigma_z * c(m.spin_ghz / 2.0),
                    },
                    Term {
                        kind: GateKind::SingleQudit,
                        targets: vec![1],
                        generator: number * c(m.mode_ghz),
                    },
                ];
                let coupling = vec![Term {
                    kind: GateKind::TwoBody,
                    targets: vec![0, 1],
                    generator: kron(&sigma_x, &(&a + dagger(&a))) * c(m.coupling_ghz),
                }];
                vec![free, coupling]
            }
        }
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let dims = self.dims();
        let d: usize = dims.iter().product();
        let mut h = CMatrix::zeros(d, d);
        for group in self.term_groups() {
            for t in group {
                h += embed(&dims, &t.targets, &t.generator);
            }
        }
        h
    }

    /// exp(−i2πHt) from the dense spectrum.
    pub fn exact_propagator(&self, t_ns: f64) -> CMatrix {
        propagator(&self.hamiltonian(), t_ns)
    }
}

fn embed(dims: &[usize], targets: &[usize], local: &CMatrix) -> CMatrix {
    let first = targets[0];
    let last = *targets.last().expect("gate has targets");
    let before: usize = dims[..first].iter().product();
    let after: usize = dims[last + 1..].iter().product();
    kron_all([&identity(before), local, &identity(after)])
}

fn spread(generator: &CMatrix) -> f64 {
    let (v, _) = eigh(generator);
    v.last().copied().unwrap_or(0.0) - v.first().copied().unwrap_or(0.0)
}

impl GateSequence {
    pub fn total_duration_ns(&self) -> f64 {
        self.gates.iter().map(|g| g.duration_ns).sum()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Ordered product of the gate exponentials.
    pub fn unitary(&self) -> CMatrix {
        let d: usize = self.dims.iter().product();
        self.gates.iter().fold(identity(d), |acc, g| {
            propagator(&embed(&self.dims, &g.targets, &g.generator), g.time_ns) * acc
        })
    }

    pub fn resources(&self) -> ResourceEstimate {
        ResourceEstimate {
            single_qudit: self.count(GateKind::SingleQudit),
            two_body: self.count(GateKind::TwoBody),
            switch_cphase: self.count(GateKind::SwitchCphase),
            total_duration_ns: self.total_duration_ns(),
            hardware_dims: self.dims.clone(),
            target_dim: self.dims.iter().product(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceEstimate {
    pub single_qudit: usize,
    pub two_body: usize,
    pub switch_cphase: usize,
    pub total_duration_ns: f64,
    pub hardware_dims: Vec<usize>,
    pub target_dim: usize,
}

impl ResourceEstimate {
    pub fn gate_count(&self) -> usize {
        self.single_qudit + self.two_body + self.switch_cphase
    }
}

/// First-order (Π_k e^{−i2πH_k τ})ⁿ or the symmetric second-order splitting,
/// τ = t/n.
pub fn trotterize(
    model: &TargetModel,
    t_ns: f64,
    n_steps: usize,
    order: u8,
    rates: &HardwareRates,
) -> Result<GateSequence> {
    model.validate()?;
    if n_steps == 0 {
        return Err(Error::contract("dqs-compiler", "n_steps must be at least 1"));
    }
    if order != 1 && order != 2 {
        return Err(Error::contract("dqs-compiler", format!("Trotter order {order} is not 1 or 2")));
    }
    if !(t_ns >= 0.0) {
        return Err(Error::contract("dqs-compiler", format!("evolution time {t_ns} ns is negative")));
    }
    let groups = model.term_groups();
    let tau = t_ns / n_steps as f64;
    let mut gates = Vec::new();
    let mut push = |group: &[Term], time: f64| {
        for term in group {
            let angle = 2.0 * PI * time * spread(&term.generator);
            gates.push(Gate {
                kind: term.kind,
                targets: term.targets.clone(),
                generator: term.generator.clone(),
                time_ns: time,
                angle,
                duration_ns: rates.duration(term.kind, angle),
            });
        }
    };
    for _ in 0..n_steps {
        match order {
            1 => groups.iter().for_each(|g| push(g, tau)),
            _ => {
                let last = groups.len() - 1;
                for g in &groups[..last] {
                    push(g, tau / 2.0);
                }
                push(&groups[last], tau);
                for g in groups[..last].iter().rev() {
                    push(g, tau / 2.0);
                }
            }
        }
    }
    Ok(GateSequence {
        dims: model.dims(),
        gates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterPoint {
    pub n_steps: usize,
    pub order: u8,
    /// ‖U_trotter − U_exact‖, operator norm.
    pub fidelity_error: f64,
    pub gate_count: usize,
    pub total_duration_ns: f64,
}

/// Trotter error over a grid of (n, order), evaluated in parallel.
pub fn trotter_scan(
    model: &TargetModel,
    t_ns: f64,
    steps: &[usize],
    orders: &[u8],
    rates: &HardwareRates,
) -> Result<Vec<TrotterPoint>> {
    model.validate()?;
    let exact = model.exact_propagator(t_ns);
    let grid: Vec<(u8, usize)> = orders.iter().flat_map(|&o| steps.iter().map(move |&n| (o, n))).collect();
    grid.par_iter()
        .map(|&(order, n)| {
            let seq = trotterize(model, t_ns, n, order, rates)?;
            Ok(TrotterPoint {
                n_steps: n,
                order,
                fidelity_error: spectral_norm(&(seq.unitary() - &exact)),
                gate_count: seq.gates.len(),
                total_duration_ns: seq.total_duration_ns(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_reassemble_hamiltonian() {
        let m = TargetModel::Chain(ChainModel::heisenberg(4, 1.0).with_field([0.1, 0.0, 0.3]));
        let h = m.hamiltonian();
        // Independent assembly from the full operators.
        let s = spin_operators(Spin::from_twice(1));
        let ops = [&s.sx, &s.sy, &s.sz];
        let site = |op: &CMatrix, i: usize| embed(&[2, 2, 2, 2], &[i], op);
        let mut reference = CMatrix::zeros(16, 16);
        for i in 0..3 {
            for op in &ops {
                reference += site(op, i) * site(op, i + 1);
            }
        }
        for i in 0..4 {
            reference += site(&s.sx, i) * c(0.1) + site(&s.sz, i) * c(0.3);
        }
        assert!(spectral_norm(&(h - reference)) < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            TargetModel::Chain(ChainModel::xx(1, 1.0)).validate(),
            Err(Error::UnsupportedModel(_))
        ));
        let sb = SpinBosonModel { n_b: 1, mode_ghz: 1.0, spin_ghz: 1.0, coupling_ghz: 0.1 };
        assert!(TargetModel::SpinBoson(sb).validate().is_err());
        let m = TargetModel::Chain(ChainModel::xx(3, 1.0));
        assert!(trotterize(&m, 0.1, 0, 1, &HardwareRates::ideal()).is_err());
        assert!(trotterize(&m, 0.1, 1, 3, &HardwareRates::ideal()).is_err());
    }

    #[test]
    fn durations_follow_pi_convention() {
        let m = TargetModel::Chain(ChainModel::ising(2, 1.0, 0.0));
        let rates = HardwareRates { single_rabi_ghz: 0.01, two_body_ghz: 0.002, ideal: false };
        let seq = trotterize(&m, 0.25, 1, 1, &rates).unwrap();
        assert_eq!(seq.gates.len(), 1);
        // SᶻSᶻ spread is 1/2: θ = 2π·0.25·0.5 = π/4, t = θ/(2π·0.002).
        assert!((seq.gates[0].angle - PI / 4.0).abs() < 1e-12);
        assert!((seq.total_duration_ns() - 62.5).abs() < 1e-9);
        assert_eq!(trotterize(&m, 0.25, 1, 1, &HardwareRates::ideal()).unwrap().total_duration_ns(), 0.0);
    }
}
