//! Open-system evolution under the Lindblad equation and resonant pulses.
//!
//! Energies and rates are ordinary frequencies (GHz), times are ns:
//!
//! dρ/dt = −i2π[H, ρ] + 2π Σ_k γ_k (2 L_k ρ L_k† − {L_k†L_k, ρ})
//!
//! so that a spin 1/2 with L = S_z loses coherence as exp(−t/T₂) with
//! T₂ = 1/(2πγ), and an (m, m′) coherence decays at 2πγ(m − m′)².

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    dagger, eigh, expm, hermiticity_defect, identity, kron, psd_sqrt, unvectorize, vectorize,
    CMatrix, I, ONE,
};
use crate::spin::diagonalize;

const MODULE: &str = "dynamics";

/// Dephasing rate γ (GHz) that gives coherence time T₂ (ns).
pub fn rate_from_t2(t2_ns: f64) -> f64 {
    1.0 / (2.0 * PI * t2_ns)
}

pub fn t2_from_rate(rate_ghz: f64) -> f64 {
    1.0 / (2.0 * PI * rate_ghz)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Checks unit trace (1e-9), hermiticity (1e-10) and λ_min ≥ −1e-8.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::contract(MODULE, "density matrix must be square and nonempty"));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > 1e-9 {
            return Err(Error::contract(MODULE, format!("trace {tr} differs from 1")));
        }
        if hermiticity_defect(&m) > 1e-10 {
            return Err(Error::contract(MODULE, "density matrix is not Hermitian"));
        }
        let (values, _) = eigh(&m);
        if values[0] < -1e-8 {
            return Err(Error::contract(
                MODULE,
                format!("density matrix has eigenvalue {:.3e}", values[0]),
            ));
        }
        Ok(DensityMatrix(m))
    }

    /// Wraps a matrix without validation, for intermediate (e.g. unnormalized
    /// post-measurement) states.
    pub fn unchecked(m: CMatrix) -> Self {
        DensityMatrix(m)
    }

    pub fn pure(psi: &nalgebra::DVector<Complex64>) -> Self {
        let n = psi.norm();
        let v = psi / Complex64::new(n, 0.0);
        DensityMatrix(&v * v.adjoint())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = nalgebra::DVector::zeros(dim);
        v[k] = ONE;
        Self::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(identity(dim) / Complex64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.0).0[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub operator: CMatrix,
    /// γ, GHz.
    pub rate_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    /// GHz.
    pub hamiltonian: CMatrix,
    pub jumps: Vec<JumpOperator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<JumpOperator>) -> Result<Self> {
        let d = hamiltonian.nrows();
        for j in &jumps {
            if !(j.rate_ghz >= 0.0) {
                return Err(Error::contract(MODULE, "jump rates must be non-negative"));
            }
            if j.operator.nrows() != d {
                return Err(Error::DimensionMismatch {
                    module: MODULE,
                    expected: d,
                    got: j.operator.nrows(),
                });
            }
        }
        Ok(LindbladModel { hamiltonian, jumps })
    }

    /// Pure dephasing through a single jump operator with coherence time T₂.
    pub fn dephasing(hamiltonian: CMatrix, operator: CMatrix, t2_ns: f64) -> Result<Self> {
        Self::new(
            hamiltonian,
            vec![JumpOperator {
                operator,
                rate_ghz: rate_from_t2(t2_ns),
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Same dissipators, Hamiltonian replaced.
    pub fn with_hamiltonian(&self, hamiltonian: CMatrix) -> Self {
        LindbladModel {
            hamiltonian,
            jumps: self.jumps.clone(),
        }
    }

    /// Column-stacked generator: d vec(ρ)/dt = 𝓛 vec(ρ).
    pub fn liouvillian(&self) -> CMatrix {
        liouvillian(&self.hamiltonian, &self.jumps)
    }
}

fn liouvillian(h: &CMatrix, jumps: &[JumpOperator]) -> CMatrix {
    let d = h.nrows();
    let id = identity(d);
    let two_pi = Complex64::new(2.0 * PI, 0.0);
    let mut gen = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I * two_pi);
    for j in jumps {
        if j.rate_ghz == 0.0 {
            continue;
        }
        let l = &j.operator;
        let ldl = dagger(l) * l;
        let dissipator = kron(&l.conjugate(), l) * Complex64::new(2.0, 0.0)
            - kron(&id, &ldl)
            - kron(&ldl.transpose(), &id);
        gen += dissipator * (two_pi * j.rate_ghz);
    }
    gen
}

/// A linear map on density matrices, as a column-stacked superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    matrix: CMatrix,
}

impl Channel {
    pub fn identity(dim: usize) -> Self {
        Channel {
            dim,
            matrix: identity(dim * dim),
        }
    }

    pub fn unitary(u: &CMatrix) -> Self {
        Channel {
            dim: u.nrows(),
            matrix: kron(&u.conjugate(), u),
        }
    }

    /// ρ ↦ P ρ P for a projector (or any Kraus-like operator) P.
    pub fn sandwich(p: &CMatrix) -> Self {
        Self::unitary(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = &self.matrix * vectorize(rho.matrix());
        let m = unvectorize(&v, self.dim);
        DensityMatrix(crate::linalg::hermitian_part(&m))
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Channel) -> Channel {
        Channel {
            dim: self.dim,
            matrix: &next.matrix * &self.matrix,
        }
    }

    pub fn sum(&self, other: &Channel) -> Channel {
        Channel {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }
}

fn check_dims(rho: &DensityMatrix, d: usize) -> Result<()> {
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            module: MODULE,
            expected: d,
            got: rho.dim(),
        });
    }
    Ok(())
}

/// exp(𝓛 t) as a channel.
pub fn lindblad_channel(model: &LindbladModel, t_ns: f64) -> Result<Channel> {
    if !(t_ns >= 0.0) {
        return Err(Error::contract(MODULE, format!("evolution time {t_ns} ns is negative")));
    }
    let d = model.dim();
    if t_ns == 0.0 {
        return Ok(Channel::identity(d));
    }
    let gen = model.liouvillian() * Complex64::new(t_ns, 0.0);
    Ok(Channel {
        dim: d,
        matrix: expm(&gen),
    })
}

pub fn evolve_lindblad(rho: &DensityMatrix, model: &LindbladModel, t_ns: f64) -> Result<DensityMatrix> {
    check_dims(rho, model.dim())?;
    if t_ns == 0.0 {
        return Ok(rho.clone());
    }
    Ok(lindblad_channel(model, t_ns)?.apply(rho))
}

/// Square-envelope resonant pulse on the (i, j) transition of the model's
/// eigenbasis. The rotation is exp(−iθ/2 (cos φ σ_x + sin φ σ_y)) with
/// σ_x = |i⟩⟨j| + |j⟩⟨i|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub transition: (usize, usize),
    /// θ, rad.
    pub angle: f64,
    /// φ, rad.
    pub phase: f64,
    pub duration_ns: f64,
    pub carrier_ghz: f64,
}

impl PulseSpec {
    /// Resonant pulse of the given angle at a fixed Rabi frequency, with the
    /// π-pulse convention t_π = 1/(2·rabi).
    pub fn resonant(energies: &[f64], i: usize, j: usize, angle: f64, phase: f64, rabi_ghz: f64) -> Self {
        PulseSpec {
            transition: (i, j),
            angle,
            phase,
            duration_ns: angle.abs() / (2.0 * PI * rabi_ghz),
            carrier_ghz: (energies[j] - energies[i]).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseMode {
    /// Zero duration, exact unitary.
    Ideal,
    /// Finite duration with the model's dissipators active.
    Finite,
}

fn two_level_generators(states: &CMatrix, i: usize, j: usize) -> (CMatrix, CMatrix, CMatrix) {
    let vi = states.column(i).into_owned();
    let vj = states.column(j).into_owned();
    let ij = &vi * vj.adjoint();
    let ji = &vj * vi.adjoint();
    let sx = &ij + &ji;
    let sy = &ij * (-I) + &ji * I;
    let nj = &vj * vj.adjoint();
    (sx, sy, nj)
}

fn pulse_axis(sx: &CMatrix, sy: &CMatrix, phase: f64) -> CMatrix {
    sx * Complex64::new(phase.cos(), 0.0) + sy * Complex64::new(phase.sin(), 0.0)
}

/// The ideal rotation of a pulse, exp(−iθ/2 n·σ) on its two-level subspace.
pub fn pulse_unitary(pulse: &PulseSpec, states: &CMatrix) -> Result<CMatrix> {
    let d = states.nrows();
    let (i, j) = pulse.transition;
    if i >= d || j >= d || i == j {
        return Err(Error::contract(
            MODULE,
            format!("unknown transition ({i}, {j}) for dimension {d}"),
        ));
    }
    let (sx, sy, nj) = two_level_generators(states, i, j);
    let axis = pulse_axis(&sx, &sy, pulse.phase);
    let vi = states.column(i).into_owned();
    let proj = &vi * vi.adjoint() + &nj;
    let half = pulse.angle / 2.0;
    Ok(identity(d) - &proj + proj * Complex64::new(half.cos(), 0.0) - axis * (I * half.sin()))
}

/// The channel implementing a pulse in the frame rotating with the model
/// Hamiltonian. Dissipators are carried over unchanged, which is exact when
/// they commute with the Hamiltonian.
pub fn pulse_channel(pulse: &PulseSpec, model: &LindbladModel, mode: PulseMode) -> Result<Channel> {
    let eig = diagonalize(&model.hamiltonian)?;
    pulse_channel_in(pulse, model, &eig.energies, &eig.states, mode)
}

/// As [`pulse_channel`], with the eigenbasis supplied by the caller.
pub fn pulse_channel_in(
    pulse: &PulseSpec,
    model: &LindbladModel,
    energies: &[f64],
    states: &CMatrix,
    mode: PulseMode,
) -> Result<Channel> {
    let d = model.dim();
    let (i, j) = pulse.transition;
    if i >= d || j >= d || i == j {
        return Err(Error::contract(
            MODULE,
            format!("unknown transition ({i}, {j}) for dimension {d}"),
        ));
    }
    match mode {
        PulseMode::Ideal => Ok(Channel::unitary(&pulse_unitary(pulse, states)?)),
        PulseMode::Finite => {
            let (sx, sy, nj) = two_level_generators(states, i, j);
            let axis = pulse_axis(&sx, &sy, pulse.phase);
            if !(pulse.duration_ns > 0.0) {
                return Err(Error::contract(MODULE, "finite pulse needs a positive duration"));
            }
            let omega = pulse.angle / (2.0 * PI * pulse.duration_ns);
            let detuning = pulse.carrier_ghz - (energies[j] - energies[i]).abs();
            let h_rf = axis * Complex64::new(omega / 2.0, 0.0) - nj * Complex64::new(detuning, 0.0);
            lindblad_channel(&model.with_hamiltonian(h_rf), pulse.duration_ns)
        }
    }
}

pub fn apply_pulse(
    rho: &DensityMatrix,
    pulse: &PulseSpec,
    model: &LindbladModel,
    mode: PulseMode,
) -> Result<DensityMatrix> {
    check_dims(rho, model.dim())?;
    Ok(pulse_channel(pulse, model, mode)?.apply(rho))
}

/// Uhlmann fidelity (tr √(√ρ σ √ρ))², clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(sigma, rho.dim())?;
    let sr = psd_sqrt(rho.matrix());
    let inner = &sr * sigma.matrix() * &sr;
    let (values, _) = eigh(&inner);
    let root: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// ⟨ψ|ρ|ψ⟩ for a normalized ψ.
pub fn pure_fidelity(rho: &DensityMatrix, psi: &nalgebra::DVector<Complex64>) -> f64 {
    crate::linalg::expectation(rho.matrix(), psi).re.clamp(0.0, 1.0)
}
