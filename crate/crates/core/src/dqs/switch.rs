use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, propagator, CMatrix};
use crate::spin::{Axis, SpinSystemSpec};

/// Detunings below this count as the driven line itself.
const SAME_LINE_GHZ: f64 = 1e-9;

/// Resonant 2π pulse on the switch, tuned to its transition frequency when
/// the qubits are in `target` (bits of qubit 1 and qubit 2, 1 = m = +1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchDrive {
    pub target: [u8; 2],
    /// Rabi frequency for a matrix element of 1/2, GHz.
    pub rabi_ghz: f64,
}

/// The induced two-qubit gate, in the frame rotating with the static
/// Hamiltonian. Index c = 2·b₁ + b₂.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchGate {
    /// ⟨c, ⇓|U|c′, ⇓⟩.
    pub unitary: CMatrix,
    pub phases: [f64; 4],
    /// φ₁₁ − φ₁₀ − φ₀₁ + φ₀₀, wrapped to (−π, π].
    pub conditional_phase: f64,
    /// Largest probability of leaving the switch excited.
    pub leakage: f64,
    pub entangling_power: f64,
    pub duration_ns: f64,
    /// Switch frequency of each qubit configuration, GHz.
    pub switch_frequencies: [f64; 4],
}

fn wrap(phi: f64) -> f64 {
    let mut x = phi % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Simulates the conditional excursion of the switch (site 1) between two
/// qubits (sites 0 and 2), all spin 1/2.
pub fn switch_cphase(register: &SpinSystemSpec, drive: &SwitchDrive) -> Result<SwitchGate> {
    let bad = |m: String| Error::GateSynthesis(m);
    if register.sites.len() != 3 || register.sites.iter().any(|s| s.spin.twice() != 1 || s.nuclear.is_some()) {
        return Err(bad("register must be three electronic spins 1/2: qubit, switch, qubit".into()));
    }
    if !(drive.rabi_ghz > 0.0) || drive.target.iter().any(|&b| b > 1) {
        return Err(bad(format!("invalid drive {drive:?}")));
    }
    let eig = register.eigensystem()?;
    let sx = eig.to_eigenbasis(&register.electronic_operator(1, Axis::X)?);

    // Dominant product state of each eigenvector; product index digits are
    // spin basis indices with 0 meaning m = +1/2.
    let mut eigen_of = [usize::MAX; 8];
    for col in 0..8 {
        let q = (0..8)
            .max_by(|&a, &b| eig.states[(a, col)].norm_sqr().total_cmp(&eig.states[(b, col)].norm_sqr()))
            .expect("nonempty");
        if eigen_of[q] != usize::MAX {
            return Err(bad("eigenstates too strongly mixed to label qubits and switch".into()));
        }
        eigen_of[q] = col;
    }
    let product = |b1: u8, switch_up: bool, b2: u8| -> usize {
        let k = |bit: u8| (1 - bit) as usize;
        eigen_of[k(b1) * 4 + if switch_up { 0 } else { 2 } + k(b2)]
    };
    let configs: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let ground: Vec<usize> = configs.iter().map(|&(a, b)| product(a, false, b)).collect();
    let excited: Vec<usize> = configs.iter().map(|&(a, b)| product(a, true, b)).collect();
    let mut freqs = [0.0; 4];
    for c in 0..4 {
        freqs[c] = eig.energies[excited[c]] - eig.energies[ground[c]];
    }
    let t_idx = (2 * drive.target[0] + drive.target[1]) as usize;
    let f_drive = freqs[t_idx];

    let omega = drive.rabi_ghz;
    let mut h = CMatrix::zeros(8, 8);
    for c in 0..4 {
        let delta = freqs[c] - f_drive;
        if c != t_idx && delta.abs() > SAME_LINE_GHZ && delta.abs() <= omega {
            return Err(bad(format!(
                "switch line of configuration {:?} is {:.3e} GHz from the driven line, within the Rabi width {omega} GHz",
                configs[c],
                delta.abs()
            )));
        }
        let (g, e) = (ground[c], excited[c]);
        h[(e, e)] += Complex64::new(delta, 0.0);
        let coupling = sx[(e, g)] * omega;
        h[(e, g)] += coupling;
        h[(g, e)] += coupling.conj();
    }
    let duration_ns = 1.0 / omega;
    let u = propagator(&h, duration_ns);
    let block = CMatrix::from_fn(4, 4, |r, c| u[(ground[r], ground[c])]);
    let mut phases = [0.0; 4];
    let mut leakage = 0.0f64;
    for c in 0..4 {
        phases[c] = block[(c, c)].arg();
        let kept: f64 = (0..4).map(|r| block[(r, c)].norm_sqr()).sum();
        leakage = leakage.max(1.0 - kept);
    }
    let conditional_phase = wrap(phases[3] - phases[2] - phases[1] + phases[0]);
    let diag = CMatrix::from_diagonal(&DVector::from_iterator(4, phases.iter().map(|&p| Complex64::from_polar(1.0, p))));
    Ok(SwitchGate {
        unitary: block,
        phases,
        conditional_phase,
        leakage: leakage.max(0.0),
        entangling_power: entangling_power(&diag),
        duration_ns,
        switch_frequencies: freqs,
    })
}

/// e_p = (2/9)(1 − |G₁|) with the Makhlin invariant
/// G₁ = tr²(m)/(16 det U), m = U_Bᵀ U_B in the magic basis.
pub fn entangling_power(u: &CMatrix) -> f64 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, FRAC_1_SQRT_2);
    let o = Complex64::new(0.0, 0.0);
    let q = CMatrix::from_row_slice(4, 4, &[h, o, o, i, o, i, h, o, o, i, -h, o, h, o, o, -i]);
    let ub = q.adjoint() * u * &q;
    let m = ub.transpose() * &ub;
    let tr = m.trace();
    let g1 = tr * tr / (u.determinant() * 16.0);
    (2.0 / 9.0) * (1.0 - g1.norm())
}

fn hadamard() -> CMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Fidelity with (|00⟩ + |11⟩)/√2 of H₂ · Z-corrections · gate · (H ⊗ H)|00⟩,
/// where the local Z rotations remove every phase but the conditional one.
pub fn bell_state_fidelity(gate: &SwitchGate) -> f64 {
    let p = gate.phases;
    let z = |a: f64| CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, a)]));
    let correction = kron(&z(-(p[2] - p[0])), &z(-(p[1] - p[0])));
    let id = CMatrix::identity(2, 2);
    let hh = kron(&hadamard(), &hadamard());
    let mut psi = DVector::<Complex64>::zeros(4);
    psi[0] = Complex64::new(1.0, 0.0);
    let out = kron(&id, &hadamard()) * correction * &gate.unitary * hh * psi;
    let mut bell = DVector::<Complex64>::zeros(4);
    bell[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    bell[3] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    (bell.adjoint() * out)[(0, 0)].norm_sqr()
}
