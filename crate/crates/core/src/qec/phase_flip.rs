use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{fidelity, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{dagger, kron_all, CMatrix};

/// Z errors applied to the encoded register.
#[derive(Debug, Clone, PartialEq)]
pub enum ZErrorModel {
    /// Z on exactly these qubits; [0, 1] is a correlated Z⊗Z.
    Pattern(Vec<usize>),
    /// Each qubit dephases independently with flip probability p.
    Independent(f64),
    /// With probability p, Z⊗Z on the given pair.
    Correlated { p: f64, pair: (usize, usize) },
}

#[derive(Debug, Clone)]
pub struct PhaseFlipOutcome {
    pub state: DensityMatrix,
    pub fidelity: f64,
    pub success: bool,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pauli_z() -> CMatrix {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

fn pauli_x() -> CMatrix {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn on_qubits(op: &CMatrix, qubits: &[usize]) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let factors: Vec<&CMatrix> = (0..3).map(|q| if qubits.contains(&q) { op } else { &id }).collect();
    kron_all(factors)
}

/// |0_L⟩ = |+++⟩, |1_L⟩ = |−−−⟩ as the columns of an 8×2 isometry.
fn encoder() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = nalgebra::DVector::from_vec(vec![c(h), c(h)]);
    let minus = nalgebra::DVector::from_vec(vec![c(h), c(-h)]);
    let triple = |v: &nalgebra::DVector<Complex64>| v.kronecker(v).kronecker(v);
    let mut enc = CMatrix::zeros(8, 2);
    enc.set_column(0, &triple(&plus));
    enc.set_column(1, &triple(&minus));
    enc
}

fn kraus(model: &ZErrorModel) -> Result<Vec<CMatrix>> {
    let z = pauli_z();
    let check_p = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(Error::contract("qec", format!("error probability {p} outside [0, 1]")))
        }
    };
    match model {
        ZErrorModel::Pattern(qs) => {
            if let Some(q) = qs.iter().find(|&&q| q >= 3) {
                return Err(Error::contract("qec", format!("qubit {q} out of range for 3 qubits")));
            }
            Ok(vec![on_qubits(&z, qs)])
        }
        ZErrorModel::Independent(p) => {
            check_p(*p)?;
            let mut ops = Vec::new();
            for mask in 0u8..8 {
                let qs: Vec<usize> = (0..3).filter(|q| mask >> q & 1 == 1).collect();
                let weight = p.powi(qs.len() as i32) * (1.0 - p).powi(3 - qs.len() as i32);
                ops.push(on_qubits(&z, &qs) * c(weight.sqrt()));
            }
            Ok(ops)
        }
        ZErrorModel::Correlated { p, pair } => {
            check_p(*p)?;
            if pair.0 >= 3 || pair.1 >= 3 || pair.0 == pair.1 {
                return Err(Error::contract("qec", format!("invalid qubit pair {pair:?}")));
            }
            Ok(vec![
                CMatrix::identity(8, 8) * c((1.0 - p).sqrt()),
                on_qubits(&z, &[pair.0, pair.1]) * c(p.sqrt()),
            ])
        }
    }
}

/// Encode, apply the Z-error channel, measure X₁X₂ and X₂X₃, apply the
/// majority correction, decode.
pub fn phase_flip_3q(rho_logical: &DensityMatrix, errors: &ZErrorModel) -> Result<PhaseFlipOutcome> {
    if rho_logical.dim() != 2 {
        return Err(Error::DimensionMismatch {
            module: "qec",
            expected: 2,
            got: rho_logical.dim(),
        });
    }
    let enc = encoder();
    let rho = &enc * rho_logical.matrix() * dagger(&enc);
    let noisy = kraus(errors)?
        .iter()
        .fold(CMatrix::zeros(8, 8), |acc, k| acc + k * &rho * dagger(k));

    let x = pauli_x();
    let id8 = CMatrix::identity(8, 8);
    let s12 = on_qubits(&x, &[0, 1]);
    let s23 = on_qubits(&x, &[1, 2]);
    let half = c(0.5);
    let mut corrected = CMatrix::zeros(8, 8);
    for (a, b) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        let proj = (&id8 + &s12 * c(a)) * half * ((&id8 + &s23 * c(b)) * half);
        let fix = match (a < 0.0, b < 0.0) {
            (false, false) => id8.clone(),
            (true, false) => on_qubits(&pauli_z(), &[0]),
            (true, true) => on_qubits(&pauli_z(), &[1]),
            (false, true) => on_qubits(&pauli_z(), &[2]),
        };
        let k = fix * proj;
        corrected += &k * &noisy * dagger(&k);
    }
    let out = DensityMatrix::unchecked(dagger(&enc) * corrected * &enc);
    let f = fidelity(rho_logical, &out)?;
    Ok(PhaseFlipOutcome {
        state: out,
        fidelity: f,
        success: f > 1.0 - 1e-9,
    })
}

/// Probability that the corrected |0_L⟩ comes back as |1_L⟩.
pub fn logical_error_probability(errors: &ZErrorModel) -> Result<f64> {
    let out = phase_flip_3q(&DensityMatrix::basis(2, 0), errors)?;
    Ok(out.state.matrix()[(1, 1)].re.max(0.0))
}
