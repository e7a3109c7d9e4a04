use num_complex::Complex64;

use super::boson::truncated_annihilation;
use super::trotter::{trotterize, HardwareRates, ResourceEstimate, SpinBosonModel, TargetModel};
use crate::error::{Error, Result};
use crate::linalg::{dagger, CMatrix};

/// A Pauli string on q qubits, one letter per qubit (0 = I, 1 = X, 2 = Y, 3 = Z),
/// qubit 0 the most significant bit.
type PauliString = Vec<u8>;

fn pauli_element(letter: u8, row: usize, col: usize) -> Complex64 {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    match (letter, row, col) {
        (0, r, c) => if r == c { l } else { o },
        (1, r, c) => if r != c { l } else { o },
        (2, 0, 1) => -i,
        (2, 1, 0) => i,
        (2, _, _) => o,
        (3, r, c) => if r != c { o } else if r == 0 { l } else { -l },
        _ => unreachable!("Pauli letters are 0..=3"),
    }
}

/// Nonzero coefficients tr(P·M)/2^q of an operator on q qubits.
pub fn pauli_expansion(m: &CMatrix) -> Result<Vec<(PauliString, Complex64)>> {
    let d = m.nrows();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::contract(
            "dqs-compiler",
            format!("binary encoding needs a power-of-two dimension, got {d}"),
        ));
    }
    let q = d.trailing_zeros() as usize;
    let mut out = Vec::new();
    for code in 0..4usize.pow(q as u32) {
        let letters: PauliString = (0..q).map(|k| ((code >> (2 * (q - 1 - k))) & 3) as u8).collect();
        let xmask = letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 1 || l == 2)
            .fold(0usize, |acc, (k, _)| acc | 1 << (q - 1 - k));
        let mut tr = Complex64::new(0.0, 0.0);
        for row in 0..d {
            let col = row ^ xmask;
            let mut p = Complex64::new(1.0, 0.0);
            for (k, &l) in letters.iter().enumerate() {
                let bit = |x: usize| (x >> (q - 1 - k)) & 1;
                p *= pauli_element(l, bit(row), bit(col));
            }
            // tr(P M) = Σ_row P[row, col] M[col, row]
            tr += p * m[(col, row)];
        }
        let coeff = tr / d as f64;
        if coeff.norm() > 1e-12 {
            out.push((letters, coeff));
        }
    }
    Ok(out)
}

fn weight(p: &PauliString) -> usize {
    p.iter().filter(|&&l| l != 0).count()
}

/// Two-body gates for exp(−iθP) with P of weight w: one native two-body
/// rotation conjugated by w − 2 CNOTs on each side, 2w − 3 in total.
/// Weight-1 strings are single-qubit.
fn two_body_cost(w: usize) -> usize {
    if w <= 1 {
        0
    } else {
        2 * w - 3
    }
}

/// Per-Trotter-step counts for the same spin-boson step in the qudit
/// encoding (compiled sequence) and in the base-2 qubit encoding (Pauli
/// strings counted, not executed).
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceComparison {
    pub qudit: ResourceEstimate,
    pub binary: ResourceEstimate,
}

pub fn resource_compare(model: &SpinBosonModel, rates: &HardwareRates) -> Result<ResourceComparison> {
    let n_b = model.n_b;
    if !n_b.is_power_of_two() || n_b < 2 {
        return Err(Error::contract(
            "dqs-compiler",
            format!("binary encoding needs n_b a power of 2, got {n_b}"),
        ));
    }
    let target = TargetModel::SpinBoson(*model);
    let qudit = trotterize(&target, 1.0, 1, 1, rates)?.resources();

    let a = truncated_annihilation(n_b);
    let number = dagger(&a) * &a;
    let field = &a + dagger(&a);
    let mut single = 1; // the spin term σ_z
    let mut two_body = 0;
    for (p, _) in pauli_expansion(&number)? {
        match weight(&p) {
            0 => {}
            1 => single += 1,
            w => two_body += two_body_cost(w),
        }
    }
    for (p, _) in pauli_expansion(&field)? {
        // σ_x on the spin times P on the mode register.
        let w = weight(&p) + 1;
        two_body += two_body_cost(w);
    }
    let mode_qubits = n_b.trailing_zeros() as usize;
    let pi_time = |rate: f64| if rates.ideal { 0.0 } else { 0.5 / rate };
    let binary = ResourceEstimate {
        single_qudit: single,
        two_body,
        switch_cphase: 0,
        total_duration_ns: single as f64 * pi_time(rates.single_rabi_ghz)
            + two_body as f64 * pi_time(rates.two_body_ghz),
        hardware_dims: vec![2; 1 + mode_qubits],
        target_dim: 2 * n_b,
    };
    Ok(ResourceComparison { qudit, binary })
}
