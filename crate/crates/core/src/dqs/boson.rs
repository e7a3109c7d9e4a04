use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{commutator, dagger, CMatrix};
use crate::spin::Spin;

/// a on span{|0⟩ … |n_b − 1⟩}: ⟨n|a|n+1⟩ = √(n+1).
pub fn truncated_annihilation(n_b: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n_b, n_b);
    for n in 0..n_b.saturating_sub(1) {
        a[(n, n + 1)] = Complex64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    a
}

/// Fock levels placed on the lowest qudit eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonEncoding {
    pub n_b: usize,
    pub qudit_dim: usize,
    /// Qudit eigenstate index of each Fock state.
    pub level_map: Vec<usize>,
    /// Truncated annihilation operator in the Fock basis.
    pub annihilation: CMatrix,
}

impl BosonEncoding {
    pub fn creation(&self) -> CMatrix {
        dagger(&self.annihilation)
    }

    /// [a, a†] − 1 on the truncated space.
    pub fn commutator_defect(&self) -> CMatrix {
        commutator(&self.annihilation, &self.creation()) - CMatrix::identity(self.n_b, self.n_b)
    }

    /// A Fock-basis operator carried onto the qudit eigenbasis, zero on
    /// unused levels.
    pub fn to_qudit(&self, op: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.qudit_dim, self.qudit_dim);
        for (r, &qr) in self.level_map.iter().enumerate() {
            for (c, &qc) in self.level_map.iter().enumerate() {
                out[(qr, qc)] = op[(r, c)];
            }
        }
        out
    }

    /// The inverse restriction.
    pub fn from_qudit(&self, op: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.n_b, self.n_b, |r, c| op[(self.level_map[r], self.level_map[c])])
    }
}

pub fn boson_qudit_encoding(n_b: usize, qudit_spin: Spin) -> Result<BosonEncoding> {
    let d = qudit_spin.dim();
    if n_b < 2 {
        return Err(Error::UnsupportedModel(format!("boson truncation needs n_b ≥ 2, got {n_b}")));
    }
    if d < n_b {
        return Err(Error::EncodingCapacity(format!(
            "spin {qudit_spin} has {d} levels, fewer than n_b = {n_b}"
        )));
    }
    Ok(BosonEncoding {
        n_b,
        qudit_dim: d,
        level_map: (0..n_b).collect(),
        annihilation: truncated_annihilation(n_b),
    })
}
