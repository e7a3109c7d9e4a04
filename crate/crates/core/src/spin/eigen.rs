use nalgebra::DVector;
use num_complex::Complex64;

use super::hamiltonian::{build_hamiltonian, Axis, SpinSystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigh, hermiticity_defect, real_diagonal, CMatrix};

/// Energies closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL_GHZ: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-10;

/// Sorted spectrum of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending, GHz.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in the computational basis.
    pub states: CMatrix,
    /// ⟨S_z⟩ of every eigenstate, zero when no label operator was supplied.
    pub labels: Vec<f64>,
    drive_x: Option<CMatrix>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// U† A U.
    pub fn to_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        self.states.adjoint() * op * &self.states
    }

    /// U A U†.
    pub fn from_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        &self.states * op * self.states.adjoint()
    }

    pub fn state(&self, k: usize) -> DVector<Complex64> {
        self.states.column(k).into_owned()
    }

    /// U·diag(E)·U†.
    pub fn reconstruct(&self) -> CMatrix {
        self.from_eigenbasis(&real_diagonal(&self.energies))
    }

    /// Transition operator S_x expressed in the eigenbasis, when known.
    pub fn drive_operator(&self) -> Option<&CMatrix> {
        self.drive_x.as_ref()
    }

    pub fn with_drive_operator(mut self, sx_computational: &CMatrix) -> Self {
        self.drive_x = Some(self.to_eigenbasis(sx_computational));
        self
    }

    /// Spectrum with energies measured from the ground state.
    pub fn gaps_from_ground(&self) -> Vec<f64> {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies.iter().map(|e| e - e0).collect()
    }
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::contract("spin-core", "matrix is not square"));
    }
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::contract(
            "spin-core",
            format!("operator is not Hermitian (relative defect {defect:.3e})"),
        ));
    }
    Ok(())
}

/// Fixes the global phase of each column: the first component of maximal
/// modulus becomes real and positive.
fn fix_phases(states: &mut CMatrix) {
    for mut col in states.column_iter_mut() {
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(pivot) = col.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied() {
            let phase = pivot.conj() / pivot.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
}

/// Clusters of consecutive indices whose energies lie within the tolerance.
fn clusters(energies: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=energies.len() {
        if k == energies.len() || energies[k] - energies[k - 1] > DEGENERACY_TOL_GHZ {
            out.push(start..k);
            start = k;
        }
    }
    out
}

pub fn diagonalize(h: &CMatrix) -> Result<EigenSystem> {
    check_hermitian(h)?;
    let (energies, mut states) = eigh(h);
    fix_phases(&mut states);
    let n = energies.len();
    Ok(EigenSystem {
        energies,
        states,
        labels: vec![0.0; n],
        drive_x: None,
    })
}

/// Diagonalizes `h`, labelling eigenstates with ⟨S_z⟩ and resolving every
/// degenerate cluster into S_z eigenvectors ordered by descending ⟨S_z⟩.
pub fn diagonalize_spin(h: &CMatrix, sz: &CMatrix, sx: &CMatrix) -> Result<EigenSystem> {
    check_hermitian(h)?;
    let (energies, mut states) = eigh(h);
    for range in clusters(&energies) {
        if range.len() < 2 {
            continue;
        }
        let block = states.columns(range.start, range.len()).into_owned();
        let projected = block.adjoint() * sz * &block;
        let (_, rot) = eigh(&projected);
        // eigh sorts ascending; descending ⟨S_z⟩ wanted
        let mut rotated = &block * rot;
        let k = rotated.ncols();
        for c in 0..k / 2 {
            rotated.swap_columns(c, k - 1 - c);
        }
        states.columns_mut(range.start, range.len()).copy_from(&rotated);
    }
    fix_phases(&mut states);
    let labels = (0..energies.len())
        .map(|k| {
            let v = states.column(k);
            (v.adjoint() * sz * v)[(0, 0)].re
        })
        .collect();
    let eig = EigenSystem {
        energies,
        states,
        labels,
        drive_x: None,
    };
    Ok(eig.with_drive_operator(sx))
}

impl SpinSystemSpec {
    /// Eigensystem labelled by total ⟨S_z⟩, with the total electronic S_x
    /// as drive operator.
    pub fn eigensystem(&self) -> Result<EigenSystem> {
        let h = build_hamiltonian(self)?;
        let sz = self.total_spin(Axis::Z)?;
        let sx = self.total_electronic(Axis::X)?;
        diagonalize_spin(&h, &sz, &sx)
    }
}
