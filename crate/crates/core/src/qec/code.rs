use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, CMatrix};
use crate::spin::{spin_operators, Spin};

/// Tolerance the solved code words must meet.
pub const SOLVER_TOLERANCE: f64 = 1e-9;

/// A logical qubit embedded in a spin-S qudit, protected against the error
/// set {1, S_z, …, S_z^k}.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditCode {
    pub spin: Spin,
    pub order: usize,
    /// Real amplitudes in the S_z basis (index 0 is m = S).
    pub words: [DVector<f64>; 2],
    pub kl_residual: f64,
}

impl QuditCode {
    /// Wrap arbitrary words and score them with the checker.
    pub fn from_words(spin: Spin, order: usize, zero: DVector<f64>, one: DVector<f64>) -> Result<Self> {
        let d = spin.dim();
        if zero.len() != d || one.len() != d {
            return Err(Error::DimensionMismatch {
                module: "qec",
                expected: d,
                got: zero.len().max(one.len()),
            });
        }
        let mut code = QuditCode {
            spin,
            order,
            words: [zero, one],
            kl_residual: 0.0,
        };
        code.kl_residual = check_knill_laflamme(&code);
        Ok(code)
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// E_p = S_z^p for p = 0..=k.
    pub fn error_set(&self) -> Vec<CMatrix> {
        let sz = spin_operators(self.spin).sz;
        let mut out = vec![CMatrix::identity(self.dim(), self.dim())];
        for p in 1..=self.order {
            let next = &out[p - 1] * &sz;
            out.push(next);
        }
        out
    }

    pub fn word(&self, a: usize) -> DVector<Complex64> {
        self.words[a].map(|x| Complex64::new(x, 0.0))
    }

    /// Indices of the levels carrying weight in word `a`, in the order the
    /// solver placed them.
    pub fn support(&self, a: usize) -> Vec<usize> {
        support_levels(self.spin, self.order)
            .into_iter()
            .map(|(k, _)| if a == 0 { k } else { self.dim() - 1 - k })
            .collect()
    }
}

/// The k+1 largest |m| with alternating signs, starting at +S. Returns
/// (basis index, m).
fn support_levels(spin: Spin, order: usize) -> Vec<(usize, f64)> {
    let s = spin.value();
    (0..=order)
        .map(|i| {
            let mag = s - i as f64;
            let m = if i % 2 == 0 { mag } else { -mag };
            (spin.index_of(m).expect("support level inside the multiplet"), m)
        })
        .collect()
}

/// Solve ⟨a_L|S_z^p|b_L⟩ = c_p δ_ab for p = 0..2k with real amplitudes and
/// |1_L⟩ the m → −m image of |0_L⟩.
///
/// Parity makes the even moments equal and the words disjoint, so what is
/// left is the vanishing of the odd moments of |0_L⟩. On the alternating
/// support this is linear in the weights w = c², and Newton polishing on the
/// amplitudes removes the residual from the linear solve.
pub fn solve_code_words(spin: Spin, order: usize) -> Result<QuditCode> {
    let d = spin.dim();
    if d < 2 * (order + 1) {
        return Err(Error::Capacity(format!(
            "spin {spin} has {d} levels, order {order} needs at least {}",
            2 * (order + 1)
        )));
    }
    let levels = support_levels(spin, order);
    let n = levels.len();
    let xs: Vec<f64> = levels.iter().map(|&(_, m)| m).collect();
    // Unknowns scaled by S keep the moment matrix well conditioned.
    let scale = spin.value();
    let us: Vec<f64> = xs.iter().map(|x| x / scale).collect();

    let moments = |pow: i32| us.iter().map(move |u| u.powi(pow));
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (col, _) in us.iter().enumerate() {
        a[(0, col)] = 1.0;
    }
    b[0] = 1.0;
    for r in 1..n {
        let pow = 2 * r as i32 - 1;
        for (col, v) in moments(pow).enumerate() {
            a[(r, col)] = v;
        }
    }
    let w = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Capacity(format!("moment system for spin {spin}, order {order} is singular")))?;
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Capacity(format!(
            "no real code words on the alternating support for spin {spin}, order {order}"
        )));
    }

    let mut c = w.map(f64::sqrt);
    for _ in 0..8 {
        let mut f = DVector::<f64>::zeros(n);
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            f[0] += c[i] * c[i];
            jac[(0, i)] = 2.0 * c[i];
            for r in 1..n {
                let pow = 2 * r as i32 - 1;
                let up = us[i].powi(pow);
                f[r] += c[i] * c[i] * up;
                jac[(r, i)] = 2.0 * c[i] * up;
            }
        }
        f[0] -= 1.0;
        if f.amax() < 1e-15 {
            break;
        }
        match jac.lu().solve(&f) {
            Some(step) => c -= step,
            None => break,
        }
    }

    let mut zero = DVector::<f64>::zeros(d);
    for (&(k, _), &amp) in levels.iter().zip(c.iter()) {
        zero[k] = amp;
    }
    let norm = zero.norm();
    zero /= norm;
    let one = DVector::from_iterator(d, (0..d).map(|k| zero[d - 1 - k]));
    let code = QuditCode::from_words(spin, order, zero, one)?;
    if code.kl_residual > SOLVER_TOLERANCE {
        return Err(Error::Capacity(format!(
            "solver residual {:.3e} above tolerance for spin {spin}, order {order}",
            code.kl_residual
        )));
    }
    Ok(code)
}

/// max over (a, b, p, q) of |⟨a_L|E_p†E_q|b_L⟩ − c_pq δ_ab|, with c_pq the
/// mean of the two diagonal values. Works from the raw matrices only.
pub fn check_knill_laflamme(code: &QuditCode) -> f64 {
    let ops = code.error_set();
    let words = [code.word(0), code.word(1)];
    let mut worst = 0.0f64;
    for ep in &ops {
        for eq in &ops {
            let m = dagger(ep) * eq;
            let el = |a: usize, b: usize| (words[a].adjoint() * &m * &words[b])[(0, 0)];
            let m00 = el(0, 0);
            let m11 = el(1, 1);
            let c = (m00 + m11) * 0.5;
            worst = worst
                .max((m00 - c).norm())
                .max((m11 - c).norm())
                .max(el(0, 1).norm())
                .max(el(1, 0).norm());
        }
    }
    // Normalization of the words themselves.
    let n0 = (words[0].norm() - 1.0).abs();
    let n1 = (words[1].norm() - 1.0).abs();
    worst.max(n0).max(n1)
}
