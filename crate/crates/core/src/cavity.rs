//! Photon-mediated coupling of two qudits through a single cavity mode.
//!
//! Each qudit is described in its own eigenbasis. The effective interaction
//! is assembled from second-order virtual-photon exchange,
//!
//! H_J = Ω Σ λ₁^α λ₂^β (1/(E_β² − Ω²) + 1/(E_α² − Ω²)) X₁^α X₂^β,
//!
//! with λ^(a,b) = G⟨a|S_x|b⟩ and X^(a,b) = |a⟩⟨b|, and checked against exact
//! diagonalization of the spin-photon Hamiltonian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, hermitian_part, hermiticity_defect, identity, kron, kron_all, propagator, real_diagonal,
    spectral_norm, CMatrix,
};
use crate::spin::{Axis, EigenSystem, SpinSystemSpec, DEFAULT_MAX_DIM};

const MODULE: &str = "cavity-bus";

/// Gaps whose squared distance to Ω² falls below this are singular.
const SINGULAR_DENOMINATOR: f64 = 1e-12;

/// Dispersive certificate: every used gap must sit farther than this many
/// multiples of max|λ| from the cavity.
pub const DISPERSIVE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    pub frequency_ghz: f64,
    pub kappa_ghz: f64,
    pub n_max: usize,
}

impl CavityMode {
    pub fn new(frequency_ghz: f64, kappa_ghz: f64, n_max: usize) -> Result<Self> {
        if !(frequency_ghz > 0.0) || !(kappa_ghz >= 0.0) || n_max < 2 {
            return Err(Error::contract(
                MODULE,
                format!("cavity needs Ω > 0, κ ≥ 0 and n_max ≥ 2 (got {frequency_ghz}, {kappa_ghz}, {n_max})"),
            ));
        }
        Ok(CavityMode {
            frequency_ghz,
            kappa_ghz,
            n_max,
        })
    }
}

/// Coupling of one qudit to the cavity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPhotonCoupling {
    pub g_ghz: f64,
    pub axis: Axis,
}

impl SpinPhotonCoupling {
    pub fn new(g_ghz: f64) -> Result<Self> {
        if !(g_ghz >= 0.0) {
            return Err(Error::contract(MODULE, format!("coupling G = {g_ghz} must be non-negative")));
        }
        Ok(SpinPhotonCoupling { g_ghz, axis: Axis::X })
    }
}

/// A qudit as the cavity sees it: its spectrum and the coupling operator
/// in its eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityQudit {
    pub energies: Vec<f64>,
    pub operator: CMatrix,
    pub coupling: SpinPhotonCoupling,
}

impl CavityQudit {
    pub fn new(eig: &EigenSystem, operator_computational: &CMatrix, coupling: SpinPhotonCoupling) -> Self {
        CavityQudit {
            energies: eig.energies.clone(),
            operator: eig.to_eigenbasis(operator_computational),
            coupling,
        }
    }

    /// Couples through the total electronic spin along the coupling axis.
    pub fn from_spec(spec: &SpinSystemSpec, coupling: SpinPhotonCoupling) -> Result<Self> {
        let eig = spec.eigensystem()?;
        let op = spec.total_electronic(coupling.axis)?;
        Ok(Self::new(&eig, &op, coupling))
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn with_g(&self, g_ghz: f64) -> Self {
        CavityQudit {
            coupling: SpinPhotonCoupling {
                g_ghz,
                ..self.coupling
            },
            ..self.clone()
        }
    }
}

/// λ^(a,b) = G⟨a|S|b⟩ over all ordered eigenstate pairs.
pub fn lambda_coefficients(q: &CavityQudit) -> CMatrix {
    &q.operator * Complex64::new(q.coupling.g_ghz, 0.0)
}

/// Which ordered pairs enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumConvention {
    /// Positive gaps on qudit 1, every nonzero gap on qudit 2, plus the
    /// adjoint.
    #[default]
    PositiveGaps,
    /// Every ordered pair, diagonal ones included, then the Hermitian part.
    RawSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCoupling {
    /// Two-qudit operator on the product eigenbasis |a₁⟩⊗|a₂⟩, GHz.
    pub hamiltonian: CMatrix,
    pub energies: [Vec<f64>; 2],
    /// max|λ| / min |E_gap − Ω| over the pairs that enter the sum.
    pub validity_ratio: f64,
    pub hermiticity_defect: f64,
    pub convention: SumConvention,
}

impl EffectiveCoupling {
    pub fn dims(&self) -> (usize, usize) {
        (self.energies[0].len(), self.energies[1].len())
    }

    /// ⟨a b|H_J|c d⟩.
    pub fn element(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        let (_, d2) = self.dims();
        self.hamiltonian[(a * d2 + b, c * d2 + d)]
    }

    /// Both qudits' bare energies plus the interaction.
    pub fn total_hamiltonian(&self) -> CMatrix {
        let (d1, d2) = self.dims();
        kron(&real_diagonal(&self.energies[0]), &identity(d2))
            + kron(&identity(d1), &real_diagonal(&self.energies[1]))
            + &self.hamiltonian
    }
}

fn gap_is_zero(e: f64) -> bool {
    e.abs() < 1e-12
}

pub fn effective_hamiltonian(
    q1: &CavityQudit,
    q2: &CavityQudit,
    cavity: &CavityMode,
    convention: SumConvention,
) -> Result<EffectiveCoupling> {
    let omega = cavity.frequency_ghz;
    let (l1, l2) = (lambda_coefficients(q1), lambda_coefficients(q2));
    let (d1, d2) = (q1.dim(), q2.dim());
    let gap = |q: &CavityQudit, a: usize, b: usize| q.energies[a] - q.energies[b];
    let include = |q: &CavityQudit, a: usize, b: usize, first: bool| -> bool {
        let e = gap(q, a, b);
        match convention {
            SumConvention::PositiveGaps if first => e > 0.0 && !gap_is_zero(e),
            SumConvention::PositiveGaps => !gap_is_zero(e),
            SumConvention::RawSum => true,
        }
    };

    // Dispersive certificate over every pair that carries weight.
    let lam_max = l1.iter().chain(l2.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    let mut closest = f64::INFINITY;
    for (q, l) in [(q1, &l1), (q2, &l2)] {
        for a in 0..q.dim() {
            for b in 0..q.dim() {
                if l[(a, b)].norm() <= 1e-15 * lam_max.max(f64::MIN_POSITIVE) || a == b {
                    continue;
                }
                let e = gap(q, a, b);
                if gap_is_zero(e) {
                    continue;
                }
                if (e * e - omega * omega).abs() < SINGULAR_DENOMINATOR {
                    return Err(Error::Resonance(format!(
                        "gap {e:.9} GHz makes E² − Ω² singular"
                    )));
                }
                closest = closest.min((e.abs() - omega).abs());
            }
        }
    }
    let validity_ratio = if lam_max == 0.0 { 0.0 } else { lam_max / closest };
    if validity_ratio * DISPERSIVE_FACTOR >= 1.0 {
        return Err(Error::Resonance(format!(
            "a used gap lies within {DISPERSIVE_FACTOR}·max|λ| of Ω = {omega} GHz (r = {validity_ratio:.4})"
        )));
    }

    let mut h = CMatrix::zeros(d1 * d2, d1 * d2);
    for a1 in 0..d1 {
        for a2 in 0..d1 {
            let la = l1[(a1, a2)];
            if la == Complex64::new(0.0, 0.0) || !include(q1, a1, a2, true) {
                continue;
            }
            let ea = gap(q1, a1, a2);
            for b1 in 0..d2 {
                for b2 in 0..d2 {
                    let lb = l2[(b1, b2)];
                    if lb == Complex64::new(0.0, 0.0) || !include(q2, b1, b2, false) {
                        continue;
                    }
                    let eb = gap(q2, b1, b2);
                    let w = omega * (1.0 / (eb * eb - omega * omega) + 1.0 / (ea * ea - omega * omega));
                    h[(a1 * d2 + b1, a2 * d2 + b2)] += la * lb * w;
                }
            }
        }
    }
    let h = match convention {
        SumConvention::PositiveGaps => &h + h.adjoint(),
        SumConvention::RawSum => h,
    };
    let h = hermitian_part(&h);
    Ok(EffectiveCoupling {
        hermiticity_defect: hermiticity_defect(&h),
        hamiltonian: h,
        energies: [q1.energies.clone(), q2.energies.clone()],
        validity_ratio,
        convention,
    })
}

/// H − (Tr₂H/d₂)⊗1 − 1⊗(Tr₁H/d₁) + Tr H/(d₁d₂): the part of a two-qudit
/// operator that is not a sum of local terms.
pub fn interaction_part(h: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    let mut t1 = CMatrix::zeros(d2, d2);
    let mut t2 = CMatrix::zeros(d1, d1);
    for a in 0..d1 {
        for b in 0..d2 {
            for c in 0..d1 {
                for d in 0..d2 {
                    let v = h[(a * d2 + b, c * d2 + d)];
                    if a == c {
                        t1[(b, d)] += v;
                    }
                    if b == d {
                        t2[(a, c)] += v;
                    }
                }
            }
        }
    }
    let tr = crate::linalg::trace(h);
    let scale = |m: CMatrix, x: usize| m / Complex64::new(x as f64, 0.0);
    h - kron(&scale(t2, d2), &identity(d2)) - kron(&identity(d1), &scale(t1, d1))
        + identity(d1 * d2) * (tr / Complex64::new((d1 * d2) as f64, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    /// Interaction part of the exact zero-photon effective Hamiltonian.
    pub exact_interaction: CMatrix,
    /// ‖exact − H_J‖ on interaction parts, operator norm, GHz.
    pub deviation_ghz: f64,
    /// deviation / ‖H_J‖ (interaction part).
    pub relative_deviation: f64,
    /// Largest population at the top photon level among the kept states.
    pub top_photon_population: f64,
    pub truncation_warning: bool,
}

/// Exact diagonalization of H₁ + H₂ + Ω a†a + Σᵢ Gᵢ Sᵢ (a + a†) and
/// comparison of its zero-photon block with H_J.
pub fn validate_against_full_model(
    q1: &CavityQudit,
    q2: &CavityQudit,
    cavity: &CavityMode,
    heff: &EffectiveCoupling,
) -> Result<DeviationReport> {
    let (d1, d2, nf) = (q1.dim(), q2.dim(), cavity.n_max);
    let dim = d1 * d2 * nf;
    if dim > DEFAULT_MAX_DIM {
        return Err(Error::DimensionOverflow {
            dim,
            max: DEFAULT_MAX_DIM,
        });
    }
    let m = d1 * d2;
    let hj_int = interaction_part(&heff.hamiltonian, d1, d2);
    let hj_norm = spectral_norm(&hj_int);
    if q1.coupling.g_ghz == 0.0 || q2.coupling.g_ghz == 0.0 {
        // A decoupled qudit leaves only local terms in the exact model.
        let exact = CMatrix::zeros(m, m);
        let dev = spectral_norm(&(&exact - &hj_int));
        return Ok(DeviationReport {
            exact_interaction: exact,
            deviation_ghz: dev,
            relative_deviation: if hj_norm > 0.0 { dev / hj_norm } else { dev },
            top_photon_population: 0.0,
            truncation_warning: false,
        });
    }

    let mut a = CMatrix::zeros(nf, nf);
    for n in 1..nf {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let field = &a + a.adjoint();
    let number = real_diagonal(&(0..nf).map(|n| n as f64).collect::<Vec<_>>());
    let (i1, i2, iph) = (identity(d1), identity(d2), identity(nf));
    let c = |x: f64| Complex64::new(x, 0.0);
    let h = kron_all([&real_diagonal(&q1.energies), &i2, &iph])
        + kron_all([&i1, &real_diagonal(&q2.energies), &iph])
        + kron_all([&i1, &i2, &number]) * c(cavity.frequency_ghz)
        + kron_all([&q1.operator, &i2, &field]) * c(q1.coupling.g_ghz)
        + kron_all([&i1, &q2.operator, &field]) * c(q2.coupling.g_ghz);
    let (values, vectors) = eigh(&h);

    // Keep the m dressed states with the most zero-photon weight.
    let zero_rows: Vec<usize> = (0..m).map(|k| k * nf).collect();
    let weight = |col: usize| zero_rows.iter().map(|&r| vectors[(r, col)].norm_sqr()).sum::<f64>();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)).then(x.cmp(&y)));
    let kept = &order[..m];
    if kept.iter().any(|&k| weight(k) < 0.5) {
        return Err(Error::Resonance(
            "dressed states no longer have a dominant zero-photon component".into(),
        ));
    }
    let top = kept
        .iter()
        .map(|&k| (0..m).map(|s| vectors[(s * nf + nf - 1, k)].norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);

    // des Cloizeaux: rotate the kept energies with the unitary polar factor
    // of the zero-photon block.
    let mut b = CMatrix::zeros(m, m);
    for (col, &k) in kept.iter().enumerate() {
        for (row, &r) in zero_rows.iter().enumerate() {
            b[(row, col)] = vectors[(r, k)];
        }
    }
    let svd = b.svd(true, true);
    let polar = svd.u.as_ref().expect("u requested") * svd.v_t.as_ref().expect("v_t requested");
    let e_kept: Vec<f64> = kept.iter().map(|&k| values[k]).collect();
    let h_eff = &polar * real_diagonal(&e_kept) * polar.adjoint();
    let exact = interaction_part(&hermitian_part(&h_eff), d1, d2);
    let dev = spectral_norm(&(&exact - &hj_int));
    Ok(DeviationReport {
        exact_interaction: exact,
        deviation_ghz: dev,
        relative_deviation: if hj_norm > 0.0 { dev / hj_norm } else { dev },
        top_photon_population: top,
        truncation_warning: top > 1e-8,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapGate {
    pub time_ns: f64,
    /// Flip-flop coefficient ⟨hi₁ lo₂|H_J|lo₁ hi₂⟩, GHz.
    pub coupling_ghz: f64,
    /// Propagator restricted to {lo₁,hi₁}⊗{lo₂,hi₂}, in that order.
    pub unitary: CMatrix,
    pub transfer: f64,
    pub leakage: f64,
}

fn pair_index(heff: &EffectiveCoupling, p1: (usize, usize), p2: (usize, usize)) -> Result<()> {
    let (d1, d2) = heff.dims();
    if p1.0 >= d1 || p1.1 >= d1 || p2.0 >= d2 || p2.1 >= d2 || p1.0 == p1.1 || p2.0 == p2.1 {
        return Err(Error::SwapSynthesis(format!(
            "level pairs {p1:?}, {p2:?} out of range for dimensions ({d1}, {d2})"
        )));
    }
    Ok(())
}

/// Flip-flop element between |hi₁ lo₂⟩ and |lo₁ hi₂⟩.
pub fn flip_flop_coefficient(heff: &EffectiveCoupling, p1: (usize, usize), p2: (usize, usize)) -> Complex64 {
    heff.element(p1.1, p2.0, p1.0, p2.1)
}

/// Propagate the two qudits with H_J for time t from |hi₁ lo₂⟩.
pub fn flip_flop_evolution(
    heff: &EffectiveCoupling,
    p1: (usize, usize),
    p2: (usize, usize),
    t_ns: f64,
) -> Result<SwapGate> {
    pair_index(heff, p1, p2)?;
    let (_, d2) = heff.dims();
    let u = propagator(&heff.total_hamiltonian(), t_ns);
    let idx = |a: usize, b: usize| a * d2 + b;
    let subspace = [idx(p1.0, p2.0), idx(p1.0, p2.1), idx(p1.1, p2.0), idx(p1.1, p2.1)];
    let unitary = CMatrix::from_fn(4, 4, |r, c| u[(subspace[r], subspace[c])]);
    let start = idx(p1.1, p2.0);
    let transfer = u[(idx(p1.0, p2.1), start)].norm_sqr();
    let inside: f64 = subspace.iter().map(|&r| u[(r, start)].norm_sqr()).sum();
    Ok(SwapGate {
        time_ns: t_ns,
        coupling_ghz: flip_flop_coefficient(heff, p1, p2).norm(),
        unitary,
        transfer,
        leakage: (1.0 - inside).max(0.0),
    })
}

/// Quarter-period flip-flop t = 1/(4|J|) on two mutually resonant
/// transitions.
pub fn synthesize_swap(heff: &EffectiveCoupling, p1: (usize, usize), p2: (usize, usize)) -> Result<SwapGate> {
    pair_index(heff, p1, p2)?;
    let j = flip_flop_coefficient(heff, p1, p2).norm();
    if j == 0.0 {
        return Err(Error::SwapSynthesis("the selected pairs have no flip-flop coupling".into()));
    }
    let g1 = heff.energies[0][p1.1] - heff.energies[0][p1.0];
    let g2 = heff.energies[1][p2.1] - heff.energies[1][p2.0];
    if (g1 - g2).abs() >= j / 10.0 {
        return Err(Error::SwapSynthesis(format!(
            "gap mismatch {:.3e} GHz is not below |J|/10 = {:.3e} GHz",
            (g1 - g2).abs(),
            j / 10.0
        )));
    }
    flip_flop_evolution(heff, p1, p2, 1.0 / (4.0 * j))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// G·T₂.
    pub coherence_margin: f64,
    /// G/κ, infinite for a lossless cavity.
    pub cavity_margin: f64,
    pub beats_spin_decoherence: bool,
    pub beats_cavity_loss: bool,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.beats_spin_decoherence && self.beats_cavity_loss
    }
}

/// Strong-coupling test G > 1/T₂ and G > κ, both strict.
pub fn feasibility(g_ghz: f64, t2_ns: f64, kappa_ghz: f64) -> Result<FeasibilityReport> {
    if !(g_ghz > 0.0) || !(t2_ns > 0.0) || !(kappa_ghz >= 0.0) {
        return Err(Error::contract(
            MODULE,
            format!("feasibility needs G > 0, T2 > 0, κ ≥ 0 (got {g_ghz}, {t2_ns}, {kappa_ghz})"),
        ));
    }
    let coherence_margin = g_ghz * t2_ns;
    let cavity_margin = if kappa_ghz == 0.0 { f64::INFINITY } else { g_ghz / kappa_ghz };
    Ok(FeasibilityReport {
        coherence_margin,
        cavity_margin,
        beats_spin_decoherence: coherence_margin > 1.0,
        beats_cavity_loss: g_ghz > kappa_ghz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{Spin, SpinSite, ZEEMAN_GHZ_PER_TESLA};

    pub fn qubit(gap_ghz: f64, g_ghz: f64) -> CavityQudit {
        let b = gap_ghz / (2.0 * ZEEMAN_GHZ_PER_TESLA);
        let spec = SpinSystemSpec::single(SpinSite::new(Spin::from_twice(1), 2.0), [0.0, 0.0, b]);
        CavityQudit::from_spec(&spec, SpinPhotonCoupling::new(g_ghz).unwrap()).unwrap()
    }

    #[test]
    fn spin_half_lambda() {
        let l = lambda_coefficients(&qubit(5.0, 0.02));
        assert!((l[(0, 1)].norm() - 0.01).abs() < 1e-15);
        assert!(l[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn ladder_lambda_for_zeeman_seven_halves() {
        let spec = SpinSystemSpec::single(SpinSite::new(Spin::new(3.5).unwrap(), 2.0), [0.0, 0.0, 0.3]);
        let q = CavityQudit::from_spec(&spec, SpinPhotonCoupling::new(0.1).unwrap()).unwrap();
        let l = lambda_coefficients(&q);
        // Ascending energies run m = −7/2 … 7/2.
        for a in 0..8 {
            for b in 0..8 {
                let m = a as f64 - 3.5;
                let expected = if b == a + 1 {
                    0.1 * (3.5f64 * 4.5 - m * (m + 1.0)).sqrt() / 2.0
                } else if a == b + 1 {
                    0.1 * (3.5f64 * 4.5 - m * (m - 1.0)).sqrt() / 2.0
                } else {
                    0.0
                };
                assert!((l[(a, b)].norm() - expected).abs() < 1e-12, "{a} {b}");
                assert!((l[(a, b)] - l[(b, a)].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn qubit_flip_flop_closed_form() {
        let (w, om, g) = (5.5, 5.0, 0.025);
        let cav = CavityMode::new(om, 0.0, 6).unwrap();
        let heff = effective_hamiltonian(&qubit(w, g), &qubit(w, g), &cav, SumConvention::PositiveGaps).unwrap();
        let j = flip_flop_coefficient(&heff, (0, 1), (0, 1));
        let expected = om * g * g / (2.0 * (w * w - om * om));
        assert!((j.re - expected).abs() < 1e-15, "{j} {expected}");
        assert!(heff.hermiticity_defect < 1e-12);
        let raw = effective_hamiltonian(&qubit(w, g), &qubit(w, g), &cav, SumConvention::RawSum).unwrap();
        assert!(spectral_norm(&(&raw.hamiltonian - &heff.hamiltonian)) < 1e-15);
    }

    #[test]
    fn resonance_refused() {
        let cav = CavityMode::new(5.0, 0.0, 6).unwrap();
        let r = effective_hamiltonian(&qubit(5.05, 0.02), &qubit(5.5, 0.02), &cav, SumConvention::PositiveGaps);
        assert!(matches!(r, Err(Error::Resonance(_))));
    }

    #[test]
    fn zero_coupling_vanishes() {
        let cav = CavityMode::new(5.0, 0.0, 6).unwrap();
        let (q1, q2) = (qubit(5.5, 0.0), qubit(5.5, 0.03));
        let heff = effective_hamiltonian(&q1, &q2, &cav, SumConvention::PositiveGaps).unwrap();
        assert_eq!(spectral_norm(&heff.hamiltonian), 0.0);
        let rep = validate_against_full_model(&q1, &q2, &cav, &heff).unwrap();
        assert_eq!(rep.deviation_ghz, 0.0);
    }

    #[test]
    fn interaction_part_drops_local_terms() {
        let a = CMatrix::from_fn(2, 2, |r, c| Complex64::new((r + 2 * c) as f64, r as f64 - c as f64));
        let b = CMatrix::from_fn(3, 3, |r, c| Complex64::new((r * c) as f64, 0.0));
        let local = kron(&hermitian_part(&a), &identity(3)) + kron(&identity(2), &b);
        assert!(spectral_norm(&interaction_part(&local, 2, 3)) < 1e-12);
        let coupled = kron(&hermitian_part(&a), &b);
        assert!(spectral_norm(&interaction_part(&coupled, 2, 3)) > 0.1);
    }

    #[test]
    fn feasibility_regimes() {
        let r = feasibility(1e-4, 1e4, 1e-5).unwrap();
        assert!((r.coherence_margin - 1.0).abs() < 1e-12);
        assert!(!r.feasible());
        assert!(feasibility(1e-9, 1e6, 0.0).unwrap().cavity_margin.is_infinite());
        assert!(!feasibility(1e-9, 1e6, 0.0).unwrap().beats_spin_decoherence);
        assert!(feasibility(3e-4, 1e4, 1e-5).unwrap().feasible());
    }
}
