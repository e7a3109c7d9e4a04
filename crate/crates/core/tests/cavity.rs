use molqudit::cavity::*;
use molqudit::linalg::{spectral_norm, CMatrix};
use molqudit::spin::{Spin, SpinSite, SpinSystemSpec, ZEEMAN_GHZ_PER_TESLA};
use num_complex::Complex64;

const OMEGA: f64 = 5.0;
const GAP: f64 = 5.5;

fn qubit(gap_ghz: f64, g_ghz: f64) -> CavityQudit {
    let b = gap_ghz / (2.0 * ZEEMAN_GHZ_PER_TESLA);
    let spec = SpinSystemSpec::single(SpinSite::new(Spin::from_twice(1), 2.0), [0.0, 0.0, b]);
    CavityQudit::from_spec(&spec, SpinPhotonCoupling::new(g_ghz).unwrap()).unwrap()
}

fn cavity() -> CavityMode {
    CavityMode::new(OMEGA, 0.0, 6).unwrap()
}

/// Relative error of the flip-flop element against exact diagonalization.
fn flip_flop_error(g: f64) -> (f64, DeviationReport) {
    let (q1, q2) = (qubit(GAP, g), qubit(GAP, g));
    let heff = effective_hamiltonian(&q1, &q2, &cavity(), SumConvention::PositiveGaps).unwrap();
    let rep = validate_against_full_model(&q1, &q2, &cavity(), &heff).unwrap();
    let j = heff.element(1, 0, 0, 1);
    let exact = rep.exact_interaction[(2, 1)];
    (((exact - j).norm() / j.norm()), rep)
}

#[test]
fn effective_coupling_tracks_exact_model() {
    let delta = GAP - OMEGA;
    let errors: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|r| {
            let (e, rep) = flip_flop_error(r * delta);
            assert!(!rep.truncation_warning);
            println!("G/Δ = {r}: flip-flop error {e:.3e}, op-norm relative {:.3e}", rep.relative_deviation);
            e
        })
        .collect();
    assert!(errors[0] < 0.10);
    assert!(errors[1] < 0.03);
    assert!(errors[1] < errors[0] && errors[2] < errors[1]);
}

#[test]
fn deviation_shrinks_with_coupling() {
    let mut last = f64::INFINITY;
    for g in [0.04, 0.02, 0.01] {
        let (q1, q2) = (qubit(GAP, g), qubit(5.8, g));
        let heff = effective_hamiltonian(&q1, &q2, &cavity(), SumConvention::PositiveGaps).unwrap();
        let rep = validate_against_full_model(&q1, &q2, &cavity(), &heff).unwrap();
        assert!(rep.relative_deviation < last);
        last = rep.relative_deviation;
    }
}

#[test]
fn bilinear_in_couplings() {
    let base = effective_hamiltonian(&qubit(GAP, 0.01), &qubit(5.8, 0.01), &cavity(), SumConvention::PositiveGaps)
        .unwrap()
        .hamiltonian;
    for (g1, g2) in [(0.02, 0.01), (0.01, 0.03), (0.005, 0.04)] {
        let h = effective_hamiltonian(&qubit(GAP, g1), &qubit(5.8, g2), &cavity(), SumConvention::PositiveGaps)
            .unwrap()
            .hamiltonian;
        let scaled = &base * Complex64::new(g1 * g2 / 1e-4, 0.0);
        assert!(spectral_norm(&(&h - &scaled)) <= 1e-10 * spectral_norm(&scaled));
    }
}

#[test]
fn exchange_symmetry() {
    let spec = SpinSystemSpec::single(
        SpinSite::new(Spin::new(1.5).unwrap(), 2.0).with_anisotropy(0.3, 0.05),
        [0.05, 0.0, 0.12],
    );
    let q1 = CavityQudit::from_spec(&spec, SpinPhotonCoupling::new(0.01).unwrap()).unwrap();
    let q2 = qubit(GAP, 0.02);
    let cav = CavityMode::new(8.0, 0.0, 4).unwrap();
    let h12 = effective_hamiltonian(&q1, &q2, &cav, SumConvention::PositiveGaps).unwrap().hamiltonian;
    let h21 = effective_hamiltonian(&q2, &q1, &cav, SumConvention::PositiveGaps).unwrap().hamiltonian;
    let (d1, d2) = (q1.dim(), q2.dim());
    let mut swap = CMatrix::zeros(d1 * d2, d1 * d2);
    for a in 0..d1 {
        for b in 0..d2 {
            swap[(b * d1 + a, a * d2 + b)] = Complex64::new(1.0, 0.0);
        }
    }
    let moved = &swap * &h12 * swap.transpose();
    assert!(spectral_norm(&(&moved - &h21)) < 1e-15);
}

#[test]
fn swap_gate() {
    // G chosen so that J = ΩG²/(2(ω² − Ω²)) = 1 MHz.
    let g = (2.0 * 1e-3 * (GAP * GAP - OMEGA * OMEGA) / OMEGA).sqrt();
    let heff = effective_hamiltonian(&qubit(GAP, g), &qubit(GAP, g), &cavity(), SumConvention::PositiveGaps).unwrap();
    let gate = synthesize_swap(&heff, (0, 1), (0, 1)).unwrap();
    assert!((gate.time_ns - 250.0).abs() < 1e-9);
    assert!(gate.transfer >= 0.999, "{}", gate.transfer);
    assert!(gate.leakage < 1e-3);

    let g2 = g * 2f64.sqrt();
    let heff2 = effective_hamiltonian(&qubit(GAP, g2), &qubit(GAP, g2), &cavity(), SumConvention::PositiveGaps).unwrap();
    let gate2 = synthesize_swap(&heff2, (0, 1), (0, 1)).unwrap();
    assert!((gate2.time_ns - gate.time_ns / 2.0).abs() < 1e-9);

    let j = gate.coupling_ghz;
    let detuned = effective_hamiltonian(&qubit(GAP, g), &qubit(GAP + 100.0 * j, g), &cavity(), SumConvention::PositiveGaps)
        .unwrap();
    assert!(synthesize_swap(&detuned, (0, 1), (0, 1)).is_err());
    let off = flip_flop_evolution(&detuned, (0, 1), (0, 1), gate.time_ns).unwrap();
    assert!(off.transfer <= 0.1, "{}", off.transfer);
}
