use molqudit::dqs::*;
use molqudit::linalg::{propagator, spectral_norm, CMatrix};
use molqudit::spin::{Coupling, GFactor, Spin, SpinSite, SpinSystemSpec};
use num_complex::Complex64;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn heisenberg_trotter_exponents() {
    let model = TargetModel::Chain(ChainModel::heisenberg(3, 1.0));
    let steps = [4, 8, 16, 32];
    let pts = trotter_scan(&model, 0.1, &steps, &[1, 2], &HardwareRates::ideal()).unwrap();
    let err = |o: u8| -> Vec<f64> { pts.iter().filter(|p| p.order == o).map(|p| p.fidelity_error).collect() };
    let ns: Vec<f64> = steps.iter().map(|&n| n as f64).collect();
    let (e1, e2) = (err(1), err(2));
    let (s1, s2) = (-slope(&ns, &e1), -slope(&ns, &e2));
    println!("order 1 {e1:?} exponent {s1}\norder 2 {e2:?} exponent {s2}");
    assert!((s1 - 1.0).abs() < 0.15);
    assert!((s2 - 2.0).abs() < 0.3);
    for w in e1.windows(2).chain(e2.windows(2)) {
        assert!(w[1] < w[0]);
    }
    for (a, b) in e1.iter().zip(&e2) {
        assert!(b <= a);
    }
    let far = trotter_scan(&model, 0.1, &[256], &[1], &HardwareRates::ideal()).unwrap();
    assert!(far[0].fidelity_error < 1e-3);
}

#[test]
fn commuting_models_are_exact() {
    for model in [
        TargetModel::Chain(ChainModel::ising(4, 1.0, 0.0)),
        TargetModel::Chain(ChainModel::ising(3, 0.7, 0.0).with_field([0.0, 0.0, 0.4])),
    ] {
        let pts = trotter_scan(&model, 0.37, &[1], &[1, 2], &HardwareRates::ideal()).unwrap();
        assert!(pts.iter().all(|p| p.fidelity_error < 1e-10));
    }
}

#[test]
fn other_chains_converge() {
    for model in [
        TargetModel::Chain(ChainModel::xx(4, 1.0).with_field([0.0, 0.0, 0.5])),
        TargetModel::Chain(ChainModel::xy(3, 1.0, 0.4)),
        TargetModel::Chain(ChainModel::ising(3, 1.0, 0.8)),
        TargetModel::SpinBoson(SpinBosonModel { n_b: 4, mode_ghz: 1.0, spin_ghz: 1.2, coupling_ghz: 0.3 }),
    ] {
        let pts = trotter_scan(&model, 0.2, &[4, 8, 16], &[1, 2], &HardwareRates::ideal()).unwrap();
        for o in [1, 2] {
            let e: Vec<f64> = pts.iter().filter(|p| p.order == o).map(|p| p.fidelity_error).collect();
            assert!(e[0] > e[1] && e[1] > e[2], "{model:?} {e:?}");
        }
    }
}

#[test]
fn sequences_are_deterministic() {
    let model = TargetModel::Chain(ChainModel::heisenberg(4, 1.0).with_field([0.2, 0.0, 0.1]));
    let rates = HardwareRates { single_rabi_ghz: 0.05, two_body_ghz: 0.01, ideal: false };
    let a = trotterize(&model, 0.3, 5, 2, &rates).unwrap();
    let b = trotterize(&model, 0.3, 5, 2, &rates).unwrap();
    assert_eq!(a, b);
    assert!(a.gates.iter().all(|g| g.duration_ns > 0.0 && g.targets.iter().all(|&t| t < 4)));
}

#[test]
fn driven_mode_on_qudit_matches_truncated_model() {
    let enc = boson_qudit_encoding(5, Spin::new(3.5).unwrap()).unwrap();
    let a = &enc.annihilation;
    let h = a.adjoint() * a * Complex64::new(1.3, 0.0) + (a + a.adjoint()) * Complex64::new(0.4, 0.0);
    let truncated = propagator(&h, 0.8);
    let on_qudit = propagator(&enc.to_qudit(&h), 0.8);
    assert!(spectral_norm(&(enc.from_qudit(&on_qudit) - truncated)) < 1e-12);
}

fn register(j1: f64, j2: f64) -> SpinSystemSpec {
    let half = Spin::from_twice(1);
    let site = |g: f64| SpinSite { g: GFactor::Isotropic(g), ..SpinSite::new(half, g) };
    SpinSystemSpec {
        sites: vec![site(2.0), site(2.3), site(1.9)],
        couplings: vec![Coupling { i: 0, j: 1, j_ghz: j1 }, Coupling { i: 1, j: 2, j_ghz: j2 }],
        field_tesla: [0.0, 0.0, 0.35],
    }
}

#[test]
fn switch_gives_controlled_phase() {
    let drive = SwitchDrive { target: [1, 1], rabi_ghz: 0.0005 };
    let gate = switch_cphase(&register(0.05, 0.07), &drive).unwrap();
    println!("phase {} leakage {} e_p {}", gate.conditional_phase, gate.leakage, gate.entangling_power);
    assert!(gate.entangling_power > 0.2);
    assert!((gate.conditional_phase.abs() - std::f64::consts::PI).abs() < 0.05);
    let f = bell_state_fidelity(&gate);
    println!("bell {f}");
    assert!(f > 0.999);
}

#[test]
fn switch_without_coupling_is_identity() {
    let drive = SwitchDrive { target: [1, 1], rabi_ghz: 0.001 };
    let gate = switch_cphase(&register(0.0, 0.0), &drive).unwrap();
    let global = gate.unitary[(0, 0)];
    let id = CMatrix::identity(4, 4) * global;
    assert!(spectral_norm(&(&gate.unitary - id)) < 1e-9);
    assert!(gate.entangling_power < 1e-9);
}

#[test]
fn switch_collision_is_refused() {
    let drive = SwitchDrive { target: [1, 1], rabi_ghz: 0.06 };
    assert!(switch_cphase(&register(0.05, 0.07), &drive).is_err());
}

#[test]
fn qudit_encoding_saves_entanglers() {
    let rates = HardwareRates::ideal();
    let model = |n_b| SpinBosonModel { n_b, mode_ghz: 1.0, spin_ghz: 1.1, coupling_ghz: 0.2 };
    let two = resource_compare(&model(2), &rates).unwrap();
    assert_eq!(two.qudit.two_body, two.binary.two_body);
    let four = resource_compare(&model(4), &rates).unwrap();
    assert!(four.qudit.two_body < four.binary.two_body);
    let mut last = 0;
    for n_b in [2, 4, 8, 16] {
        let c = resource_compare(&model(n_b), &rates).unwrap();
        assert!(c.binary.two_body >= last);
        last = c.binary.two_body;
    }
}
