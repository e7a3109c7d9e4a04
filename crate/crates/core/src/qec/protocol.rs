use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::code::QuditCode;
use crate::dynamics::{
    lindblad_channel, pulse_channel_in, pulse_unitary, pure_fidelity, rate_from_t2, Channel,
    DensityMatrix, JumpOperator, LindbladModel, PulseMode, PulseSpec,
};
use crate::error::{Error, Result};
use crate::linalg::{identity, zeros, CMatrix};
use crate::spin::{Axis, Spin, SpinSystemSpec};

/// An electronic spin-1/2 ancilla hyperfine-coupled to a nuclear qudit, seen
/// in its eigenbasis. All operators and pulses here are in eigen coordinates.
#[derive(Debug, Clone)]
pub struct QecHardware {
    pub spec: SpinSystemSpec,
    pub qudit_spin: Spin,
    pub energies: Vec<f64>,
    /// Nuclear S_z in the eigenbasis.
    pub qudit_sz: CMatrix,
    /// Electronic S_z in the eigenbasis.
    pub ancilla_sz: CMatrix,
    /// levels[e][k]: eigenstate dominated by ancilla e (0 = ⇓, 1 = ⇑) and
    /// qudit projection index k.
    levels: [Vec<usize>; 2],
}

impl QecHardware {
    pub fn new(spec: &SpinSystemSpec) -> Result<Self> {
        let bad = |msg: &str| Error::contract("qec", msg.to_string());
        if spec.sites.len() != 1 {
            return Err(bad("hardware must be a single site"));
        }
        let site = &spec.sites[0];
        if site.spin.twice() != 1 {
            return Err(bad("ancilla must be an electronic spin 1/2"));
        }
        let nuclear = site
            .nuclear
            .ok_or_else(|| bad("hardware needs a nuclear qudit on site 0"))?;
        let nq = nuclear.spin.dim();
        let eig = spec.eigensystem()?;
        let d = eig.dim();

        let mut eigen_of = vec![usize::MAX; d];
        for col in 0..d {
            let (q, _) = eig
                .states
                .column(col)
                .iter()
                .enumerate()
                .map(|(q, z)| (q, z.norm_sqr()))
                .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
            if eigen_of[q] != usize::MAX {
                return Err(bad("eigenstates are too strongly mixed to label ancilla and qudit levels"));
            }
            eigen_of[q] = col;
        }
        let manifold = |e: usize| -> Vec<usize> { (0..nq).map(|k| eigen_of[e * nq + k]).collect() };
        let mean = |lv: &[usize]| lv.iter().map(|&c| eig.energies[c]).sum::<f64>() / nq as f64;
        let (m0, m1) = (manifold(0), manifold(1));
        let levels = if mean(&m1) <= mean(&m0) { [m1, m0] } else { [m0, m1] };

        Ok(QecHardware {
            spec: spec.clone(),
            qudit_spin: nuclear.spin,
            qudit_sz: eig.to_eigenbasis(&spec.nuclear_operator(0, Axis::Z)?),
            ancilla_sz: eig.to_eigenbasis(&spec.electronic_operator(0, Axis::Z)?),
            energies: eig.energies,
            levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn down(&self, k: usize) -> usize {
        self.levels[0][k]
    }

    pub fn up(&self, k: usize) -> usize {
        self.levels[1][k]
    }

    /// α|0_L⟩ + β|1_L⟩ with the ancilla in ⇓.
    pub fn logical_state(&self, code: &QuditCode, alpha: Complex64, beta: Complex64) -> DVector<Complex64> {
        let mut psi = DVector::zeros(self.dim());
        for (amp, a) in [(alpha, 0), (beta, 1)] {
            for (k, &c) in code.words[a].iter().enumerate() {
                psi[self.down(k)] += amp * c;
            }
        }
        psi
    }

    /// Embeds a qudit-space vector into the ⇓ manifold.
    pub fn embed_down(&self, v: &DVector<f64>) -> DVector<Complex64> {
        let mut psi = DVector::zeros(self.dim());
        for (k, &c) in v.iter().enumerate() {
            psi[self.down(k)] = Complex64::new(c, 0.0);
        }
        psi
    }

    /// Projector onto one ancilla manifold.
    pub fn ancilla_projector(&self, e: usize) -> CMatrix {
        let mut p = zeros(self.dim());
        for &c in &self.levels[e] {
            p[(c, c)] = Complex64::new(1.0, 0.0);
        }
        p
    }

    /// Dephasing of the qudit (T₂) and of the ancilla, in the frame rotating
    /// with the static Hamiltonian.
    pub fn noise_model(&self, t2_ns: f64, ancilla_t2_ns: f64) -> Result<LindbladModel> {
        LindbladModel::new(
            zeros(self.dim()),
            vec![
                JumpOperator {
                    operator: self.qudit_sz.clone(),
                    rate_ghz: rate_from_t2(t2_ns),
                },
                JumpOperator {
                    operator: self.ancilla_sz.clone(),
                    rate_ghz: rate_from_t2(ancilla_t2_ns),
                },
            ],
        )
    }

    /// Storage-period noise: qudit dephasing only. The ancilla idles
    /// polarized in ⇓, where its pure dephasing acts trivially.
    pub fn memory_model(&self, t2_ns: f64) -> Result<LindbladModel> {
        LindbladModel::dephasing(zeros(self.dim()), self.qudit_sz.clone(), t2_ns)
    }

    fn pulse(&self, i: usize, j: usize, angle: f64, phase: f64, rabi: f64) -> PulseSpec {
        PulseSpec::resonant(&self.energies, i, j, angle, phase, rabi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeRound {
    /// Error order p this round detects.
    pub syndrome: usize,
    /// Conditional ancilla excitation.
    pub excite: Vec<PulseSpec>,
    /// Ancilla reset and level swap, applied when the ancilla is found in ⇑.
    pub recovery: Vec<PulseSpec>,
}

/// Detect-and-correct cycle: detection mapping V, then one measured round
/// per error order, then V† on every branch.
#[derive(Debug, Clone, PartialEq)]
pub struct QecProtocol {
    pub detection: Vec<PulseSpec>,
    pub rounds: Vec<SyndromeRound>,
    pub decode: Vec<PulseSpec>,
    pub duration_ns: f64,
    pub pulse_rabi_ghz: f64,
    pub ancilla_t2_ns: f64,
}

impl QecProtocol {
    pub fn pulses(&self) -> impl Iterator<Item = &PulseSpec> {
        self.detection
            .iter()
            .chain(self.rounds.iter().flat_map(|r| r.excite.iter().chain(r.recovery.iter())))
            .chain(self.decode.iter())
    }
}

/// Orthonormal syndrome vectors s_p for word a: Gram-Schmidt of S_z^p |a_L⟩.
fn syndrome_vectors(code: &QuditCode, a: usize) -> Result<Vec<DVector<f64>>> {
    let spin = code.spin;
    let m: Vec<f64> = (0..code.dim()).map(|k| spin.m(k)).collect();
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut v = code.words[a].clone();
    for p in 0..=code.order {
        if p > 0 {
            v = DVector::from_iterator(v.len(), v.iter().zip(&m).map(|(x, mk)| x * mk));
        }
        let mut s = v.clone();
        for prev in &out {
            s -= prev * prev.dot(&s);
        }
        let n = s.norm();
        if n < 1e-9 {
            return Err(Error::ProtocolSynthesis(format!(
                "error word of order {p} is not independent of the lower orders"
            )));
        }
        out.push(s / n);
    }
    Ok(out)
}

/// Givens rotations (u, v, α) with G_n⋯G_1 = D·Q for the orthogonal Q,
/// D diagonal with ±1 entries.
fn givens_sequence(q: &nalgebra::DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let n = q.nrows();
    let mut m = q.transpose();
    let mut seq = Vec::new();
    for col in 0..n {
        for v in col + 1..n {
            let (a, b) = (m[(col, col)], m[(v, col)]);
            if b.abs() < 1e-14 {
                continue;
            }
            let alpha = b.atan2(a);
            let (c, s) = (alpha.cos(), alpha.sin());
            for k in 0..n {
                let (x, y) = (m[(col, k)], m[(v, k)]);
                m[(col, k)] = c * x + s * y;
                m[(v, k)] = -s * x + c * y;
            }
            seq.push((col, v, alpha));
        }
    }
    seq
}

fn apply_all(pulses: &[PulseSpec], states: &CMatrix, psi: DVector<Complex64>) -> Result<DVector<Complex64>> {
    pulses
        .iter()
        .try_fold(psi, |acc, p| Ok(pulse_unitary(p, states)? * acc))
}

pub fn build_protocol(
    hw: &QecHardware,
    code: &QuditCode,
    ancilla_t2_ns: f64,
    pulse_rabi_ghz: f64,
) -> Result<QecProtocol> {
    if !(pulse_rabi_ghz > 0.0) || !(ancilla_t2_ns > 0.0) {
        return Err(Error::contract("qec", "pulse Rabi frequency and ancilla T2 must be positive"));
    }
    if code.spin != hw.qudit_spin {
        return Err(Error::ProtocolSynthesis(format!(
            "code is for spin {} but the hardware qudit is spin {}",
            code.spin, hw.qudit_spin
        )));
    }
    let rabi = pulse_rabi_ghz;
    let supports = [code.support(0), code.support(1)];
    let syndromes = [syndrome_vectors(code, 0)?, syndrome_vectors(code, 1)?];
    let n = code.order + 1;

    let mut detection = Vec::new();
    for a in 0..2 {
        let lv = &supports[a];
        let q = nalgebra::DMatrix::from_fn(n, n, |p, r| syndromes[a][p][lv[r]]);
        for (u, v, alpha) in givens_sequence(&q) {
            detection.push(hw.pulse(hw.down(lv[u]), hw.down(lv[v]), -2.0 * alpha, PI / 2.0, rabi));
        }
    }
    let decode: Vec<PulseSpec> = detection
        .iter()
        .rev()
        .map(|p| PulseSpec { angle: -p.angle, ..*p })
        .collect();

    let states = identity(hw.dim());
    let mut rounds = Vec::new();
    for p in 1..n {
        let flip = |a: usize| {
            let k = supports[a][p];
            hw.pulse(hw.down(k), hw.up(k), PI, 0.0, rabi)
        };
        let excite = vec![flip(0), flip(1)];
        let swap = |a: usize, phase: f64| {
            hw.pulse(hw.down(supports[a][p]), hw.down(supports[a][0]), PI, phase, rabi)
        };
        // Phase each swap so both words come back with the same factor.
        let mut zeta = [Complex64::new(0.0, 0.0); 2];
        for a in 0..2 {
            let seq: Vec<PulseSpec> = detection
                .iter()
                .copied()
                .chain([flip(a), flip(a), swap(a, 0.0)])
                .chain(decode.iter().copied())
                .collect();
            let out = apply_all(&seq, &states, hw.embed_down(&syndromes[a][p]))?;
            zeta[a] = (hw.embed_down(&code.words[a]).adjoint() * out)[(0, 0)];
            if (zeta[a].norm() - 1.0).abs() > 1e-9 {
                return Err(Error::ProtocolSynthesis(format!(
                    "syndrome {p} does not return word {a} to the code space"
                )));
            }
        }
        let phase1 = (zeta[0] / zeta[1]).arg();
        let recovery = vec![flip(0), flip(1), swap(0, 0.0), swap(1, phase1)];
        rounds.push(SyndromeRound {
            syndrome: p,
            excite,
            recovery,
        });
    }

    let mut protocol = QecProtocol {
        detection,
        rounds,
        decode,
        duration_ns: 0.0,
        pulse_rabi_ghz,
        ancilla_t2_ns,
    };
    protocol.duration_ns = protocol.pulses().map(|p| p.duration_ns).sum();
    check_addressability(&protocol)?;
    Ok(protocol)
}

fn check_addressability(protocol: &QecProtocol) -> Result<()> {
    let mut lines: Vec<((usize, usize), f64)> = Vec::new();
    for p in protocol.pulses() {
        let (i, j) = p.transition;
        let key = (i.min(j), i.max(j));
        if !lines.iter().any(|(k, _)| *k == key) {
            lines.push((key, p.carrier_ghz));
        }
    }
    for (x, (ka, fa)) in lines.iter().enumerate() {
        for (kb, fb) in &lines[x + 1..] {
            if (fa - fb).abs() <= protocol.pulse_rabi_ghz {
                return Err(Error::ProtocolSynthesis(format!(
                    "transitions {ka:?} at {fa:.6} GHz and {kb:?} at {fb:.6} GHz are closer than the Rabi width {} GHz",
                    protocol.pulse_rabi_ghz
                )));
            }
        }
    }
    Ok(())
}

/// The full cycle as precomputed channels.
#[derive(Debug, Clone)]
pub struct CycleSimulator {
    detection: Channel,
    rounds: Vec<(Channel, Channel)>,
    decode: Channel,
    keep: Channel,
    excited: Channel,
}

/// A single run of the cycle on one input.
#[derive(Debug, Clone)]
pub struct CycleOutcome {
    pub state: DensityMatrix,
    /// Probability of finding the ancilla excited in each round.
    pub syndrome_probabilities: Vec<f64>,
}

impl CycleSimulator {
    pub fn new(hw: &QecHardware, protocol: &QecProtocol, t2_ns: f64, mode: PulseMode) -> Result<Self> {
        let noise = hw.noise_model(t2_ns, protocol.ancilla_t2_ns)?;
        let states = identity(hw.dim());
        let seq = |pulses: &[PulseSpec]| -> Result<Channel> {
            pulses.iter().try_fold(Channel::identity(hw.dim()), |acc, p| {
                Ok(acc.then(&pulse_channel_in(p, &noise, &hw.energies, &states, mode)?))
            })
        };
        Ok(CycleSimulator {
            detection: seq(&protocol.detection)?,
            rounds: protocol
                .rounds
                .iter()
                .map(|r| Ok((seq(&r.excite)?, seq(&r.recovery)?)))
                .collect::<Result<_>>()?,
            decode: seq(&protocol.decode)?,
            keep: Channel::sandwich(&hw.ancilla_projector(0)),
            excited: Channel::sandwich(&hw.ancilla_projector(1)),
        })
    }

    /// The whole cycle, summed over measurement branches.
    pub fn channel(&self) -> Channel {
        let mut acc = self.detection.clone();
        let mut total: Option<Channel> = None;
        for (excite, recovery) in &self.rounds {
            acc = acc.then(excite);
            let branch = acc.then(&self.excited).then(recovery).then(&self.decode);
            total = Some(match total {
                Some(t) => t.sum(&branch),
                None => branch,
            });
            acc = acc.then(&self.keep);
        }
        let last = acc.then(&self.decode);
        match total {
            Some(t) => t.sum(&last),
            None => last,
        }
    }

    pub fn run(&self, rho: &DensityMatrix) -> CycleOutcome {
        let mut current = self.detection.apply(rho);
        let mut out = DensityMatrix::unchecked(zeros(rho.dim()));
        let mut probs = Vec::new();
        for (excite, recovery) in &self.rounds {
            current = excite.apply(&current);
            let hit = self.excited.apply(&current);
            probs.push(hit.trace());
            let fixed = self.decode.apply(&recovery.apply(&hit));
            out = DensityMatrix::unchecked(out.matrix() + fixed.matrix());
            current = self.keep.apply(&current);
        }
        let last = self.decode.apply(&current);
        CycleOutcome {
            state: DensityMatrix::unchecked(out.into_matrix() + last.into_matrix()),
            syndrome_probabilities: probs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRow {
    pub t_over_t2: f64,
    pub e: f64,
    pub e_half: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainCurve {
    pub rows: Vec<GainRow>,
}

impl GainCurve {
    /// Index of the largest gain.
    pub fn peak(&self) -> Option<usize> {
        (0..self.rows.len()).max_by(|&a, &b| self.rows[a].r.total_cmp(&self.rows[b].r))
    }
}

fn cardinal_amplitudes() -> [(Complex64, Complex64); 6] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        (c(1.0, 0.0), c(0.0, 0.0)),
        (c(0.0, 0.0), c(1.0, 0.0)),
        (c(h, 0.0), c(h, 0.0)),
        (c(h, 0.0), c(-h, 0.0)),
        (c(h, 0.0), c(0.0, h)),
        (c(h, 0.0), c(0.0, -h)),
    ]
}

/// 1 − F averaged over the cardinal states of a bare spin 1/2 dephasing for
/// time t under the same T₂.
pub fn unprotected_error(t2_ns: f64, t_ns: f64) -> Result<f64> {
    let sz = crate::spin::spin_operators(Spin::from_twice(1)).sz;
    let model = LindbladModel::dephasing(zeros(2), sz, t2_ns)?;
    let channel = lindblad_channel(&model, t_ns)?;
    let mut total = 0.0;
    for (a, b) in cardinal_amplitudes() {
        let psi = DVector::from_vec(vec![a, b]);
        total += pure_fidelity(&channel.apply(&DensityMatrix::pure(&psi)), &psi);
    }
    Ok((1.0 - total / 6.0).max(0.0))
}

/// Memory followed by one correction cycle, for each T/T₂.
pub fn memory_gain_curve(
    hw: &QecHardware,
    code: &QuditCode,
    protocol: &QecProtocol,
    t2_ns: f64,
    t_over_t2: &[f64],
    mode: PulseMode,
) -> Result<GainCurve> {
    if !(t2_ns > 0.0) {
        return Err(Error::contract("qec", "T2 must be positive"));
    }
    if let Some(bad) = t_over_t2.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::contract("qec", format!("memory time {bad} must be positive")));
    }
    let cycle = CycleSimulator::new(hw, protocol, t2_ns, mode)?.channel();
    let noise = hw.memory_model(t2_ns)?;
    let inputs: Vec<DVector<Complex64>> = cardinal_amplitudes()
        .iter()
        .map(|&(a, b)| hw.logical_state(code, a, b))
        .collect();
    let rows = t_over_t2
        .par_iter()
        .map(|&x| {
            let t = x * t2_ns;
            let total = lindblad_channel(&noise, t)?.then(&cycle);
            let f: f64 = inputs
                .iter()
                .map(|psi| pure_fidelity(&total.apply(&DensityMatrix::pure(psi)), psi))
                .sum::<f64>()
                / inputs.len() as f64;
            let e = (1.0 - f).max(0.0);
            let e_half = unprotected_error(t2_ns, t)?;
            let r = if e > 0.0 { e_half / e } else { f64::INFINITY };
            Ok(GainRow {
                t_over_t2: x,
                e,
                e_half,
                r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GainCurve { rows })
}
