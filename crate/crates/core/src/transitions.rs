//! Addressable transitions, operation rates W_{n,m} and the universality
//! parameter W_min·T₂ of a single qudit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spin::{EigenSystem, SpinSystemSpec};

/// Fraction of the drive amplitude below which a matrix element counts as zero.
pub const NONZERO_RABI_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRow {
    pub i: usize,
    pub j: usize,
    /// E_j − E_i, GHz.
    pub frequency_ghz: f64,
    /// drive amplitude × |⟨i|S_x|j⟩|, GHz.
    pub rabi_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub dim: usize,
    pub drive_amplitude_ghz: f64,
    pub rows: Vec<TransitionRow>,
}

impl TransitionTable {
    pub fn nonzero_threshold(&self) -> f64 {
        NONZERO_RABI_FRACTION * self.drive_amplitude_ghz
    }

    pub fn row(&self, i: usize, j: usize) -> Option<&TransitionRow> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.rows.iter().find(|r| r.i == i && r.j == j)
    }
}

pub fn transition_table(eig: &EigenSystem, drive_amplitude_ghz: f64) -> Result<TransitionTable> {
    if !(drive_amplitude_ghz > 0.0) {
        return Err(Error::contract("transitions", "drive amplitude must be positive"));
    }
    let sx = eig.drive_operator().ok_or_else(|| {
        Error::contract("transitions", "eigensystem carries no drive operator")
    })?;
    let d = eig.dim();
    let mut rows = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            rows.push(TransitionRow {
                i,
                j,
                frequency_ghz: (eig.energies[j] - eig.energies[i]).max(0.0),
                rabi_ghz: drive_amplitude_ghz * sx[(i, j)].norm(),
            });
        }
    }
    Ok(TransitionTable {
        dim: d,
        drive_amplitude_ghz,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub pulse_time_ns: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub omega_r_ghz: f64,
    pub t2_ns: f64,
    /// 1/T₂; weaker transitions cannot complete a pulse within the coherence time.
    pub min_rabi_ghz: f64,
    /// Matrix-element cut for the isolation check.
    pub nonzero_rabi_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    pub dim: usize,
    pub edges: Vec<Edge>,
    pub thresholds: Thresholds,
}

impl TransitionGraph {
    /// Graph from explicit edges, for callers that build connectivity by hand.
    pub fn from_edges(dim: usize, edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.i >= dim || e.j >= dim || e.i == e.j {
                return Err(Error::contract("transitions", format!("invalid edge ({}, {})", e.i, e.j)));
            }
            if !(e.pulse_time_ns > 0.0) {
                return Err(Error::contract("transitions", "pulse time must be positive"));
            }
        }
        Ok(TransitionGraph {
            dim,
            edges,
            thresholds: Thresholds {
                omega_r_ghz: 0.0,
                t2_ns: f64::INFINITY,
                min_rabi_ghz: 0.0,
                nonzero_rabi_ghz: 0.0,
            },
        })
    }
}

/// π-pulse duration for a Rabi frequency in GHz.
pub fn pi_pulse_ns(rabi_ghz: f64) -> f64 {
    1.0 / (2.0 * rabi_ghz)
}

/// Keeps transitions that are both fast enough (rabi ≥ 1/T₂) and spectrally
/// isolated by more than Ω_R from every other transition with a nonzero
/// matrix element.
pub fn addressable_edges(table: &TransitionTable, omega_r_ghz: f64, t2_ns: f64) -> Result<TransitionGraph> {
    if !(omega_r_ghz > 0.0) || !(t2_ns > 0.0) {
        return Err(Error::contract("transitions", "omega_r and T2 must be positive"));
    }
    let thresholds = Thresholds {
        omega_r_ghz,
        t2_ns,
        min_rabi_ghz: 1.0 / t2_ns,
        nonzero_rabi_ghz: table.nonzero_threshold(),
    };
    let allowed: Vec<&TransitionRow> = table
        .rows
        .iter()
        .filter(|r| r.rabi_ghz > thresholds.nonzero_rabi_ghz)
        .collect();
    let edges = allowed
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rabi_ghz >= thresholds.min_rabi_ghz)
        .filter(|(k, r)| {
            allowed
                .iter()
                .enumerate()
                .all(|(l, o)| l == *k || (r.frequency_ghz - o.frequency_ghz).abs() > omega_r_ghz)
        })
        .map(|(_, r)| Edge {
            i: r.i,
            j: r.j,
            pulse_time_ns: pi_pulse_ns(r.rabi_ghz),
        })
        .collect();
    Ok(TransitionGraph {
        dim: table.dim,
        edges,
        thresholds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// The trivial operation n → n.
    Identity,
    /// GHz.
    Finite(f64),
    Unreachable,
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Finite(w) => Some(w),
            _ => None,
        }
    }
}

/// Symmetric matrix of operation rates W_{n,m}.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    dim: usize,
    rates: Vec<Rate>,
}

impl RateMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, n: usize, m: usize) -> Rate {
        self.rates[n * self.dim + m]
    }

    /// Smallest off-diagonal rate; `None` if some pair is unreachable.
    pub fn min_rate(&self) -> Option<f64> {
        let mut min = f64::INFINITY;
        for n in 0..self.dim {
            for m in n + 1..self.dim {
                match self.get(n, m) {
                    Rate::Finite(w) => min = min.min(w),
                    _ => return None,
                }
            }
        }
        Some(min)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Visit {
    time: f64,
    node: usize,
}

impl Eq for Visit {}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimal total pulse time from `source` to every node.
fn shortest_times(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Visit { time: 0.0, node: source });
    while let Some(Visit { time, node }) = heap.pop() {
        if time > dist[node] {
            continue;
        }
        for &(next, w) in &adjacency[node] {
            let t = time + w;
            if t < dist[next] {
                dist[next] = t;
                heap.push(Visit { time: t, node: next });
            }
        }
    }
    dist
}

/// W_{n,m} = 1 / (minimal total pulse time from n to m). Path times are
/// accumulated from the lower index so that W is exactly symmetric.
pub fn operation_rates(graph: &TransitionGraph) -> RateMatrix {
    let d = graph.dim;
    let mut adjacency = vec![Vec::new(); d];
    for e in &graph.edges {
        adjacency[e.i].push((e.j, e.pulse_time_ns));
        adjacency[e.j].push((e.i, e.pulse_time_ns));
    }
    let mut rates = vec![Rate::Unreachable; d * d];
    for n in 0..d {
        rates[n * d + n] = Rate::Identity;
        let dist = shortest_times(&adjacency, n);
        for m in n + 1..d {
            let r = if dist[m].is_finite() {
                Rate::Finite(1.0 / dist[m])
            } else {
                Rate::Unreachable
            };
            rates[n * d + m] = r;
            rates[m * d + n] = r;
        }
    }
    RateMatrix { dim: d, rates }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Universality {
    /// W_min·T₂.
    pub u_param: f64,
    pub universal: bool,
}

pub fn universality_parameter(w: &RateMatrix, t2_ns: f64) -> Universality {
    let u_param = match w.min_rate() {
        Some(min) if w.dim() > 1 => t2_ns * min,
        Some(_) => f64::INFINITY,
        None => 0.0,
    };
    Universality {
        u_param,
        universal: u_param > 1.0,
    }
}

/// One field point of a universality sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityReport {
    pub b_tesla: f64,
    pub rates: RateMatrix,
    pub u_param: f64,
    pub universal: bool,
    pub n_edges: usize,
    /// Smallest frequency distance between two transitions with rabi ≥ 1/T₂.
    pub min_isolation_ghz: f64,
    /// Pairs of such transitions closer than Ω_R.
    pub degenerate_pair_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub drive_amplitude_ghz: f64,
    pub omega_r_ghz: f64,
    pub t2_ns: f64,
}

/// Unit vector of the spec's field, z if the field vanishes.
pub fn field_direction(spec: &SpinSystemSpec) -> [f64; 3] {
    let b = spec.field_tesla;
    let n = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if n > 0.0 {
        [b[0] / n, b[1] / n, b[2] / n]
    } else {
        [0.0, 0.0, 1.0]
    }
}

pub fn analyze_point(spec: &SpinSystemSpec, settings: &SweepSettings) -> Result<(TransitionTable, UniversalityReport)> {
    let eig = spec.eigensystem()?;
    let table = transition_table(&eig, settings.drive_amplitude_ghz)?;
    let graph = addressable_edges(&table, settings.omega_r_ghz, settings.t2_ns)?;
    let rates = operation_rates(&graph);
    let u = universality_parameter(&rates, settings.t2_ns);
    let strong: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.rabi_ghz > table.nonzero_threshold() && r.rabi_ghz >= graph.thresholds.min_rabi_ghz)
        .map(|r| r.frequency_ghz)
        .collect();
    let mut min_isolation = f64::INFINITY;
    let mut degenerate = 0;
    for (k, a) in strong.iter().enumerate() {
        for b in &strong[k + 1..] {
            let gap = (a - b).abs();
            min_isolation = min_isolation.min(gap);
            if gap <= settings.omega_r_ghz {
                degenerate += 1;
            }
        }
    }
    let b = spec.field_tesla;
    let report = UniversalityReport {
        b_tesla: (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt(),
        rates,
        u_param: u.u_param,
        universal: u.universal,
        n_edges: graph.edges.len(),
        min_isolation_ghz: min_isolation,
        degenerate_pair_count: degenerate,
    };
    Ok((table, report))
}

/// Sweeps |B| along the spec's field direction. Points are independent and
/// evaluated in parallel; the output keeps the order of `b_values`.
pub fn field_sweep(spec: &SpinSystemSpec, b_values: &[f64], settings: &SweepSettings) -> Result<Vec<UniversalityReport>> {
    if b_values.is_empty() {
        return Err(Error::contract("transitions", "empty sweep"));
    }
    spec.validate()?;
    let dir = field_direction(spec);
    b_values
        .par_iter()
        .map(|&b| {
            let at = spec.with_field([dir[0] * b, dir[1] * b, dir[2] * b]);
            analyze_point(&at, settings).map(|(_, mut r)| {
                r.b_tesla = b;
                r
            })
        })
        .collect()
}
