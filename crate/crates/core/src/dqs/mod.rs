//! Digital quantum simulation on qudit hardware: Trotter compilation, boson
//! encodings, switch-mediated entanglers and resource counting.

mod boson;
mod resources;
mod switch;
mod trotter;

pub use boson::{boson_qudit_encoding, truncated_annihilation, BosonEncoding};
pub use resources::{pauli_expansion, resource_compare, ResourceComparison};
pub use switch::{bell_state_fidelity, entangling_power, switch_cphase, SwitchDrive, SwitchGate};
pub use trotter::{
    trotter_scan, trotterize, ChainModel, Gate, GateKind, GateSequence, HardwareRates,
    ResourceEstimate, SpinBosonModel, TargetModel, TrotterPoint,
};
