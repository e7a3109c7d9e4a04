//! Dephasing-protected qudit codes, the ancilla-assisted correction cycle and
//! the three-qubit phase-flip code.

mod code;
mod phase_flip;
mod protocol;

pub use code::{check_knill_laflamme, solve_code_words, QuditCode, SOLVER_TOLERANCE};
pub use phase_flip::{logical_error_probability, phase_flip_3q, PhaseFlipOutcome, ZErrorModel};
pub use protocol::{
    build_protocol, memory_gain_curve, unprotected_error, CycleOutcome, CycleSimulator, GainCurve,
    GainRow, QecHardware, QecProtocol, SyndromeRound,
};
