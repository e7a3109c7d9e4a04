//! Spin Hamiltonians of single molecules and small multi-site systems.

mod config;
mod eigen;
mod hamiltonian;
mod operators;

pub(crate) use config::describe_toml_error;
pub use config::{parse_spec, spec_from_table, spec_to_table};
pub use eigen::{diagonalize, diagonalize_spin, EigenSystem, DEGENERACY_TOL_GHZ};
pub use hamiltonian::{
    build_hamiltonian, build_hamiltonian_with_limit, embed_operator, Axis, Coupling, GFactor,
    NuclearSpin, SpinSite, SpinSystemSpec, DEFAULT_MAX_DIM, ZEEMAN_GHZ_PER_TESLA,
};
pub use operators::{spin_operators, Spin, SpinOperators};
