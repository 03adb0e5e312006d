//! Schrödinger-like solver and the fields derived from ψ.

mod dump;
mod evolve;
mod fields;
mod hamiltonian;
mod moments;
mod wavefunction;

pub use dump::{write_field_csv, FIELD_CSV_HEADER};
pub use evolve::{evolve, CayleyStepper};
pub use fields::{
    density_mask, flux_velocity, osmotic_from_density, osmotic_velocity, quantum_potential,
    MaskedField, QuantumPotential, RHO_FLOOR_RELATIVE,
};
pub use hamiltonian::{solve_eigenstates, EigenSolution, Hamiltonian};
pub use moments::{heisenberg_product, momentum_stats, MomentumStats};
pub use wavefunction::{Wavefunction, NORM_TOLERANCE};
