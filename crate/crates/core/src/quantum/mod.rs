//! Physics substrate: matrices, the control Hamiltonian, propagation,
//! fidelity and pulse filtering.

pub mod expm;
pub mod fidelity;
pub mod filter;
pub mod hamiltonian;
pub mod matrix;
pub mod propagate;
pub mod pulse;
pub mod target;

pub use expm::{matrix_exponential, propagator, HermitianEigen};
pub use fidelity::fidelity;
pub use filter::{discretization_error, discretization_errors, filtered_unitary, gaussian_filter, FilterWeights};
pub use hamiltonian::{build_hamiltonian, ControlSystem, SystemParameters};
pub use matrix::{time_ordered_product, ComplexMatrix, UnitaryOperator};
pub use propagate::{evolve_samples, propagate};
pub use pulse::PulseSequence;
pub use target::{build_target_sqrt_zx, build_target_x, TargetGate};
