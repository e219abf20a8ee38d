//! Steady states of Lindblad open quantum systems.
//!
//! The density matrix is sought as `ρ = Σ β_ij |χ_i⟩⟨χ_j|` over a set of
//! Krylov-like ansatz states. Projecting `L[ρ] = 0` onto the ansatz turns the
//! problem into a semidefinite feasibility problem for `β`, solved here by
//! alternating projections. A dense Liouvillian oracle provides ground truth,
//! and the symmetry module separates degenerate steady states.

pub mod ansatz;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod overlaps;
pub mod pauli;
pub mod sdp;
pub mod statevector;
pub mod symmetry;

pub use ansatz::{moment_states, moment_states_random, AnsatzRecord, AnsatzSet, SeedDescriptor};
pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use model::{Dissipator, OpenSystemModel};
pub use oracle::{exact_ness, fidelity, steady_states, true_residual, NessBasis};
pub use overlaps::{assemble, observable_matrix, ObservableMatrix, OverlapSet};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use sdp::{
    solve_feasibility, solve_least_squares, BetaMatrix, Diagnostics, FeasibilityProblem, LinearConstraint,
    SolveStatus, SolverOptions,
};
pub use statevector::StateVector;
pub use symmetry::{extract_all_ness, ExtractionOptions, ExtractionReport, RhoCombination, SectorSelection, SymmetrySpec};
