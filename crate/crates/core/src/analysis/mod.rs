//! Simulation, equivalence checks, isomorphism search and affine bases.

mod affine;
mod equivalence;
mod isomorphism;
mod simulate;

pub use affine::{affine_basis_coefficients, affine_coefficients_at, AffineBasis};
pub use equivalence::{
    falpv_equivalence, falpv_is_minimal, falpv_minimality, formal_equivalence, EquivalenceResult,
    FalpvEquivalence, MarkovWitness, EQUIVALENCE_TOL,
};
pub use isomorphism::{find_structured_isomorphism, similarity_residual, ISOMORPHISM_TOL};
pub use simulate::{simulate_falpv, simulate_lft_loop, trajectory_deviation, LoopTrajectory, Trajectory};
