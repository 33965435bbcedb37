//! From an FALPV model and a realization of psi to the LFT of the model.

mod assemble;
mod lift;
mod pipeline;

pub use assemble::{assemble, AssembledLft};
pub use lift::{
    coefficient_factors, fast_path_factor, lift_kron, minimal_sigma_psi, tilde_series, SigmaPsiLft,
};
pub use pipeline::{
    realize_psi, transform, transform_with_reference, FastPathStatus, PsiSource, RealizedPsi,
    TransformOptions, TransformReport, Transformed,
};
