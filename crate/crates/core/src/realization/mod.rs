//! Series realization, structured minimization and stability certificates.

mod hankel;
mod minimize;
mod stability;

pub use hankel::{hankel_realize, representation_to_lft, LinearRepresentation};
pub use minimize::{
    is_minimal, minimality_report, minimize_lft, observable_bases, reachable_bases,
    MinimalityReport, Minimized,
};
pub use stability::{check_stability, stabilize_scale, StabilityCertificate};
