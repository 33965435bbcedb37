//! Domain types: words, block structures, FALPV and LFT models, truncated
//! series, and realizations of the scheduling nonlinearity.

mod falpv;
mod lft;
mod psi;
mod series;
mod word;

pub use falpv::{FalpvDims, FalpvModel, FrozenMatrices};
pub use lft::{
    delta_of_point, BlockStructure, CanonicalPartition, LftModel, WordProducts, WELL_POSED_RCOND,
};
pub use psi::{FnPsi, PsiEvaluator, PsiRealization, ScaledArgs};
pub use series::TruncatedSeries;
pub use word::Word;
