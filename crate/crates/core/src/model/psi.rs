use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BlockStructure, LftModel, TruncatedSeries};

/// Anything that can evaluate the scheduling nonlinearity `psi(p)`.
pub trait PsiEvaluator {
    /// Number of scheduling variables `n_p`.
    fn n_p(&self) -> usize;
    /// Number of components `n_psi`.
    fn n_psi(&self) -> usize;
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>>;
}

/// LFT realization `psi(p) = H Δ_p (I - F Δ_p)^{-1} G` with one block per
/// scheduling variable, a single input and zero feedthrough.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiRealization {
    lft: LftModel,
}

impl PsiRealization {
    pub fn new(
        blocks: BlockStructure,
        f: DMatrix<f64>,
        g: DMatrix<f64>,
        h: DMatrix<f64>,
    ) -> Result<Self> {
        let n_psi = h.nrows();
        let lft = LftModel::new(blocks, f, g, h, DMatrix::zeros(n_psi, 1))?;
        Self::from_lft(lft)
    }

    pub fn from_lft(lft: LftModel) -> Result<Self> {
        if lft.inputs() != 1 {
            return Err(Error::shape("psi realization inputs", 1, lft.inputs()));
        }
        if lft.d().iter().any(|v| *v != 0.0) {
            return Err(Error::Precondition(
                "psi realization must have zero feedthrough".into(),
            ));
        }
        if lft.outputs() == 0 {
            return Err(Error::Precondition("psi must have at least one component".into()));
        }
        Ok(PsiRealization { lft })
    }

    pub fn lft(&self) -> &LftModel {
        &self.lft
    }
    pub fn into_lft(self) -> LftModel {
        self.lft
    }
    pub fn f(&self) -> &DMatrix<f64> {
        self.lft.a()
    }
    pub fn g(&self) -> &DMatrix<f64> {
        self.lft.b()
    }
    pub fn h(&self) -> &DMatrix<f64> {
        self.lft.c()
    }
    pub fn blocks(&self) -> &BlockStructure {
        self.lft.blocks()
    }

    /// Taylor coefficients (the formal input-output map) up to `depth`.
    pub fn taylor(&self, depth: usize) -> Result<TruncatedSeries> {
        TruncatedSeries::from_lft(&self.lft, depth)
    }
}

impl PsiEvaluator for PsiRealization {
    fn n_p(&self) -> usize {
        self.lft.block_count()
    }
    fn n_psi(&self) -> usize {
        self.lft.outputs()
    }
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.lft.star_at_point(p)?.iter().copied().collect())
    }
}

/// Truncated Taylor summation of a column series.
impl PsiEvaluator for TruncatedSeries {
    fn n_p(&self) -> usize {
        self.alphabet()
    }
    fn n_psi(&self) -> usize {
        self.shape().0
    }
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(p)?.iter().copied().collect())
    }
}

/// Evaluator backed by a plain closure.
pub struct FnPsi<F> {
    n_p: usize,
    n_psi: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnPsi<F> {
    pub fn new(n_p: usize, n_psi: usize, f: F) -> Self {
        FnPsi { n_p, n_psi, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> PsiEvaluator for FnPsi<F> {
    fn n_p(&self) -> usize {
        self.n_p
    }
    fn n_psi(&self) -> usize {
        self.n_psi
    }
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.n_p {
            return Err(Error::shape("scheduling point", self.n_p, p.len()));
        }
        Ok((self.f)(p))
    }
}

/// `p ↦ inner(λ p)`, used after a stabilizing rescale of the arguments.
pub struct ScaledArgs<'a> {
    pub inner: &'a dyn PsiEvaluator,
    pub lambda: f64,
}

impl PsiEvaluator for ScaledArgs<'_> {
    fn n_p(&self) -> usize {
        self.inner.n_p()
    }
    fn n_psi(&self) -> usize {
        self.inner.n_psi()
    }
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = p.iter().map(|v| v * self.lambda).collect();
        self.inner.eval(&scaled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn polynomial_realization_evaluates_to_p_and_p_squared() {
        let psi = PsiRealization::new(
            BlockStructure::new(vec![2]).unwrap(),
            dmatrix![0.0, 0.0; 1.0, 0.0],
            dmatrix![1.0; 0.0],
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let v = psi.eval(&[-0.6]).unwrap();
        assert!((v[0] + 0.6).abs() < 1e-15 && (v[1] - 0.36).abs() < 1e-15);
        assert_eq!(psi.n_p(), 1);
        assert_eq!(psi.n_psi(), 2);
    }

    #[test]
    fn rejects_feedthrough_and_multi_input() {
        let lft = LftModel::new(
            BlockStructure::new(vec![1]).unwrap(),
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.1],
        )
        .unwrap();
        assert!(PsiRealization::from_lft(lft).is_err());
        let lft = LftModel::new(
            BlockStructure::new(vec![1]).unwrap(),
            dmatrix![0.5],
            dmatrix![1.0, 1.0],
            dmatrix![1.0],
            dmatrix![0.0, 0.0],
        )
        .unwrap();
        assert!(PsiRealization::from_lft(lft).is_err());
    }

    #[test]
    fn scaled_args() {
        let f = FnPsi::new(1, 1, |p: &[f64]| vec![p[0] * p[0]]);
        let s = ScaledArgs { inner: &f, lambda: 0.5 };
        assert_eq!(s.eval(&[2.0]).unwrap(), vec![1.0]);
    }
}
