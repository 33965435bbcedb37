use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::PsiEvaluator;

/// Sample points whose psi values form an affine basis, together with the
/// barycentric weights of the unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBasis {
    /// `n_psi + 1` scheduling points.
    pub points: Vec<Vec<f64>>,
    /// Column `l` holds `λ^l` with `Σ_i λ_i^l = 1` and
    /// `Σ_i λ_i^l psi_j(p_i) = δ_{jl}`.
    pub lambda: DMatrix<f64>,
    /// 2-norm condition number of the augmented system.
    pub cond: f64,
}

const CANDIDATES: usize = 200;
const MAX_COND: f64 = 1e8;

fn augmented(psi: &dyn PsiEvaluator, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = psi.n_psi();
    let mut m = DMatrix::zeros(n + 1, points.len());
    for (i, p) in points.iter().enumerate() {
        m[(0, i)] = 1.0;
        for (j, v) in psi.eval(p)?.iter().enumerate() {
            m[(j + 1, i)] = *v;
        }
    }
    Ok(m)
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let r = linalg::rcond(m);
    if r > 0.0 {
        1.0 / r
    } else {
        f64::INFINITY
    }
}

/// Weights for user-chosen points.
pub fn affine_coefficients_at(psi: &dyn PsiEvaluator, points: &[Vec<f64>]) -> Result<AffineBasis> {
    let n = psi.n_psi();
    if points.len() != n + 1 {
        return Err(Error::shape("affine basis points", n + 1, points.len()));
    }
    let m = augmented(psi, points)?;
    let cond = condition(&m);
    if cond > MAX_COND {
        return Err(Error::DependenceSuspected { cond });
    }
    let mut rhs = DMatrix::zeros(n + 1, n);
    for l in 0..n {
        rhs[(0, l)] = 1.0;
        rhs[(l + 1, l)] = 1.0;
    }
    let lambda = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::DependenceSuspected { cond })?;
    let residual = linalg::max_abs(&(&m * &lambda - &rhs));
    if residual > 1e-8 {
        return Err(Error::DependenceSuspected { cond });
    }
    Ok(AffineBasis {
        points: points.to_vec(),
        lambda,
        cond,
    })
}

/// Random search over `[-1, 1]^{n_p}` for the best-conditioned set of
/// `n_psi + 1` points, then the weights for that set.
pub fn affine_basis_coefficients(psi: &dyn PsiEvaluator, seed: u64) -> Result<AffineBasis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..CANDIDATES {
        let points: Vec<Vec<f64>> = (0..=psi.n_psi())
            .map(|_| (0..psi.n_p()).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        let cond = condition(&augmented(psi, &points)?);
        if best.as_ref().is_none_or(|(c, _)| cond < *c) {
            best = Some((cond, points));
        }
    }
    let (cond, points) = best.expect("at least one candidate");
    if cond > MAX_COND {
        return Err(Error::DependenceSuspected { cond });
    }
    affine_coefficients_at(psi, &points)
}
