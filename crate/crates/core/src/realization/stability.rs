use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Result;
use crate::linalg;
use crate::model::{BlockStructure, LftModel, PsiRealization};

/// Block-diagonal `P = Diag[P_1, ..., P_d] > 0` with `P - AᵀPA > 0`.
///
/// `margin` is `λ_min(P - AᵀPA)` for the stored (unnormalized) `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    pub blocks: Vec<DMatrix<f64>>,
    pub margin: f64,
}

impl StabilityCertificate {
    pub fn p(&self) -> DMatrix<f64> {
        linalg::block_diag(&self.blocks)
    }

    /// Recompute both definiteness conditions from scratch.
    pub fn verify(&self, a: &DMatrix<f64>) -> bool {
        let p = self.p();
        if p.shape() != a.shape() {
            return false;
        }
        if a.nrows() == 0 {
            return true;
        }
        let blocks_ok = self
            .blocks
            .iter()
            .all(|b| b.nrows() == 0 || sym_eigs(b).iter().all(|&v| v > 0.0));
        blocks_ok && sym_eigs(&lyapunov_residual(a, &p)).iter().all(|&v| v > 0.0)
    }
}

fn sym_eigs(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
}

fn lyapunov_residual(a: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    p - a.transpose() * p * a
}

/// Certificate quality: `λ_min(P - AᵀPA)`, or `-inf` unless every block is PD.
fn margin_of(a: &DMatrix<f64>, blocks: &[DMatrix<f64>]) -> f64 {
    if blocks
        .iter()
        .any(|b| b.nrows() > 0 && linalg::min_sym_eigenvalue(b) <= 0.0)
    {
        return f64::NEG_INFINITY;
    }
    linalg::min_sym_eigenvalue(&lyapunov_residual(a, &linalg::block_diag(blocks)))
}

fn split_blocks(p: &DMatrix<f64>, structure: &BlockStructure) -> Vec<DMatrix<f64>> {
    (0..structure.count())
        .map(|i| {
            let r = structure.range(i);
            let blk = p.view((r.start, r.start), (r.len(), r.len())).into_owned();
            (&blk + blk.transpose()) * 0.5
        })
        .collect()
}

/// Solution of `AᵀPA - P = -I` by the doubling iteration, if it converges.
fn discrete_lyapunov(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut p = DMatrix::<f64>::identity(n, n);
    let mut ak = a.clone();
    for _ in 0..64 {
        let step = ak.transpose() * &p * &ak;
        p += &step;
        ak = &ak * &ak;
        if !p.iter().all(|v| v.is_finite()) || linalg::max_abs(&p) > 1e12 {
            return None;
        }
        if linalg::max_abs(&ak) < 1e-18 || linalg::max_abs(&step) <= 1e-16 * linalg::max_abs(&p) {
            return Some(p);
        }
    }
    None
}

fn scaled(base: &[DMatrix<f64>], mult: &[f64]) -> Vec<DMatrix<f64>> {
    base.iter().zip(mult).map(|(b, &c)| b * c).collect()
}

/// Coordinate search over one positive multiplier per block.
fn multiplier_search(a: &DMatrix<f64>, base: &[DMatrix<f64>]) -> (Vec<f64>, f64) {
    let k = base.len();
    let mut exps = vec![0.0f64; k];
    let objective = |exps: &[f64]| {
        let mult: Vec<f64> = exps.iter().map(|e| 10f64.powf(*e)).collect();
        let blocks = scaled(base, &mult);
        let pmax = blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        margin_of(a, &blocks) / pmax
    };
    let mut best = objective(&exps);
    let passes: [(f64, f64); 3] = [(2.0, 0.25), (0.25, 1.0 / 32.0), (1.0 / 32.0, 1.0 / 256.0)];
    for (pass, &(half_width, step)) in passes.iter().enumerate() {
        for i in 0..k {
            let center = if pass == 0 { 0.0 } else { exps[i] };
            let count = (2.0 * half_width / step).round() as usize;
            for s in 0..=count {
                let mut trial = exps.clone();
                trial[i] = center - half_width + s as f64 * step;
                let value = objective(&trial);
                if value > best {
                    best = value;
                    exps = trial;
                }
            }
        }
    }
    (exps.iter().map(|e| 10f64.powf(*e)).collect(), best)
}

/// Search for a structured Lyapunov certificate of `A` for the block
/// structure of `m`. `None` means "unknown", not "unstable".
///
/// Candidates in order: `P = I`; the block-diagonal part of the full discrete
/// Lyapunov solution; per-block scalings of the better of those two.
pub fn check_stability(m: &LftModel) -> Option<StabilityCertificate> {
    let a = m.a();
    let structure = m.blocks();
    let k = structure.count();
    if m.dim() == 0 {
        return Some(StabilityCertificate {
            blocks: vec![DMatrix::zeros(0, 0); k],
            margin: f64::INFINITY,
        });
    }
    let accept = |blocks: Vec<DMatrix<f64>>| {
        let margin = margin_of(a, &blocks);
        let cert = StabilityCertificate { blocks, margin };
        (margin > 0.0 && cert.verify(a)).then_some(cert)
    };

    let identity: Vec<DMatrix<f64>> = structure
        .dims()
        .iter()
        .map(|&n| DMatrix::identity(n, n))
        .collect();
    if let Some(cert) = accept(identity.clone()) {
        return Some(cert);
    }
    let lyap = discrete_lyapunov(a).map(|p| split_blocks(&p, structure));
    if let Some(blocks) = &lyap {
        if let Some(cert) = accept(blocks.clone()) {
            return Some(cert);
        }
    }
    if k > 4 {
        return None;
    }
    let mut seeds = vec![identity];
    if let Some(blocks) = lyap {
        if margin_of(&DMatrix::zeros(a.nrows(), a.ncols()), &blocks) > 0.0 {
            seeds.push(blocks);
        }
    }
    for base in seeds {
        let (mult, best) = multiplier_search(a, &base);
        if best > 0.0 {
            if let Some(cert) = accept(scaled(&base, &mult)) {
                return Some(cert);
            }
        }
    }
    None
}

/// Rescale the arguments of `psi` so its realization becomes contractive:
/// `(λF, G, λH)` realizes `p ↦ psi(λp)`. Returns the scaled realization and
/// `λ = min(1, 1 / (‖F‖₂ (1 + 1e-6)))`.
pub fn stabilize_scale(psi: &PsiRealization) -> Result<(PsiRealization, f64)> {
    let norm = linalg::spectral_norm(psi.f());
    let lambda = if norm > 0.0 {
        (1.0 / (norm * (1.0 + 1e-6))).min(1.0)
    } else {
        1.0
    };
    let scaled = PsiRealization::new(
        psi.blocks().clone(),
        psi.f() * lambda,
        psi.g().clone(),
        psi.h() * lambda,
    )?;
    Ok((scaled, lambda))
}
