use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BlockStructure, FalpvModel, LftModel, PsiRealization, TruncatedSeries, Word};
use crate::realization::minimize_lft;

/// The minimal LFT of `p ↦ Σ_l [[A_l, B_l], [C_l, D_l]] psi_l(p)` with its
/// `𝓗 = [𝓗x; 𝓗y]` and `𝓖 = [𝓖x, 𝓖u]` partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPsiLft {
    lft: LftModel,
    n_x: usize,
    n_u: usize,
}

impl SigmaPsiLft {
    pub fn new(lft: LftModel, n_x: usize, n_u: usize) -> Result<Self> {
        if lft.inputs() != n_x + n_u {
            return Err(Error::shape("sigma-psi inputs", n_x + n_u, lft.inputs()));
        }
        if lft.outputs() < n_x {
            return Err(Error::shape("sigma-psi outputs", format!(">= {n_x}"), lft.outputs()));
        }
        if lft.d().iter().any(|v| *v != 0.0) {
            return Err(Error::Precondition("sigma-psi LFT must have zero feedthrough".into()));
        }
        Ok(SigmaPsiLft { lft, n_x, n_u })
    }

    pub fn lft(&self) -> &LftModel {
        &self.lft
    }
    pub fn blocks(&self) -> &BlockStructure {
        self.lft.blocks()
    }
    pub fn f(&self) -> &DMatrix<f64> {
        self.lft.a()
    }
    pub fn hx(&self) -> DMatrix<f64> {
        self.lft.c().rows(0, self.n_x).into_owned()
    }
    pub fn hy(&self) -> DMatrix<f64> {
        let n_y = self.lft.outputs() - self.n_x;
        self.lft.c().rows(self.n_x, n_y).into_owned()
    }
    pub fn gx(&self) -> DMatrix<f64> {
        self.lft.b().columns(0, self.n_x).into_owned()
    }
    pub fn gu(&self) -> DMatrix<f64> {
        self.lft.b().columns(self.n_x, self.n_u).into_owned()
    }

    /// `𝓗 Δ_p (I - 𝓕 Δ_p)^{-1} 𝓖` at a scheduling point.
    pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.lft.star_at_point(p)
    }
}

fn check_compatible(falpv: &FalpvModel, psi: &PsiRealization) -> Result<()> {
    let dims = falpv.dims();
    if psi.h().nrows() != dims.n_psi {
        return Err(Error::shape("psi components", dims.n_psi, psi.h().nrows()));
    }
    if psi.blocks().count() != dims.n_p {
        return Err(Error::shape("psi scheduling variables", dims.n_p, psi.blocks().count()));
    }
    Ok(())
}

/// `S̃(ν) = Σ_l [[A_l, B_l], [C_l, D_l]] S^l(ν)` for a column series `S` of psi.
pub fn tilde_series(falpv: &FalpvModel, psi_series: &TruncatedSeries, word: &Word) -> Result<DMatrix<f64>> {
    let dims = falpv.dims();
    if psi_series.shape() != (dims.n_psi, 1) {
        return Err(Error::shape(
            "psi series",
            format!("{}x1", dims.n_psi),
            format!("{:?}", psi_series.shape()),
        ));
    }
    let s = psi_series.get(word)?;
    let mut acc = DMatrix::zeros(dims.n_x + dims.n_y, dims.n_x + dims.n_u);
    for l in 1..=dims.n_psi {
        if s[(l - 1, 0)] != 0.0 {
            acc += falpv.coefficient_block(l) * s[(l - 1, 0)];
        }
    }
    Ok(acc)
}

/// Kronecker lifting `(F ⊗ I_q, G ⊗ I_q, Σ_l H_l ⊗ K_l)` with `q = n_x + n_u`
/// and `K_l` the `l`-th coefficient block of the model.
pub fn lift_kron(falpv: &FalpvModel, psi: &PsiRealization) -> Result<LftModel> {
    check_compatible(falpv, psi)?;
    let dims = falpv.dims();
    let q = dims.n_x + dims.n_u;
    let rows = dims.n_x + dims.n_y;
    let eye = DMatrix::<f64>::identity(q, q);
    let f = psi.f().kronecker(&eye);
    let g = psi.g().kronecker(&eye);
    let mut h = DMatrix::zeros(rows, psi.f().nrows() * q);
    for l in 1..=dims.n_psi {
        let row = psi.h().rows(l - 1, 1).into_owned();
        h += row.kronecker(&falpv.coefficient_block(l));
    }
    LftModel::new(psi.blocks().scaled(q), f, g, h, DMatrix::zeros(rows, q))
}

/// Minimal realization of the lifted series, partitioned.
pub fn minimal_sigma_psi(falpv: &FalpvModel, psi: &PsiRealization) -> Result<SigmaPsiLft> {
    let lifted = lift_kron(falpv, psi)?;
    let reduced = minimize_lft(&lifted)?;
    let dims = falpv.dims();
    SigmaPsiLft::new(reduced.lft, dims.n_x, dims.n_u)
}

/// Rank factorization `K_1 = L R` of the single coefficient block by SVD, with
/// `L` of full column rank.
pub fn coefficient_factors(falpv: &FalpvModel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dims = falpv.dims();
    if dims.n_psi != 1 {
        return Err(Error::InvalidFactor(format!(
            "fast path needs exactly one psi component, model has {}",
            dims.n_psi
        )));
    }
    let k = falpv.coefficient_block(1);
    let svd = linalg::svd(&k);
    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = linalg::rank_tolerance(k.nrows(), k.ncols(), smax);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    let mut l = DMatrix::zeros(k.nrows(), keep.len());
    let mut r = DMatrix::zeros(keep.len(), k.ncols());
    for (dst, &i) in keep.iter().enumerate() {
        l.set_column(dst, &(u.column(i) * svd.singular_values[i]));
        r.set_row(dst, &v_t.row(i));
    }
    Ok((l, r))
}

/// Direct construction `(F ⊗ I_m, G ⊗ R, H ⊗ L)` for `n_psi = 1` and
/// `[[A_1, B_1], [C_1, D_1]] = L R`.
pub fn fast_path_factor(
    falpv: &FalpvModel,
    psi: &PsiRealization,
    l: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<SigmaPsiLft> {
    check_compatible(falpv, psi)?;
    let dims = falpv.dims();
    if dims.n_psi != 1 {
        return Err(Error::InvalidFactor(format!(
            "fast path needs exactly one psi component, model has {}",
            dims.n_psi
        )));
    }
    let k = falpv.coefficient_block(1);
    let m = l.ncols();
    if l.nrows() != k.nrows() || r.shape() != (m, k.ncols()) {
        return Err(Error::InvalidFactor(format!(
            "factor shapes {:?} and {:?} do not multiply to {:?}",
            l.shape(),
            r.shape(),
            k.shape()
        )));
    }
    let residual = linalg::max_abs(&(l * r - &k));
    if residual > 1e-10 {
        return Err(Error::InvalidFactor(format!("residual {residual:.3e} exceeds 1e-10")));
    }
    if linalg::rank(l, None) != m {
        return Err(Error::InvalidFactor("L is not of full column rank".into()));
    }
    let eye = DMatrix::<f64>::identity(m, m);
    let lft = LftModel::new(
        psi.blocks().scaled(m),
        psi.f().kronecker(&eye),
        psi.g().kronecker(r),
        psi.h().kronecker(l),
        DMatrix::zeros(k.nrows(), k.ncols()),
    )?;
    SigmaPsiLft::new(lft, dims.n_x, dims.n_u)
}
