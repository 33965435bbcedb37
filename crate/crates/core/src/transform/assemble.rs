use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BlockStructure, FalpvDims, FalpvModel, LftModel};
use crate::transform::SigmaPsiLft;

/// LFT of a whole FALPV model. Block 0 has size `n_x` and stands for the
/// backward shift; blocks `1..=n_p` are the scheduling blocks.
///
/// `scheduling_scale` is the factor `λ` applied to psi's arguments during
/// realization: the scheduling blocks must be driven by `p / λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledLft {
    lft: LftModel,
    dims: FalpvDims,
    scheduling_scale: f64,
}

impl AssembledLft {
    pub fn new(lft: LftModel, dims: FalpvDims, scheduling_scale: f64) -> Result<Self> {
        if lft.block_count() != dims.n_p + 1 {
            return Err(Error::shape("assembled block count", dims.n_p + 1, lft.block_count()));
        }
        if lft.blocks().dim(0) != dims.n_x {
            return Err(Error::shape("shift block", dims.n_x, lft.blocks().dim(0)));
        }
        if lft.outputs() != dims.n_y || lft.inputs() != dims.n_u {
            return Err(Error::shape(
                "assembled signature",
                format!("{}x{}", dims.n_y, dims.n_u),
                format!("{}x{}", lft.outputs(), lft.inputs()),
            ));
        }
        if !(scheduling_scale > 0.0 && scheduling_scale <= 1.0) {
            return Err(Error::Precondition(format!(
                "scheduling scale {scheduling_scale} outside (0, 1]"
            )));
        }
        Ok(AssembledLft {
            lft,
            dims,
            scheduling_scale,
        })
    }

    pub fn lft(&self) -> &LftModel {
        &self.lft
    }
    pub fn into_lft(self) -> LftModel {
        self.lft
    }
    pub fn dims(&self) -> FalpvDims {
        self.dims
    }
    pub fn scheduling_scale(&self) -> f64 {
        self.scheduling_scale
    }

    /// Block structure of the scheduling part (blocks `1..=n_p`).
    pub fn scheduling_blocks(&self) -> BlockStructure {
        BlockStructure::new(self.lft.blocks().dims()[1..].to_vec()).expect("n_p >= 1")
    }

    /// Scheduling value seen by the LFT for a model scheduling value `p`.
    pub fn loop_point(&self, p: &[f64]) -> Vec<f64> {
        p.iter().map(|v| v / self.scheduling_scale).collect()
    }

    fn nx(&self) -> usize {
        self.dims.n_x
    }
    fn nz(&self) -> usize {
        self.lft.dim() - self.dims.n_x
    }

    pub fn a0(&self) -> DMatrix<f64> {
        self.lft.a().view((0, 0), (self.nx(), self.nx())).into_owned()
    }
    pub fn b0(&self) -> DMatrix<f64> {
        self.lft.b().rows(0, self.nx()).into_owned()
    }
    pub fn c0(&self) -> DMatrix<f64> {
        self.lft.c().columns(0, self.nx()).into_owned()
    }
    pub fn d0(&self) -> &DMatrix<f64> {
        self.lft.d()
    }
    pub fn f(&self) -> DMatrix<f64> {
        self.lft.a().view((self.nx(), self.nx()), (self.nz(), self.nz())).into_owned()
    }
    pub fn gx(&self) -> DMatrix<f64> {
        self.lft.a().view((self.nx(), 0), (self.nz(), self.nx())).into_owned()
    }
    pub fn gu(&self) -> DMatrix<f64> {
        self.lft.b().rows(self.nx(), self.nz()).into_owned()
    }
    pub fn hx(&self) -> DMatrix<f64> {
        self.lft.a().view((0, self.nx()), (self.nx(), self.nz())).into_owned()
    }
    pub fn hy(&self) -> DMatrix<f64> {
        self.lft.c().columns(self.nx(), self.nz()).into_owned()
    }
}

/// `𝔸 = [[A_0, 𝓗x], [𝓖x, 𝓕]]`, `𝔹 = [B_0; 𝓖u]`, `ℂ = [C_0, 𝓗y]`, `𝔻 = D_0`.
pub fn assemble(falpv: &FalpvModel, sp: &SigmaPsiLft) -> Result<AssembledLft> {
    let dims = falpv.dims();
    if sp.lft().outputs() != dims.n_x + dims.n_y || sp.lft().inputs() != dims.n_x + dims.n_u {
        return Err(Error::shape(
            "sigma-psi signature",
            format!("{}x{}", dims.n_x + dims.n_y, dims.n_x + dims.n_u),
            format!("{}x{}", sp.lft().outputs(), sp.lft().inputs()),
        ));
    }
    if sp.blocks().count() != dims.n_p {
        return Err(Error::shape("sigma-psi blocks", dims.n_p, sp.blocks().count()));
    }
    let nz = sp.lft().dim();
    let n = dims.n_x + nz;
    let hx = sp.hx();
    let gx = sp.gx();
    let top = linalg::hstack(&[falpv.a(0), &hx], dims.n_x);
    let bottom = linalg::hstack(&[&gx, sp.f()], nz);
    let a = linalg::vstack(&[&top, &bottom], n);
    let b = linalg::vstack(&[falpv.b(0), &sp.gu()], dims.n_u);
    let c = linalg::hstack(&[falpv.c(0), &sp.hy()], dims.n_y);
    let mut block_dims = vec![dims.n_x];
    block_dims.extend_from_slice(sp.blocks().dims());
    let lft = LftModel::new(BlockStructure::new(block_dims)?, a, b, c, falpv.d(0).clone())?;
    AssembledLft::new(lft, dims, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::minimal_sigma_psi;
    use crate::model::PsiRealization;
    use nalgebra::dmatrix;

    #[test]
    fn lti_model_keeps_only_the_shift_block() {
        let z = |r, c| DMatrix::zeros(r, c);
        let falpv = FalpvModel::new(
            1,
            vec![dmatrix![0.2, 0.1; 0.0, 0.3], z(2, 2)],
            vec![dmatrix![1.0; 1.0], z(2, 1)],
            vec![dmatrix![1.0, 0.0], z(1, 2)],
            vec![dmatrix![0.5], z(1, 1)],
        )
        .unwrap();
        let psi = PsiRealization::new(
            BlockStructure::new(vec![1]).unwrap(),
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![1.0],
        )
        .unwrap();
        let sp = minimal_sigma_psi(&falpv, &psi).unwrap();
        assert_eq!(sp.lft().dim(), 0);
        let m = assemble(&falpv, &sp).unwrap();
        assert_eq!(m.lft().blocks().dims(), &[2, 0]);
        assert_eq!(m.lft().a(), falpv.a(0));
        assert_eq!(m.lft().b(), falpv.b(0));
        assert_eq!(m.lft().c(), falpv.c(0));
        assert_eq!(m.lft().d(), falpv.d(0));
    }
}
