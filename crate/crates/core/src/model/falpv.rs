use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::lft::check_shape;

/// Dimensions `(n_x, n_u, n_y, n_p, n_psi)` of a functional-affine LPV model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FalpvDims {
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub n_p: usize,
    pub n_psi: usize,
}

/// Discrete-time LPV model whose matrices are affine in `psi(p(t))`:
/// `X(p) = X_0 + Σ_l X_l psi_l(p)` for `X ∈ {A, B, C, D}`.
///
/// Coefficient sequences are indexed `0..=n_psi`; index 0 is the constant term.
/// The scheduling domain is `[-1, 1]^{n_p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FalpvModel {
    dims: FalpvDims,
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
    d: Vec<DMatrix<f64>>,
}

/// Matrices of the model frozen at one scheduling value.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl FalpvModel {
    pub fn new(
        n_p: usize,
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        c: Vec<DMatrix<f64>>,
        d: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::Precondition(
                "an FALPV model needs A_0 and at least one psi coefficient".into(),
            ));
        }
        let count = a.len();
        for (name, seq) in [("B", &b), ("C", &c), ("D", &d)] {
            if seq.len() != count {
                return Err(Error::shape(
                    format!("{name} coefficient count"),
                    count,
                    seq.len(),
                ));
            }
        }
        let n_x = a[0].nrows();
        let n_u = b[0].ncols();
        let n_y = c[0].nrows();
        if n_x == 0 || n_u == 0 || n_y == 0 || n_p == 0 {
            return Err(Error::Precondition(
                "FALPV dimensions must be positive".into(),
            ));
        }
        for l in 0..count {
            check_shape(&format!("A_{l}"), &a[l], n_x, n_x)?;
            check_shape(&format!("B_{l}"), &b[l], n_x, n_u)?;
            check_shape(&format!("C_{l}"), &c[l], n_y, n_x)?;
            check_shape(&format!("D_{l}"), &d[l], n_y, n_u)?;
        }
        Ok(FalpvModel {
            dims: FalpvDims {
                n_x,
                n_u,
                n_y,
                n_p,
                n_psi: count - 1,
            },
            a,
            b,
            c,
            d,
        })
    }

    pub fn dims(&self) -> FalpvDims {
        self.dims
    }
    pub fn a(&self, l: usize) -> &DMatrix<f64> {
        &self.a[l]
    }
    pub fn b(&self, l: usize) -> &DMatrix<f64> {
        &self.b[l]
    }
    pub fn c(&self, l: usize) -> &DMatrix<f64> {
        &self.c[l]
    }
    pub fn d(&self, l: usize) -> &DMatrix<f64> {
        &self.d[l]
    }
    pub fn a_all(&self) -> &[DMatrix<f64>] {
        &self.a
    }
    pub fn b_all(&self) -> &[DMatrix<f64>] {
        &self.b
    }
    pub fn c_all(&self) -> &[DMatrix<f64>] {
        &self.c
    }
    pub fn d_all(&self) -> &[DMatrix<f64>] {
        &self.d
    }

    /// `[[A_l, B_l], [C_l, D_l]]`, of size `(n_x+n_y) x (n_x+n_u)`.
    pub fn coefficient_block(&self, l: usize) -> DMatrix<f64> {
        let top = linalg::hstack(&[&self.a[l], &self.b[l]], self.dims.n_x);
        let bottom = linalg::hstack(&[&self.c[l], &self.d[l]], self.dims.n_y);
        linalg::vstack(&[&top, &bottom], self.dims.n_x + self.dims.n_u)
    }

    /// `X(p) = X_0 + Σ_l X_l psi_vals[l-1]`.
    pub fn eval_matrices(&self, psi_vals: &[f64]) -> Result<FrozenMatrices> {
        if psi_vals.len() != self.dims.n_psi {
            return Err(Error::shape("psi values", self.dims.n_psi, psi_vals.len()));
        }
        let combine = |seq: &[DMatrix<f64>]| {
            let mut acc = seq[0].clone();
            for (l, v) in psi_vals.iter().enumerate() {
                acc += &seq[l + 1] * *v;
            }
            acc
        };
        Ok(FrozenMatrices {
            a: combine(&self.a),
            b: combine(&self.b),
            c: combine(&self.c),
            d: combine(&self.d),
        })
    }

    /// State transformation `(T A_i T^{-1}, T B_i, C_i T^{-1}, D_i)`.
    pub fn similarity(&self, t: &DMatrix<f64>) -> Result<FalpvModel> {
        let n = self.dims.n_x;
        check_shape("T", t, n, n)?;
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("similarity transform is singular".into()))?;
        FalpvModel::new(
            self.dims.n_p,
            self.a.iter().map(|a| t * a * &t_inv).collect(),
            self.b.iter().map(|b| t * b).collect(),
            self.c.iter().map(|c| c * &t_inv).collect(),
            self.d.clone(),
        )
    }

    /// True if every `l >= 1` coefficient vanishes, i.e. the model is LTI.
    pub fn is_lti(&self) -> bool {
        (1..=self.dims.n_psi).all(|l| {
            self.a[l].iter().chain(self.b[l].iter()).chain(self.c[l].iter()).chain(self.d[l].iter())
                .all(|v| *v == 0.0)
        })
    }
}
