use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{delta_of_point, FalpvModel, PsiEvaluator, WELL_POSED_RCOND};
use crate::transform::AssembledLft;

/// Signals of one simulation run from `x(0) = 0`. `x` has `horizon + 1`
/// entries, the other sequences `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub u: Vec<DVector<f64>>,
    pub p: Vec<Vec<f64>>,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.y.len()
    }
}

fn check_signals(
    u: &[DVector<f64>],
    p: &[Vec<f64>],
    horizon: usize,
    n_u: usize,
    n_p: usize,
) -> Result<()> {
    if u.len() < horizon || p.len() < horizon {
        return Err(Error::Precondition(format!(
            "signals cover {} input and {} scheduling samples, horizon is {horizon}",
            u.len(),
            p.len()
        )));
    }
    for t in 0..horizon {
        if u[t].len() != n_u {
            return Err(Error::shape(format!("u({t})"), n_u, u[t].len()));
        }
        if p[t].len() != n_p {
            return Err(Error::shape(format!("p({t})"), n_p, p[t].len()));
        }
        if p[t].iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::Precondition(format!("p({t}) leaves [-1, 1]")));
        }
    }
    Ok(())
}

fn at_step(e: Error, t: usize) -> Error {
    match e {
        Error::WellPosedness { rcond, .. } => Error::WellPosedness { rcond, step: Some(t) },
        other => other,
    }
}

/// `x(t+1) = A(p(t)) x(t) + B(p(t)) u(t)`, `y(t) = C(p(t)) x(t) + D(p(t)) u(t)`.
pub fn simulate_falpv(
    falpv: &FalpvModel,
    psi: &dyn PsiEvaluator,
    u: &[DVector<f64>],
    p: &[Vec<f64>],
    horizon: usize,
) -> Result<Trajectory> {
    let dims = falpv.dims();
    check_signals(u, p, horizon, dims.n_u, dims.n_p)?;
    let mut x = vec![DVector::zeros(dims.n_x)];
    let mut y = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let vals = psi.eval(&p[t]).map_err(|e| at_step(e, t))?;
        let m = falpv.eval_matrices(&vals)?;
        y.push(&m.c * &x[t] + &m.d * &u[t]);
        x.push(&m.a * &x[t] + &m.b * &u[t]);
    }
    Ok(Trajectory {
        u: u[..horizon].to_vec(),
        p: p[..horizon].to_vec(),
        x,
        y,
    })
}

/// Simulation of an assembled LFT with the shift block closed as a delay.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTrajectory {
    pub trajectory: Trajectory,
    /// `z̃(t)` for `t < horizon`.
    pub z: Vec<DVector<f64>>,
}

/// At each step `z̃ = (I - 𝓕Δ)^{-1}(𝓖x x + 𝓖u u)`, then
/// `x⁺ = A_0 x + 𝓗x Δ z̃ + B_0 u` and `y = C_0 x + 𝓗y Δ z̃ + D_0 u`.
pub fn simulate_lft_loop(
    m: &AssembledLft,
    u: &[DVector<f64>],
    p: &[Vec<f64>],
    horizon: usize,
) -> Result<LoopTrajectory> {
    let dims = m.dims();
    check_signals(u, p, horizon, dims.n_u, dims.n_p)?;
    let (a0, b0, c0, d0) = (m.a0(), m.b0(), m.c0(), m.d0().clone());
    let (f, gx, gu, hx, hy) = (m.f(), m.gx(), m.gu(), m.hx(), m.hy());
    let blocks = m.scheduling_blocks();
    let nz = blocks.total();
    let mut x = vec![DVector::zeros(dims.n_x)];
    let mut y = Vec::with_capacity(horizon);
    let mut z = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let delta = delta_of_point(&m.loop_point(&p[t]), &blocks)?;
        let loop_matrix = DMatrix::identity(nz, nz) - &f * &delta;
        let rhs = DMatrix::from_column_slice(nz, 1, (&gx * &x[t] + &gu * &u[t]).as_slice());
        let zt = linalg::solve_checked(&loop_matrix, &rhs, WELL_POSED_RCOND)
            .map_err(|rcond| Error::WellPosedness { rcond, step: Some(t) })?;
        let zt = DVector::from_column_slice(zt.as_slice());
        let w = &delta * &zt;
        y.push(&c0 * &x[t] + &hy * &w + &d0 * &u[t]);
        x.push(&a0 * &x[t] + &hx * &w + &b0 * &u[t]);
        z.push(zt);
    }
    Ok(LoopTrajectory {
        trajectory: Trajectory {
            u: u[..horizon].to_vec(),
            p: p[..horizon].to_vec(),
            x,
            y,
        },
        z,
    })
}

/// Largest output and state deviation between two runs over a common horizon.
pub fn trajectory_deviation(a: &Trajectory, b: &Trajectory) -> (f64, f64) {
    let dy = a
        .y
        .iter()
        .zip(&b.y)
        .map(|(p, q)| linalg::max_abs_vec(&(p - q)))
        .fold(0.0, f64::max);
    let dx = a
        .x
        .iter()
        .zip(&b.x)
        .map(|(p, q)| linalg::max_abs_vec(&(p - q)))
        .fold(0.0, f64::max);
    (dy, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnPsi;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn hand_recursion() {
        let falpv = FalpvModel::new(
            1,
            vec![dmatrix![0.0], dmatrix![1.0], dmatrix![0.0]],
            vec![dmatrix![1.0], dmatrix![0.0], dmatrix![0.0]],
            vec![dmatrix![1.0], dmatrix![0.0], dmatrix![0.0]],
            vec![dmatrix![0.0], dmatrix![0.0], dmatrix![0.0]],
        )
        .unwrap();
        let psi = FnPsi::new(1, 2, |p: &[f64]| vec![p[0], p[0] * p[0]]);
        let u = vec![dvector![1.0], dvector![0.0], dvector![0.0]];
        let p = vec![vec![0.5], vec![0.5], vec![0.2]];
        let tr = simulate_falpv(&falpv, &psi, &u, &p, 3).unwrap();
        assert_eq!(tr.x[1], dvector![1.0]);
        assert_eq!(tr.x[2], dvector![0.5]);
        assert_eq!(tr.y[0], dvector![0.0]);
        assert_eq!(tr.y[1], dvector![1.0]);
        assert_eq!(tr.y[2], dvector![0.5]);
        assert!(simulate_falpv(&falpv, &psi, &u, &vec![vec![1.5]; 3], 3).is_err());
    }
}
