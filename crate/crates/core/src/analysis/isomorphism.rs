use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::LftModel;
use crate::realization::is_minimal;

/// Tolerance on the defining identities of a structured similarity, relative
/// to the size of the models.
pub const ISOMORPHISM_TOL: f64 = 1e-8;

/// Largest cellwise residual of `T_i A1_{ij} = A2_{ij} T_j`, `T_i B1_i = B2_i`,
/// `C1_i = C2_i T_i` and `D1 = D2`.
pub fn similarity_residual(m1: &LftModel, m2: &LftModel, t: &[DMatrix<f64>]) -> f64 {
    let (p1, p2) = (m1.canonical_partition(), m2.canonical_partition());
    let k = m1.block_count();
    let mut worst = linalg::max_abs(&(m1.d() - m2.d()));
    for i in 0..k {
        for j in 0..k {
            worst = worst.max(linalg::max_abs(&(&t[i] * &p1.a[i][j] - &p2.a[i][j] * &t[j])));
        }
        worst = worst.max(linalg::max_abs(&(&t[i] * &p1.b[i] - &p2.b[i])));
        worst = worst.max(linalg::max_abs(&(&p1.c[i] - &p2.c[i] * &t[i])));
    }
    worst
}

/// Block-diagonal `T` with `M2 = T M1 T^{-1}`, if one exists.
///
/// Both models must be minimal. State vectors reached by the same words in
/// `M1` and `M2` are matched block by block (`T_i = X2_i X1_i^+`) and the
/// candidate is then checked against every defining identity.
pub fn find_structured_isomorphism(m1: &LftModel, m2: &LftModel) -> Result<Option<Vec<DMatrix<f64>>>> {
    if m1.outputs() != m2.outputs() || m1.inputs() != m2.inputs() || m1.block_count() != m2.block_count() {
        return Err(Error::shape(
            "LFT signature",
            format!("{}x{} over {} blocks", m1.outputs(), m1.inputs(), m1.block_count()),
            format!("{}x{} over {} blocks", m2.outputs(), m2.inputs(), m2.block_count()),
        ));
    }
    if !is_minimal(m1) || !is_minimal(m2) {
        return Err(Error::Precondition("isomorphism search needs minimal LFTs".into()));
    }
    if m1.blocks() != m2.blocks() {
        return Ok(None);
    }
    let scale = [m1.a(), m1.b(), m1.c(), m2.a(), m2.b(), m2.c()]
        .iter()
        .map(|m| linalg::max_abs(m))
        .fold(1.0, f64::max);
    let k = m1.block_count();
    let (p1, p2) = (m1.canonical_partition(), m2.canonical_partition());
    let mut x1: Vec<Vec<DVector<f64>>> = vec![Vec::new(); k];
    let mut x2: Vec<Vec<DVector<f64>>> = vec![Vec::new(); k];
    let mut queue = VecDeque::new();
    for j in 0..k {
        for col in 0..m1.inputs() {
            queue.push_back((j, p1.b[j].column(col).into_owned(), p2.b[j].column(col).into_owned()));
        }
    }
    while let Some((i, v1, v2)) = queue.pop_front() {
        let n_i = m1.blocks().dim(i);
        if x1[i].len() == n_i {
            continue;
        }
        let mut trial = x1[i].clone();
        trial.push(v1.clone());
        let mat = DMatrix::from_columns(&trial);
        // Rank relative to the model scale, so rounding noise never enters a basis.
        if linalg::rank(&mat, Some(scale)) < trial.len() {
            continue;
        }
        x1[i].push(v1.clone());
        x2[i].push(v2.clone());
        for j in 0..k {
            queue.push_back((j, &p1.a[j][i] * &v1, &p2.a[j][i] * &v2));
        }
    }
    let mut t = Vec::with_capacity(k);
    for i in 0..k {
        let n_i = m1.blocks().dim(i);
        if n_i == 0 {
            t.push(DMatrix::zeros(0, 0));
            continue;
        }
        if x1[i].len() < n_i {
            return Ok(None);
        }
        let a1 = DMatrix::from_columns(&x1[i]);
        let a2 = DMatrix::from_columns(&x2[i]);
        let ti = a2 * linalg::pinv(&a1);
        if linalg::rcond(&ti) < 1e-12 {
            return Ok(None);
        }
        t.push(ti);
    }
    if similarity_residual(m1, m2, &t) <= ISOMORPHISM_TOL * scale {
        Ok(Some(t))
    } else {
        Ok(None)
    }
}
