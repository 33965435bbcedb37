use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::linalg;
use crate::model::{BlockStructure, LftModel};

/// Result of [`minimize_lft`].
#[derive(Debug, Clone)]
pub struct Minimized {
    pub lft: LftModel,
    /// Per block, orthonormal columns `P_i` (original dim x reduced dim) with
    /// `A'_{ij} = P_iᵀ A_{ij} P_j`, `B'_i = P_iᵀ B_i`, `C'_i = C_i P_i`.
    pub bases: Vec<DMatrix<f64>>,
}

/// Per-block dimensions of the reachable and observable subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub block_dims: Vec<usize>,
    pub reachable: Vec<usize>,
    pub observable: Vec<usize>,
}

impl MinimalityReport {
    pub fn is_minimal(&self) -> bool {
        self.reachable == self.block_dims && self.observable == self.block_dims
    }
}

fn model_scale(m: &LftModel) -> f64 {
    [m.a(), m.b(), m.c()]
        .iter()
        .map(|x| linalg::spectral_norm(x))
        .fold(0.0, f64::max)
}

/// Smallest family of subspaces `R_i` with `im B_i ⊆ R_i` and
/// `A_{ij} R_j ⊆ R_i`, as orthonormal bases.
pub fn reachable_bases(m: &LftModel) -> Vec<DMatrix<f64>> {
    let scale = Some(model_scale(m));
    let k = m.block_count();
    let part = m.canonical_partition();
    let mut bases: Vec<DMatrix<f64>> = (0..k).map(|i| linalg::orth(&part.b[i], scale)).collect();
    loop {
        let next: Vec<DMatrix<f64>> = (0..k)
            .map(|i| {
                let mut parts = vec![part.b[i].clone()];
                for j in 0..k {
                    parts.push(&part.a[i][j] * &bases[j]);
                }
                let refs: Vec<&DMatrix<f64>> = parts.iter().collect();
                linalg::orth(&linalg::hstack(&refs, m.blocks().dim(i)), scale)
            })
            .collect();
        let grew = next.iter().zip(&bases).any(|(n, o)| n.ncols() != o.ncols());
        bases = next;
        if !grew {
            return bases;
        }
    }
}

fn dual(m: &LftModel) -> LftModel {
    LftModel::new(
        m.blocks().clone(),
        m.a().transpose(),
        m.c().transpose(),
        m.b().transpose(),
        m.d().transpose(),
    )
    .expect("transposed shapes are consistent")
}

/// Orthonormal bases of the per-block observable subspaces (orthogonal
/// complements of the unobservable ones).
pub fn observable_bases(m: &LftModel) -> Vec<DMatrix<f64>> {
    reachable_bases(&dual(m))
}

fn restrict(m: &LftModel, bases: &[DMatrix<f64>]) -> LftModel {
    let k = m.block_count();
    let part = m.canonical_partition();
    let dims: Vec<usize> = bases.iter().map(|b| b.ncols()).collect();
    let blocks = BlockStructure::new(dims).expect("block count unchanged");
    let mut a = DMatrix::zeros(blocks.total(), blocks.total());
    let mut b = DMatrix::zeros(blocks.total(), m.inputs());
    let mut c = DMatrix::zeros(m.outputs(), blocks.total());
    for i in 0..k {
        let ri = blocks.range(i);
        for j in 0..k {
            let rj = blocks.range(j);
            let cell = bases[i].transpose() * &part.a[i][j] * &bases[j];
            a.view_mut((ri.start, rj.start), (ri.len(), rj.len())).copy_from(&cell);
        }
        b.rows_mut(ri.start, ri.len()).copy_from(&(bases[i].transpose() * &part.b[i]));
        c.columns_mut(ri.start, ri.len()).copy_from(&(&part.c[i] * &bases[i]));
    }
    LftModel::new(blocks, a, b, c, m.d().clone()).expect("restricted shapes are consistent")
}

/// Structured Kalman reduction: restrict to the reachable subspaces, then
/// project onto the observable ones, until neither step removes anything.
/// The formal input-output map is unchanged.
pub fn minimize_lft(m: &LftModel) -> Result<Minimized> {
    let mut current = m.clone();
    let mut maps: Vec<DMatrix<f64>> = m
        .blocks()
        .dims()
        .iter()
        .map(|&n| DMatrix::identity(n, n))
        .collect();
    loop {
        let mut changed = false;
        for step in 0..2 {
            let bases = if step == 0 {
                reachable_bases(&current)
            } else {
                observable_bases(&current)
            };
            if bases.iter().zip(current.blocks().dims()).any(|(b, &n)| b.ncols() < n) {
                current = restrict(&current, &bases);
                maps = maps.iter().zip(&bases).map(|(p, v)| p * v).collect();
                changed = true;
            }
        }
        if !changed {
            return Ok(Minimized {
                lft: current,
                bases: maps,
            });
        }
    }
}

pub fn minimality_report(m: &LftModel) -> MinimalityReport {
    MinimalityReport {
        block_dims: m.blocks().dims().to_vec(),
        reachable: reachable_bases(m).iter().map(|b| b.ncols()).collect(),
        observable: observable_bases(m).iter().map(|b| b.ncols()).collect(),
    }
}

/// Structured reachability and observability of every block.
pub fn is_minimal(m: &LftModel) -> bool {
    minimality_report(m).is_minimal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Word;
    use nalgebra::dmatrix;

    fn padded() -> LftModel {
        // Block 1 carries an unreachable second state.
        LftModel::new(
            BlockStructure::new(vec![2, 1]).unwrap(),
            dmatrix![0.5, 0.0, 0.2; 0.0, 0.3, 0.0; 1.0, 0.4, 0.1],
            dmatrix![1.0; 0.0; 0.0],
            dmatrix![1.0, 1.0, 0.5],
            dmatrix![0.0],
        )
        .unwrap()
    }

    #[test]
    fn removes_unreachable_state() {
        let m = padded();
        let rep = minimality_report(&m);
        assert_eq!(rep.reachable, vec![1, 1]);
        assert!(!rep.is_minimal());
        let red = minimize_lft(&m).unwrap();
        assert_eq!(red.lft.blocks().dims(), &[1, 1]);
        assert!(is_minimal(&red.lft));
        for w in Word::all_up_to(2, 6) {
            let diff = m.formal_io_map(&w).unwrap() - red.lft.formal_io_map(&w).unwrap();
            assert!(linalg::max_abs(&diff) < 1e-12);
        }
    }

    #[test]
    fn removes_unobservable_state() {
        let m = LftModel::new(
            BlockStructure::new(vec![2]).unwrap(),
            dmatrix![0.5, 0.0; 1.0, 0.2],
            dmatrix![1.0; 0.0],
            dmatrix![1.0, 0.0],
            dmatrix![0.0],
        )
        .unwrap();
        let rep = minimality_report(&m);
        assert_eq!(rep.reachable, vec![2]);
        assert_eq!(rep.observable, vec![1]);
        let red = minimize_lft(&m).unwrap();
        assert_eq!(red.lft.dim(), 1);
        assert!((red.lft.a()[(0, 0)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_map_reduces_to_nothing() {
        let m = LftModel::new(
            BlockStructure::new(vec![1, 1]).unwrap(),
            dmatrix![0.1, 0.2; 0.3, 0.4],
            dmatrix![0.0; 0.0],
            dmatrix![1.0, 1.0],
            dmatrix![2.0],
        )
        .unwrap();
        let red = minimize_lft(&m).unwrap();
        assert_eq!(red.lft.dim(), 0);
        assert_eq!(red.lft.block_count(), 2);
        assert_eq!(red.lft.formal_io_map(&Word::empty()).unwrap(), dmatrix![2.0]);
        assert_eq!(red.lft.formal_io_map(&Word::new(vec![1, 2])).unwrap(), dmatrix![0.0]);
    }

    #[test]
    fn minimal_model_is_untouched() {
        let m = LftModel::new(
            BlockStructure::new(vec![1, 1]).unwrap(),
            dmatrix![0.1, 0.2; 0.3, 0.4],
            dmatrix![1.0; 0.0],
            dmatrix![0.0, 1.0],
            dmatrix![0.0],
        )
        .unwrap();
        assert!(is_minimal(&m));
        let red = minimize_lft(&m).unwrap();
        assert_eq!(red.lft.blocks().dims(), &[1, 1]);
    }
}
