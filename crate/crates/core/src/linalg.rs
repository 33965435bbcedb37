//! Dense linear algebra helpers shared by the realization and analysis code.
//!
//! Rank decisions use `tol = max(rows, cols) * scale * 1e-10`, where `scale`
//! is the largest singular value of the matrix under inspection unless the
//! caller supplies a larger reference scale.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, SVD};

pub(crate) const RANK_RTOL: f64 = 1e-10;

/// Tolerance used to separate numerically zero singular values.
pub fn rank_tolerance(rows: usize, cols: usize, scale: f64) -> f64 {
    rows.max(cols).max(1) as f64 * scale * RANK_RTOL
}

/// Thin SVD with `U` and `Vᵀ`, singular values in non-increasing order.
///
/// Computed with faer: nalgebra's bidiagonal solver can return factors that
/// do not reproduce rank-deficient Hankel matrices.
pub fn svd(m: &DMatrix<f64>) -> SVD<f64, Dyn, Dyn> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return SVD {
            u: Some(DMatrix::zeros(r, 0)),
            v_t: Some(DMatrix::zeros(0, c)),
            singular_values: DVector::zeros(0),
        };
    }
    let dec = faer::Mat::from_fn(r, c, |i, j| m[(i, j)])
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let (u, v, sv) = (dec.U(), dec.V(), dec.S().column_vector());
    SVD {
        u: Some(DMatrix::from_fn(r, k, |i, j| u[(i, j)])),
        v_t: Some(DMatrix::from_fn(k, c, |i, j| v[(j, i)])),
        singular_values: DVector::from_fn(k, |i, _| sv[i]),
    }
}

/// Singular values in non-increasing order (empty for empty matrices).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = svd(m).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with an optional reference scale.
pub fn rank(m: &DMatrix<f64>, scale: Option<f64>) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let tol = rank_tolerance(m.nrows(), m.ncols(), scale.unwrap_or(0.0).max(smax));
    s.iter().filter(|&&v| v > tol).count()
}

/// Orthonormal basis of the column span of `m`.
pub fn orth(m: &DMatrix<f64>, scale: Option<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let dec = svd(m);
    let u = dec.u.expect("requested U");
    let smax = dec.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tolerance(m.nrows(), m.ncols(), scale.unwrap_or(0.0).max(smax));
    let keep: Vec<usize> = (0..dec.singular_values.len())
        .filter(|&k| dec.singular_values[k] > tol)
        .collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(k));
    }
    out
}

/// Orthonormal basis of the null space of `m` (as columns).
pub fn null_space(m: &DMatrix<f64>, scale: Option<f64>) -> DMatrix<f64> {
    let range_of_transpose = orth(&m.transpose(), scale);
    orth_complement(&range_of_transpose)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q`.
pub fn orth_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let proj = DMatrix::identity(n, n) - q * q.transpose();
    orth(&proj, Some(1.0))
}

/// Moore-Penrose pseudo-inverse with the crate's rank tolerance.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let dec = svd(m);
    let smax = dec.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = rank_tolerance(m.nrows(), m.ncols(), smax);
    dec.pseudo_inverse(tol).expect("U and V were computed")
}

/// Reciprocal 2-norm condition number; 0 for singular, 1 for empty.
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        (Some(_), Some(_)) => 0.0,
        _ => 1.0,
    }
}

pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn hstack(parts: &[&DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}

pub fn vstack(parts: &[&DMatrix<f64>], cols: usize) -> DMatrix<f64> {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Solve `m x = rhs`, refusing matrices whose reciprocal condition is at or
/// below `min_rcond`.
pub fn solve_checked(
    m: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    min_rcond: f64,
) -> std::result::Result<DMatrix<f64>, f64> {
    if m.nrows() == 0 {
        return Ok(DMatrix::zeros(0, rhs.ncols()));
    }
    let rc = rcond(m);
    if !(rc > min_rcond) {
        return Err(rc);
    }
    m.clone().lu().solve(rhs).ok_or(0.0)
}
