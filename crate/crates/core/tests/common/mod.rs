#![allow(dead_code)]

use lpvlft::model::{BlockStructure, FalpvModel, LftModel, PsiRealization, TruncatedSeries, Word};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0) * scale)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.singular_values().max()
    }
}

/// Rescale so the spectral norm is at most `bound`.
pub fn contract(m: DMatrix<f64>, bound: f64) -> DMatrix<f64> {
    let n = spectral_norm(&m);
    if n > bound {
        m * (bound / n)
    } else {
        m
    }
}

pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let t = random_matrix(rng, n, n, 1.0) + DMatrix::identity(n, n) * 0.5;
        let s = t.singular_values();
        if s.min() > 0.2 * s.max() {
            return t;
        }
    }
}

/// Random psi realization with at most `max_order` states per block and
/// `‖F‖₂ <= 0.8`.
pub fn random_psi(rng: &mut ChaCha8Rng, n_p: usize, n_psi: usize, max_order: usize) -> PsiRealization {
    let dims: Vec<usize> = (0..n_p).map(|_| rng.random_range(1..=max_order)).collect();
    let n: usize = dims.iter().sum();
    let f = contract(random_matrix(rng, n, n, 1.0), 0.8);
    let g = random_matrix(rng, n, 1, 1.0);
    let h = random_matrix(rng, n_psi, n, 1.0);
    PsiRealization::new(BlockStructure::new(dims).unwrap(), f, g, h).unwrap()
}

/// Random FALPV whose frozen `A(p)` stays contractive for `|psi_l| <= psi_bound`.
pub fn random_falpv(
    rng: &mut ChaCha8Rng,
    n_x: usize,
    n_u: usize,
    n_y: usize,
    n_p: usize,
    n_psi: usize,
    psi_bound: f64,
) -> FalpvModel {
    let share = 0.9 / (1.0 + n_psi as f64 * psi_bound.max(1.0));
    let a = (0..=n_psi)
        .map(|_| contract(random_matrix(rng, n_x, n_x, 1.0), share))
        .collect();
    let b = (0..=n_psi).map(|_| random_matrix(rng, n_x, n_u, 1.0)).collect();
    let c = (0..=n_psi).map(|_| random_matrix(rng, n_y, n_x, 1.0)).collect();
    let d = (0..=n_psi).map(|_| random_matrix(rng, n_y, n_u, 1.0)).collect();
    FalpvModel::new(n_p, a, b, c, d).unwrap()
}

/// Same input-output behaviour plus one extra state that no input reaches.
pub fn pad_unreachable(rng: &mut ChaCha8Rng, s: &FalpvModel) -> FalpvModel {
    let dims = s.dims();
    let n = dims.n_x + 1;
    let grow_a = |a: &DMatrix<f64>, rng: &mut ChaCha8Rng| {
        let mut out = DMatrix::zeros(n, n);
        out.view_mut((0, 0), (dims.n_x, dims.n_x)).copy_from(a);
        for j in 0..n {
            out[(dims.n_x, j)] = 0.0;
        }
        // The extra state feeds the original ones but is never excited.
        for i in 0..dims.n_x {
            out[(i, dims.n_x)] = rng.random_range(-0.1..0.1);
        }
        out[(dims.n_x, dims.n_x)] = 0.3;
        out
    };
    let a = s.a_all().iter().map(|a| grow_a(a, rng)).collect();
    let b = s
        .b_all()
        .iter()
        .map(|b| {
            let mut out = DMatrix::zeros(n, dims.n_u);
            out.view_mut((0, 0), (dims.n_x, dims.n_u)).copy_from(b);
            out
        })
        .collect();
    let c = s
        .c_all()
        .iter()
        .map(|c| {
            let mut out = DMatrix::zeros(dims.n_y, n);
            out.view_mut((0, 0), (dims.n_y, dims.n_x)).copy_from(c);
            out[(0, dims.n_x)] = 1.0;
            out
        })
        .collect();
    FalpvModel::new(dims.n_p, a, b, c, s.d_all().to_vec()).unwrap()
}

pub fn random_lft(rng: &mut ChaCha8Rng, dims: &[usize], outputs: usize, inputs: usize) -> LftModel {
    let n: usize = dims.iter().sum();
    LftModel::new(
        BlockStructure::new(dims.to_vec()).unwrap(),
        contract(random_matrix(rng, n, n, 1.0), 0.9),
        random_matrix(rng, n, inputs, 1.0),
        random_matrix(rng, outputs, n, 1.0),
        random_matrix(rng, outputs, inputs, 1.0),
    )
    .unwrap()
}

pub fn random_inputs(rng: &mut ChaCha8Rng, horizon: usize, n_u: usize) -> Vec<DVector<f64>> {
    (0..horizon)
        .map(|_| DVector::from_fn(n_u, |_, _| rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_schedule(rng: &mut ChaCha8Rng, horizon: usize, n_p: usize, bound: f64) -> Vec<Vec<f64>> {
    (0..horizon)
        .map(|_| (0..n_p).map(|_| rng.random_range(-bound..=bound)).collect())
        .collect()
}

/// Random series supported on words of length `1..=support`.
pub fn random_series(
    rng: &mut ChaCha8Rng,
    alphabet: usize,
    depth: usize,
    support: usize,
    shape: (usize, usize),
) -> TruncatedSeries {
    let mut s = TruncatedSeries::new(alphabet, depth, shape.0, shape.1).unwrap();
    for w in Word::all_up_to(alphabet, support).into_iter().skip(1) {
        if rng.random_bool(0.6) {
            s.insert(w, random_matrix(rng, shape.0, shape.1, 1.0)).unwrap();
        }
    }
    s
}

/// Word-by-word oracle for `Y(ν)` straight from the cell definition.
pub fn oracle_io_map(m: &LftModel, word: &Word) -> DMatrix<f64> {
    let blocks = m.blocks();
    let cell = |mat: &DMatrix<f64>, i: usize, j: usize| {
        let (ri, rj) = (blocks.range(i), blocks.range(j));
        mat.view((ri.start, rj.start), (ri.len(), rj.len())).into_owned()
    };
    let letters = word.letters();
    if letters.is_empty() {
        return m.d().clone();
    }
    let first = letters[0] - 1;
    let r = blocks.range(first);
    let mut x = m.b().rows(r.start, r.len()).into_owned();
    for k in 1..letters.len() {
        x = cell(m.a(), letters[k] - 1, letters[k - 1] - 1) * x;
    }
    let last = letters[letters.len() - 1] - 1;
    let r = blocks.range(last);
    m.c().columns(r.start, r.len()).into_owned() * x
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, independent of nalgebra's
/// eigen solvers.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}
