use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BlockStructure, LftModel, TruncatedSeries, Word};

/// Shared-state linear representation of a series over `1..=d`:
///
/// * `S(ε) = D`
/// * `S(σ1 σ2 ... σk) = C A_{σk} ... A_{σ2} B_{σ1}` for `k >= 1`.
///
/// The first letter selects the input matrix, every later letter applies
/// its state matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRepresentation {
    pub c: DMatrix<f64>,
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    pub d: DMatrix<f64>,
}

impl LinearRepresentation {
    pub fn new(
        c: DMatrix<f64>,
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        d: DMatrix<f64>,
    ) -> Result<Self> {
        let n = c.ncols();
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::shape("letter matrices", a.len(), b.len()));
        }
        if c.nrows() != d.nrows() {
            return Err(Error::shape("C rows", d.nrows(), c.nrows()));
        }
        for (k, (ak, bk)) in a.iter().zip(&b).enumerate() {
            if ak.shape() != (n, n) {
                return Err(Error::shape(format!("A_{}", k + 1), format!("{n}x{n}"), format!("{:?}", ak.shape())));
            }
            if bk.shape() != (n, d.ncols()) {
                return Err(Error::shape(format!("B_{}", k + 1), format!("{n}x{}", d.ncols()), format!("{:?}", bk.shape())));
            }
        }
        Ok(LinearRepresentation { c, a, b, d })
    }

    /// The empty representation of the zero series (plus feedthrough).
    pub fn zero(alphabet: usize, d: DMatrix<f64>) -> Self {
        let (r, c) = d.shape();
        LinearRepresentation {
            c: DMatrix::zeros(r, 0),
            a: vec![DMatrix::zeros(0, 0); alphabet],
            b: vec![DMatrix::zeros(0, c); alphabet],
            d,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.c.ncols()
    }

    pub fn alphabet(&self) -> usize {
        self.a.len()
    }

    /// Coefficient of `word` in the represented series.
    pub fn coefficient(&self, word: &Word) -> Result<DMatrix<f64>> {
        word.validate(self.alphabet())?;
        let letters = word.letters();
        let Some(&first) = letters.first() else {
            return Ok(self.d.clone());
        };
        let mut x = self.b[first - 1].clone();
        for &l in &letters[1..] {
            x = &self.a[l - 1] * x;
        }
        Ok(&self.c * x)
    }
}

/// Column or row index set of the Hankel matrix.
fn words_between(d: usize, min_len: usize, max_len: usize) -> Vec<Word> {
    (min_len..=max_len).flat_map(|k| Word::all_of_len(d, k)).collect()
}

/// Fill `H[(s, q)] = S(q s)` (optionally with a letter between `q` and `s`).
fn hankel_block(
    series: &TruncatedSeries,
    rows: &[Word],
    cols: &[Word],
    middle: Option<usize>,
) -> Result<DMatrix<f64>> {
    let (r, c) = series.shape();
    let mut h = DMatrix::zeros(rows.len() * r, cols.len() * c);
    for (ci, q) in cols.iter().enumerate() {
        let q = match middle {
            Some(l) => q.push(l),
            None => q.clone(),
        };
        for (ri, s) in rows.iter().enumerate() {
            let coeff = series.get(&q.concat(s))?;
            h.view_mut((ri * r, ci * c), (r, c)).copy_from(&coeff);
        }
    }
    Ok(h)
}

/// Ho-Kalman realization of a series from its finite Hankel matrix.
///
/// Rows are indexed by words `s` with `|s| <= order`, columns by non-empty
/// words `q` with `|q| <= order + 1`; the `(s, q)` block is `S(q s)`. Rows and
/// columns beyond the stored support are identically zero and are skipped.
/// `S(ε)` is not part of the Hankel data and becomes the feedthrough.
pub fn hankel_realize(series: &TruncatedSeries, order: usize) -> Result<LinearRepresentation> {
    let required = 2 * order + 1;
    if series.depth() < required {
        return Err(Error::DepthTooSmall {
            depth: series.depth(),
            order,
            required,
        });
    }
    let d = series.alphabet();
    let (r, c) = series.shape();
    let feedthrough = series.get(&Word::empty())?;
    let support = series.support_len();
    if support == 0 {
        return Ok(LinearRepresentation::zero(d, feedthrough));
    }

    let row_max = order.min(support - 1);
    let col_max = (order + 1).min(support);
    let rows = words_between(d, 0, row_max);
    let cols = words_between(d, 1, col_max);
    let h = hankel_block(series, &rows, &cols, None)?;

    let svd = linalg::svd(&h);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = linalg::rank_tolerance(h.nrows(), h.ncols(), smax);
    if let Some(&sigma) = sv.iter().find(|&&s| s > tol / 10.0 && s <= tol * 10.0) {
        return Err(Error::IllConditioned { sigma, tol });
    }
    let mut order_idx: Vec<usize> = (0..sv.len()).collect();
    order_idx.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
    let keep: Vec<usize> = order_idx.into_iter().filter(|&k| sv[k] > tol).collect();
    let n = keep.len();
    if n == 0 {
        return Ok(LinearRepresentation::zero(d, feedthrough));
    }

    // Rank must already be reached with one letter less on either side.
    let short_cols = cols.iter().take_while(|w| w.len() <= order).count();
    let short_rows = rows.iter().take_while(|w| w.len() < order).count();
    let rank_cols = linalg::rank(&h.columns(0, short_cols * c).into_owned(), Some(smax));
    let rank_rows = linalg::rank(&h.rows(0, short_rows * r).into_owned(), Some(smax));
    if rank_cols != n || rank_rows != n {
        return Err(Error::OrderBoundTooSmall {
            order,
            rank: n,
            sub_ranks: (rank_cols, rank_rows),
        });
    }

    let u = svd.u.as_ref().unwrap();
    let v_t = svd.v_t.as_ref().unwrap();
    let mut obs = DMatrix::zeros(h.nrows(), n);
    let mut reach = DMatrix::zeros(n, h.ncols());
    let mut obs_pinv = DMatrix::zeros(n, h.nrows());
    for (dst, &k) in keep.iter().enumerate() {
        let root = sv[k].sqrt();
        obs.set_column(dst, &(u.column(k) * root));
        reach.set_row(dst, &(v_t.row(k) * root));
        obs_pinv.set_row(dst, &(u.column(k).transpose() / root));
    }

    let c_mat = obs.rows(0, r).into_owned();
    let b_mats: Vec<DMatrix<f64>> = (0..d).map(|k| reach.columns(k * c, c).into_owned()).collect();
    let reach_short = reach.columns(0, short_cols * c).into_owned();
    let reach_short_pinv = linalg::pinv(&reach_short);
    let short_col_words = &cols[..short_cols];
    let mut a_mats = Vec::with_capacity(d);
    for letter in 1..=d {
        let shifted = hankel_block(series, &rows, short_col_words, Some(letter))?;
        a_mats.push(&obs_pinv * shifted * &reach_short_pinv);
    }
    LinearRepresentation::new(c_mat, a_mats, b_mats, feedthrough)
}

/// Embed a shared-state representation into a `d`-block LFT.
///
/// Every block carries a full copy of the state: `C_i = C`, `A_{i,j} = A_i`,
/// `B_j = B_j`. The formal input-output map then equals the represented
/// series on every word; [`crate::realization::minimize_lft`] removes the
/// redundancy.
pub fn representation_to_lft(rep: &LinearRepresentation) -> Result<LftModel> {
    let d = rep.alphabet();
    let n = rep.state_dim();
    let blocks = BlockStructure::uniform(d, n)?;
    let (p, m) = rep.d.shape();
    let mut a = DMatrix::zeros(n * d, n * d);
    let mut b = DMatrix::zeros(n * d, m);
    let mut c = DMatrix::zeros(p, n * d);
    for i in 0..d {
        for j in 0..d {
            a.view_mut((i * n, j * n), (n, n)).copy_from(&rep.a[i]);
        }
        b.view_mut((i * n, 0), (n, m)).copy_from(&rep.b[i]);
        c.view_mut((0, i * n), (p, n)).copy_from(&rep.c);
    }
    LftModel::new(blocks, a, b, c, rep.d.clone())
}
