use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{FalpvModel, LftModel, Word};

/// Entrywise tolerance for comparing Markov parameters.
pub const EQUIVALENCE_TOL: f64 = 1e-9;
/// Relative residual below which a new vector counts as already spanned.
const SPAN_RTOL: f64 = 1e-10;

/// Incrementally grown orthonormal basis.
struct Span {
    q: Vec<DVector<f64>>,
    floor: f64,
}

impl Span {
    fn new(floor: f64) -> Self {
        Span { q: Vec::new(), floor }
    }

    /// Adds `v` if it leaves the current span; returns whether it did.
    fn extend(&mut self, v: &DVector<f64>) -> bool {
        let norm = v.norm();
        if norm <= self.floor {
            return false;
        }
        let mut r = v.clone();
        // Two Gram-Schmidt sweeps keep the basis orthonormal to working precision.
        for _ in 0..2 {
            for b in &self.q {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
        }
        let rn = r.norm();
        if rn <= SPAN_RTOL * norm.max(self.floor) {
            return false;
        }
        self.q.push(r / rn);
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceResult {
    /// Shortest word whose Markov parameters differ, if any.
    pub counterexample: Option<Word>,
    /// Largest entrywise deviation at the counterexample (0 when equivalent).
    pub deviation: f64,
    /// Number of (word, column) pairs whose output was compared.
    pub checked: usize,
}

impl EquivalenceResult {
    pub fn equivalent(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn scale_of(ms: &[&DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| linalg::max_abs(m)).fold(1.0, f64::max)
}

/// Compare the formal input-output maps `Y_{M1}` and `Y_{M2}` on all words up
/// to `depth` (default `dim M1 + dim M2`).
///
/// Works on the difference system and explores words breadth first; a word
/// whose state vector already lies in the span of earlier ones (in the same
/// block) is not extended, since every continuation is a combination of
/// continuations already explored. The first failing word is a shortest one.
pub fn formal_equivalence(m1: &LftModel, m2: &LftModel, depth: Option<usize>) -> Result<EquivalenceResult> {
    if m1.outputs() != m2.outputs() || m1.inputs() != m2.inputs() || m1.block_count() != m2.block_count() {
        return Err(Error::shape(
            "LFT signature",
            format!("{}x{} over {} blocks", m1.outputs(), m1.inputs(), m1.block_count()),
            format!("{}x{} over {} blocks", m2.outputs(), m2.inputs(), m2.block_count()),
        ));
    }
    let depth = depth.unwrap_or(m1.dim() + m2.dim());
    let dd = m1.d() - m2.d();
    let d_dev = linalg::max_abs(&dd);
    if d_dev > EQUIVALENCE_TOL {
        return Ok(EquivalenceResult {
            counterexample: Some(Word::empty()),
            deviation: d_dev,
            checked: 1,
        });
    }
    let k = m1.block_count();
    let (p1, p2) = (m1.canonical_partition(), m2.canonical_partition());
    let joint = |x1: &DMatrix<f64>, x2: &DMatrix<f64>| linalg::block_diag(&[x1.clone(), x2.clone()]);
    let a: Vec<Vec<DMatrix<f64>>> = (0..k)
        .map(|i| (0..k).map(|j| joint(&p1.a[i][j], &p2.a[i][j])).collect())
        .collect();
    let b: Vec<DMatrix<f64>> = (0..k)
        .map(|j| linalg::vstack(&[&p1.b[j], &p2.b[j]], m1.inputs()))
        .collect();
    let c: Vec<DMatrix<f64>> = (0..k)
        .map(|i| linalg::hstack(&[&p1.c[i], &(-&p2.c[i])], m1.outputs()))
        .collect();

    let floor = 1e-14 * scale_of(&[m1.a(), m1.b(), m1.c(), m2.a(), m2.b(), m2.c()]);
    let mut spans: Vec<Span> = (0..k).map(|_| Span::new(floor)).collect();
    let mut queue = VecDeque::new();
    for j in 0..k {
        for col in 0..m1.inputs() {
            queue.push_back((Word::new(vec![j + 1]), j, b[j].column(col).into_owned()));
        }
    }
    let mut checked = 1;
    while let Some((word, i, v)) = queue.pop_front() {
        if word.len() > depth {
            break;
        }
        checked += 1;
        let dev = linalg::max_abs_vec(&(&c[i] * &v));
        if dev > EQUIVALENCE_TOL {
            return Ok(EquivalenceResult {
                counterexample: Some(word),
                deviation: dev,
                checked,
            });
        }
        if !spans[i].extend(&v) {
            continue;
        }
        for j in 0..k {
            queue.push_back((word.push(j + 1), j, &a[j][i] * &v));
        }
    }
    Ok(EquivalenceResult {
        counterexample: None,
        deviation: 0.0,
        checked,
    })
}

/// A Markov parameter `C_out A_{path[k]} ... A_{path[0]} B_input` (or `D_out`
/// when `input` is `None`) on which two FALPV models differ. Indices run over
/// `0..=n_psi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovWitness {
    pub output: usize,
    pub path: Vec<usize>,
    pub input: Option<usize>,
}

impl std::fmt::Display for MarkovWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.input {
            None => write!(f, "D_{}", self.output),
            Some(j) => {
                write!(f, "C_{}", self.output)?;
                for l in self.path.iter().rev() {
                    write!(f, " A_{l}")?;
                }
                write!(f, " B_{j}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalpvEquivalence {
    pub witness: Option<MarkovWitness>,
    pub deviation: f64,
}

impl FalpvEquivalence {
    pub fn equivalent(&self) -> bool {
        self.witness.is_none()
    }
}

/// Compare all `D_i` and `C_i A_v B_j` with `|v| <= depth` (default
/// `n_x(Σ1) + n_x(Σ2)`), using the same span pruning as
/// [`formal_equivalence`] over the letters `A_0..A_{n_psi}`.
pub fn falpv_equivalence(s1: &FalpvModel, s2: &FalpvModel, depth: Option<usize>) -> Result<FalpvEquivalence> {
    let (d1, d2) = (s1.dims(), s2.dims());
    if (d1.n_u, d1.n_y, d1.n_p, d1.n_psi) != (d2.n_u, d2.n_y, d2.n_p, d2.n_psi) {
        return Err(Error::shape(
            "FALPV signature",
            format!("{d1:?}"),
            format!("{d2:?}"),
        ));
    }
    let depth = depth.unwrap_or(d1.n_x + d2.n_x);
    let letters = d1.n_psi + 1;
    for i in 0..letters {
        let dev = linalg::max_abs(&(s1.d(i) - s2.d(i)));
        if dev > EQUIVALENCE_TOL {
            return Ok(FalpvEquivalence {
                witness: Some(MarkovWitness {
                    output: i,
                    path: Vec::new(),
                    input: None,
                }),
                deviation: dev,
            });
        }
    }
    let a: Vec<DMatrix<f64>> = (0..letters)
        .map(|l| linalg::block_diag(&[s1.a(l).clone(), s2.a(l).clone()]))
        .collect();
    let c: Vec<DMatrix<f64>> = (0..letters)
        .map(|l| linalg::hstack(&[s1.c(l), &(-s2.c(l))], d1.n_y))
        .collect();
    let mut scale = 1.0f64;
    for s in [s1, s2] {
        for l in 0..letters {
            scale = scale.max(scale_of(&[s.a(l), s.b(l), s.c(l)]));
        }
    }
    let mut span = Span::new(1e-14 * scale);
    let mut queue = VecDeque::new();
    for j in 0..letters {
        let b = linalg::vstack(&[s1.b(j), s2.b(j)], d1.n_u);
        for col in 0..d1.n_u {
            queue.push_back((j, Vec::<usize>::new(), b.column(col).into_owned()));
        }
    }
    while let Some((input, path, v)) = queue.pop_front() {
        if path.len() > depth {
            break;
        }
        for (out, ci) in c.iter().enumerate() {
            let dev = linalg::max_abs_vec(&(ci * &v));
            if dev > EQUIVALENCE_TOL {
                return Ok(FalpvEquivalence {
                    witness: Some(MarkovWitness {
                        output: out,
                        path,
                        input: Some(input),
                    }),
                    deviation: dev,
                });
            }
        }
        if !span.extend(&v) {
            continue;
        }
        for (l, al) in a.iter().enumerate() {
            let mut next = path.clone();
            next.push(l);
            queue.push_back((input, next, al * &v));
        }
    }
    Ok(FalpvEquivalence {
        witness: None,
        deviation: 0.0,
    })
}

/// Dimensions of the reachable and observable spaces of an FALPV model over
/// the letters `A_0..A_{n_psi}`; the model is minimal iff both equal `n_x`.
pub fn falpv_minimality(s: &FalpvModel) -> (usize, usize) {
    let dims = s.dims();
    let letters = dims.n_psi + 1;
    let mut scale = 0.0f64;
    for l in 0..letters {
        scale = scale.max(scale_of(&[s.a(l), s.b(l), s.c(l)]));
    }
    let fixpoint = |gens: Vec<DMatrix<f64>>, maps: Vec<DMatrix<f64>>| {
        let refs: Vec<&DMatrix<f64>> = gens.iter().collect();
        let g = linalg::hstack(&refs, dims.n_x);
        let mut basis = linalg::orth(&g, Some(scale));
        loop {
            let mut parts = vec![g.clone()];
            parts.extend(maps.iter().map(|m| m * &basis));
            let refs: Vec<&DMatrix<f64>> = parts.iter().collect();
            let next = linalg::orth(&linalg::hstack(&refs, dims.n_x), Some(scale));
            if next.ncols() == basis.ncols() {
                return next.ncols();
            }
            basis = next;
        }
    };
    let reach = fixpoint(
        (0..letters).map(|l| s.b(l).clone()).collect(),
        (0..letters).map(|l| s.a(l).clone()).collect(),
    );
    let obs = fixpoint(
        (0..letters).map(|l| s.c(l).transpose()).collect(),
        (0..letters).map(|l| s.a(l).transpose()).collect(),
    );
    (reach, obs)
}

pub fn falpv_is_minimal(s: &FalpvModel) -> bool {
    let n = s.dims().n_x;
    falpv_minimality(s) == (n, n)
}
