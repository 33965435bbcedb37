use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Word;

/// Reciprocal condition number below which `I - A*Delta` counts as singular.
pub const WELL_POSED_RCOND: f64 = 1e-10;

/// Sizes `{n_i}` of the diagonal uncertainty blocks.
///
/// Zero-sized blocks are allowed so that minimization can remove a block's
/// whole state without changing the block count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockStructure {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Precondition(
                "block structure needs at least one block".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &n in &dims {
            acc += n;
            offsets.push(acc);
        }
        Ok(BlockStructure { dims, offsets })
    }

    /// `d` blocks of equal size `n`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; d])
    }

    pub fn count(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, block: usize) -> usize {
        self.dims[block]
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Index range of block `block` (0-based) inside the stacked state.
    pub fn range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    /// Each block size multiplied by `factor` (Kronecker lifting).
    pub fn scaled(&self, factor: usize) -> BlockStructure {
        BlockStructure::new(self.dims.iter().map(|n| n * factor).collect()).unwrap()
    }
}

/// Block-structured LFT `(p, m, d, {n_i}, A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LftModel {
    blocks: BlockStructure,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

/// Canonical partition cells `{C_i, A_{i,j}, B_j}`; indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPartition {
    pub c: Vec<DMatrix<f64>>,
    pub a: Vec<Vec<DMatrix<f64>>>,
    pub b: Vec<DMatrix<f64>>,
}

impl CanonicalPartition {
    /// Reassemble the full `(A, B, C)` from the cells.
    pub fn assemble(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let d = self.b.len();
        let rows: Vec<DMatrix<f64>> = (0..d)
            .map(|i| {
                let refs: Vec<&DMatrix<f64>> = self.a[i].iter().collect();
                linalg::hstack(&refs, self.a[i][0].nrows())
            })
            .collect();
        let n: usize = self.b.iter().map(|b| b.nrows()).sum();
        let row_refs: Vec<&DMatrix<f64>> = rows.iter().collect();
        let a = linalg::vstack(&row_refs, n);
        let b_refs: Vec<&DMatrix<f64>> = self.b.iter().collect();
        let m = self.b[0].ncols();
        let b = linalg::vstack(&b_refs, m);
        let c_refs: Vec<&DMatrix<f64>> = self.c.iter().collect();
        let p = self.c[0].nrows();
        let c = linalg::hstack(&c_refs, p);
        (a, b, c)
    }
}

/// The products `[A]_ν`, `[A#B]_ν`, `[C#A]_ν`, `[C#A#B]_ν` for a non-empty word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordProducts {
    pub a: DMatrix<f64>,
    pub ab: DMatrix<f64>,
    pub ca: DMatrix<f64>,
    pub cab: DMatrix<f64>,
}

impl LftModel {
    pub fn new(
        blocks: BlockStructure,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self> {
        let n = blocks.total();
        let (p, m) = d.shape();
        check_shape("A", &a, n, n)?;
        check_shape("B", &b, n, m)?;
        check_shape("C", &c, p, n)?;
        Ok(LftModel { blocks, a, b, c, d })
    }

    /// Build from canonical partition cells plus the feedthrough `D`.
    pub fn from_partition(part: &CanonicalPartition, d: DMatrix<f64>) -> Result<Self> {
        let dims: Vec<usize> = part.b.iter().map(|b| b.nrows()).collect();
        let blocks = BlockStructure::new(dims)?;
        let k = blocks.count();
        if part.a.len() != k || part.c.len() != k || part.a.iter().any(|r| r.len() != k) {
            return Err(Error::shape("partition", format!("{k} blocks"), "ragged cells"));
        }
        for i in 0..k {
            check_shape(&format!("B_{}", i + 1), &part.b[i], blocks.dim(i), d.ncols())?;
            check_shape(&format!("C_{}", i + 1), &part.c[i], d.nrows(), blocks.dim(i))?;
            for j in 0..k {
                check_shape(
                    &format!("A_{},{}", i + 1, j + 1),
                    &part.a[i][j],
                    blocks.dim(i),
                    blocks.dim(j),
                )?;
            }
        }
        let (a, b, c) = if blocks.total() == 0 {
            (
                DMatrix::zeros(0, 0),
                DMatrix::zeros(0, d.ncols()),
                DMatrix::zeros(d.nrows(), 0),
            )
        } else {
            part.assemble()
        };
        LftModel::new(blocks, a, b, c, d)
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    /// Output dimension `p`.
    pub fn outputs(&self) -> usize {
        self.d.nrows()
    }
    /// Input dimension `m`.
    pub fn inputs(&self) -> usize {
        self.d.ncols()
    }
    /// Total state dimension `n = Σ n_i`.
    pub fn dim(&self) -> usize {
        self.blocks.total()
    }
    pub fn block_count(&self) -> usize {
        self.blocks.count()
    }

    pub fn a_cell(&self, i: usize, j: usize) -> DMatrix<f64> {
        let (ri, rj) = (self.blocks.range(i), self.blocks.range(j));
        self.a.view((ri.start, rj.start), (ri.len(), rj.len())).into_owned()
    }
    pub fn b_cell(&self, j: usize) -> DMatrix<f64> {
        let r = self.blocks.range(j);
        self.b.rows(r.start, r.len()).into_owned()
    }
    pub fn c_cell(&self, i: usize) -> DMatrix<f64> {
        let r = self.blocks.range(i);
        self.c.columns(r.start, r.len()).into_owned()
    }

    pub fn canonical_partition(&self) -> CanonicalPartition {
        let k = self.block_count();
        CanonicalPartition {
            c: (0..k).map(|i| self.c_cell(i)).collect(),
            a: (0..k)
                .map(|i| (0..k).map(|j| self.a_cell(i, j)).collect())
                .collect(),
            b: (0..k).map(|j| self.b_cell(j)).collect(),
        }
    }

    /// `[A]_ν` for a non-empty, already validated word.
    fn a_product(&self, word: &Word) -> DMatrix<f64> {
        let letters = word.letters();
        let first = letters[0] - 1;
        let mut acc = DMatrix::identity(self.blocks.dim(first), self.blocks.dim(first));
        for pair in letters.windows(2) {
            acc = self.a_cell(pair[1] - 1, pair[0] - 1) * acc;
        }
        acc
    }

    pub fn word_products(&self, word: &Word) -> Result<WordProducts> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        word.validate(self.block_count())?;
        let a = self.a_product(word);
        let first = word.first().unwrap() - 1;
        let last = word.last().unwrap() - 1;
        let ab = &a * self.b_cell(first);
        let ca = self.c_cell(last) * &a;
        let cab = &ca * self.b_cell(first);
        Ok(WordProducts { a, ab, ca, cab })
    }

    /// Formal input-output map `Y_M(ν)`.
    pub fn formal_io_map(&self, word: &Word) -> Result<DMatrix<f64>> {
        word.validate(self.block_count())?;
        if word.is_empty() {
            return Ok(self.d.clone());
        }
        let first = word.first().unwrap() - 1;
        let mut x = self.b_cell(first);
        for pair in word.letters().windows(2) {
            x = self.a_cell(pair[1] - 1, pair[0] - 1) * x;
        }
        Ok(self.c_cell(word.last().unwrap() - 1) * x)
    }

    /// `D + C Δ (I - A Δ)^{-1} B`.
    pub fn star_product(&self, delta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        check_shape("Delta", delta, n, n)?;
        let loop_matrix = DMatrix::identity(n, n) - &self.a * delta;
        let z = linalg::solve_checked(&loop_matrix, &self.b, WELL_POSED_RCOND)
            .map_err(|rcond| Error::WellPosedness { rcond, step: None })?;
        Ok(&self.d + &self.c * delta * z)
    }

    /// Star product with the constant block `Δ_p`.
    pub fn star_at_point(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let delta = delta_of_point(p, &self.blocks)?;
        self.star_product(&delta)
    }

    /// Structured similarity `(T A T^{-1}, T B, C T^{-1}, D)` for block-diagonal `T`.
    pub fn similarity(&self, blocks_t: &[DMatrix<f64>]) -> Result<LftModel> {
        if blocks_t.len() != self.block_count() {
            return Err(Error::shape(
                "similarity blocks",
                self.block_count(),
                blocks_t.len(),
            ));
        }
        let t = linalg::block_diag(blocks_t);
        let n = self.dim();
        check_shape("T", &t, n, n)?;
        let t_inv = linalg::solve_checked(&t, &DMatrix::identity(n, n), WELL_POSED_RCOND)
            .map_err(|_| Error::Precondition("similarity transform is singular".into()))?;
        LftModel::new(
            self.blocks.clone(),
            &t * &self.a * &t_inv,
            &t * &self.b,
            &self.c * &t_inv,
            self.d.clone(),
        )
    }
}

/// Block-diagonal `Δ_p = Diag[p_1 I_{n_1}, ..., p_d I_{n_d}]`.
pub fn delta_of_point(p: &[f64], blocks: &BlockStructure) -> Result<DMatrix<f64>> {
    if p.len() != blocks.count() {
        return Err(Error::shape("scheduling point", blocks.count(), p.len()));
    }
    let diag: Vec<f64> = p
        .iter()
        .zip(blocks.dims())
        .flat_map(|(&v, &n)| std::iter::repeat_n(v, n))
        .collect();
    Ok(DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

pub(crate) fn check_shape(what: &str, m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::shape(
            what,
            format!("{rows}x{cols}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}
