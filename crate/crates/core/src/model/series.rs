use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::lft::{check_shape, LftModel};
use crate::model::Word;

/// A matrix-valued formal power series in noncommuting letters `1..=d`,
/// known up to word length `depth`.
///
/// Words of length at most `depth` that are not stored are zero. Words longer
/// than `depth` are unknown and rejected on lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    alphabet: usize,
    depth: usize,
    shape: (usize, usize),
    coeffs: BTreeMap<Word, DMatrix<f64>>,
}

impl TruncatedSeries {
    pub fn new(alphabet: usize, depth: usize, rows: usize, cols: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::Precondition("series alphabet must be non-empty".into()));
        }
        Ok(TruncatedSeries {
            alphabet,
            depth,
            shape: (rows, cols),
            coeffs: BTreeMap::new(),
        })
    }

    /// Taylor data of an LFT: its formal input-output map up to `depth`.
    pub fn from_lft(lft: &LftModel, depth: usize) -> Result<Self> {
        let mut s = TruncatedSeries::new(lft.block_count(), depth, lft.outputs(), lft.inputs())?;
        for w in Word::all_up_to(lft.block_count(), depth) {
            let y = lft.formal_io_map(&w)?;
            s.insert(w, y)?;
        }
        Ok(s)
    }

    /// Column series built from commutative monomial coefficients.
    ///
    /// Each entry `(exponents, coeffs)` gives the coefficient vector (one entry
    /// per series row) of `Π_i p_i^{exponents[i]}`. The coefficient is spread
    /// evenly over every distinct word with those letter counts, which is the
    /// symmetric choice among the noncommutative lifts.
    pub fn from_commutative_monomials(
        alphabet: usize,
        depth: usize,
        rows: usize,
        monomials: &[(Vec<usize>, Vec<f64>)],
    ) -> Result<Self> {
        let mut s = TruncatedSeries::new(alphabet, depth, rows, 1)?;
        for (exps, coeff) in monomials {
            if exps.len() != alphabet {
                return Err(Error::shape("monomial exponents", alphabet, exps.len()));
            }
            if coeff.len() != rows {
                return Err(Error::shape("monomial coefficients", rows, coeff.len()));
            }
            let degree: usize = exps.iter().sum();
            if degree > depth {
                return Err(Error::Truncation { len: degree, depth });
            }
            let words: Vec<Word> = Word::all_of_len(alphabet, degree)
                .into_iter()
                .filter(|w| {
                    (1..=alphabet).all(|l| w.letters().iter().filter(|&&x| x == l).count() == exps[l - 1])
                })
                .collect();
            let share = 1.0 / words.len() as f64;
            for w in words {
                let mut m = s.get(&w)?;
                for (r, c) in coeff.iter().enumerate() {
                    m[(r, 0)] += c * share;
                }
                s.insert(w, m)?;
            }
        }
        Ok(s)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }
    pub fn depth(&self) -> usize {
        self.depth
    }
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn insert(&mut self, word: Word, value: DMatrix<f64>) -> Result<()> {
        word.validate(self.alphabet)?;
        if word.len() > self.depth {
            return Err(Error::Truncation {
                len: word.len(),
                depth: self.depth,
            });
        }
        check_shape(&format!("coefficient {word}"), &value, self.shape.0, self.shape.1)?;
        if value.iter().all(|v| *v == 0.0) {
            self.coeffs.remove(&word);
        } else {
            self.coeffs.insert(word, value);
        }
        Ok(())
    }

    pub fn get(&self, word: &Word) -> Result<DMatrix<f64>> {
        word.validate(self.alphabet)?;
        if word.len() > self.depth {
            return Err(Error::Truncation {
                len: word.len(),
                depth: self.depth,
            });
        }
        Ok(self
            .coeffs
            .get(word)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.shape.0, self.shape.1)))
    }

    /// Stored non-zero coefficients in word order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &DMatrix<f64>)> {
        self.coeffs.iter()
    }

    /// Length of the longest stored non-zero word (0 for a series supported on ε only or empty).
    pub fn support_len(&self) -> usize {
        self.coeffs.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Truncated Taylor sum `Σ_{|ν| ≤ depth} S(ν) Π_j p_{ν_j}`.
    pub fn evaluate(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        if p.len() != self.alphabet {
            return Err(Error::shape("scheduling point", self.alphabet, p.len()));
        }
        let mut acc = DMatrix::zeros(self.shape.0, self.shape.1);
        for (w, c) in &self.coeffs {
            let mono: f64 = w.letters().iter().map(|&l| p[l - 1]).product();
            acc += c * mono;
        }
        Ok(acc)
    }

    /// Same series with the coefficient of `ν` multiplied by `λ^{|ν|}`.
    pub fn scaled(&self, lambda: f64) -> TruncatedSeries {
        let mut out = self.clone();
        for (w, c) in out.coeffs.iter_mut() {
            *c *= lambda.powi(w.len() as i32);
        }
        out
    }
}
