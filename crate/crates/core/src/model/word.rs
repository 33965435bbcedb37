use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite word over the alphabet `1..=d`.
///
/// Letters are 1-based. For a word `i1 i2 ... ik` the letter `i1` is the one
/// applied first, so products read right to left: `A_{ik,ik-1} ... A_{i2,i1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    /// `letter` repeated `k` times.
    pub fn repeat(letter: usize, k: usize) -> Self {
        Word(vec![letter; k])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Checks every letter lies in `1..=d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l > d) {
            Some(&letter) => Err(Error::Alphabet { letter, size: d }),
            None => Ok(()),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, letter: usize) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// Shift every letter up by one, `i1...ik -> (i1+1)...(ik+1)`.
    ///
    /// Maps scheduling words onto the assembled LFT alphabet, whose letter 1
    /// is reserved for the delay block.
    pub fn shift_up(&self) -> Word {
        Word(self.0.iter().map(|l| l + 1).collect())
    }

    /// Inverse of [`Word::shift_up`]; `None` if the word contains letter 1.
    pub fn shift_down(&self) -> Option<Word> {
        if self.0.contains(&1) {
            return None;
        }
        Some(Word(self.0.iter().map(|l| l - 1).collect()))
    }

    /// All words of length exactly `len` over `1..=d`, in lexicographic order.
    pub fn all_of_len(d: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * d);
            for w in &out {
                for l in 1..=d {
                    next.push(w.push(l));
                }
            }
            out = next;
        }
        out
    }

    /// All words of length `0..=max_len`, shortest first.
    pub fn all_up_to(d: usize, max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(|k| Word::all_of_len(d, k)).collect()
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}
