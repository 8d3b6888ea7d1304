//! Gap-tolerant word distance and the pairwise distance matrix.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sax::{Cell, SaxWord};

/// Per-position agreement summed over `omega` positions: `+1` for equal
/// letters, `0` when either side is a gap, `-1` for different letters.
/// Positions past a word's end count as gaps.
pub fn agreement(a: &[Cell], b: &[Cell], omega: usize) -> i64 {
    (0..omega)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(Cell::GAP);
            let y = b.get(i).copied().unwrap_or(Cell::GAP);
            match (x.is_gap() || y.is_gap(), x == y) {
                (true, _) => 0,
                (false, true) => 1,
                (false, false) => -1,
            }
        })
        .sum()
}

/// `1 - agreement / omega`, in `[0, 2]`.
///
/// Two gap-free identical words are at distance 0; a word with `k` letters
/// is at `(omega - k) / omega` from itself.
pub fn word_distance(a: &SaxWord, b: &SaxWord, omega: usize) -> f64 {
    debug_assert!(omega >= a.len().max(b.len()), "omega shorter than a word");
    let omega = omega.max(1);
    (omega as i64 - agreement(a.cells(), b.cells(), omega)) as f64 / omega as f64
}

/// Symmetric dissimilarity matrix with a zero diagonal, stored condensed
/// (upper triangle, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

impl DistanceMatrix {
    /// Builds a matrix from a full square table. The table must be symmetric
    /// with a zero diagonal and finite non-negative entries.
    pub fn from_square(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Size(format!("need at least 2 points, found {n}")));
        }
        let mut entries = Vec::with_capacity(n * (n - 1) / 2);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Size(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidConfig(format!("diagonal entry {i} is not zero")));
            }
            for j in i + 1..n {
                let d = row[j];
                if !(d.is_finite() && d >= 0.0) || d != rows[j][i] {
                    return Err(Error::InvalidConfig(format!(
                        "entry ({i}, {j}) must be finite, non-negative and symmetric"
                    )));
                }
                entries.push(d);
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    /// Builds a matrix from its condensed upper triangle.
    pub fn from_condensed(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 || entries.len() != n * (n - 1) / 2 {
            return Err(Error::Size(format!(
                "{} condensed entries do not describe {n} points",
                entries.len()
            )));
        }
        if entries.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidConfig("entries must be finite and non-negative".into()));
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Less => self.entries[condensed_index(self.n, i, j)],
            Greater => self.entries[condensed_index(self.n, j, i)],
        }
    }

    pub fn condensed(&self) -> &[f64] {
        &self.entries
    }
}

/// Pairwise [`word_distance`] over a corpus. Rows are filled in parallel.
pub fn distance_matrix(words: &[SaxWord], omega: usize) -> Result<DistanceMatrix> {
    let n = words.len();
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 words, found {n}")));
    }
    if let Some(w) = words.iter().find(|w| w.len() > omega) {
        return Err(Error::Size(format!(
            "word `{w}` of series `{}` is longer than omega {omega}",
            w.series_id
        )));
    }
    let padded: Vec<Vec<Cell>> = words
        .iter()
        .map(|w| (0..omega).map(|i| w.get(i)).collect())
        .collect();

    let mut entries = vec![0.0; n * (n - 1) / 2];
    let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(n - 1);
    let mut rest = entries.as_mut_slice();
    for i in 0..n - 1 {
        let (row, tail) = rest.split_at_mut(n - i - 1);
        rows.push((i, row));
        rest = tail;
    }
    let scale = omega as f64;
    rows.into_par_iter().for_each(|(i, row)| {
        let a = &padded[i];
        for (slot, b) in row.iter_mut().zip(&padded[i + 1..]) {
            *slot = (omega as i64 - agreement(a, b, omega)) as f64 / scale;
        }
    });
    Ok(DistanceMatrix { n, entries })
}
