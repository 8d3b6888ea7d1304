//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use saxnav_core::{Cell, SaxWord};

/// Standard normal CDF by composite Simpson integration of the density.
pub fn normal_cdf(x: f64) -> f64 {
    let steps = 4000;
    let h = x.abs() / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(0.0) + pdf(x.abs());
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * pdf(k as f64 * h);
    }
    let half = acc * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Standard normal quantile by bisection on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Merge record `(left, right, height, new id)`.
pub type RefMerge = (usize, usize, f64, usize);

/// Textbook complete linkage: recompute every cluster pair's maximum member
/// distance at each step.
pub fn brute_force_complete_linkage(d: &[Vec<f64>]) -> Vec<RefMerge> {
    let n = d.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let link = clusters[a]
                    .1
                    .iter()
                    .flat_map(|&i| clusters[b].1.iter().map(move |&j| d[i][j]))
                    .fold(f64::NEG_INFINITY, f64::max);
                let (ia, ib) = (clusters[a].0, clusters[b].0);
                let key = (link, ia.min(ib), ia.max(ib), a, b);
                let better = match best {
                    None => true,
                    Some(cur) => (key.0, key.1, key.2) < (cur.0, cur.1, cur.2),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let (link, lo, hi, a, b) = best.unwrap();
        let id = n + step;
        let mut members = clusters[a].1.clone();
        members.extend(&clusters[b].1);
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((id, members));
        out.push((lo, hi, link, id));
    }
    out
}

/// Plain scan: does any window of the word fit the column sets?
/// Empty sets accept any letter below `alpha`; gaps never match.
pub fn naive_contains(word: &SaxWord, columns: &[Vec<usize>], alpha: usize) -> bool {
    let cells = word.cells();
    if columns.len() > cells.len() {
        return false;
    }
    (0..=cells.len() - columns.len()).any(|start| {
        columns.iter().enumerate().all(|(k, set)| match cells[start + k].index() {
            None => false,
            Some(l) if set.is_empty() => l < alpha,
            Some(l) => set.contains(&l),
        })
    })
}

/// Adjusted Rand index between two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.iter().flatten().map(|&x| c2(x)).sum();
    let rows: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / c2(a.len() as u64);
    let max = 0.5 * (rows + cols);
    (index - expected) / (max - expected)
}

/// Random word of length `1..=omega` with roughly `gap_rate` gaps.
pub fn random_word<R: Rng>(rng: &mut R, id: String, alpha: usize, omega: usize, gap_rate: f64) -> SaxWord {
    let len = rng.random_range(1..=omega);
    let cells = (0..len)
        .map(|_| {
            if rng.random_bool(gap_rate) {
                Cell::GAP
            } else {
                Cell::letter(rng.random_range(0..alpha))
            }
        })
        .collect();
    SaxWord::new(id, cells)
}

/// Random word of exactly `omega` cells.
pub fn random_full_word<R: Rng>(rng: &mut R, id: String, alpha: usize, omega: usize, gap_rate: f64) -> SaxWord {
    let cells = (0..omega)
        .map(|_| {
            if rng.random_bool(gap_rate) {
                Cell::GAP
            } else {
                Cell::letter(rng.random_range(0..alpha))
            }
        })
        .collect();
    SaxWord::new(id, cells)
}

/// Symmetric matrix of i.i.d. uniform dissimilarities with a zero diagonal.
#[allow(clippy::needless_range_loop)]
pub fn random_dissimilarities<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = rng.random();
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    d
}

#[test]
fn oracle_sanity() {
    assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
    assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    assert!((normal_quantile(0.75) - 0.6744897501960817).abs() < 1e-12);
    assert!((adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]) - 1.0).abs() < 1e-12);
}
