//! Per-cluster letter heat maps, cluster comparisons and mean/std bands.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sax::{SaxConfig, SaxWord};

/// Letter-by-bin proportions of a cluster.
///
/// `cells[letter][bin]` is the share of members with that letter in that bin;
/// `gap[bin]` is the share with no letter there (empty bin or word too short).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatMap {
    pub alpha: usize,
    pub omega: usize,
    #[serde(rename = "size")]
    pub cluster_size: usize,
    pub cells: Vec<Vec<f64>>,
    pub gap: Vec<f64>,
    #[serde(skip)]
    counts: Vec<Vec<usize>>,
    #[serde(skip)]
    gap_counts: Vec<usize>,
}

fn check_words(words: &[SaxWord], config: SaxConfig) -> Result<()> {
    if words.is_empty() {
        return Err(Error::Size("cluster has no members".into()));
    }
    for w in words {
        if w.len() > config.omega || w.max_letter().is_some_and(|l| l >= config.alpha) {
            return Err(Error::InvalidConfig(format!(
                "word `{w}` of `{}` does not fit alpha {} / omega {}",
                w.series_id, config.alpha, config.omega
            )));
        }
    }
    Ok(())
}

pub fn cluster_heatmap(words: &[SaxWord], config: SaxConfig) -> Result<HeatMap> {
    check_words(words, config)?;
    let SaxConfig { alpha, omega } = config;
    let mut counts = vec![vec![0usize; omega]; alpha];
    let mut gap_counts = vec![0usize; omega];
    for w in words {
        for t in 0..omega {
            match w.get(t).index() {
                Some(l) => counts[l][t] += 1,
                None => gap_counts[t] += 1,
            }
        }
    }
    let size = words.len() as f64;
    let cells = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / size).collect())
        .collect();
    let gap = gap_counts.iter().map(|&c| c as f64 / size).collect();
    Ok(HeatMap {
        alpha,
        omega,
        cluster_size: words.len(),
        cells,
        gap,
        counts,
        gap_counts,
    })
}

impl HeatMap {
    pub fn count(&self, letter: usize, bin: usize) -> usize {
        self.counts[letter][bin]
    }

    pub fn gap_count(&self, bin: usize) -> usize {
        self.gap_counts[bin]
    }

    /// Shannon entropy (nats) of one bin over letters plus the gap category.
    /// Diffuse, lighter-looking columns score higher.
    pub fn column_entropy(&self, bin: usize) -> f64 {
        self.cells
            .iter()
            .map(|row| row[bin])
            .chain(std::iter::once(self.gap[bin]))
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMode {
    Counts,
    Percent,
}

impl FromStr for ComparisonMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counts" => Ok(ComparisonMode::Counts),
            "percent" => Ok(ComparisonMode::Percent),
            other => Err(Error::InvalidConfig(format!(
                "mode must be `counts` or `percent`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for ComparisonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComparisonMode::Counts => "counts",
            ComparisonMode::Percent => "percent",
        })
    }
}

/// Per-bin mean and population standard deviation of letter ranks
/// (`a = 0, b = 1, ...`), ignoring gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStats {
    /// `None` where no member has a letter.
    pub mean: Vec<Option<f64>>,
    pub std: Vec<f64>,
    pub support: Vec<usize>,
    /// How letters map to numbers.
    pub rank: &'static str,
}

impl BandStats {
    /// `(mean - std, mean + std)` per bin.
    pub fn band(&self) -> Vec<Option<(f64, f64)>> {
        self.mean
            .iter()
            .zip(&self.std)
            .map(|(m, s)| m.map(|m| (m - s, m + s)))
            .collect()
    }
}

pub fn band_stats(words: &[SaxWord], config: SaxConfig) -> Result<BandStats> {
    check_words(words, config)?;
    let omega = config.omega;
    let mut mean = Vec::with_capacity(omega);
    let mut std = Vec::with_capacity(omega);
    let mut support = Vec::with_capacity(omega);
    for t in 0..omega {
        let ranks: Vec<f64> = words
            .iter()
            .filter_map(|w| w.get(t).index())
            .map(|l| l as f64)
            .collect();
        support.push(ranks.len());
        if ranks.is_empty() {
            mean.push(None);
            std.push(0.0);
            continue;
        }
        let m = ranks.iter().sum::<f64>() / ranks.len() as f64;
        let var = ranks.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / ranks.len() as f64;
        mean.push(Some(m));
        std.push(if ranks.len() > 1 { var.sqrt() } else { 0.0 });
    }
    Ok(BandStats {
        mean,
        std,
        support,
        rank: "ordinal",
    })
}

/// Signed difference of two clusters' heat maps: positive values belong to
/// the first cluster, negative ones to the second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonHeatMap {
    pub mode: ComparisonMode,
    pub alpha: usize,
    pub omega: usize,
    pub size_a: usize,
    pub size_b: usize,
    pub diff: Vec<Vec<f64>>,
    pub gap_diff: Vec<f64>,
    pub band_a: BandStats,
    pub band_b: BandStats,
}

pub fn compare_clusters(
    a: &[SaxWord],
    b: &[SaxWord],
    mode: ComparisonMode,
    config: SaxConfig,
) -> Result<ComparisonHeatMap> {
    let ha = cluster_heatmap(a, config)?;
    let hb = cluster_heatmap(b, config)?;
    let (diff, gap_diff) = match mode {
        ComparisonMode::Percent => (
            ha.cells
                .iter()
                .zip(&hb.cells)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
                .collect(),
            ha.gap.iter().zip(&hb.gap).map(|(x, y)| x - y).collect(),
        ),
        ComparisonMode::Counts => {
            let sub = |x: usize, y: usize| x as f64 - y as f64;
            (
                ha.counts
                    .iter()
                    .zip(&hb.counts)
                    .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| sub(x, y)).collect())
                    .collect(),
                ha.gap_counts
                    .iter()
                    .zip(&hb.gap_counts)
                    .map(|(&x, &y)| sub(x, y))
                    .collect(),
            )
        }
    };
    Ok(ComparisonHeatMap {
        mode,
        alpha: config.alpha,
        omega: config.omega,
        size_a: a.len(),
        size_b: b.len(),
        diff,
        gap_diff,
        band_a: band_stats(a, config)?,
        band_b: band_stats(b, config)?,
    })
}
