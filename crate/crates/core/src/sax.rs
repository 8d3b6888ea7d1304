//! Symbolic aggregate approximation: global breakpoint fitting, time binning
//! and letter assignment.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{Dataset, TimeSeries};
use crate::error::{Error, Result};

/// Alphabet size and maximum word length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaxConfig {
    pub alpha: usize,
    pub omega: usize,
}

impl SaxConfig {
    pub const MAX_ALPHA: usize = 26;

    pub fn new(alpha: usize, omega: usize) -> Result<Self> {
        let config = SaxConfig { alpha, omega };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=Self::MAX_ALPHA).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in 2..=26, got {}",
                self.alpha
            )));
        }
        if self.omega == 0 {
            return Err(Error::InvalidConfig("omega must be at least 1".into()));
        }
        Ok(())
    }
}

/// One word position: a letter index or a gap.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(u8);

impl Cell {
    pub const GAP: Cell = Cell(u8::MAX);

    /// # Panics
    /// If `index` is not a valid letter (`>= 26`).
    pub fn letter(index: usize) -> Cell {
        assert!(index < SaxConfig::MAX_ALPHA, "letter index {index} out of range");
        Cell(index as u8)
    }

    pub fn is_gap(self) -> bool {
        self == Cell::GAP
    }

    pub fn index(self) -> Option<usize> {
        (!self.is_gap()).then_some(self.0 as usize)
    }

    pub fn to_char(self) -> char {
        match self.index() {
            Some(i) => (b'a' + i as u8) as char,
            None => '_',
        }
    }

    pub fn from_char(c: char) -> Option<Cell> {
        match c {
            '_' => Some(Cell::GAP),
            'a'..='z' => Some(Cell(c as u8 - b'a')),
            _ => None,
        }
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// The symbolic form of one series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaxWord {
    pub series_id: String,
    cells: Vec<Cell>,
}

impl SaxWord {
    pub fn new(series_id: impl Into<String>, cells: Vec<Cell>) -> Self {
        SaxWord {
            series_id: series_id.into(),
            cells,
        }
    }

    /// Parses `'a'..='z'` letters and `'_'` gaps.
    pub fn parse(series_id: impl Into<String>, text: &str) -> Result<Self> {
        let cells = text
            .chars()
            .map(|c| {
                Cell::from_char(c)
                    .ok_or_else(|| Error::InvalidConfig(format!("invalid word character `{c}`")))
            })
            .collect::<Result<_>>()?;
        Ok(SaxWord::new(series_id, cells))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell at `pos`, with positions past the end reading as gaps.
    pub fn get(&self, pos: usize) -> Cell {
        self.cells.get(pos).copied().unwrap_or(Cell::GAP)
    }

    pub fn letter_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_gap()).count()
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.cells.iter().filter_map(|c| c.index()).max()
    }
}

impl fmt::Display for SaxWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cells.iter().try_for_each(|c| write!(f, "{}", c.to_char()))
    }
}

/// Fitted normal and its equal-probability breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointModel {
    pub mu: f64,
    pub sigma: f64,
    pub breakpoints: Vec<f64>,
}

impl BreakpointModel {
    /// Breakpoints at `mu + sigma * quantile(j / alpha)` for `j = 1..alpha`.
    pub fn from_normal(mu: f64, sigma: f64, alpha: usize) -> Result<Self> {
        if !(2..=SaxConfig::MAX_ALPHA).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in 2..=26, got {alpha}"
            )));
        }
        let normal = Normal::new(mu, sigma)
            .map_err(|e| Error::Degenerate(format!("cannot fit normal: {e}")))?;
        let breakpoints = (1..alpha)
            .map(|j| normal.inverse_cdf(j as f64 / alpha as f64))
            .collect();
        Ok(BreakpointModel {
            mu,
            sigma,
            breakpoints,
        })
    }

    pub fn alpha(&self) -> usize {
        self.breakpoints.len() + 1
    }

    /// Number of breakpoints `b` with `value >= b`; a value on a breakpoint
    /// takes the higher letter.
    pub fn letter_of(&self, value: f64) -> Result<usize> {
        if !value.is_finite() {
            return Err(Error::InvalidValue(value));
        }
        Ok(self.breakpoints.partition_point(|&b| b <= value))
    }
}

/// Pools every value of a normalized dataset and fits the letter breakpoints.
pub fn fit_breakpoints(dataset: &Dataset, alpha: usize) -> Result<BreakpointModel> {
    if !dataset.is_normalized() {
        return Err(Error::State("breakpoints must be fitted on a normalized dataset"));
    }
    let pooled = || dataset.series().iter().flat_map(|s| s.values().iter().copied());
    let n = pooled().count();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 pooled values, found {n}"
        )));
    }
    let mu = pooled().sum::<f64>() / n as f64;
    let var = pooled().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
    if var.is_nan() || var <= 0.0 {
        return Err(Error::Degenerate("pooled values have zero variance".into()));
    }
    BreakpointModel::from_normal(mu, var.sqrt(), alpha)
}

/// Number of bins for a series of the given span. The last bin is closed on
/// the right, so a span that is an exact multiple of `bin_width` does not open
/// an extra bin.
pub(crate) fn bin_count(span: f64, bin_width: f64, omega: usize) -> usize {
    let ratio = span / bin_width;
    let nearest = ratio.round();
    let bins = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    (bins as usize).clamp(1, omega)
}

/// Averages the series over bins of `bin_width` anchored at its first
/// timestamp and maps each bin mean to a letter. Empty bins become gaps.
pub fn encode(
    series: &TimeSeries,
    model: &BreakpointModel,
    config: SaxConfig,
    bin_width: f64,
) -> Result<SaxWord> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let len = bin_count(series.span(), bin_width, config.omega);
    let t0 = series.timestamps()[0];
    let mut sums = vec![0.0; len];
    let mut counts = vec![0usize; len];
    for (&t, &v) in series.timestamps().iter().zip(series.values()) {
        let bin = (((t - t0) / bin_width).floor() as usize).min(len - 1);
        sums[bin] += v;
        counts[bin] += 1;
    }
    let cells = sums
        .iter()
        .zip(&counts)
        .map(|(&sum, &count)| {
            if count == 0 {
                Ok(Cell::GAP)
            } else {
                model.letter_of(sum / count as f64).map(Cell::letter)
            }
        })
        .collect::<Result<_>>()?;
    Ok(SaxWord::new(series.id.clone(), cells))
}

/// Everything produced by encoding one dataset under one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCorpus {
    pub config: SaxConfig,
    pub model: BreakpointModel,
    pub bin_width: f64,
    pub words: Vec<SaxWord>,
}

/// Fits breakpoints once, then encodes every series with a shared bin width
/// chosen so the longest series spans exactly `omega` bins.
pub fn encode_dataset(dataset: &Dataset, config: SaxConfig) -> Result<EncodedCorpus> {
    config.validate()?;
    let model = fit_breakpoints(dataset, config.alpha)?;
    let max_span = dataset
        .series()
        .iter()
        .map(TimeSeries::span)
        .fold(0.0, f64::max);
    // Only single-sample series: every word has one bin whatever the width.
    let bin_width = if max_span > 0.0 {
        max_span / config.omega as f64
    } else {
        1.0
    };
    let words = dataset
        .series()
        .par_iter()
        .map(|s| encode(s, &model, config, bin_width))
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedCorpus {
        config,
        model,
        bin_width,
        words,
    })
}

#[derive(Serialize, Deserialize)]
struct WordEntry {
    id: String,
    w: String,
}

#[derive(Serialize, Deserialize)]
struct CorpusJson {
    alpha: usize,
    omega: usize,
    mu: f64,
    sigma: f64,
    breakpoints: Vec<f64>,
    bin_width: f64,
    words: Vec<WordEntry>,
}

impl EncodedCorpus {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CorpusJson {
            alpha: self.config.alpha,
            omega: self.config.omega,
            mu: self.model.mu,
            sigma: self.model.sigma,
            breakpoints: self.model.breakpoints.clone(),
            bin_width: self.bin_width,
            words: self
                .words
                .iter()
                .map(|w| WordEntry {
                    id: w.series_id.clone(),
                    w: w.to_string(),
                })
                .collect(),
        })
        .expect("corpus is always serializable")
    }

    pub fn from_json(value: &str) -> Result<Self> {
        let raw: CorpusJson = serde_json::from_str(value)
            .map_err(|e| Error::parse(e.line(), e.to_string()))?;
        let config = SaxConfig::new(raw.alpha, raw.omega)?;
        if raw.breakpoints.len() + 1 != raw.alpha {
            return Err(Error::InvalidConfig(format!(
                "{} breakpoints do not fit alpha {}",
                raw.breakpoints.len(),
                raw.alpha
            )));
        }
        let words = raw
            .words
            .into_iter()
            .map(|e| {
                let word = SaxWord::parse(e.id, &e.w)?;
                if word.len() > config.omega {
                    return Err(Error::InvalidConfig(format!(
                        "word `{}` is longer than omega {}",
                        e.w, config.omega
                    )));
                }
                if word.max_letter().is_some_and(|l| l >= config.alpha) {
                    return Err(Error::InvalidConfig(format!(
                        "word `{}` uses letters beyond alpha {}",
                        e.w, config.alpha
                    )));
                }
                Ok(word)
            })
            .collect::<Result<_>>()?;
        Ok(EncodedCorpus {
            config,
            model: BreakpointModel {
                mu: raw.mu,
                sigma: raw.sigma,
                breakpoints: raw.breakpoints,
            },
            bin_width: raw.bin_width,
            words,
        })
    }
}
