//! Raw time-series collections: ingestion, validation and per-series
//! z-normalization.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::str::FromStr;
use std::time::SystemTime;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Metadata key set on series whose values had zero variance before normalization.
pub const CONSTANT_KEY: &str = "constant";

/// Input encodings accepted by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `series_id,timestamp,value`, one sample per row.
    LongCsv,
    /// `[{"id": .., "t": [..], "v": [..], "meta": {..}}]`
    SeriesJson,
}

impl Format {
    /// Guesses the format from a file name: `.json` means series-json, anything else long-csv.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::SeriesJson,
            _ => Format::LongCsv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "long-csv" | "csv" => Ok(Format::LongCsv),
            "series-json" | "json" => Ok(Format::SeriesJson),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// One observation: strictly increasing timestamps with their values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    timestamps: Vec<f64>,
    values: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, timestamps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if timestamps.is_empty() {
            return Err(Error::Size(format!("series `{id}` has no samples")));
        }
        if timestamps.len() != values.len() {
            return Err(Error::Size(format!(
                "series `{id}` has {} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(bad) = timestamps.iter().chain(&values).find(|x| !x.is_finite()) {
            return Err(Error::InvalidValue(*bad));
        }
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Size(format!(
                "series `{id}` timestamps are not strictly increasing"
            )));
        }
        Ok(TimeSeries {
            id,
            timestamps,
            values,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, String>) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `t_last - t_first`.
    pub fn span(&self) -> f64 {
        self.timestamps[self.timestamps.len() - 1] - self.timestamps[0]
    }

    pub fn is_constant(&self) -> bool {
        self.metadata.get(CONSTANT_KEY).map(String::as_str) == Some("true")
    }
}

/// A collection of series with distinct ids.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub id: String,
    series: Vec<TimeSeries>,
    normalized: bool,
    pub created_at: SystemTime,
}

impl Dataset {
    pub fn new(series: Vec<TimeSeries>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashMap::with_capacity(series.len());
        for (i, s) in series.iter().enumerate() {
            if seen.insert(s.id.as_str(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate series id `{}`", s.id)));
            }
        }
        Ok(Dataset {
            id: uuid::Uuid::new_v4().to_string(),
            series,
            normalized: false,
            created_at: SystemTime::now(),
        })
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn get(&self, id: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Attaches `series_id,key,value` rows from a sidecar CSV.
    pub fn attach_metadata<R: Read>(&mut self, source: R) -> Result<()> {
        let index: HashMap<String, usize> = self
            .series
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();
        let mut reader = csv_reader(source);
        expect_header(&mut reader, &["series_id", "key", "value"])?;
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record_line(&record);
            if record.len() != 3 {
                return Err(Error::parse(
                    line,
                    format!("expected 3 fields, found {}", record.len()),
                ));
            }
            let idx = *index
                .get(&record[0])
                .ok_or_else(|| Error::parse(line, format!("unknown series `{}`", &record[0])))?;
            self.series[idx]
                .metadata
                .insert(record[1].to_string(), record[2].to_string());
        }
        Ok(())
    }
}

/// Decodes a dataset from `source`. Series keep their order of first appearance.
pub fn load_dataset<R: Read>(source: R, format: Format) -> Result<Dataset> {
    match format {
        Format::LongCsv => load_csv(source),
        Format::SeriesJson => load_json(source),
    }
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, err.to_string())
}

fn expect_header<R: Read>(reader: &mut csv::Reader<R>, names: &[&str]) -> Result<bool> {
    let mut record = csv::StringRecord::new();
    if !reader.read_record(&mut record).map_err(csv_error)? {
        return Ok(false);
    }
    let found: Vec<&str> = record.iter().collect();
    if found != names {
        return Err(Error::parse(
            1,
            format!("expected header `{}`, found `{}`", names.join(","), found.join(",")),
        ));
    }
    Ok(true)
}

fn parse_number(field: &str, what: &str, line: usize) -> Result<f64> {
    let x: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{field}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("{what} `{field}` is not finite")));
    }
    Ok(x)
}

struct Pending {
    id: String,
    // (timestamp, value, source line)
    samples: Vec<(f64, f64, usize)>,
    metadata: BTreeMap<String, String>,
}

impl Pending {
    fn finish(mut self) -> Result<TimeSeries> {
        self.samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = self.samples.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateSample {
                series_id: self.id,
                timestamp: w[1].0,
                line: w[0].2.max(w[1].2),
            });
        }
        let (t, v): (Vec<f64>, Vec<f64>) = self.samples.iter().map(|&(t, v, _)| (t, v)).unzip();
        Ok(TimeSeries::new(self.id, t, v)?.with_metadata(self.metadata))
    }
}

fn load_csv<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv_reader(source);
    if !expect_header(&mut reader, &["series_id", "timestamp", "value"])? {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<Pending> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::parse(
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let id = &record[0];
        if id.is_empty() {
            return Err(Error::parse(line, "empty series_id"));
        }
        let t = parse_number(&record[1], "timestamp", line)?;
        let v = parse_number(&record[2], "value", line)?;
        let slot = match index.get(id) {
            Some(&slot) => slot,
            None => {
                index.insert(id.to_string(), order.len());
                order.push(Pending {
                    id: id.to_string(),
                    samples: Vec::new(),
                    metadata: BTreeMap::new(),
                });
                order.len() - 1
            }
        };
        order[slot].samples.push((t, v, line));
    }
    if order.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let series = order.into_iter().map(Pending::finish).collect::<Result<_>>()?;
    Dataset::new(series)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSeries {
    id: String,
    t: Vec<f64>,
    v: Vec<f64>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

fn load_json<R: Read>(source: R) -> Result<Dataset> {
    let raw: Vec<JsonSeries> = serde_json::from_reader(source)
        .map_err(|e| Error::parse(e.line(), e.to_string()))?;
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut series = Vec::with_capacity(raw.len());
    for (pos, s) in raw.into_iter().enumerate() {
        let context = |msg: String| Error::parse(0, format!("series #{pos} (`{}`): {msg}", s.id));
        if s.t.len() != s.v.len() {
            return Err(context(format!(
                "`t` has {} entries but `v` has {}",
                s.t.len(),
                s.v.len()
            )));
        }
        if s.t.is_empty() {
            return Err(context("no samples".into()));
        }
        let pending = Pending {
            id: s.id.clone(),
            samples: s.t.iter().zip(&s.v).map(|(&t, &v)| (t, v, 0)).collect(),
            metadata: s.meta,
        };
        series.push(pending.finish()?);
    }
    Dataset::new(series)
}

fn mean_and_popstd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Replaces every series' values by `(v - mean) / popstd`. Constant series
/// become all zeros and are flagged with `constant=true`.
pub fn znormalize(dataset: &Dataset) -> Result<Dataset> {
    if dataset.normalized {
        return Err(Error::State("dataset is already normalized"));
    }
    let series = dataset
        .series
        .iter()
        .map(|s| {
            let (mean, std) = mean_and_popstd(&s.values);
            let mut out = s.clone();
            // A relative floor catches series whose spread is pure rounding noise.
            if std <= f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE) * 4.0 {
                out.values.iter_mut().for_each(|v| *v = 0.0);
                out.metadata.insert(CONSTANT_KEY.into(), "true".into());
            } else {
                out.values.iter_mut().for_each(|v| *v = (*v - mean) / std);
            }
            out
        })
        .collect();
    Ok(Dataset {
        id: dataset.id.clone(),
        series,
        normalized: true,
        created_at: dataset.created_at,
    })
}
