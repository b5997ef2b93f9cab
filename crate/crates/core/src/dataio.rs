//! Reading datasets, normalizing features, generating synthetic blobs, and
//! writing run records.
//!
//! Dense input is delimited text with one sample per line. Sparse input uses
//! `label idx:val idx:val ...` lines with 1-based, strictly ascending indices.
//! Class labels of either format are compacted to `0..C` in order of first
//! appearance.
//!
//! A run record is one JSON document; the objective trace is additionally
//! written as `iteration objective` lines for plotting.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Scores;
use crate::solver::{FitResult, IterationRecord, Variant, Warning};
use crate::types::{Dataset, SolverConfig};

pub const RUN_RECORD_FORMAT: &str = "obcut-run/1";

#[derive(Clone, Debug)]
pub struct DenseOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Zero-based column holding the class label, if any.
    pub label_column: Option<usize>,
}

impl Default for DenseOptions {
    fn default() -> Self {
        DenseOptions {
            delimiter: b',',
            has_header: false,
            label_column: None,
        }
    }
}

#[derive(Default)]
struct LabelCompactor {
    ids: HashMap<String, usize>,
}

impl LabelCompactor {
    fn id(&mut self, raw: &str) -> usize {
        let next = self.ids.len();
        *self.ids.entry(raw.to_string()).or_insert(next)
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Load a delimited text file, one sample per line.
pub fn load_dense(path: impl AsRef<Path>, options: &DenseOptions) -> Result<Dataset> {
    let path = path.as_ref();
    parse_dense(&read_to_string(path)?, options)
}

pub fn parse_dense(text: &str, options: &DenseOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Option<Vec<String>> = if options.has_header {
        let h = reader.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut compactor = LabelCompactor::default();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::RaggedRows {
                    line,
                    expected: w,
                    found: record.len(),
                })
            }
            _ => {}
        }
        if let Some(col) = options.label_column {
            if col >= record.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("label column {col} missing ({} fields)", record.len()),
                });
            }
        }
        for (c, field) in record.iter().enumerate() {
            if Some(c) == options.label_column {
                labels.push(compactor.id(field));
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::NonNumeric {
                line,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    line,
                    value: field.to_string(),
                });
            }
            values.push(v);
        }
    }
    let width = width.ok_or(Error::Parse {
        line: 1,
        message: "no data rows".into(),
    })?;
    let dim = width - usize::from(options.label_column.is_some());
    if dim == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "no feature columns".into(),
        });
    }
    let samples = values.len() / dim;
    // values are sample-major, which is column-major for a d × N matrix
    let features = DMatrix::from_column_slice(dim, samples, &values);
    let labels = options.label_column.map(|_| labels);
    let dataset = Dataset::new(features, labels)?;
    match header {
        Some(h) => {
            let names = h
                .into_iter()
                .enumerate()
                .filter(|(c, _)| Some(*c) != options.label_column)
                .map(|(_, n)| n)
                .collect();
            dataset.with_feature_names(names)
        }
        None => Ok(dataset),
    }
}

/// Load `label idx:val ...` lines into a dense dataset with `d` = largest index.
pub fn load_sparse(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    parse_sparse(&read_to_string(path)?)
}

pub fn parse_sparse(text: &str) -> Result<Dataset> {
    let mut compactor = LabelCompactor::default();
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        labels.push(compactor.id(label));
        let mut entries = Vec::new();
        let mut last = 0usize;
        for token in tokens {
            let (i, v) = token.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected idx:val, found {token:?}"),
            })?;
            let i: usize = i.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad index {i:?}"),
            })?;
            if i == 0 {
                return Err(Error::Parse {
                    line,
                    message: "indices are 1-based".into(),
                });
            }
            if i == last {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate index {i}"),
                });
            }
            if i < last {
                return Err(Error::NonAscendingIndices { line });
            }
            let v: f64 = v.parse().map_err(|_| Error::NonNumeric {
                line,
                value: v.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    line,
                    value: v.to_string(),
                });
            }
            last = i;
            dim = dim.max(i);
            entries.push((i - 1, v));
        }
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    if dim == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "no feature entries".into(),
        });
    }
    let mut features = DMatrix::zeros(dim, rows.len());
    for (s, entries) in rows.iter().enumerate() {
        for &(i, v) in entries {
            features[(i, s)] = v;
        }
    }
    Dataset::new(features, Some(labels))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizationMode {
    /// Each feature mapped to `[0, 1]`.
    MinMax,
    /// Each feature to mean 0 and (population) standard deviation 1.
    ZScore,
    /// Each sample scaled to unit Euclidean norm.
    L2,
    None,
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minmax" | "min-max" => Ok(NormalizationMode::MinMax),
            "zscore" | "z-score" => Ok(NormalizationMode::ZScore),
            "l2" => Ok(NormalizationMode::L2),
            "none" => Ok(NormalizationMode::None),
            _ => Err(Error::InvalidConfig(format!("unknown normalization {s:?}"))),
        }
    }
}

/// A fitted, re-appliable normalization. `params` holds per-feature
/// `(min, max)` or `(mean, std)`; it is empty for `L2` and `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub mode: NormalizationMode,
    pub params: Vec<(f64, f64)>,
}

impl NormalizationSpec {
    pub fn fit(dataset: &Dataset, mode: NormalizationMode) -> Self {
        let x = dataset.features();
        let params = match mode {
            NormalizationMode::MinMax => x
                .row_iter()
                .map(|r| (r.min(), r.max()))
                .collect(),
            NormalizationMode::ZScore => x
                .row_iter()
                .map(|r| {
                    let n = r.len() as f64;
                    let mean = r.sum() / n;
                    let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    (mean, var.sqrt())
                })
                .collect(),
            NormalizationMode::L2 | NormalizationMode::None => Vec::new(),
        };
        NormalizationSpec { mode, params }
    }

    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        let mut x = dataset.features().clone();
        match self.mode {
            NormalizationMode::MinMax | NormalizationMode::ZScore => {
                if self.params.len() != x.nrows() {
                    return Err(Error::DimensionMismatch(format!(
                        "normalization fitted on {} features, dataset has {}",
                        self.params.len(),
                        x.nrows()
                    )));
                }
                for (r, &(a, b)) in self.params.iter().enumerate() {
                    let (offset, span) = match self.mode {
                        NormalizationMode::MinMax => (a, b - a),
                        _ => (a, b),
                    };
                    for v in x.row_mut(r).iter_mut() {
                        *v = if span > 0.0 { (*v - offset) / span } else { 0.0 };
                    }
                }
            }
            NormalizationMode::L2 => {
                for mut col in x.column_iter_mut() {
                    let norm = col.norm();
                    if norm > 0.0 {
                        col /= norm;
                    }
                }
            }
            NormalizationMode::None => {}
        }
        Ok(dataset.replace_features(x))
    }
}

/// Fit and apply a normalization; constant features map to 0.
pub fn normalize(dataset: &Dataset, mode: NormalizationMode) -> (Dataset, NormalizationSpec) {
    let spec = NormalizationSpec::fit(dataset, mode);
    let out = spec.apply(dataset).expect("spec fitted on this dataset");
    (out, spec)
}

/// `k` isotropic Gaussian clusters of `n_per_cluster` points each.
///
/// Centers sit on an integer grid scaled by `separation`, so any two centers
/// are at least `separation` apart. Samples are shuffled; labels give the
/// generating component.
pub fn make_blobs(
    n_per_cluster: usize,
    k: usize,
    d: usize,
    separation: f64,
    noise_std: f64,
    seed: u64,
) -> Result<Dataset> {
    if separation.is_nan() || separation <= 0.0 || noise_std.is_nan() || noise_std < 0.0 || k == 0 || d == 0 || n_per_cluster == 0 {
        return Err(Error::InvalidConfig(format!(
            "make_blobs needs positive sizes and separation, got n={n_per_cluster} k={k} d={d} sep={separation} noise={noise_std}"
        )));
    }
    let mut side = 1usize;
    while (side as f64).powi(d.min(64) as i32) < k as f64 {
        side += 1;
    }
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let mut rem = c;
            (0..d)
                .map(|_| {
                    let coord = rem % side;
                    rem /= side;
                    coord as f64 * separation
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut order: Vec<usize> = (0..n_per_cluster * k).collect();
    order.shuffle(&mut rng);
    let mut features = DMatrix::zeros(d, order.len());
    let mut labels = vec![0; order.len()];
    for (col, &source) in order.iter().enumerate() {
        let c = source / n_per_cluster;
        labels[col] = c;
        for r in 0..d {
            features[(r, col)] = centers[c][r] + noise.sample(&mut rng);
        }
    }
    Dataset::new(features, Some(labels))
}

/// Everything needed to reproduce and score one fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub format: String,
    pub variant: Variant,
    pub config: SolverConfig,
    pub seed: u64,
    pub normalization: Option<NormalizationSpec>,
    /// How NMI is normalized.
    pub nmi_normalization: String,
    pub initial_objective: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations_run: usize,
    pub assignments: Vec<usize>,
    pub metrics: Option<Scores>,
    pub warnings: Vec<Warning>,
}

impl RunRecord {
    pub fn from_fit(
        fit: &FitResult,
        config: &SolverConfig,
        variant: Variant,
        metrics: Option<Scores>,
        normalization: Option<NormalizationSpec>,
    ) -> Self {
        RunRecord {
            format: RUN_RECORD_FORMAT.to_string(),
            variant,
            config: config.clone(),
            seed: config.seed,
            normalization,
            nmi_normalization: "geometric".to_string(),
            initial_objective: fit.state.initial_objective,
            objective_trace: fit.state.objective_trace.clone(),
            iterations: fit.iterations.clone(),
            converged: fit.converged,
            iterations_run: fit.iterations_run,
            assignments: fit.indicator.assignments().to_vec(),
            metrics,
            warnings: fit.warnings.clone(),
        }
    }
}

pub fn save_result(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(record)?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_result(path: impl AsRef<Path>) -> Result<RunRecord> {
    let path = path.as_ref();
    let record: RunRecord = serde_json::from_str(&read_to_string(path)?)?;
    if record.format != RUN_RECORD_FORMAT {
        return Err(Error::InvalidDataset(format!(
            "unsupported run record format {:?}",
            record.format
        )));
    }
    Ok(record)
}

/// Two-column `iteration objective` text for plotting.
pub fn write_trace(trace: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::from("# iteration objective\n");
    for (i, v) in trace.iter().enumerate() {
        text.push_str(&format!("{} {:.17e}\n", i + 1, v));
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
