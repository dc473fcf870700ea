//! Labeled RSS datasets: synthetic generation along a track, CSV
//! persistence, deterministic shuffled splits, and input-normalization
//! statistics.
//!
//! The CSV schema is `round,x,y,z,rss_0..rss_{Ns-1}` with meters for
//! coordinates and dBm for RSS. Floats are written in Rust's shortest
//! round-trip form, so save → load is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{build_covariance, simulate_rss, PlmParams};
use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scenario::{Point3, Scenario, Track};

/// One labeled observation: ground-truth position, the RSS vector over all
/// sensing units, and the measurement round it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub position: Point3,
    pub rss: Vec<f64>,
    pub round_id: u32,
}

/// An ordered, non-empty collection of samples with a homogeneous RSS
/// width. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_sensors: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(n_sensors: usize, samples: Vec<Sample>) -> Result<Dataset> {
        if n_sensors == 0 {
            return Err(Error::InvalidArgument("n_sensors must be at least 1".into()));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("dataset must not be empty".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.rss.len() != n_sensors {
                return Err(Error::DimensionMismatch(format!(
                    "sample {i} has {} RSS values, expected {n_sensors}",
                    s.rss.len()
                )));
            }
            if !s.position.is_finite() || s.rss.iter().any(|r| !r.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} contains non-finite values"
                )));
            }
        }
        Ok(Dataset { n_sensors, samples })
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Loads a dataset CSV, validating the header shape. When
    /// `expected_sensors` is given, the RSS column count must match it.
    pub fn load_csv(
        path: impl AsRef<Path>,
        expected_sensors: Option<usize>,
    ) -> Result<Dataset> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };

        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 5 || cols[..4] != ["round", "x", "y", "z"] {
            return Err(parse_err(
                1,
                "header must start with round,x,y,z and have at least one RSS column".into(),
            ));
        }
        let n_sensors = cols.len() - 4;
        for (j, col) in cols[4..].iter().enumerate() {
            if *col != format!("rss_{j}") {
                return Err(parse_err(
                    1,
                    format!("RSS column {} must be named rss_{j}, got {col:?}", j + 4),
                ));
            }
        }
        if let Some(expected) = expected_sensors {
            if n_sensors != expected {
                return Err(parse_err(
                    1,
                    format!(
                        "header has {n_sensors} RSS columns but the scenario has \
                         {expected} sensing units"
                    ),
                ));
            }
        }

        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 + n_sensors {
                return Err(parse_err(
                    line_no,
                    format!("expected {} columns, got {}", 4 + n_sensors, fields.len()),
                ));
            }
            let round_id: u32 = fields[0].parse().map_err(|_| {
                parse_err(line_no, format!("invalid round value {:?}", fields[0]))
            })?;
            let num = |s: &str, name: &str| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("invalid {name} value {s:?}")))
            };
            let position = Point3::new(
                num(fields[1], "x")?,
                num(fields[2], "y")?,
                num(fields[3], "z")?,
            );
            let rss = fields[4..]
                .iter()
                .enumerate()
                .map(|(j, s)| num(s, &format!("rss_{j}")))
                .collect::<Result<Vec<f64>>>()?;
            samples.push(Sample { position, rss, round_id });
        }
        Dataset::new(n_sensors, samples)
    }

    /// Writes the dataset CSV (see the module docs for the schema).
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("round,x,y,z");
        for j in 0..self.n_sensors {
            out.push_str(&format!(",rss_{j}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}",
                s.round_id, s.position.x, s.position.y, s.position.z
            ));
            for r in &s.rss {
                out.push_str(&format!(",{r}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Simulates one RSS observation per track point. Deterministic given the
/// generator state; draws are consumed in track order.
pub fn generate_synthetic(
    scenario: &Scenario,
    params: &PlmParams,
    track: &Track,
    rng: &mut Prng,
) -> Result<Dataset> {
    let cov = build_covariance(scenario, params)?;
    let samples = track
        .iter()
        .map(|(round_id, position)| {
            simulate_rss(scenario, params, &cov, position, rng)
                .map(|rss| Sample { position, rss, round_id })
        })
        .collect::<Result<Vec<Sample>>>()?;
    Dataset::new(scenario.n_sensing_units(), samples)
}

/// Shuffled-split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of samples assigned to the training side, in (0, 1).
    pub train_fraction: f64,
    pub shuffle_seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Shuffles the dataset with the seeded generator and assigns the first
/// ⌊train_fraction·n⌋ samples to the training side, the rest to the test
/// side. Together they are a permutation of the input.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let n = dataset.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "splitting requires at least two samples".into(),
        ));
    }
    let n_train = (spec.train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "train_fraction {} leaves an empty side for {n} samples",
            spec.train_fraction
        )));
    }

    let mut rng = crate::rng::from_seed(spec.shuffle_seed);
    let mut idx: Vec<usize> = (0..n).collect();
    crate::rng::shuffle_in_place(&mut idx, &mut rng);
    let take = |range: &[usize]| {
        let samples = range.iter().map(|&i| dataset.samples[i].clone()).collect();
        Dataset::new(dataset.n_sensors, samples)
    };
    Ok((take(&idx[..n_train])?, take(&idx[n_train..])?))
}

/// Per-feature standardization statistics, computed from training data
/// only and stored alongside any model that consumed them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    /// Population (1/n) standard deviation, floored at 1e-6 so constant
    /// features normalize to zero instead of dividing by zero.
    pub std: Vec<f64>,
}

/// Floor applied to per-feature standard deviations.
pub const STD_FLOOR: f64 = 1e-6;

/// Computes per-feature mean and population standard deviation over the
/// training split.
pub fn compute_norm_stats(train: &Dataset) -> NormStats {
    let n = train.len() as f64;
    let k = train.n_sensors();
    let mut mean = vec![0.0; k];
    for s in train.samples() {
        for j in 0..k {
            mean[j] += s.rss[j];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; k];
    for s in train.samples() {
        for j in 0..k {
            let d = s.rss[j] - mean[j];
            var[j] += d * d;
        }
    }
    let std = var
        .iter()
        .map(|v| (v / n).sqrt().max(STD_FLOOR))
        .collect();
    NormStats { mean, std }
}

/// Standardizes one RSS vector: `(x − mean) / std` per feature.
pub fn apply_norm(rss: &[f64], stats: &NormStats) -> Vec<f64> {
    assert_eq!(rss.len(), stats.mean.len(), "feature count mismatch");
    rss.iter()
        .zip(stats.mean.iter().zip(&stats.std))
        .map(|(&x, (&m, &s))| (x - m) / s)
        .collect()
}

/// Inverse of [`apply_norm`].
pub fn invert_norm(normalized: &[f64], stats: &NormStats) -> Vec<f64> {
    assert_eq!(normalized.len(), stats.mean.len(), "feature count mismatch");
    normalized
        .iter()
        .zip(stats.mean.iter().zip(&stats.std))
        .map(|(&z, (&m, &s))| z * s + m)
        .collect()
}
