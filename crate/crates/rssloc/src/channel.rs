//! Forward radio model: log-distance path loss, spatially correlated
//! log-normal shadowing, and RSS extraction from raw IQ captures.
//!
//! Received power at sensing unit j for a transmitter at u follows
//!
//! ```text
//! P_j = P0 - 10 * beta * log10(d(u, v_j) / d0) + n_j   [dBm]
//! ```
//!
//! where n is a zero-mean Gaussian vector whose covariance decays
//! exponentially with the distance between sensing units:
//! `C[a][b] = sigma2_db * exp(-d(v_a, v_b) / d_cor)`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{standard_normal, Prng};
use crate::scenario::{Point3, Scenario};

/// Transmitter-sensor distances below this are treated as coincident; the
/// path-loss model diverges at zero distance.
pub const MIN_DISTANCE_M: f64 = 1e-6;

/// Path-loss model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlmParams {
    /// Received power at the reference distance d0, dBm.
    pub p0: f64,
    /// Path-loss exponent (dimensionless, > 0).
    pub beta: f64,
    /// Shadowing variance, dB² (≥ 0).
    pub sigma2_db: f64,
    /// Shadowing decorrelation distance, meters (> 0).
    pub d_cor: f64,
}

impl PlmParams {
    pub fn validate(&self) -> Result<()> {
        if !self.p0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "p0 must be finite, got {}",
                self.p0
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if !(self.sigma2_db >= 0.0) || !self.sigma2_db.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma2_db must be >= 0, got {}",
                self.sigma2_db
            )));
        }
        if !(self.d_cor > 0.0) || !self.d_cor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "d_cor must be > 0, got {}",
                self.d_cor
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PlmParams> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: PlmParams =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        params.validate().map_err(|e| Error::json(path, e))?;
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("params serialize");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Euclidean distance in 3D, meters.
pub fn distance(u: Point3, v: Point3) -> f64 {
    let dx = u.x - v.x;
    let dy = u.y - v.y;
    let dz = u.z - v.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Noise-free received power at distance `d` from the transmitter, dBm.
///
/// Fails if the transmitter sits on top of the sensing unit (d below
/// [`MIN_DISTANCE_M`]); the model has a log singularity there.
pub fn mean_rss(params: &PlmParams, d0: f64, u: Point3, v: Point3) -> Result<f64> {
    let d = distance(u, v);
    if d < MIN_DISTANCE_M {
        return Err(Error::CoincidentWithSensor { su_index: usize::MAX });
    }
    Ok(params.p0 - 10.0 * params.beta * (d / d0).log10())
}

/// Noise-free RSS at every sensing unit for a transmitter at `u`.
pub fn mean_rss_vector(scenario: &Scenario, params: &PlmParams, u: Point3) -> Result<Vec<f64>> {
    scenario
        .sensing_units
        .iter()
        .enumerate()
        .map(|(j, &su)| {
            mean_rss(params, scenario.d0, u, su)
                .map_err(|_| Error::CoincidentWithSensor { su_index: j })
        })
        .collect()
}

/// Shadowing covariance across sensing units, with its Cholesky factor
/// cached for sampling and whitening. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    /// Row-major N_s × N_s entries, dB².
    entries: Vec<f64>,
    /// Row-major lower-triangular Cholesky factor L with C = L·Lᵀ.
    /// All zeros when sigma2_db = 0 (the covariance is the zero matrix).
    chol: Vec<f64>,
}

impl CovarianceMatrix {
    /// Matrix dimension N_s.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry [a][b], dB².
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.n + b]
    }

    /// The lower-triangular Cholesky factor, row-major.
    pub fn chol_lower(&self) -> &[f64] {
        &self.chol
    }

    /// Squared norm of the whitened residual, ‖L⁻¹ r‖² = rᵀ C⁻¹ r, via
    /// forward substitution. Never forms C⁻¹.
    ///
    /// A zero pivot (sigma2_db = 0) makes any nonzero residual infinitely
    /// unlikely; the result is +∞ then, and 0 for a zero residual.
    pub fn whitened_sq_norm(&self, r: &[f64]) -> f64 {
        assert_eq!(r.len(), self.n, "residual length must match matrix dimension");
        let n = self.n;
        let mut t = vec![0.0; n];
        let mut sq = 0.0;
        for i in 0..n {
            let mut s = r[i];
            for k in 0..i {
                s -= self.chol[i * n + k] * t[k];
            }
            let pivot = self.chol[i * n + i];
            if pivot > 0.0 {
                t[i] = s / pivot;
            } else if s == 0.0 {
                t[i] = 0.0;
            } else {
                return f64::INFINITY;
            }
            sq += t[i] * t[i];
        }
        sq
    }
}

/// Builds the exponential-correlation shadowing covariance for a scenario's
/// sensing units: `C[a][b] = sigma2_db * exp(-d(v_a, v_b) / d_cor)`.
pub fn build_covariance(scenario: &Scenario, params: &PlmParams) -> Result<CovarianceMatrix> {
    params.validate()?;
    let units = &scenario.sensing_units;
    let n = units.len();
    let mut entries = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let d = distance(units[a], units[b]);
            entries[a * n + b] = params.sigma2_db * (-d / params.d_cor).exp();
        }
    }

    let chol = if params.sigma2_db == 0.0 {
        vec![0.0; n * n]
    } else {
        // Exponential correlation is positive definite in exact arithmetic
        // for distinct positions; one jitter retry absorbs roundoff, a
        // second failure is a genuine input problem (duplicate SUs).
        match cholesky_lower(n, &entries, 0.0) {
            Some(l) => l,
            None => cholesky_lower(n, &entries, 1e-10 * params.sigma2_db)
                .ok_or(Error::NotPositiveDefinite)?,
        }
    };

    Ok(CovarianceMatrix { n, entries, chol })
}

/// Lower-triangular Cholesky factor of a symmetric matrix, or None if a
/// pivot is not strictly positive. `jitter` is added to the diagonal.
fn cholesky_lower(n: usize, a: &[f64], jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Draws one correlated shadowing vector L·z with z i.i.d. standard normal,
/// dB. The N_s normal draws are consumed in index order, which golden tests
/// rely on.
pub fn sample_shadowing(cov: &CovarianceMatrix, rng: &mut Prng) -> Vec<f64> {
    let n = cov.n;
    let z: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..=i {
            s += cov.chol[i * n + k] * z[k];
        }
        out[i] = s;
    }
    out
}

/// One full RSS observation: mean path loss at every sensing unit plus one
/// correlated shadowing draw.
pub fn simulate_rss(
    scenario: &Scenario,
    params: &PlmParams,
    cov: &CovarianceMatrix,
    u: Point3,
    rng: &mut Prng,
) -> Result<Vec<f64>> {
    let mut rss = mean_rss_vector(scenario, params, u)?;
    let shadowing = sample_shadowing(cov, rng);
    for (r, s) in rss.iter_mut().zip(shadowing) {
        *r += s;
    }
    Ok(rss)
}

/// A window of complex baseband samples from one sensing unit.
/// Amplitudes are dimensionless with the usual 50-Ω reference convention;
/// the +30 term in [`rss_from_iq`] converts watts to milliwatts.
#[derive(Debug, Clone, PartialEq)]
pub struct IqRecord {
    samples: Vec<Complex64>,
}

impl IqRecord {
    pub fn new(samples: Vec<Complex64>) -> Result<IqRecord> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("IQ record must not be empty".into()));
        }
        Ok(IqRecord { samples })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Reads a record from disk. `.csv` selects text parsing (columns
    /// `i,q`, optional header); any other extension selects binary
    /// little-endian interleaved float32 (I, Q) pairs.
    pub fn load(path: impl AsRef<Path>) -> Result<IqRecord> {
        let path = path.as_ref();
        let is_csv = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("csv"))
            .unwrap_or(false);
        if is_csv {
            Self::load_csv(path)
        } else {
            Self::load_binary(path)
        }
    }

    fn load_csv(path: &Path) -> Result<IqRecord> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut samples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (i_str, q_str) = match (fields.next(), fields.next(), fields.next()) {
                (Some(i), Some(q), None) => (i, q),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        reason: "expected exactly two columns: i,q".into(),
                    })
                }
            };
            // The header row is optional; only the first line may be one.
            if idx == 0 && i_str.parse::<f64>().is_err() {
                continue;
            }
            let parse = |s: &str, name| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: format!("invalid {name} value {s:?}"),
                })
            };
            samples.push(Complex64::new(parse(i_str, "i")?, parse(q_str, "q")?));
        }
        IqRecord::new(samples).map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: "no samples found".into(),
        })
    }

    fn load_binary(path: &Path) -> Result<IqRecord> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.is_empty() || bytes.len() % 8 != 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                reason: format!(
                    "binary IQ file length {} is not a positive multiple of 8 \
                     (interleaved float32 I,Q pairs)",
                    bytes.len()
                ),
            });
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| {
                let i = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
                let q = f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64;
                Complex64::new(i, q)
            })
            .collect();
        IqRecord::new(samples)
    }

    /// Writes the record in the format implied by the extension (see
    /// [`IqRecord::load`]). Binary storage is float32, so sub-float32
    /// precision is not preserved.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let is_csv = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("csv"))
            .unwrap_or(false);
        if is_csv {
            let mut text = String::from("i,q\n");
            for s in &self.samples {
                text.push_str(&format!("{},{}\n", s.re, s.im));
            }
            fs::write(path, text).map_err(|e| Error::io(path, e))
        } else {
            let mut bytes = Vec::with_capacity(self.samples.len() * 8);
            for s in &self.samples {
                bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
                bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
            }
            fs::write(path, bytes).map_err(|e| Error::io(path, e))
        }
    }
}

/// Average power of an IQ window expressed in dBm:
/// `10·log10((1/N_y)·Σ|y[n]|²) + 30`.
///
/// An all-zero record has no finite power and is rejected.
pub fn rss_from_iq(record: &IqRecord) -> Result<f64> {
    let mean_power: f64 = record
        .samples
        .iter()
        .map(|s| s.norm_sqr())
        .sum::<f64>()
        / record.samples.len() as f64;
    if mean_power <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * mean_power.log10() + 30.0)
}
