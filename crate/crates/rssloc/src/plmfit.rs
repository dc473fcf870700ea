//! Least-squares estimation of path-loss parameters from labeled RSS data.
//!
//! The model `y_i = P0 - 10*beta*log10(d_i/d0)` is linear in (P0, beta)
//! with regressor `g_i = -10*log10(d_i/d0)`, so the fit reduces to simple
//! linear regression solved in closed form from the centered normal
//! equations.

use serde::{Deserialize, Serialize};

use crate::channel::distance;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Labeled (distance, RSS) pairs to fit against.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInput {
    distances: Vec<f64>,
    rss: Vec<f64>,
    d0: f64,
}

impl FitInput {
    pub fn new(distances: Vec<f64>, rss: Vec<f64>, d0: f64) -> Result<FitInput> {
        if distances.len() != rss.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} distances but {} RSS values",
                distances.len(),
                rss.len()
            )));
        }
        if distances.len() < 2 {
            return Err(Error::InvalidArgument(
                "at least two measurements are required".into(),
            ));
        }
        if !(d0 > 0.0) || !d0.is_finite() {
            return Err(Error::InvalidArgument(format!("d0 must be > 0, got {d0}")));
        }
        for (i, &d) in distances.iter().enumerate() {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "distance {i} must be > 0 and finite, got {d}"
                )));
            }
        }
        for (i, &r) in rss.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "RSS value {i} must be finite, got {r}"
                )));
            }
        }
        Ok(FitInput { distances, rss, d0 })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn rss(&self) -> &[f64] {
        &self.rss
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }
}

/// Fitted parameters with per-measurement residuals for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub p0_hat: f64,
    pub beta_hat: f64,
    /// Residual variance with the L−1 divisor. That divisor is the fixed
    /// convention of this API even though two parameters are fitted.
    pub sigma2_hat: f64,
    pub residuals: Vec<f64>,
}

/// Fits (P0, beta) by least squares and estimates the shadowing variance
/// from the residuals.
///
/// Fails when every distance is identical: the design matrix has rank 1
/// and the slope is unidentifiable.
pub fn fit_ls(input: &FitInput) -> Result<FitResult> {
    let l = input.len();
    let g: Vec<f64> = input
        .distances
        .iter()
        .map(|&d| -10.0 * (d / input.d0).log10())
        .collect();

    let g_mean = g.iter().sum::<f64>() / l as f64;
    let y_mean = input.rss.iter().sum::<f64>() / l as f64;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..l {
        let dg = g[i] - g_mean;
        sxx += dg * dg;
        sxy += dg * (input.rss[i] - y_mean);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(
            "all distances are equal; the path-loss exponent is unidentifiable".into(),
        ));
    }

    let beta_hat = sxy / sxx;
    let p0_hat = y_mean - beta_hat * g_mean;
    if !beta_hat.is_finite() || !p0_hat.is_finite() {
        return Err(Error::DegenerateFit(
            "normal equations produced non-finite parameters".into(),
        ));
    }

    let residuals: Vec<f64> = (0..l)
        .map(|i| input.rss[i] - (p0_hat + beta_hat * g[i]))
        .collect();
    let sigma2_hat = residuals.iter().map(|r| r * r).sum::<f64>() / (l - 1) as f64;

    Ok(FitResult { p0_hat, beta_hat, sigma2_hat, residuals })
}

/// Which sensing units contribute rows to a pooled fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuSelection {
    /// Pool every (sample, sensing unit) pair; the default, giving one
    /// global (beta, sigma2).
    All,
    /// Rows from a single sensing unit, for per-unit diagnostics.
    One(usize),
}

/// Flattens a dataset into (distance, RSS) rows for [`fit_ls`], either for
/// one sensing unit or pooled over all of them.
pub fn pool_fit_input(
    dataset: &Dataset,
    scenario: &Scenario,
    selection: SuSelection,
) -> Result<FitInput> {
    let n_su = scenario.n_sensing_units();
    if dataset.n_sensors() != n_su {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} RSS columns but the scenario has {} sensing units",
            dataset.n_sensors(),
            n_su
        )));
    }
    let selected: Vec<usize> = match selection {
        SuSelection::All => (0..n_su).collect(),
        SuSelection::One(j) if j < n_su => vec![j],
        SuSelection::One(j) => {
            return Err(Error::InvalidArgument(format!(
                "sensing unit index {j} out of range (N_s = {n_su})"
            )))
        }
    };

    let mut distances = Vec::with_capacity(dataset.len() * selected.len());
    let mut rss = Vec::with_capacity(dataset.len() * selected.len());
    for sample in dataset.samples() {
        for &j in &selected {
            distances.push(distance(sample.position, scenario.sensing_units[j]));
            rss.push(sample.rss[j]);
        }
    }
    FitInput::new(distances, rss, scenario.d0)
}
