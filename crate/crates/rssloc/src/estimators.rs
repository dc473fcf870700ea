//! Position estimators over one RSS measurement vector: proximity (the
//! sensing unit that hears the transmitter loudest), grid-search maximum
//! likelihood, and a trained network.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{build_covariance, distance, CovarianceMatrix, PlmParams, MIN_DISTANCE_M};
use crate::dataset::apply_norm;
use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::scenario::{Point3, Scenario};

/// One localization query: a measured RSS vector against a scenario.
#[derive(Debug, Clone, Copy)]
pub struct EstimateRequest<'a> {
    scenario: &'a Scenario,
    rss: &'a [f64],
}

impl<'a> EstimateRequest<'a> {
    pub fn new(scenario: &'a Scenario, rss: &'a [f64]) -> Result<EstimateRequest<'a>> {
        if rss.len() != scenario.n_sensing_units() {
            return Err(Error::DimensionMismatch(format!(
                "measurement has {} entries but the scenario has {} sensing units",
                rss.len(),
                scenario.n_sensing_units()
            )));
        }
        if rss.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument(
                "measurement contains non-finite RSS values".into(),
            ));
        }
        Ok(EstimateRequest { scenario, rss })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn rss(&self) -> &[f64] {
        self.rss
    }
}

/// Returns the coordinates of the sensing unit with the highest RSS; ties
/// go to the lowest unit index.
pub fn proximity_estimate(req: &EstimateRequest) -> Point3 {
    let mut best = 0;
    for (j, &r) in req.rss.iter().enumerate() {
        if r > req.rss[best] {
            best = j;
        }
    }
    req.scenario.sensing_units[best]
}

/// An inclusive scalar search range sampled every `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ParamRange {
    fn validate(&self, name: &str) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{name} range step must be > 0, got {}",
                self.step
            )));
        }
        if !(self.max >= self.min) || !self.min.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{name} range [{}, {}] is empty",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn values(&self) -> Vec<f64> {
        grid_axis(self.min, self.max, self.step)
    }
}

/// Search grid for the maximum-likelihood estimator. Position bounds
/// default to the scenario area; the parameter ranges are None when P0 and
/// beta are treated as known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// In-plane grid step, meters.
    pub step: f64,
    /// Search range for P0; None fixes it to the configured value.
    pub p0_range: Option<ParamRange>,
    /// Search range for beta; None fixes it to the configured value.
    pub beta_range: Option<ParamRange>,
}

impl GridSpec {
    /// The default grid: the scenario bounding box at 0.1 m resolution
    /// with known (P0, beta).
    pub fn for_scenario(scenario: &Scenario) -> GridSpec {
        GridSpec {
            x_min: scenario.area_min.x,
            x_max: scenario.area_max.x,
            y_min: scenario.area_min.y,
            y_max: scenario.area_max.y,
            step: 0.1,
            p0_range: None,
            beta_range: None,
        }
    }

    /// Widens the default grid to also search P0 (0.5 dB steps around the
    /// given center) and beta (0.05 steps over [1.0, 3.0]).
    pub fn with_parameter_search(scenario: &Scenario, p0_center: f64) -> GridSpec {
        GridSpec {
            p0_range: Some(ParamRange {
                min: p0_center - 5.0,
                max: p0_center + 5.0,
                step: 0.5,
            }),
            beta_range: Some(ParamRange { min: 1.0, max: 3.0, step: 0.05 }),
            ..GridSpec::for_scenario(scenario)
        }
    }

    fn validate(&self, scenario: &Scenario) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid step must be > 0, got {}",
                self.step
            )));
        }
        if !(self.x_max >= self.x_min) || !(self.y_max >= self.y_min) {
            return Err(Error::InvalidArgument("grid bounds are empty".into()));
        }
        let (lo, hi) = (scenario.area_min, scenario.area_max);
        if self.x_min < lo.x || self.x_max > hi.x || self.y_min < lo.y || self.y_max > hi.y {
            return Err(Error::InvalidArgument(
                "grid bounds extend outside the scenario area".into(),
            ));
        }
        if let Some(r) = &self.p0_range {
            r.validate("p0")?;
        }
        if let Some(r) = &self.beta_range {
            r.validate("beta")?;
        }
        Ok(())
    }
}

/// Full maximum-likelihood configuration: the search grid, the path-loss
/// parameters (sigma2_db and d_cor shape the covariance; p0 and beta are
/// the known values when not searched), and the fixed candidate height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub grid: GridSpec,
    pub params: PlmParams,
    /// Candidate z coordinate, meters; the search is planar.
    pub z: f64,
}

impl MleConfig {
    /// Known-parameter search over the whole scenario at candidate height
    /// equal to the transmitter height.
    pub fn for_scenario(scenario: &Scenario, params: PlmParams) -> MleConfig {
        MleConfig {
            grid: GridSpec::for_scenario(scenario),
            params,
            z: scenario.tx_height,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MleConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Inclusive axis values `min, min+step, ...` clamped to `max`, with an
/// epsilon guard so an exact multiple of `step` is not lost to rounding.
fn grid_axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let k_max = ((max - min) / step + 1e-9).floor() as usize;
    (0..=k_max).map(|k| (min + k as f64 * step).min(max)).collect()
}

/// Whitened squared residual of a candidate (position, P0, beta) against
/// the measurement: `(m − f)ᵀ C⁻¹ (m − f)` computed through the Cholesky
/// factor of C. A candidate coincident with a sensing unit gets a +∞
/// sentinel so grid searches skip it.
pub fn mle_objective(
    scenario: &Scenario,
    cov: &CovarianceMatrix,
    candidate: Point3,
    p0: f64,
    beta: f64,
    measurement: &[f64],
) -> f64 {
    let n = scenario.n_sensing_units();
    let mut residual = Vec::with_capacity(n);
    for (j, &su) in scenario.sensing_units.iter().enumerate() {
        let d = distance(candidate, su);
        if d < MIN_DISTANCE_M {
            return f64::INFINITY;
        }
        let f_j = p0 - 10.0 * beta * (d / scenario.d0).log10();
        residual.push(measurement[j] - f_j);
    }
    cov.whitened_sq_norm(&residual)
}

/// Result of [`mle_estimate`]: the chosen grid node, the (P0, beta) in
/// effect there, and the objective value at the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub position: Point3,
    pub p0: f64,
    pub beta: f64,
    pub objective: f64,
}

/// Exhaustive minimization of [`mle_objective`] over the grid.
///
/// Candidates are enumerated row-major over (x, y, P0, beta) and compared
/// with strict less-than, so ties resolve to the smallest linear index.
/// That enumeration order is a determinism contract.
pub fn mle_estimate(req: &EstimateRequest, config: &MleConfig) -> Result<MleEstimate> {
    let scenario = req.scenario;
    config.grid.validate(scenario)?;
    config.params.validate()?;
    if !config.z.is_finite()
        || config.z < scenario.area_min.z
        || config.z > scenario.area_max.z
    {
        return Err(Error::InvalidArgument(format!(
            "candidate height {} lies outside the area z bounds",
            config.z
        )));
    }

    let cov = build_covariance(scenario, &config.params)?;
    let xs = grid_axis(config.grid.x_min, config.grid.x_max, config.grid.step);
    let ys = grid_axis(config.grid.y_min, config.grid.y_max, config.grid.step);
    let p0s = config
        .grid
        .p0_range
        .as_ref()
        .map_or_else(|| vec![config.params.p0], ParamRange::values);
    let betas = config
        .grid
        .beta_range
        .as_ref()
        .map_or_else(|| vec![config.params.beta], ParamRange::values);

    let n = scenario.n_sensing_units();
    let d0 = scenario.d0;
    let mut best: Option<MleEstimate> = None;
    // Distance terms depend only on the node, so they are computed once
    // per (x, y) and reused across the (P0, beta) sweep.
    let mut g = vec![0.0; n];
    let mut residual = vec![0.0; n];

    for &x in &xs {
        for &y in &ys {
            let candidate = Point3::new(x, y, config.z);
            let mut coincident = false;
            for (j, &su) in scenario.sensing_units.iter().enumerate() {
                let d = distance(candidate, su);
                if d < MIN_DISTANCE_M {
                    coincident = true;
                    break;
                }
                g[j] = 10.0 * (d / d0).log10();
            }
            for &p0 in &p0s {
                for &beta in &betas {
                    let objective = if coincident {
                        f64::INFINITY
                    } else {
                        for j in 0..n {
                            residual[j] = req.rss[j] - (p0 - beta * g[j]);
                        }
                        cov.whitened_sq_norm(&residual)
                    };
                    let better = match &best {
                        None => true,
                        Some(b) => objective < b.objective,
                    };
                    if better {
                        best = Some(MleEstimate { position: candidate, p0, beta, objective });
                    }
                }
            }
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("the search grid is empty".into()))
}

/// Applies the model's stored normalization, runs the forward pass, and
/// lifts the planar prediction to 3D at the scenario transmitter height.
pub fn dnn_estimate(req: &EstimateRequest, model: &MlpModel) -> Result<Point3> {
    let arch = model.arch();
    if arch.input_dim != req.rss.len() {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} inputs but the measurement has {}",
            arch.input_dim,
            req.rss.len()
        )));
    }
    if arch.output_dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "position models must have 2 outputs, this one has {}",
            arch.output_dim
        )));
    }
    let normalized = apply_norm(req.rss, model.norm_stats());
    let out = model.forward(&normalized)?;
    Ok(Point3::new(out[0], out[1], req.scenario.tx_height))
}
