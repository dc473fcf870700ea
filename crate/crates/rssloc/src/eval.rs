//! Evaluation harness: runs an estimator over a labeled test set and
//! reports per-sample localization errors, summary statistics, and the
//! empirical error CDF.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::distance;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{
    dnn_estimate, mle_estimate, proximity_estimate, EstimateRequest, MleConfig,
};
use crate::mlp::MlpModel;
use crate::scenario::{Point3, Scenario};

/// Localization error: Euclidean distance between truth and estimate,
/// meters. The full 3D form; estimators that fix z at the transmitter
/// height produce values that coincide with the planar error, while
/// proximity inherits the sensor-height offset.
pub fn localization_error(truth: Point3, estimate: Point3) -> f64 {
    distance(truth, estimate)
}

/// In-plane (x, y) localization error, for sensitivity analysis.
pub fn localization_error_planar(truth: Point3, estimate: Point3) -> f64 {
    ((truth.x - estimate.x).powi(2) + (truth.y - estimate.y).powi(2)).sqrt()
}

/// The estimator under evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Estimator<'a> {
    Proximity,
    Mle(&'a MleConfig),
    Dnn(&'a MlpModel),
}

impl Estimator<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Proximity => "proximity",
            Estimator::Mle(_) => "mle",
            Estimator::Dnn(_) => "dnn",
        }
    }
}

/// One point of the empirical CDF: probability of an error at or below
/// `error_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub error_m: f64,
    pub probability: f64,
}

/// Evaluation results for one estimator over one test set.
///
/// `errors` keeps input order, one entry per test sample; a sample the
/// estimator failed on is recorded as +∞ (serialized as null) and counted
/// in `n_failures`. Statistics and CDF points cover the finite errors, so
/// with failures present the CDF tops out at `1 − n_failures/n` instead of
/// 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub estimator: String,
    #[serde(with = "infinity_as_null")]
    pub errors: Vec<f64>,
    pub n_samples: usize,
    pub n_failures: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub cdf: Vec<CdfPoint>,
}

/// JSON has no ∞ literal; failed-sample errors round-trip as null.
mod infinity_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mapped: Vec<Option<f64>> =
            v.iter().map(|&e| e.is_finite().then_some(e)).collect();
        mapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<f64>, D::Error> {
        let mapped = Vec::<Option<f64>>::deserialize(d)?;
        Ok(mapped.into_iter().map(|e| e.unwrap_or(f64::INFINITY)).collect())
    }
}

impl EvalReport {
    /// Builds a report from raw per-sample errors (in input order; +∞
    /// marks a failed sample). Fails if no sample produced a finite error.
    pub fn from_errors(estimator: &str, errors: Vec<f64>) -> Result<EvalReport> {
        if errors.is_empty() {
            return Err(Error::InvalidArgument("no errors to report".into()));
        }
        let n = errors.len();
        let mut finite: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
        let n_failures = n - finite.len();
        if finite.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "the estimator failed on all {n} samples"
            )));
        }
        finite.sort_by(f64::total_cmp);

        let nf = finite.len() as f64;
        let mean = finite.iter().sum::<f64>() / nf;
        let std = if finite.len() < 2 {
            0.0
        } else {
            (finite.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (nf - 1.0)).sqrt()
        };
        let cdf = finite
            .iter()
            .enumerate()
            .map(|(k, &e)| CdfPoint {
                error_m: e,
                probability: (k + 1) as f64 / n as f64,
            })
            .collect();
        Ok(EvalReport {
            estimator: estimator.to_string(),
            n_samples: n,
            n_failures,
            mean,
            std,
            min: finite[0],
            max: *finite.last().unwrap(),
            cdf,
            errors,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EvalReport> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Writes the CDF as a two-column CSV (`error_m,probability`) for
    /// external plotting.
    pub fn save_cdf_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("error_m,probability\n");
        for p in &self.cdf {
            out.push_str(&format!("{},{}\n", p.error_m, p.probability));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Runs the estimator over every test sample and assembles the report.
///
/// `planar` switches the error metric from 3D to in-plane (x, y). A
/// failure on an individual sample is recorded as +∞ and counted; invalid
/// configuration (grid, model, or dimension problems) fails the whole
/// evaluation instead.
pub fn evaluate(
    estimator: Estimator,
    scenario: &Scenario,
    test: &Dataset,
    planar: bool,
) -> Result<EvalReport> {
    if test.n_sensors() != scenario.n_sensing_units() {
        return Err(Error::DimensionMismatch(format!(
            "test set has {} RSS columns but the scenario has {} sensing units",
            test.n_sensors(),
            scenario.n_sensing_units()
        )));
    }
    // Configuration problems are hard errors, checked before the sweep so
    // they are not misreported as thousands of per-sample failures.
    match estimator {
        Estimator::Mle(config) => {
            let probe = EstimateRequest::new(scenario, &test.samples()[0].rss)?;
            mle_estimate(&probe, config)?;
        }
        Estimator::Dnn(model) => {
            if model.arch().input_dim != scenario.n_sensing_units()
                || model.arch().output_dim != 2
            {
                return Err(Error::DimensionMismatch(format!(
                    "model maps {} -> {} but the scenario needs {} -> 2",
                    model.arch().input_dim,
                    model.arch().output_dim,
                    scenario.n_sensing_units()
                )));
            }
        }
        Estimator::Proximity => {}
    }

    let error_fn = if planar { localization_error_planar } else { localization_error };
    let errors: Vec<f64> = test
        .samples()
        .iter()
        .map(|sample| {
            let estimate = EstimateRequest::new(scenario, &sample.rss).and_then(|req| {
                match estimator {
                    Estimator::Proximity => Ok(proximity_estimate(&req)),
                    Estimator::Mle(config) => {
                        mle_estimate(&req, config).map(|e| e.position)
                    }
                    Estimator::Dnn(model) => dnn_estimate(&req, model),
                }
            });
            match estimate {
                Ok(est) => {
                    let e = error_fn(sample.position, est);
                    if e.is_finite() {
                        e
                    } else {
                        f64::INFINITY
                    }
                }
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    EvalReport::from_errors(estimator.name(), errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{NormStats, Sample};
    use crate::mlp::{init_xavier, MlpArch};
    use crate::scenario::make_corridor_scenario;
    use approx::assert_abs_diff_eq;

    fn corridor() -> Scenario {
        make_corridor_scenario(6, 86.3, 2.8, 2.5, 0.5).unwrap()
    }

    /// A model that always outputs (0, 0).
    fn zero_model(inputs: usize) -> MlpModel {
        let arch = MlpArch {
            input_dim: inputs,
            hidden_layers: 0,
            hidden_units: 1,
            output_dim: 2,
            elu_alpha: 1.0,
        };
        let mut model = init_xavier(&arch, &mut crate::rng::from_seed(0)).unwrap();
        for w in &mut model.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        model
    }

    #[test]
    fn error_metric_reference_values() {
        let a = Point3::new(1.0, 2.0, 3.0);
        assert_eq!(localization_error(a, a), 0.0);
        assert_eq!(
            localization_error(Point3::new(0.0, 0.0, 0.0), Point3::new(3.0, 4.0, 0.0)),
            5.0
        );
        // Same (x, y), sensor height vs transmitter height.
        let truth = Point3::new(10.0, 1.0, 0.5);
        let est = Point3::new(10.0, 1.0, 2.5);
        assert_abs_diff_eq!(localization_error(truth, est), 2.0, epsilon = 1e-15);
        assert_eq!(localization_error_planar(truth, est), 0.0);
    }

    #[test]
    fn perfect_estimator_reports_all_zeros() {
        let s = corridor();
        let samples: Vec<Sample> = (0..3)
            .map(|k| Sample {
                position: Point3::new(0.0, 0.0, 0.5),
                rss: vec![-40.0 - k as f64; 6],
                round_id: 0,
            })
            .collect();
        let test = Dataset::new(6, samples).unwrap();
        let model = zero_model(6);
        let report = evaluate(Estimator::Dnn(&model), &s, &test, false).unwrap();
        assert_eq!(report.estimator, "dnn");
        assert_eq!(report.errors, vec![0.0; 3]);
        assert_eq!(
            (report.mean, report.std, report.min, report.max),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(report.n_failures, 0);
    }

    #[test]
    fn hand_computed_statistics_and_cdf() {
        let s = corridor();
        // The zero model estimates (0, 0, 0.5); place truths 1, 2, 3 m out.
        let samples: Vec<Sample> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&d| Sample {
                position: Point3::new(d, 0.0, 0.5),
                rss: vec![-50.0; 6],
                round_id: 0,
            })
            .collect();
        let test = Dataset::new(6, samples).unwrap();
        let model = zero_model(6);
        let report = evaluate(Estimator::Dnn(&model), &s, &test, false).unwrap();
        assert_abs_diff_eq!(report.mean, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.std, 1.0, epsilon = 1e-12);
        assert_eq!(report.min, 1.0);
        assert_eq!(report.max, 3.0);
        let expected = [(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)];
        for (point, (e, p)) in report.cdf.iter().zip(expected) {
            assert_abs_diff_eq!(point.error_m, e, epsilon = 1e-15);
            assert_abs_diff_eq!(point.probability, p, epsilon = 1e-15);
        }
    }

    #[test]
    fn statistics_are_recomputable_from_errors() {
        let s = corridor();
        let samples: Vec<Sample> = (0..40)
            .map(|k| Sample {
                position: Point3::new(1.0 + 2.0 * k as f64, 1.4, 0.5),
                rss: (0..6).map(|j| -40.0 - (j + k) as f64).collect(),
                round_id: 0,
            })
            .collect();
        let test = Dataset::new(6, samples).unwrap();
        let report = evaluate(Estimator::Proximity, &s, &test, false).unwrap();

        let n = report.errors.len() as f64;
        let mean = report.errors.iter().sum::<f64>() / n;
        let var = report.errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (n - 1.0);
        assert!((report.mean - mean).abs() < 1e-12);
        assert!((report.std - var.sqrt()).abs() < 1e-12);
        for pair in report.cdf.windows(2) {
            assert!(pair[1].error_m >= pair[0].error_m);
            assert!(pair[1].probability > pair[0].probability);
        }
        assert_eq!(report.cdf.last().unwrap().probability, 1.0);
    }

    #[test]
    fn failed_samples_are_counted_not_dropped() {
        // A huge weight overflows the forward pass for large inputs only,
        // so some samples fail and some succeed.
        let s = make_corridor_scenario(1, 10.0, 2.0, 2.5, 0.5).unwrap();
        let mut model = zero_model(1);
        model.weights[0] = vec![1e300, 0.0];
        model.norm = NormStats { mean: vec![0.0], std: vec![1.0] };
        let samples = vec![
            Sample { position: Point3::new(0.0, 0.0, 0.5), rss: vec![0.0], round_id: 0 },
            Sample { position: Point3::new(1.0, 0.0, 0.5), rss: vec![1e10], round_id: 0 },
            Sample { position: Point3::new(2.0, 0.0, 0.5), rss: vec![0.0], round_id: 0 },
        ];
        let test = Dataset::new(1, samples).unwrap();
        let report = evaluate(Estimator::Dnn(&model), &s, &test, false).unwrap();
        assert_eq!(report.n_samples, 3);
        assert_eq!(report.n_failures, 1);
        assert!(report.errors[1].is_infinite());
        assert_eq!(report.cdf.len(), 2);
        // One third of the mass sits at infinity, so the finite CDF tops
        // out below 1.
        assert_abs_diff_eq!(
            report.cdf.last().unwrap().probability,
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(report.mean, 1.0); // finite errors are 0 and 2
    }

    #[test]
    fn all_failures_is_a_hard_error() {
        assert!(EvalReport::from_errors("dnn", vec![f64::INFINITY; 3]).is_err());
        assert!(EvalReport::from_errors("dnn", vec![]).is_err());
    }

    #[test]
    fn report_json_round_trips_with_failures() {
        let report =
            EvalReport::from_errors("mle", vec![1.5, f64::INFINITY, 0.25, 3.75]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        report.save(&path).unwrap();
        let loaded = EvalReport::load(&path).unwrap();
        assert_eq!(report, loaded);

        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("null"), "failures serialize as null");
    }

    #[test]
    fn cdf_csv_layout() {
        let report = EvalReport::from_errors("proximity", vec![2.0, 1.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cdf.csv");
        report.save_cdf_csv(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "error_m,probability\n1,0.5\n2,1\n");
    }

    #[test]
    fn evaluate_rejects_mismatched_inputs() {
        let s = corridor();
        let samples = vec![Sample {
            position: Point3::new(1.0, 1.0, 0.5),
            rss: vec![-50.0; 4],
            round_id: 0,
        }];
        let test = Dataset::new(4, samples).unwrap();
        assert!(evaluate(Estimator::Proximity, &s, &test, false).is_err());
    }
}
