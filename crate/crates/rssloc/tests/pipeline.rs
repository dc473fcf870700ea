//! Library-level end-to-end checks: each stage's output feeds the next and
//! the noiseless limits behave exactly.

use rssloc::{
    dnn_estimate, fit_ls, generate_synthetic, make_corridor_scenario, make_track,
    mle_estimate, pool_fit_input, rng, split, train, EstimateRequest, GridSpec, MleConfig,
    MlpArch, PlmParams, SplitSpec, SuSelection, TrainConfig,
};

fn noiseless_params() -> PlmParams {
    PlmParams { p0: -30.0, beta: 1.82, sigma2_db: 0.0, d_cor: 1.0 }
}

#[test]
fn noiseless_generation_fits_back_exactly() {
    let scenario = make_corridor_scenario(3, 20.0, 2.8, 2.5, 0.5).unwrap();
    let params = noiseless_params();
    let track = make_track(&scenario, 2.0, 18.0, 0.25, &[0.9, 1.9]).unwrap();
    let data = generate_synthetic(&scenario, &params, &track, &mut rng::from_seed(8)).unwrap();

    let fit = fit_ls(&pool_fit_input(&data, &scenario, SuSelection::All).unwrap()).unwrap();
    assert!((fit.p0_hat - params.p0).abs() < 1e-9, "p0_hat {}", fit.p0_hat);
    assert!((fit.beta_hat - params.beta).abs() < 1e-9, "beta_hat {}", fit.beta_hat);
    assert!(fit.sigma2_hat < 1e-18, "sigma2_hat {}", fit.sigma2_hat);
}

#[test]
fn noiseless_data_is_learnable_to_sub_meter_accuracy() {
    let scenario = make_corridor_scenario(3, 20.0, 2.8, 2.5, 0.5).unwrap();
    let params = noiseless_params();
    let track = make_track(&scenario, 1.0, 19.0, 0.1, &[0.9, 1.5]).unwrap();
    let data = generate_synthetic(&scenario, &params, &track, &mut rng::from_seed(2)).unwrap();
    let (train_set, test_set) =
        split(&data, &SplitSpec { train_fraction: 0.8, shuffle_seed: 3 }).unwrap();

    let arch = MlpArch {
        input_dim: 3,
        hidden_layers: 1,
        hidden_units: 32,
        output_dim: 2,
        elu_alpha: 1.0,
    };
    let config = TrainConfig {
        batch_size: 20,
        max_epochs: 250,
        patience: 60,
        learning_rate: 2e-3,
        seed: 4,
        ..TrainConfig::default()
    };
    let (model, _) = train(&train_set, &arch, &config).unwrap();

    let mean_error = test_set
        .samples()
        .iter()
        .map(|s| {
            let req = EstimateRequest::new(&scenario, &s.rss).unwrap();
            let est = dnn_estimate(&req, &model).unwrap();
            ((est.x - s.position.x).powi(2) + (est.y - s.position.y).powi(2)).sqrt()
        })
        .sum::<f64>()
        / test_set.len() as f64;
    assert!(mean_error < 0.5, "mean in-plane error {mean_error} m on noiseless data");
}

#[test]
fn mle_on_noiseless_measurements_stays_within_one_cell() {
    // Measurements are exact model means; the whitening covariance uses the
    // nominal noise level, which only scales the objective.
    let scenario = make_corridor_scenario(3, 20.0, 2.8, 2.5, 0.5).unwrap();
    let clean = noiseless_params();
    let whitening = PlmParams { sigma2_db: 11.83, ..clean };
    let track = make_track(&scenario, 2.0, 18.0, 1.0, &[1.1]).unwrap();
    let data = generate_synthetic(&scenario, &clean, &track, &mut rng::from_seed(5)).unwrap();

    let config = MleConfig {
        grid: GridSpec { step: 0.1, ..GridSpec::for_scenario(&scenario) },
        params: whitening,
        z: 0.5,
    };
    for sample in data.samples() {
        let req = EstimateRequest::new(&scenario, &sample.rss).unwrap();
        let est = mle_estimate(&req, &config).unwrap();
        let error = rssloc::localization_error(sample.position, est.position);
        assert!(
            error <= 0.1 * std::f64::consts::SQRT_2 + 1e-9,
            "error {error} m at x = {}",
            sample.position.x
        );
    }
}
