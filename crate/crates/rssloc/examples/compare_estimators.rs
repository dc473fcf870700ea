//! Runs all three estimators over one held-out test set and compares
//! their error statistics and CDFs.

use rssloc::{
    evaluate, generate_synthetic, make_corridor_scenario, make_track, rng, split, train,
    Estimator, MleConfig, MlpArch, PlmParams, SplitSpec, TrainConfig,
};

fn main() -> rssloc::Result<()> {
    let scenario = make_corridor_scenario(3, 20.0, 2.8, 2.5, 0.5)?;
    let params = PlmParams { p0: -30.0, beta: 1.82, sigma2_db: 11.83, d_cor: 1.0 };
    let track = make_track(&scenario, 2.0, 18.0, 0.25, &[0.9, 1.9])?;
    let data = generate_synthetic(&scenario, &params, &track, &mut rng::from_seed(11))?;
    let (train_set, test_set) =
        split(&data, &SplitSpec { train_fraction: 0.75, shuffle_seed: 12 })?;

    let arch = MlpArch {
        input_dim: 3,
        hidden_layers: 1,
        hidden_units: 32,
        output_dim: 2,
        elu_alpha: 1.0,
    };
    let config = TrainConfig {
        batch_size: 20,
        max_epochs: 150,
        patience: 40,
        learning_rate: 2e-3,
        seed: 13,
        ..TrainConfig::default()
    };
    let (model, _) = train(&train_set, &arch, &config)?;

    // The grid-search MLE gets the true channel parameters here; fit them
    // with fit_ls first when they are unknown.
    let mut mle_config = MleConfig::for_scenario(&scenario, params);
    mle_config.grid.step = 0.25;

    println!(
        "{} test samples, corridor {} m x {} m, {} sensing units",
        test_set.len(),
        scenario.area_max.x,
        scenario.area_max.y,
        scenario.n_sensing_units()
    );
    println!("estimator   mean     std     min     max   p(err <= 2 m)");
    for estimator in [
        Estimator::Proximity,
        Estimator::Mle(&mle_config),
        Estimator::Dnn(&model),
    ] {
        let report = evaluate(estimator, &scenario, &test_set, false)?;
        let below_2m = report
            .cdf
            .iter()
            .take_while(|p| p.error_m <= 2.0)
            .last()
            .map_or(0.0, |p| p.probability);
        println!(
            "{:<10} {:6.3}  {:6.3}  {:6.3}  {:6.3}   {:.2}",
            report.estimator, report.mean, report.std, report.min, report.max, below_2m
        );
    }
    Ok(())
}
