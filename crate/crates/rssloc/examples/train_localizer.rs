//! Trains the neural localizer on synthetic data: RSS vectors in, (x, y)
//! coordinates out, with early stopping on a held-out validation slice.

use rssloc::{
    dnn_estimate, generate_synthetic, make_corridor_scenario, make_track, rng, split, train,
    EstimateRequest, MlpArch, PlmParams, SplitSpec, TrainConfig,
};

fn main() -> rssloc::Result<()> {
    let scenario = make_corridor_scenario(6, 40.0, 2.8, 2.5, 0.5)?;
    let params = PlmParams { p0: -30.0, beta: 1.82, sigma2_db: 11.83, d_cor: 1.0 };
    let track = make_track(&scenario, 2.0, 38.0, 0.1, &[0.8, 1.4, 2.0])?;
    let data = generate_synthetic(&scenario, &params, &track, &mut rng::from_seed(5))?;
    let (train_set, test_set) =
        split(&data, &SplitSpec { train_fraction: 0.75, shuffle_seed: 50 })?;

    let arch = MlpArch {
        input_dim: scenario.n_sensing_units(),
        hidden_layers: 2,
        hidden_units: 64,
        output_dim: 2,
        elu_alpha: 1.0,
    };
    let config = TrainConfig {
        batch_size: 40,
        max_epochs: 300,
        patience: 50,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    println!(
        "training {}x{} network on {} samples (batch {}, lr {})...",
        arch.hidden_layers, arch.hidden_units, train_set.len(), config.batch_size,
        config.learning_rate
    );

    let (model, log) = train(&train_set, &arch, &config)?;
    for epoch in (0..log.epochs_run).step_by(50) {
        println!(
            "  epoch {epoch:3}: train loss {:9.3}, val loss {:9.3}",
            log.train_loss[epoch], log.val_loss[epoch]
        );
    }
    println!(
        "stopped after {} epochs; best validation loss {:.3} at epoch {}",
        log.epochs_run,
        log.best_val_loss.unwrap(),
        log.best_epoch.unwrap()
    );

    // Mean test error of the returned (best-snapshot) model.
    let mut total = 0.0;
    for sample in test_set.samples() {
        let req = EstimateRequest::new(&scenario, &sample.rss)?;
        let estimate = dnn_estimate(&req, &model)?;
        total += rssloc::localization_error(sample.position, estimate);
    }
    println!(
        "mean localization error on {} held-out samples: {:.2} m",
        test_set.len(),
        total / test_set.len() as f64
    );
    Ok(())
}
