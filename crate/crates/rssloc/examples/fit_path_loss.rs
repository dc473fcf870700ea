//! Calibrates the path-loss model from labeled data by least squares:
//! pooled over all sensing units, then per unit for comparison.

use rssloc::{
    fit_ls, generate_synthetic, make_corridor_scenario, make_track, pool_fit_input, rng,
    PlmParams, SuSelection,
};

fn main() -> rssloc::Result<()> {
    let scenario = make_corridor_scenario(6, 86.3, 2.8, 2.5, 0.5)?;
    let truth = PlmParams { p0: -30.0, beta: 1.82, sigma2_db: 11.83, d_cor: 1.0 };
    let track = make_track(&scenario, 9.0, 79.32, 0.12, &[0.8, 1.2, 1.4, 1.8])?;
    let data = generate_synthetic(&scenario, &truth, &track, &mut rng::from_seed(3))?;

    println!(
        "truth: p0 = {} dBm, beta = {}, sigma2 = {} dB^2",
        truth.p0, truth.beta, truth.sigma2_db
    );

    let pooled = fit_ls(&pool_fit_input(&data, &scenario, SuSelection::All)?)?;
    println!(
        "pooled fit over {} rows: p0_hat = {:.3}, beta_hat = {:.3}, sigma2_hat = {:.3}",
        pooled.residuals.len(),
        pooled.p0_hat,
        pooled.beta_hat,
        pooled.sigma2_hat
    );

    for j in 0..scenario.n_sensing_units() {
        let fit = fit_ls(&pool_fit_input(&data, &scenario, SuSelection::One(j))?)?;
        println!(
            "  SU{j} alone: p0_hat = {:.3}, beta_hat = {:.3}, sigma2_hat = {:.3}",
            fit.p0_hat, fit.beta_hat, fit.sigma2_hat
        );
    }
    Ok(())
}
