//! Runs a full pipeline preset (generate, split, fit, train, evaluate all
//! three estimators) and lists the artifacts it writes. The `smoke` preset
//! finishes in seconds; swap in `Preset::PaperSynthetic` for the
//! full-scale corridor run (several minutes).

use rssloc::{run_preset, Preset};

fn main() -> rssloc::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let out = run_preset(Preset::Smoke, 1, dir.path())?;

    let s = &out.summary;
    println!("preset {} (seed {})", s.preset, s.seed);
    println!("{} samples -> {} train / {} test", s.n_samples, s.n_train, s.n_test);
    println!(
        "pooled channel fit: p0_hat = {:.3} dBm, beta_hat = {:.3}, sigma2_hat = {:.3} dB^2",
        s.fitted_p0, s.fitted_beta, s.fitted_sigma2
    );
    println!("mean localization error:");
    println!("  proximity {:6.3} m", s.mean_error_proximity_m);
    println!("  mle       {:6.3} m", s.mean_error_mle_m);
    println!("  dnn       {:6.3} m", s.mean_error_dnn_m);

    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .expect("list dir")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    println!("artifacts: {}", names.join(", "));
    Ok(())
}
