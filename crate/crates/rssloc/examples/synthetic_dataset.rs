//! Generates a labeled RSS dataset along a transmitter track and writes it
//! as CSV, the format every other pipeline stage consumes.

use rssloc::{generate_synthetic, make_corridor_scenario, make_track, rng, PlmParams};

fn main() -> rssloc::Result<()> {
    let scenario = make_corridor_scenario(6, 86.3, 2.8, 2.5, 0.5)?;
    let params = PlmParams { p0: -30.0, beta: 1.82, sigma2_db: 11.83, d_cor: 1.0 };
    let track = make_track(&scenario, 9.0, 79.32, 0.12, &[0.8, 1.2, 1.4, 1.8])?;

    let data = generate_synthetic(&scenario, &params, &track, &mut rng::from_seed(42))?;
    println!(
        "{} samples x {} sensing units ({} rounds)",
        data.len(),
        data.n_sensors(),
        data.samples().last().unwrap().round_id + 1
    );

    for sample in data.samples().iter().step_by(data.len() / 4) {
        let rss: Vec<String> =
            sample.rss.iter().map(|r| format!("{r:7.2}")).collect();
        println!(
            "  round {} at ({:6.2}, {:.2}): rss = [{}] dBm",
            sample.round_id,
            sample.position.x,
            sample.position.y,
            rss.join(", ")
        );
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("data.csv");
    data.save_csv(&path)?;
    let reloaded = rssloc::Dataset::load_csv(&path, Some(6))?;
    assert_eq!(reloaded.len(), data.len());
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path).unwrap().len());
    Ok(())
}
