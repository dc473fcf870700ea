//! Builds the corridor deployment: sensing units along alternating walls,
//! evenly spaced, with the first and last placed by the scaled margin rule.

use rssloc::{make_corridor_scenario, make_track, Result};

fn main() -> Result<()> {
    let scenario = make_corridor_scenario(6, 86.3, 2.8, 2.5, 0.5)?;

    println!(
        "corridor {} m x {} m, reference distance d0 = {} m",
        scenario.area_max.x, scenario.area_max.y, scenario.d0
    );
    println!("{} sensing units:", scenario.n_sensing_units());
    for (j, su) in scenario.sensing_units.iter().enumerate() {
        println!("  SU{j}: x = {:6.2} m, y = {:.1} m, z = {:.1} m", su.x, su.y, su.z);
    }

    // A transmitter track: two lanes, out and back along the corridor.
    let track = make_track(&scenario, 9.0, 79.0, 0.5, &[0.8, 1.8])?;
    println!(
        "track: {} points over {} lanes at height {} m",
        track.len(),
        2,
        scenario.tx_height
    );
    let (first_round, first) = track.iter().next().unwrap();
    println!("first point: round {first_round}, ({}, {}, {})", first.x, first.y, first.z);

    // Scenarios round-trip through JSON for use with the CLI.
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("scenario.json");
    scenario.save(&path)?;
    let loaded = rssloc::Scenario::load(&path)?;
    assert_eq!(loaded, scenario);
    println!("saved and reloaded {}", path.display());
    Ok(())
}
