//! Computes RSS from raw IQ capture files: mean sample power converted to
//! dBm. Covers both the binary interleaved-f32 format and the CSV form.

use num_complex::Complex64;
use rssloc::{rss_from_iq, IqRecord};

fn main() -> rssloc::Result<()> {
    // A constant-envelope capture: every sample has unit magnitude, so the
    // mean power is 1 mW and the RSS is exactly 30 dBm.
    let n = 4096;
    let samples: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 64.0))
        .collect();
    let record = IqRecord::new(samples)?;
    println!("constant envelope, {n} samples: rss = {} dBm", rss_from_iq(&record)?);

    // Attenuating the capture by x10 in amplitude drops the RSS by 20 dB.
    let faded = IqRecord::new(record.samples().iter().map(|s| s * 0.1).collect())?;
    println!("after 20 dB attenuation:       rss = {} dBm", rss_from_iq(&faded)?);

    let dir = tempfile::tempdir().expect("temp dir");

    // Binary round trip: interleaved little-endian f32 (i, q) pairs.
    let bin_path = dir.path().join("capture.iq");
    record.save(&bin_path)?;
    let loaded = IqRecord::load(&bin_path)?;
    println!(
        "binary file {} ({} bytes): rss = {:.6} dBm",
        bin_path.display(),
        std::fs::metadata(&bin_path).unwrap().len(),
        rss_from_iq(&loaded)?
    );

    // CSV form with a header row.
    let csv_path = dir.path().join("capture.csv");
    let mut text = String::from("i,q\n");
    for s in record.samples().iter().take(256) {
        text.push_str(&format!("{},{}\n", s.re, s.im));
    }
    std::fs::write(&csv_path, text).expect("write csv");
    let from_csv = IqRecord::load(&csv_path)?;
    println!(
        "csv file with {} samples:      rss = {:.6} dBm",
        from_csv.len(),
        rss_from_iq(&from_csv)?
    );
    Ok(())
}
