//! CLI surface checks: every subcommand, happy path and argument errors,
//! run against the real binary in a scratch directory.

use std::path::Path;
use std::process::{Command, Output};

use rssloc::{Dataset, EvalReport, FitResult, MlpModel, Preset};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rssloc")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn rssloc")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn full_subcommand_walkthrough() {
    let work = tempfile::tempdir().unwrap();
    let dir = work.path();

    // Input files for the small corridor.
    let preset = Preset::Smoke;
    preset.scenario().save(dir.join("scenario.json")).unwrap();
    preset.params().save(dir.join("params.json")).unwrap();
    preset.track_spec().save(dir.join("track.json")).unwrap();
    std::fs::write(
        dir.join("train.json"),
        r#"{"hidden_layers":1,"hidden_units":24,"batch_size":20,"max_epochs":60,"patience":30,"learning_rate":0.002}"#,
    )
    .unwrap();

    let stdout = ok(dir, &[
        "generate", "--scenario", "scenario.json", "--params", "params.json",
        "--track", "track.json", "--seed", "21", "--out", "data.csv",
    ]);
    assert!(stdout.contains("258 samples"), "{stdout}");
    let data = Dataset::load_csv(dir.join("data.csv"), Some(3)).unwrap();
    assert_eq!(data.len(), 258);

    ok(dir, &[
        "split", "--data", "data.csv", "--fraction", "0.75", "--seed", "22",
        "--out-train", "train.csv", "--out-test", "test.csv",
    ]);
    assert_eq!(Dataset::load_csv(dir.join("train.csv"), None).unwrap().len(), 193);
    assert_eq!(Dataset::load_csv(dir.join("test.csv"), None).unwrap().len(), 65);

    let stdout = ok(dir, &[
        "fit", "--data", "train.csv", "--scenario", "scenario.json",
        "--out", "plm.json", "--pooled",
    ]);
    assert!(stdout.contains("beta_hat"), "{stdout}");
    ok(dir, &[
        "fit", "--data", "train.csv", "--scenario", "scenario.json",
        "--out", "plm_su0.json", "--su", "0",
    ]);

    // The grid-search config is anchored on the fitted parameters.
    let fit: FitResult =
        serde_json::from_str(&std::fs::read_to_string(dir.join("plm.json")).unwrap()).unwrap();
    preset.mle_config(&fit).save(dir.join("mle.json")).unwrap();

    ok(dir, &[
        "train", "--data", "train.csv", "--scenario", "scenario.json",
        "--config", "train.json", "--seed", "23", "--out", "model.bin",
    ]);
    let model = MlpModel::load(dir.join("model.bin")).unwrap();
    assert_eq!(model.arch().input_dim, 3);
    assert_eq!(model.arch().hidden_units, 24);

    for (estimator, extra) in [
        ("proximity", vec![]),
        ("mle", vec!["--mle-config", "mle.json"]),
        ("dnn", vec!["--model", "model.bin"]),
    ] {
        let report_name = format!("report_{estimator}.json");
        let cdf_name = format!("cdf_{estimator}.csv");
        let mut args = vec![
            "evaluate", "--data", "test.csv", "--scenario", "scenario.json",
            "--estimator", estimator, "--out", &report_name, "--cdf-csv", &cdf_name,
        ];
        args.extend(extra);
        let stdout = ok(dir, &args);
        assert!(stdout.contains("mean"), "{stdout}");

        let report = EvalReport::load(dir.join(&report_name)).unwrap();
        assert_eq!(report.estimator, estimator);
        assert_eq!(report.n_samples, 65);
        let cdf = std::fs::read_to_string(dir.join(&cdf_name)).unwrap();
        assert!(cdf.starts_with("error_m,probability\n"));
        assert_eq!(cdf.lines().count(), 66);
    }

    // Planar scoring is never larger than 3D scoring on the same data.
    ok(dir, &[
        "evaluate", "--data", "test.csv", "--scenario", "scenario.json",
        "--estimator", "proximity", "--out", "report_planar.json", "--planar",
    ]);
    let full = EvalReport::load(dir.join("report_proximity.json")).unwrap();
    let planar = EvalReport::load(dir.join("report_planar.json")).unwrap();
    assert!(planar.mean <= full.mean);
}

#[test]
fn reproduce_smoke_via_cli() {
    let work = tempfile::tempdir().unwrap();
    let stdout = ok(work.path(), &[
        "reproduce", "--preset", "smoke", "--seed", "2", "--out-dir", "results",
    ]);
    assert!(stdout.contains("mean localization error"), "{stdout}");
    let summary = std::fs::read_to_string(work.path().join("results/summary.json")).unwrap();
    let summary: rssloc::ReproduceSummary = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary.preset, "smoke");
    assert_eq!(summary.seed, 2);
}

#[test]
fn argument_errors_exit_nonzero() {
    let work = tempfile::tempdir().unwrap();
    let dir = work.path();
    Preset::Smoke.scenario().save(dir.join("scenario.json")).unwrap();
    std::fs::write(dir.join("empty.csv"), "round,x,y,z,rss_0\n0,1,1,0.5,-40\n").unwrap();

    // dnn without a model, mle without a grid config.
    for extra in [["--estimator", "dnn"], ["--estimator", "mle"]] {
        let mut args = vec![
            "evaluate", "--data", "empty.csv", "--scenario", "scenario.json",
            "--out", "r.json",
        ];
        args.extend(extra);
        let out = run_in(dir, &args);
        assert!(!out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("needs"));
    }

    let out = run_in(dir, &["reproduce", "--preset", "nope", "--seed", "1", "--out-dir", "x"]);
    assert!(!out.status.success());

    let out = run_in(dir, &[
        "split", "--data", "empty.csv", "--fraction", "1.5", "--seed", "1",
        "--out-train", "a.csv", "--out-test", "b.csv",
    ]);
    assert!(!out.status.success());

    // Unknown subcommands and missing flags are usage errors.
    assert!(!run_in(dir, &["frobnicate"]).status.success());
    assert!(!run_in(dir, &["generate", "--seed", "1"]).status.success());
}
