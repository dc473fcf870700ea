//! Blind indoor localization from received signal strength.
//!
//! A transmitter of unknown position and unknown transmit power moves
//! through a space instrumented with a handful of fixed sensing units.
//! Each unit reports only the received signal strength (RSS) of the
//! transmission. This crate covers the full experimental pipeline around
//! that setting:
//!
//! * a log-normal path-loss channel with spatially correlated shadowing,
//!   used both as a generative model for synthetic datasets and as the
//!   measurement model for estimation ([`channel`], [`dataset`]);
//! * least-squares calibration of the path-loss parameters from labeled
//!   observations ([`plmfit`]);
//! * three position estimators: nearest-unit proximity, grid-search
//!   maximum likelihood under the correlated-shadowing model, and a small
//!   fully connected network trained from scratch on RSS vectors
//!   ([`estimators`], [`mlp`]);
//! * an evaluation harness producing localization-error CDFs and summary
//!   statistics, plus presets that run the whole pipeline end to end
//!   ([`eval`], [`presets`]).
//!
//! Everything downstream of a seed is deterministic: datasets, splits,
//! trained models, and reports are byte-identical across repeated runs
//! with the same inputs.
//!
//! The `examples/` directory demonstrates each stage in isolation; the
//! `rssloc` binary chains them behind a small CLI.

pub mod channel;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod mlp;
pub mod plmfit;
pub mod presets;
pub mod rng;
pub mod scenario;

pub use channel::{
    build_covariance, distance, mean_rss, mean_rss_vector, rss_from_iq, sample_shadowing,
    simulate_rss, CovarianceMatrix, IqRecord, PlmParams,
};
pub use dataset::{
    apply_norm, compute_norm_stats, generate_synthetic, invert_norm, split, Dataset,
    NormStats, Sample, SplitSpec,
};
pub use error::{Error, Result};
pub use estimators::{
    dnn_estimate, mle_estimate, mle_objective, proximity_estimate, EstimateRequest,
    GridSpec, MleConfig, MleEstimate, ParamRange,
};
pub use eval::{
    evaluate, localization_error, localization_error_planar, CdfPoint, Estimator,
    EvalReport,
};
pub use mlp::{
    adam_step, backward, elu, init_xavier, loss, train, AdamState, Gradients, MlpArch,
    MlpModel, TrainConfig, TrainExample, TrainLog,
};
pub use plmfit::{fit_ls, pool_fit_input, FitInput, FitResult, SuSelection};
pub use presets::{run_preset, Preset, ReproduceOutput, ReproduceSummary};
pub use scenario::{
    make_corridor_scenario, make_track, Point3, Scenario, Track, TrackSpec,
};
