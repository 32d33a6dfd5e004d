//! Self-assessing Kalman filtering.
//!
//! A linear Kalman filter watches its own noise assumptions through two
//! lenses at once: the classical time-average NIS with chi-squared
//! confidence bounds, and a subjective-logic measure that bins whitened
//! innovations into evidence, pools the evidence into opinions, and
//! reports both a conflict value `delta` against the assumed Gaussian and
//! an explicit uncertainty mass saying how much evidence backs that value.
//!
//! - [`opinion`]: multinomial opinions and their operators (cumulative
//!   fusion, unfusion, trust discounting, degree of conflict).
//! - [`kalman`]: the linear filter and the constant-velocity model.
//! - [`consistency`]: NEES/NIS, the sliding time-average NIS window, and
//!   the chi-squared / normal special functions.
//! - [`assessment`]: the streaming self-assessment state machine.
//! - [`sim`]: deterministic scenario generation for the built-in
//!   experiments (noise jumps, noise drift, velocity changes).
//! - [`runner`]: per-sensor pipeline execution and summaries; data
//!   parallel over sensors and seeds with the `parallel` feature
//!   (enabled by default), with an always-available sequential path.
//! - [`rng`]: seeded, splittable random streams (xoshiro256++ with
//!   Box–Muller normals).
//!
//! ```
//! use sakf_core::{run_scenario, BuiltinScenario, Scenario};
//!
//! let scenario = Scenario::builtin(BuiltinScenario::Drift);
//! let out = run_scenario(&scenario).unwrap();
//!
//! // sensor 1's true noise drifts away from the filter's assumption, and
//! // the conflict measure tracks it while its uncertainty mass shrinks
//! let rows = &out.sensors[0].rows;
//! assert_eq!(rows.len(), 135);
//! assert!(rows.last().unwrap().delta > rows[40].delta);
//! assert!(rows.last().unwrap().u_delta < 0.1);
//! ```

pub mod assessment;
pub mod consistency;
pub mod kalman;
pub mod opinion;
pub mod rng;
pub mod runner;
pub mod sim;

pub use assessment::{
    run_trace, AssessmentConfig, AssessmentEvent, AssessmentRecord, AssessmentState, BinningScheme,
    TdTarget,
};
pub use consistency::{
    chi2_cdf, chi2_interval, chi2_quantile, nees, nis, norm_cdf, norm_inv_cdf, ConfidenceBand,
    NisWindow,
};
pub use kalman::{
    init_state, measurement_prediction, predict, update, GaussState, LinearModel, MeasPrediction,
};
pub use opinion::{EvidenceVector, Opinion};
pub use rng::GaussianStream;
pub use runner::{
    run_scenario, run_scenario_sequential, run_seed_batch, run_seed_batch_sequential, summarize,
    RunOutput, RunSummary, SensorRow, SensorTrace,
};
pub use sim::{BuiltinScenario, NoiseProfile, Scenario, VelocityPiece, VelocityProfile};
