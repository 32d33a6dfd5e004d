//! Executes a scenario end to end: one Kalman filter, one NIS window, and
//! one assessment state machine per sensor, producing aligned trace rows.
//!
//! Sensors are independent by construction (separate noise streams,
//! separate filters), so the runner executes them data-parallel when the
//! `parallel` feature is enabled. The sequential path is always compiled
//! and produces bit-identical output; benches compare the two.

use crate::assessment::{AssessmentEvent, AssessmentState};
use crate::consistency::{chi2_interval, nis, NisWindow};
use crate::kalman::{init_state, measurement_prediction, predict, update, LinearModel};
use crate::rng::GaussianStream;
use crate::sim::{
    gen_measurements, gen_truth_noisy, sensor_stream, Scenario, SimError, TRUTH_STREAM,
};
use nalgebra::dvector;
use serde::Serialize;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Scenario(#[from] SimError),
    #[error("sensor {sensor} failed at step {step}: {message}")]
    Numeric {
        /// One-based sensor index, matching trace output.
        sensor: usize,
        step: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, RunnerError>;

/// One output row of a sensor trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRow {
    pub k: usize,
    pub z: f64,
    pub z_pred: f64,
    pub s: f64,
    pub nis: f64,
    pub avg_nis: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub delta: f64,
    pub u_delta: f64,
    pub event: AssessmentEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    /// One-based sensor index.
    pub sensor: usize,
    pub rows: Vec<SensorRow>,
}

/// Full deterministic output of a scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub scenario: String,
    pub seed: u64,
    pub sensors: Vec<SensorTrace>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SensorSummary {
    pub sensor: usize,
    pub mean_delta: f64,
    pub max_delta: f64,
    pub final_u_delta: f64,
    pub td_events: usize,
    pub reset_events: usize,
    /// Fraction of post-warm-up rows whose time-average NIS lies inside
    /// the confidence band.
    pub frac_avg_nis_in_band: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub sensors: Vec<SensorSummary>,
}

struct Prepared {
    truth: Vec<(f64, f64)>,
    ci_lo: f64,
    ci_hi: f64,
}

fn prepare(scenario: &Scenario) -> Result<Prepared> {
    scenario.validate()?;
    let mut truth_stream = GaussianStream::new(scenario.seed, TRUTH_STREAM);
    let truth = gen_truth_noisy(scenario, &mut truth_stream)?;
    // K * avg_nis follows chi-squared with K * m degrees of freedom
    let k = scenario.nis_window as f64;
    let band = chi2_interval(k, 0.95).map_err(|e| RunnerError::Numeric {
        sensor: 0,
        step: 0,
        message: format!("confidence band for window {k}: {e}"),
    })?;
    Ok(Prepared {
        truth,
        ci_lo: band.lo / k,
        ci_hi: band.hi / k,
    })
}

fn numeric<E: std::fmt::Display>(sensor: usize, step: usize) -> impl Fn(E) -> RunnerError {
    move |e| RunnerError::Numeric {
        sensor,
        step,
        message: e.to_string(),
    }
}

fn run_sensor(scenario: &Scenario, index: usize, prep: &Prepared) -> Result<SensorTrace> {
    let sensor = index + 1;
    let mut stream = GaussianStream::new(scenario.seed, sensor_stream(index));
    let zs = gen_measurements(&prep.truth, &scenario.sensors[index], &mut stream);

    let model = LinearModel::constant_velocity(
        scenario.dt,
        scenario.assumed_sigma_v,
        scenario.assumed_sigma_w,
    )
    .map_err(numeric(sensor, 0))?;

    let z0 = dvector![zs[0]];
    let mut state = init_state(&z0, &model, scenario.v_prior_std).map_err(numeric(sensor, 0))?;
    let mut assessment =
        AssessmentState::new(scenario.assessment.clone(), 1).map_err(numeric(sensor, 0))?;
    let mut window = NisWindow::new(scenario.nis_window);
    let mut rows = Vec::with_capacity(zs.len());

    // row 0: the filter prior is built from the first measurement, so the
    // initial innovation is identically zero; the assessment emits its
    // fully uncertain record before ingesting that measurement
    let pred0 = measurement_prediction(&state, &model).map_err(numeric(sensor, 0))?;
    let initial = assessment.initial_record();
    let nis_warmup = window.is_warmup();
    let avg0 = window.push(0.0).map_err(numeric(sensor, 0))?;
    rows.push(SensorRow {
        k: 0,
        z: zs[0],
        z_pred: pred0.z_pred[0],
        s: pred0.s[(0, 0)],
        nis: 0.0,
        avg_nis: avg0,
        ci_lo: prep.ci_lo,
        ci_hi: prep.ci_hi,
        delta: initial.delta,
        u_delta: initial.u_delta,
        event: merge_warmup(initial.event, nis_warmup),
    });
    assessment.ingest(&pred0, &z0).map_err(numeric(sensor, 0))?;

    for (k, &zk) in zs.iter().enumerate().skip(1) {
        let z = dvector![zk];
        let prior = predict(&state, &model).map_err(numeric(sensor, k))?;
        let out = update(&prior, &model, &z).map_err(numeric(sensor, k))?;
        let nis_val = nis(&out.residual, &out.prediction.s).map_err(numeric(sensor, k))?;
        let nis_warmup = window.is_warmup();
        let avg = window.push(nis_val).map_err(numeric(sensor, k))?;
        let record = assessment
            .step(&out.prediction, &z)
            .map_err(numeric(sensor, k))?;
        rows.push(SensorRow {
            k,
            z: zk,
            z_pred: out.prediction.z_pred[0],
            s: out.prediction.s[(0, 0)],
            nis: nis_val,
            avg_nis: avg,
            ci_lo: prep.ci_lo,
            ci_hi: prep.ci_hi,
            delta: record.delta,
            u_delta: record.u_delta,
            event: merge_warmup(record.event, nis_warmup),
        });
        state = out.state;
    }

    Ok(SensorTrace { sensor, rows })
}

// a row counts as warm-up while either accumulator is still filling
fn merge_warmup(event: AssessmentEvent, nis_warmup: bool) -> AssessmentEvent {
    if event == AssessmentEvent::None && nis_warmup {
        AssessmentEvent::Warmup
    } else {
        event
    }
}

/// Runs every sensor of the scenario, in parallel when the `parallel`
/// feature is enabled.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    #[cfg(feature = "parallel")]
    {
        let prep = prepare(scenario)?;
        let sensors = (0..scenario.sensors.len())
            .into_par_iter()
            .map(|i| run_sensor(scenario, i, &prep))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunOutput {
            scenario: scenario.name.clone(),
            seed: scenario.seed,
            sensors,
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_scenario_sequential(scenario)
    }
}

/// Always-sequential variant of [`run_scenario`]; output is identical.
pub fn run_scenario_sequential(scenario: &Scenario) -> Result<RunOutput> {
    let prep = prepare(scenario)?;
    let sensors = (0..scenario.sensors.len())
        .map(|i| run_sensor(scenario, i, &prep))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        sensors,
    })
}

/// Runs the scenario once per seed, in parallel when enabled. Output
/// order follows the seed order.
pub fn run_seed_batch(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<RunOutput>> {
    #[cfg(feature = "parallel")]
    {
        seeds
            .par_iter()
            .map(|&seed| {
                let mut s = scenario.clone();
                s.seed = seed;
                run_scenario_sequential(&s)
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_seed_batch_sequential(scenario, seeds)
    }
}

/// Always-sequential variant of [`run_seed_batch`].
pub fn run_seed_batch_sequential(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<RunOutput>> {
    seeds
        .iter()
        .map(|&seed| {
            let mut s = scenario.clone();
            s.seed = seed;
            run_scenario_sequential(&s)
        })
        .collect()
}

/// Per-sensor summary statistics of a run.
pub fn summarize(out: &RunOutput) -> RunSummary {
    let sensors = out
        .sensors
        .iter()
        .map(|trace| {
            let n = trace.rows.len().max(1) as f64;
            let mean_delta = trace.rows.iter().map(|r| r.delta).sum::<f64>() / n;
            let max_delta = trace.rows.iter().map(|r| r.delta).fold(0.0, f64::max);
            let final_u_delta = trace.rows.last().map_or(1.0, |r| r.u_delta);
            let td_events = trace
                .rows
                .iter()
                .filter(|r| r.event == AssessmentEvent::TrustDiscount)
                .count();
            let reset_events = trace
                .rows
                .iter()
                .filter(|r| r.event == AssessmentEvent::LongTermReset)
                .count();
            let post_warmup: Vec<&SensorRow> = trace
                .rows
                .iter()
                .filter(|r| r.event != AssessmentEvent::Warmup)
                .collect();
            let in_band = post_warmup
                .iter()
                .filter(|r| r.avg_nis >= r.ci_lo && r.avg_nis <= r.ci_hi)
                .count();
            let frac_avg_nis_in_band = if post_warmup.is_empty() {
                0.0
            } else {
                in_band as f64 / post_warmup.len() as f64
            };
            SensorSummary {
                sensor: trace.sensor,
                mean_delta,
                max_delta,
                final_u_delta,
                td_events,
                reset_events,
                frac_avg_nis_in_band,
            }
        })
        .collect();
    RunSummary {
        scenario: out.scenario.clone(),
        seed: out.seed,
        sensors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::BuiltinScenario;

    #[test]
    fn drift_run_shape() {
        let s = Scenario::builtin(BuiltinScenario::Drift);
        let out = run_scenario(&s).unwrap();
        assert_eq!(out.sensors.len(), 2);
        for trace in &out.sensors {
            assert_eq!(trace.rows.len(), 135);
            assert_eq!(trace.rows[0].k, 0);
            assert_eq!(trace.rows[0].delta, 0.0);
            assert_eq!(trace.rows[0].u_delta, 1.0);
            for pair in trace.rows.windows(2) {
                assert_eq!(pair[1].k, pair[0].k + 1);
            }
        }
    }

    #[test]
    fn jumps_run_shape() {
        let s = Scenario::builtin(BuiltinScenario::Jumps);
        let out = run_scenario(&s).unwrap();
        assert_eq!(out.sensors[0].rows.len(), 315);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let s = Scenario::builtin(BuiltinScenario::Drift);
        let par = run_scenario(&s).unwrap();
        let seq = run_scenario_sequential(&s).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn runs_are_deterministic() {
        let s = Scenario::builtin(BuiltinScenario::Jumps);
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_batch_matches_individual_runs() {
        let s = Scenario::builtin(BuiltinScenario::Drift);
        let batch = run_seed_batch(&s, &[1, 2, 3]).unwrap();
        let batch_seq = run_seed_batch_sequential(&s, &[1, 2, 3]).unwrap();
        assert_eq!(batch, batch_seq);
        for (i, seed) in [1u64, 2, 3].iter().enumerate() {
            let mut single = s.clone();
            single.seed = *seed;
            assert_eq!(batch[i], run_scenario(&single).unwrap());
        }
    }

    #[test]
    fn confidence_band_is_the_scaled_chi2_interval() {
        let s = Scenario::builtin(BuiltinScenario::Drift);
        let out = run_scenario(&s).unwrap();
        let row = &out.sensors[0].rows[10];
        assert!((row.ci_lo - 20.56937663074499 / 35.0).abs() < 1e-4);
        assert!((row.ci_hi - 53.20334854205644 / 35.0).abs() < 1e-4);
    }

    #[test]
    fn warmup_rows_are_flagged() {
        let s = Scenario::builtin(BuiltinScenario::Drift);
        let out = run_scenario(&s).unwrap();
        let rows = &out.sensors[0].rows;
        for row in rows.iter().take(35) {
            assert_eq!(row.event, AssessmentEvent::Warmup, "k={}", row.k);
        }
        assert_ne!(rows[35].event, AssessmentEvent::Warmup);
    }

    #[test]
    fn summary_counts_events() {
        let s = Scenario::builtin(BuiltinScenario::Drift);
        let out = run_scenario(&s).unwrap();
        let summary = summarize(&out);
        assert_eq!(summary.sensors.len(), 2);
        for sensor in &summary.sensors {
            assert!(sensor.mean_delta >= 0.0 && sensor.mean_delta <= 1.0);
            assert!(sensor.final_u_delta > 0.0 && sensor.final_u_delta < 1.0);
            assert!(sensor.td_events + sensor.reset_events >= 1);
        }
    }

    #[test]
    fn summary_of_a_single_row_equals_that_row() {
        let row = SensorRow {
            k: 0,
            z: 1.0,
            z_pred: 1.0,
            s: 2.0,
            nis: 0.0,
            avg_nis: 0.0,
            ci_lo: 0.5,
            ci_hi: 1.5,
            delta: 0.3,
            u_delta: 0.7,
            event: AssessmentEvent::None,
        };
        let out = RunOutput {
            scenario: "single".into(),
            seed: 0,
            sensors: vec![SensorTrace {
                sensor: 1,
                rows: vec![row],
            }],
        };
        let summary = summarize(&out);
        assert_eq!(summary.sensors[0].mean_delta, 0.3);
        assert_eq!(summary.sensors[0].max_delta, 0.3);
        assert_eq!(summary.sensors[0].final_u_delta, 0.7);
        assert_eq!(summary.sensors[0].frac_avg_nis_in_band, 0.0);
    }

    #[test]
    fn matched_runs_rarely_reset() {
        let mut s = Scenario::builtin(BuiltinScenario::Drift);
        s.name = "matched".into();
        s.sensors = vec![crate::sim::NoiseProfile::constant(1.0)];
        let outs = run_seed_batch(&s, &(1..=10).collect::<Vec<_>>()).unwrap();
        let quiet = outs
            .iter()
            .filter(|out| summarize(out).sensors[0].reset_events == 0)
            .count();
        assert!(quiet >= 9, "only {quiet}/10 matched runs were reset-free");
    }

    #[test]
    fn jumps_runs_reset_the_jumping_sensor() {
        let s = Scenario::builtin(BuiltinScenario::Jumps);
        let outs = run_seed_batch(&s, &(1..=10).collect::<Vec<_>>()).unwrap();
        let detected = outs
            .iter()
            .filter(|out| summarize(out).sensors[0].reset_events >= 1)
            .count();
        assert!(detected >= 9, "only {detected}/10 jump runs saw a reset");
    }
}
