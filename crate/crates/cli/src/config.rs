//! Run-configuration documents: a single JSON object selecting a built-in
//! scenario (or `"custom"`) with optional overrides for every parameter.

use crate::{CliError, Result};
use sakf_core::sim::{
    BuiltinScenario, NoiseProfile, VelocityProfile, DEFAULT_SEED, DEFAULT_V_PRIOR_STD,
};
use sakf_core::{AssessmentConfig, Scenario};
use serde::{Deserialize, Serialize};

/// Top-level configuration document.
///
/// `scenario` is required: one of the built-in names or `"custom"`. All
/// other fields override the chosen base; for `"custom"`, `steps`,
/// `sensors`, and `velocity` must be given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<Vec<NoiseProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumed_sigma_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumed_sigma_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_sigma_v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_prior_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nis_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessment: Option<AssessmentConfig>,
}

impl ConfigDoc {
    /// Full explicit document for a built-in scenario, suitable for
    /// editing and feeding back through [`parse_config`].
    pub fn for_builtin(which: BuiltinScenario) -> Self {
        let s = Scenario::builtin(which);
        ConfigDoc {
            scenario: s.name.clone(),
            steps: Some(s.steps),
            dt: Some(s.dt),
            seed: Some(s.seed),
            velocity: Some(s.velocity.clone()),
            sensors: Some(s.sensors.clone()),
            assumed_sigma_w: Some(s.assumed_sigma_w),
            assumed_sigma_v: Some(s.assumed_sigma_v),
            truth_sigma_v: Some(s.truth_sigma_v),
            v_prior_std: Some(s.v_prior_std),
            nis_window: Some(s.nis_window),
            assessment: Some(s.assessment),
        }
    }
}

/// Parses and validates a configuration document into a runnable scenario.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| {
        let kind = if e.is_syntax() || e.is_eof() {
            "malformed config"
        } else {
            "config schema error"
        };
        CliError::Config(format!("{kind}: {e}"))
    })?;
    scenario_from_doc(&doc)
}

/// Builds the scenario a document describes.
pub fn scenario_from_doc(doc: &ConfigDoc) -> Result<Scenario> {
    let mut scenario = if doc.scenario == "custom" {
        let missing = |field: &str| {
            CliError::Config(format!(
                "config schema error: custom scenario requires field `{field}`"
            ))
        };
        Scenario {
            name: "custom".into(),
            steps: doc.steps.ok_or_else(|| missing("steps"))?,
            dt: 1.0,
            seed: DEFAULT_SEED,
            sensors: doc.sensors.clone().ok_or_else(|| missing("sensors"))?,
            velocity: doc.velocity.clone().ok_or_else(|| missing("velocity"))?,
            assumed_sigma_w: 1.0,
            assumed_sigma_v: 1.0,
            truth_sigma_v: 0.0,
            v_prior_std: DEFAULT_V_PRIOR_STD,
            nis_window: 35,
            assessment: AssessmentConfig::default(),
        }
    } else {
        let which: BuiltinScenario = doc
            .scenario
            .parse()
            .map_err(|e| CliError::Config(format!("{e}")))?;
        Scenario::builtin(which)
    };

    if let Some(steps) = doc.steps {
        scenario.steps = steps;
    }
    if let Some(dt) = doc.dt {
        scenario.dt = dt;
    }
    if let Some(seed) = doc.seed {
        scenario.seed = seed;
    }
    if let Some(velocity) = &doc.velocity {
        scenario.velocity = velocity.clone();
    }
    if let Some(sensors) = &doc.sensors {
        scenario.sensors = sensors.clone();
    }
    if let Some(v) = doc.assumed_sigma_w {
        scenario.assumed_sigma_w = v;
    }
    if let Some(v) = doc.assumed_sigma_v {
        scenario.assumed_sigma_v = v;
    }
    if let Some(v) = doc.truth_sigma_v {
        scenario.truth_sigma_v = v;
    }
    if let Some(v) = doc.v_prior_std {
        scenario.v_prior_std = v;
    }
    if let Some(v) = doc.nis_window {
        scenario.nis_window = v;
    }
    if let Some(a) = &doc.assessment {
        scenario.assessment = a.clone();
    }

    scenario
        .validate()
        .map_err(|e| CliError::Config(format!("invalid scenario: {e}")))?;
    Ok(scenario)
}
