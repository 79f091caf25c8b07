//! Flat key/value run configuration.
//!
//! A config file is a TOML table of scalar keys; unknown keys are errors.
//! Command-line flags override file values key by key, and the merged
//! config is validated before anything runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::{Engine, FeedbackConfig, GenderMode};
use crate::state::{CoupleState, Model, ModelParams, MALE_UPSET};
use crate::sweep::{Scenario, SweepSpec};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turns: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pgm: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Granularity of a kernel dump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelLevel {
    Individual,
    Couple,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident; $($f:ident),*) => {
        RunConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat scalar table always serializes")
    }

    /// Values set in `over` win.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        let base = self;
        merge_fields!(base, over; model, p1, p2, start, steps, seed, scenario, resolution, runs, engine,
            ensemble, vc, inner_steps, turns, gender, level, pgm, threads, out)
    }

    pub fn model(&self) -> Result<Model> {
        Model::from_number(self.model.unwrap_or(1))
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let model = self.model()?;
        let p1 = self.p1.ok_or_else(|| Error::Config("missing p1".into()))?;
        let p2 = self.p2.ok_or_else(|| Error::Config("missing p2".into()))?;
        ModelParams::new(model, p1, p2)
    }

    pub fn start_state(&self) -> Result<CoupleState> {
        self.start.as_deref().map_or(Ok(MALE_UPSET), str::parse)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn engine(&self) -> Result<Engine> {
        let ensemble_size = self.ensemble.unwrap_or(Engine::DEFAULT_ENSEMBLE);
        if ensemble_size == 0 {
            return Err(Error::Config("ensemble must be at least 1".into()));
        }
        match self.engine.as_deref().unwrap_or("exact") {
            "exact" => Ok(Engine::Exact),
            "monte-carlo" | "mc" => Ok(Engine::MonteCarlo { ensemble_size }),
            other => Err(Error::Config(format!("unknown engine {other:?}; expected exact or monte-carlo"))),
        }
    }

    pub fn gender(&self) -> Result<GenderMode> {
        match self.gender.as_deref().unwrap_or("blind") {
            "blind" => Ok(GenderMode::Blind),
            "specific" | "gender" => Ok(GenderMode::Specific),
            other => Err(Error::Config(format!("unknown gender mode {other:?}; expected blind or specific"))),
        }
    }

    pub fn level(&self) -> Result<KernelLevel> {
        match self.level.as_deref().unwrap_or("individual") {
            "individual" => Ok(KernelLevel::Individual),
            "couple" => Ok(KernelLevel::Couple),
            other => Err(Error::Config(format!("unknown kernel level {other:?}; expected individual or couple"))),
        }
    }

    pub fn feedback_config(&self) -> Result<FeedbackConfig> {
        let d = FeedbackConfig::default();
        let cfg = FeedbackConfig {
            vc: self.vc.unwrap_or(d.vc),
            inner_steps: self.inner_steps.unwrap_or(d.inner_steps),
            turns: self.turns.unwrap_or(d.turns),
            gender: self.gender()?,
            engine: self.engine()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let scenario: Scenario = self
            .scenario
            .as_deref()
            .ok_or_else(|| Error::Config("missing scenario".into()))?
            .parse()?;
        let mut spec = SweepSpec::new(scenario);
        if let Some(r) = self.resolution {
            spec.resolution = r;
        }
        if let Some(r) = self.runs {
            spec.runs_per_cell = r;
        }
        if let Some(s) = self.steps {
            spec.plain_steps = s;
        }
        spec.engine = self.engine()?;
        spec.master_seed = self.seed();
        spec.start = self.start_state()?;
        let d = FeedbackConfig::default();
        spec.feedback = FeedbackConfig {
            vc: self.vc.unwrap_or(d.vc),
            inner_steps: self.inner_steps.unwrap_or(d.inner_steps),
            turns: self.turns.unwrap_or(d.turns),
            ..d
        };
        spec.validate()?;
        Ok(spec)
    }
}
