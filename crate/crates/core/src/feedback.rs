//! Self-consistent mean-field loops.
//!
//! The couple is surrounded by identical copies of itself: each turn the
//! chain is run for `inner_steps` from the start state, the perceived
//! violence is measured, and both parameters are pushed towards 0 or 1 by
//! [`f_update`] (Model 1 aggressiveness) or [`g_update`] (Model 2 support).

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::kernel::CoupleKernel;
use crate::markov::{delta_distribution, evolve, Distribution16};
use crate::monte_carlo::{derive_seed, estimate_distribution};
use crate::observables::{model1_basins, model2_observables, perceived_violence, GenderViolence, Model1Basins, Model2Observables};
use crate::state::{CoupleState, Model, ModelParams};

/// Aggressiveness polarization: grows when `v > vc`, decays otherwise.
pub fn f_update(a: f64, v: f64, vc: f64) -> f64 {
    // powf(a, 1.0) is not always bit-exact
    if v == vc {
        a
    } else if v > vc {
        1.0 - (1.0 - a).powf(1.0 + v - vc)
    } else {
        a.powf(vc - v + 1.0)
    }
}

/// Support erosion: shrinks when `v > vc`, recovers otherwise.
pub fn g_update(s: f64, v: f64, vc: f64) -> f64 {
    if v == vc {
        s
    } else if v > vc {
        s.powf(v - vc + 1.0)
    } else {
        1.0 - (1.0 - s).powf(1.0 + vc - v)
    }
}

/// Which violence each partner reacts to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenderMode {
    /// Both partners see the average `(v1 + v2) / 2`.
    Blind,
    /// Partner 1 sees `v1`, partner 2 sees `v2`.
    Specific,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Exact,
    MonteCarlo { ensemble_size: usize },
}

impl Engine {
    pub const DEFAULT_ENSEMBLE: usize = 1000;

    pub fn is_stochastic(self) -> bool {
        matches!(self, Engine::MonteCarlo { .. })
    }

    /// Distribution after `steps` steps from `start`. `seed` is ignored by
    /// the exact engine.
    pub fn distribution(self, kernel: &CoupleKernel, start: CoupleState, steps: usize, seed: u64) -> Result<Distribution16> {
        match self {
            Engine::Exact => Ok(evolve(&delta_distribution(start), kernel, steps)),
            Engine::MonteCarlo { ensemble_size } => estimate_distribution(start, kernel, steps, ensemble_size, seed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub vc: f64,
    pub inner_steps: usize,
    pub turns: usize,
    pub gender: GenderMode,
    pub engine: Engine,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig { vc: 0.1, inner_steps: 20, turns: 20, gender: GenderMode::Blind, engine: Engine::Exact }
    }
}

impl FeedbackConfig {
    pub fn with_gender(self, gender: GenderMode) -> Self {
        FeedbackConfig { gender, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("vc", self.vc)?;
        if self.inner_steps == 0 {
            return Err(Error::Config("inner_steps must be at least 1".into()));
        }
        if self.turns == 0 {
            return Err(Error::Config("turns must be at least 1".into()));
        }
        if let Engine::MonteCarlo { ensemble_size: 0 } = self.engine {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        Ok(())
    }
}

/// State of the loop at one turn: the parameters in force, the distribution
/// they produce after the inner evolution, and the violence measured on it.
#[derive(Clone, Debug, PartialEq)]
pub struct TurnRecord {
    pub turn: usize,
    pub params: ModelParams,
    pub distribution: Distribution16,
    pub violence: GenderViolence,
}

impl TurnRecord {
    pub fn basins(&self) -> Model1Basins {
        model1_basins(&self.distribution)
    }

    pub fn model2(&self) -> Model2Observables {
        model2_observables(&self.distribution, self.params.p1, self.params.p2)
            .expect("parameters are validated on construction")
    }
}

/// `turns + 1` records; record 0 holds the initial parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackTrace {
    pub start: CoupleState,
    pub config: FeedbackConfig,
    pub records: Vec<TurnRecord>,
}

impl FeedbackTrace {
    pub fn initial(&self) -> &TurnRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &TurnRecord {
        self.records.last().expect("trace holds at least the initial record")
    }
}

pub fn self_consistent_run(init: ModelParams, config: &FeedbackConfig, start: CoupleState, seed: u64) -> Result<FeedbackTrace> {
    config.validate()?;
    let mut params = ModelParams::new(init.model, init.p1, init.p2)?;
    let update = match params.model {
        Model::Model1 => f_update,
        Model::Model2 => g_update,
    };
    let mut records = Vec::with_capacity(config.turns + 1);
    for turn in 0..=config.turns {
        let kernel = CoupleKernel::new(params)?;
        let distribution = config.engine.distribution(&kernel, start, config.inner_steps, derive_seed(seed, &[turn as u64]))?;
        let violence = perceived_violence(params.model, &distribution);
        records.push(TurnRecord { turn, params, distribution, violence });
        if turn == config.turns {
            break;
        }
        let (v1, v2) = match config.gender {
            GenderMode::Blind => (violence.mean(), violence.mean()),
            GenderMode::Specific => (violence.v1, violence.v2),
        };
        let p1 = update(params.p1, v1, config.vc).clamp(0.0, 1.0);
        let p2 = update(params.p2, v2, config.vc).clamp(0.0, 1.0);
        params = params.with(p1, p2)?;
    }
    Ok(FeedbackTrace { start, config: *config, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::MALE_UPSET;
    use proptest::prelude::*;

    #[test]
    fn f_examples() {
        assert_eq!(f_update(0.3, 0.1, 0.1), 0.3);
        assert!((f_update(0.5, 0.6, 0.1) - (1.0 - 0.5f64.powf(1.5))).abs() < 1e-15);
        assert!((f_update(0.5, 0.6, 0.1) - 0.646447).abs() < 1e-6);
        for v in [0.0, 0.05, 0.1, 0.5, 1.0] {
            assert_eq!(f_update(0.0, v, 0.1), 0.0);
            assert_eq!(f_update(1.0, v, 0.1), 1.0);
        }
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_update(0.5, 0.1, 0.1), 0.5);
        assert!((g_update(0.5, 0.6, 0.1) - 0.353553).abs() < 1e-6);
        for v in [0.0, 0.05, 0.1, 0.5, 1.0] {
            assert_eq!(g_update(0.0, v, 0.1), 0.0);
            assert_eq!(g_update(1.0, v, 0.1), 1.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn maps_stay_in_unit_interval(a in 0.0f64..=1.0, v in 0.0f64..=1.0, vc in 0.0f64..=1.0) {
            let f = f_update(a, v, vc);
            let g = g_update(a, v, vc);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((0.0..=1.0).contains(&g));
        }

        #[test]
        fn maps_monotone_in_parameter(a in 0.0f64..=1.0, b in 0.0f64..=1.0, v in 0.0f64..=1.0, vc in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(f_update(lo, v, vc) <= f_update(hi, v, vc));
            prop_assert!(g_update(lo, v, vc) <= g_update(hi, v, vc));
        }

        #[test]
        fn threshold_leaves_parameter_unchanged(a in 0.0f64..=1.0, vc in 0.0f64..=1.0) {
            prop_assert_eq!(f_update(a, vc, vc), a);
            prop_assert_eq!(g_update(a, vc, vc), a);
        }
    }

    #[test]
    fn calm_fixed_point() {
        let trace = self_consistent_run(ModelParams::model1(0.0, 0.0).unwrap(), &FeedbackConfig::default(), MALE_UPSET, 0).unwrap();
        assert_eq!(trace.records.len(), 21);
        for r in &trace.records {
            assert_eq!((r.params.p1, r.params.p2), (0.0, 0.0));
        }
        assert_eq!(trace.last().basins().normal, 1.0);
    }

    #[test]
    fn violent_fixed_point() {
        let trace = self_consistent_run(ModelParams::model1(1.0, 1.0).unwrap(), &FeedbackConfig::default(), MALE_UPSET, 0).unwrap();
        let last = trace.last();
        assert_eq!((last.params.p1, last.params.p2), (1.0, 1.0));
        assert!((last.basins().separation - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polarizes_at_midpoint() {
        let trace = self_consistent_run(ModelParams::model1(0.5, 0.5).unwrap(), &FeedbackConfig::default(), MALE_UPSET, 0).unwrap();
        assert!(trace.last().basins().max() > trace.initial().basins().max());
    }

    #[test]
    fn exact_engine_is_deterministic() {
        let cfg = FeedbackConfig::default().with_gender(GenderMode::Specific);
        let p = ModelParams::model2(0.4, 0.7).unwrap();
        let a = self_consistent_run(p, &cfg, MALE_UPSET, 1).unwrap();
        let b = self_consistent_run(p, &cfg, MALE_UPSET, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_engine_reproducible() {
        let cfg = FeedbackConfig { engine: Engine::MonteCarlo { ensemble_size: 200 }, turns: 3, ..FeedbackConfig::default() };
        let p = ModelParams::model1(0.4, 0.6).unwrap();
        let a = self_consistent_run(p, &cfg, MALE_UPSET, 9).unwrap();
        let b = self_consistent_run(p, &cfg, MALE_UPSET, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 4);
    }

    #[test]
    fn gender_modes_reach_different_basins() {
        // an aggressive partner 1 facing a mild partner 2: the averaged
        // violence drags both into mutual violence, the per-partner one lets
        // male prevarication take over
        let p = ModelParams::model1(0.8, 0.1).unwrap();
        let blind = self_consistent_run(p, &FeedbackConfig::default(), MALE_UPSET, 0).unwrap();
        let specific = self_consistent_run(p, &FeedbackConfig::default().with_gender(GenderMode::Specific), MALE_UPSET, 0).unwrap();
        let b = blind.last().basins();
        let s = specific.last().basins();
        assert_eq!(b.max(), b.separation);
        assert_eq!(s.max(), s.male_violence);
    }

    #[test]
    fn invalid_config_rejected() {
        let p = ModelParams::model1(0.5, 0.5).unwrap();
        let bad = [
            FeedbackConfig { vc: 1.5, ..FeedbackConfig::default() },
            FeedbackConfig { turns: 0, ..FeedbackConfig::default() },
            FeedbackConfig { inner_steps: 0, ..FeedbackConfig::default() },
            FeedbackConfig { engine: Engine::MonteCarlo { ensemble_size: 0 }, ..FeedbackConfig::default() },
        ];
        for cfg in bad {
            assert!(self_consistent_run(p, &cfg, MALE_UPSET, 0).is_err());
        }
    }
}
