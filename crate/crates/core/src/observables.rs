//! Scalar measurements on a couple distribution.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Result};
use crate::markov::Distribution16;
use crate::state::{CoupleState, IndividualState, Model};

use IndividualState::{Normal, Passive, Upset, Violent};

const fn cs(s1: IndividualState, s2: IndividualState) -> CoupleState {
    CoupleState::new(s1, s2)
}

pub const NORMAL: CoupleState = cs(Normal, Normal);
pub const SEPARATION: CoupleState = cs(Violent, Violent);
pub const MALE_VIOLENCE: CoupleState = cs(Violent, Passive);
pub const FEMALE_VIOLENCE: CoupleState = cs(Passive, Violent);

/// Mass on each of Model 1's absorbing states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model1Basins {
    pub normal: f64,
    pub separation: f64,
    pub male_violence: f64,
    pub female_violence: f64,
}

impl Model1Basins {
    pub fn total(&self) -> f64 {
        self.normal + self.separation + self.male_violence + self.female_violence
    }

    pub fn max(&self) -> f64 {
        self.normal.max(self.separation).max(self.male_violence).max(self.female_violence)
    }
}

pub fn model1_basins(dist: &Distribution16) -> Model1Basins {
    Model1Basins {
        normal: dist[NORMAL],
        separation: dist[SEPARATION],
        male_violence: dist[MALE_VIOLENCE],
        female_violence: dist[FEMALE_VIOLENCE],
    }
}

/// Perceived violence per partner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenderViolence {
    pub v1: f64,
    pub v2: f64,
}

impl GenderViolence {
    pub fn mean(&self) -> f64 {
        0.5 * (self.v1 + self.v2)
    }
}

/// `v1 = P(2,-1) + P(2,2)`, `v2 = P(-1,2) + P(2,2)`.
pub fn gender_violence(dist: &Distribution16) -> GenderViolence {
    GenderViolence {
        v1: dist[MALE_VIOLENCE] + dist[SEPARATION],
        v2: dist[FEMALE_VIOLENCE] + dist[SEPARATION],
    }
}

/// Marginal probability that each partner is violent:
/// `v1 = sum_s2 P(2, s2)`, `v2 = sum_s1 P(s1, 2)`.
///
/// Used as Model 2's perceived violence, where the chain has no absorbing
/// prevarication states to read off.
pub fn violent_marginals(dist: &Distribution16) -> GenderViolence {
    let mut v = GenderViolence { v1: 0.0, v2: 0.0 };
    for s in IndividualState::ALL {
        v.v1 += dist[cs(Violent, s)];
        v.v2 += dist[cs(s, Violent)];
    }
    v
}

/// The perceived-violence measurement that drives each model's feedback.
pub fn perceived_violence(model: Model, dist: &Distribution16) -> GenderViolence {
    match model {
        Model::Model1 => gender_violence(dist),
        Model::Model2 => violent_marginals(dist),
    }
}

/// Path weights of Model 2.
///
/// `recovering` subtracts the prevarication states and `violence_cycle` adds
/// them back, so with no mass on `(2,1)`/`(1,2)` the sum
/// `normal + threshold + recovering + violence_cycle + P(2,2)` is one.
/// `mutual_violence` and `separation` split `P(2,2)` by
/// `(1-s1)(1-s2)` and `s1 s2`; for interior supports they do not add up to
/// `P(2,2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model2Observables {
    pub normal: f64,
    pub threshold: f64,
    pub recovering: f64,
    pub violence_cycle: f64,
    pub mutual_violence: f64,
    pub separation: f64,
}

pub fn model2_observables(dist: &Distribution16, support1: f64, support2: f64) -> Result<Model2Observables> {
    let s1 = check_unit("s1", support1)?;
    let s2 = check_unit("s2", support2)?;
    let p = |a, b| dist[cs(a, b)];
    let prevarication = p(Passive, Violent) + p(Violent, Passive);
    let both_violent = p(Violent, Violent);
    Ok(Model2Observables {
        normal: p(Normal, Normal),
        threshold: p(Normal, Upset) + p(Upset, Normal) + p(Upset, Upset),
        recovering: p(Passive, Normal) + p(Normal, Passive) + p(Passive, Upset) + p(Upset, Passive) + p(Passive, Passive)
            - prevarication,
        violence_cycle: prevarication + p(Normal, Violent) + p(Violent, Normal),
        mutual_violence: both_violent * (1.0 - s1) * (1.0 - s2),
        separation: both_violent * s1 * s2,
    })
}
