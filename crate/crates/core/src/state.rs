//! Individual and couple states.
//!
//! A couple state is the ordered pair `(s1, s2)`, partner 1 first. The two
//! partners share the same four-valued state space, so the sixteen couple
//! states are encoded row-major as `4 * (s1 + 1) + (s2 + 1)`. With this order
//! the couple transition matrix is the tensor product of the individual
//! kernels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// One partner's state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
#[repr(i8)]
pub enum IndividualState {
    Passive = -1,
    Normal = 0,
    Upset = 1,
    Violent = 2,
}

impl IndividualState {
    /// All states in the canonical order -1, 0, 1, 2.
    pub const ALL: [IndividualState; 4] = [
        IndividualState::Passive,
        IndividualState::Normal,
        IndividualState::Upset,
        IndividualState::Violent,
    ];

    pub fn value(self) -> i8 {
        self as i8
    }

    /// Position in [`IndividualState::ALL`], i.e. `value + 1`.
    pub fn index(self) -> usize {
        (self as i8 + 1) as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(Error::InvalidState(index as i64 - 1))
    }

    pub fn name(self) -> &'static str {
        match self {
            IndividualState::Passive => "passive",
            IndividualState::Normal => "normal",
            IndividualState::Upset => "upset",
            IndividualState::Violent => "violent",
        }
    }
}

impl TryFrom<i8> for IndividualState {
    type Error = Error;

    fn try_from(value: i8) -> Result<Self> {
        match value {
            -1 => Ok(IndividualState::Passive),
            0 => Ok(IndividualState::Normal),
            1 => Ok(IndividualState::Upset),
            2 => Ok(IndividualState::Violent),
            other => Err(Error::InvalidState(other as i64)),
        }
    }
}

impl TryFrom<i64> for IndividualState {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        i8::try_from(value)
            .map_err(|_| Error::InvalidState(value))
            .and_then(IndividualState::try_from)
    }
}

impl From<IndividualState> for i8 {
    fn from(s: IndividualState) -> i8 {
        s.value()
    }
}

impl fmt::Display for IndividualState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Accepts either the integer form (`-1`..`2`) or the alias
/// (`passive`, `normal`, `upset`, `violent`).
impl FromStr for IndividualState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return IndividualState::try_from(v);
        }
        match s.to_ascii_lowercase().as_str() {
            "passive" => Ok(IndividualState::Passive),
            "normal" => Ok(IndividualState::Normal),
            "upset" => Ok(IndividualState::Upset),
            "violent" => Ok(IndividualState::Violent),
            _ => Err(Error::UnknownStateName(s.to_string())),
        }
    }
}

/// Ordered pair of partner states; `s1` is partner 1 (male), `s2` partner 2
/// (female).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoupleState {
    pub s1: IndividualState,
    pub s2: IndividualState,
}

pub const COUPLE_STATES: usize = 16;

impl CoupleState {
    pub const fn new(s1: IndividualState, s2: IndividualState) -> Self {
        CoupleState { s1, s2 }
    }

    /// Builds a couple state from integer values, e.g. `(1, 0)`.
    pub fn from_values(s1: i64, s2: i64) -> Result<Self> {
        Ok(CoupleState::new(s1.try_into()?, s2.try_into()?))
    }

    pub fn encode(self) -> usize {
        4 * self.s1.index() + self.s2.index()
    }

    pub fn decode(index: usize) -> Result<Self> {
        if index >= COUPLE_STATES {
            return Err(Error::IndexOutOfRange(index));
        }
        Ok(CoupleState::new(
            IndividualState::ALL[index / 4],
            IndividualState::ALL[index % 4],
        ))
    }

    /// Partners exchanged: `(s1, s2) -> (s2, s1)`.
    pub fn swapped(self) -> Self {
        CoupleState::new(self.s2, self.s1)
    }

    /// All sixteen states in index order.
    pub fn all() -> impl Iterator<Item = CoupleState> {
        (0..COUPLE_STATES).map(|i| CoupleState::new(IndividualState::ALL[i / 4], IndividualState::ALL[i % 4]))
    }
}

/// The customary starting point: partner 1 upset, partner 2 calm.
pub const MALE_UPSET: CoupleState = CoupleState::new(IndividualState::Upset, IndividualState::Normal);

impl fmt::Display for CoupleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s1, self.s2)
    }
}

/// Parses `"1,0"`, `"(1,0)"` or `"upset,normal"`.
impl FromStr for CoupleState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("couple state {s:?} must look like `s1,s2`")))?;
        Ok(CoupleState::new(a.parse()?, b.parse()?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Short-time model; the parameter is aggressiveness.
    Model1,
    /// Long-time model; the parameter is social support.
    Model2,
}

impl Model {
    pub fn number(self) -> u8 {
        match self {
            Model::Model1 => 1,
            Model::Model2 => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Model::Model1),
            2 => Ok(Model::Model2),
            other => Err(Error::Config(format!("unknown model {other}; expected 1 or 2"))),
        }
    }

    pub(crate) fn param_names(self) -> (&'static str, &'static str) {
        match self {
            Model::Model1 => ("a1", "a2"),
            Model::Model2 => ("s1", "s2"),
        }
    }
}

/// Model choice plus the per-partner parameter: aggressiveness for Model 1,
/// support for Model 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub p1: f64,
    pub p2: f64,
}

impl ModelParams {
    pub fn new(model: Model, p1: f64, p2: f64) -> Result<Self> {
        let (n1, n2) = model.param_names();
        Ok(ModelParams {
            model,
            p1: check_unit(n1, p1)?,
            p2: check_unit(n2, p2)?,
        })
    }

    pub fn model1(a1: f64, a2: f64) -> Result<Self> {
        Self::new(Model::Model1, a1, a2)
    }

    pub fn model2(s1: f64, s2: f64) -> Result<Self> {
        Self::new(Model::Model2, s1, s2)
    }

    pub fn swapped(self) -> Self {
        ModelParams { p1: self.p2, p2: self.p1, ..self }
    }

    pub fn with(self, p1: f64, p2: f64) -> Result<Self> {
        Self::new(self.model, p1, p2)
    }
}
