//! Exact evolution of the couple distribution,
//! `P(y; t+1) = sum_x M[x -> y] P(x; t)`.
//!
//! No renormalization is applied between steps; drift is left visible.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::kernel::CoupleKernel;
use crate::state::{CoupleState, COUPLE_STATES};

/// Probability vector over the sixteen couple states, indexed by
/// [`CoupleState::encode`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distribution16([f64; COUPLE_STATES]);

const NORMALIZATION_TOL: f64 = 1e-9;

impl Distribution16 {
    pub fn delta(state: CoupleState) -> Self {
        let mut p = [0.0; COUPLE_STATES];
        p[state.encode()] = 1.0;
        Distribution16(p)
    }

    pub fn uniform() -> Self {
        Distribution16([1.0 / COUPLE_STATES as f64; COUPLE_STATES])
    }

    /// Checked constructor: entries non-negative and summing to one (1e-9).
    pub fn from_probs(p: [f64; COUPLE_STATES]) -> Result<Self> {
        if let Some(i) = p.iter().position(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {i} = {}", p[i])));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("sum = {total}")));
        }
        Ok(Distribution16(p))
    }

    /// Unchecked; used for empirical frequencies and mixtures.
    pub(crate) fn from_raw(p: [f64; COUPLE_STATES]) -> Self {
        Distribution16(p)
    }

    pub fn probs(&self) -> &[f64; COUPLE_STATES] {
        &self.0
    }

    pub fn prob(&self, state: CoupleState) -> f64 {
        self.0[state.encode()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn l1_distance(&self, other: &Distribution16) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Total-variation distance, half the L1 distance.
    pub fn tvd(&self, other: &Distribution16) -> f64 {
        0.5 * self.l1_distance(other)
    }

    /// `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Distribution16, w: f64) -> Distribution16 {
        let mut p = [0.0; COUPLE_STATES];
        for (i, slot) in p.iter_mut().enumerate() {
            *slot = w * self.0[i] + (1.0 - w) * other.0[i];
        }
        Distribution16(p)
    }

    /// Total mass on a set of states.
    pub fn mass_on<'a>(&self, states: impl IntoIterator<Item = &'a CoupleState>) -> f64 {
        states.into_iter().map(|&s| self.prob(s)).sum()
    }

    /// One step of the chain: p' = p M.
    pub fn step(&self, kernel: &CoupleKernel) -> Distribution16 {
        let m = kernel.matrix();
        let mut next = [0.0; COUPLE_STATES];
        for (x, &px) in self.0.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, slot) in next.iter_mut().enumerate() {
                *slot += m[x][y] * px;
            }
        }
        Distribution16(next)
    }
}

impl Index<CoupleState> for Distribution16 {
    type Output = f64;

    fn index(&self, state: CoupleState) -> &f64 {
        &self.0[state.encode()]
    }
}

pub fn delta_distribution(state: CoupleState) -> Distribution16 {
    Distribution16::delta(state)
}

pub fn step(dist: &Distribution16, kernel: &CoupleKernel) -> Distribution16 {
    dist.step(kernel)
}

/// `steps`-fold application of [`step`]; `steps = 0` returns `dist0`.
pub fn evolve(dist0: &Distribution16, kernel: &CoupleKernel, steps: usize) -> Distribution16 {
    (0..steps).fold(*dist0, |p, _| p.step(kernel))
}

/// Like [`evolve`], but stops as soon as one step moves the distribution by
/// less than `tol` in L1. Returns the distribution and the number of steps
/// actually taken.
pub fn evolve_until(dist0: &Distribution16, kernel: &CoupleKernel, max_steps: usize, tol: f64) -> (Distribution16, usize) {
    let mut p = *dist0;
    for t in 0..max_steps {
        let next = p.step(kernel);
        let moved = next.l1_distance(&p);
        p = next;
        if moved < tol {
            return (p, t + 1);
        }
    }
    (p, max_steps)
}

/// Every intermediate distribution, `t = 0..=steps`.
pub fn evolve_trace(dist0: &Distribution16, kernel: &CoupleKernel, steps: usize) -> Vec<Distribution16> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*dist0);
    for t in 0..steps {
        let next = out[t].step(kernel);
        out.push(next);
    }
    out
}
