//! Stochastic trajectories of single couples.
//!
//! Each partner draws one uniform number per step, partner 1 first, and the
//! new state is picked by comparing it against the cumulative row of its
//! table in the order -1, 0, 1, 2. Both draws condition on the *old* pair.
//!
//! Streams are derived as `derive_seed(master, [index, ...])` and fed to a
//! ChaCha8 generator, so an ensemble gives the same counts no matter how the
//! trajectories are split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{CoupleKernel, IndividualKernel};
use crate::markov::Distribution16;
use crate::state::{CoupleState, IndividualState, COUPLE_STATES};

pub type TrajectoryRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a master seed and a path of indices, e.g. `(cell_i, cell_j, run)`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |h, &k| splitmix64(h ^ splitmix64(k)))
}

pub fn rng_from_seed(seed: u64) -> TrajectoryRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Picks the next state of one partner from a uniform draw in `[0, 1)`.
///
/// The final "otherwise" branch lands on the last outcome with nonzero
/// probability, which is `2` whenever `2` is possible; this keeps rounding in
/// the cumulative sum from selecting an impossible state.
pub fn sample_individual(me: IndividualState, partner: IndividualState, kernel: &IndividualKernel, r: f64) -> IndividualState {
    let row = kernel.row(me, partner);
    let mut cumulative = 0.0;
    for (i, &p) in row.iter().enumerate().take(3) {
        cumulative += p;
        if r < cumulative {
            return IndividualState::ALL[i];
        }
    }
    let last = row.iter().rposition(|&p| p > 0.0).unwrap_or(3);
    IndividualState::ALL[last]
}

/// Parallel update of both partners from the old pair.
pub fn sample_step<R: Rng + ?Sized>(state: CoupleState, kernel: &CoupleKernel, rng: &mut R) -> CoupleState {
    let r1: f64 = rng.gen();
    let r2: f64 = rng.gen();
    CoupleState::new(
        sample_individual(state.s1, state.s2, kernel.first(), r1),
        sample_individual(state.s2, state.s1, kernel.second(), r2),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub seed: u64,
    pub states: Vec<CoupleState>,
}

impl Trajectory {
    pub fn start(&self) -> CoupleState {
        self.states[0]
    }

    pub fn last(&self) -> CoupleState {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Product of the kernel entries along the path.
    pub fn path_probability(&self, kernel: &CoupleKernel) -> f64 {
        path_probability(&self.states, kernel)
    }

    /// One line per time step: `t=<k>, s1=<v> s2=<v>`.
    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for (t, s) in self.states.iter().enumerate() {
            out.push_str(&format!("t={t}, s1={} s2={}\n", s.s1, s.s2));
        }
        out
    }

    /// Errors on the first step the kernel forbids.
    pub fn check_against(&self, kernel: &CoupleKernel) -> Result<()> {
        for w in self.states.windows(2) {
            if kernel.prob(w[0], w[1]) <= 0.0 {
                return Err(Error::ImpossibleTransition { from: w[0], to: w[1] });
            }
        }
        Ok(())
    }
}

pub fn path_probability(states: &[CoupleState], kernel: &CoupleKernel) -> f64 {
    states.windows(2).map(|w| kernel.prob(w[0], w[1])).product()
}

pub fn sample_trajectory(start: CoupleState, kernel: &CoupleKernel, steps: usize, seed: u64) -> Trajectory {
    let mut rng = rng_from_seed(seed);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    let mut current = start;
    for _ in 0..steps {
        current = sample_step(current, kernel, &mut rng);
        states.push(current);
    }
    Trajectory { seed, states }
}

fn final_state(start: CoupleState, kernel: &CoupleKernel, steps: usize, seed: u64) -> CoupleState {
    let mut rng = rng_from_seed(seed);
    (0..steps).fold(start, |s, _| sample_step(s, kernel, &mut rng))
}

/// Final-state counts of `ensemble_size` trajectories; trajectory `k` uses
/// `derive_seed(master_seed, [k])`.
pub fn ensemble_counts(start: CoupleState, kernel: &CoupleKernel, steps: usize, ensemble_size: usize, master_seed: u64) -> [u64; COUPLE_STATES] {
    (0..ensemble_size as u64)
        .into_par_iter()
        .fold(
            || [0u64; COUPLE_STATES],
            |mut acc, k| {
                let end = final_state(start, kernel, steps, derive_seed(master_seed, &[k]));
                acc[end.encode()] += 1;
                acc
            },
        )
        .reduce(
            || [0u64; COUPLE_STATES],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Empirical distribution of the state reached after `steps` steps.
pub fn estimate_distribution(start: CoupleState, kernel: &CoupleKernel, steps: usize, ensemble_size: usize, master_seed: u64) -> Result<Distribution16> {
    if ensemble_size == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    let counts = ensemble_counts(start, kernel, steps, ensemble_size, master_seed);
    let n = ensemble_size as f64;
    let mut p = [0.0; COUPLE_STATES];
    for (slot, c) in p.iter_mut().zip(counts) {
        *slot = c as f64 / n;
    }
    Ok(Distribution16::from_raw(p))
}
