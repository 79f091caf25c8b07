//! Two-partner stochastic couple dynamics.
//!
//! Each partner is in one of four states (passive, normal, upset, violent)
//! and updates from a table that depends on its own state, its partner's
//! state and a personal parameter: aggressiveness in Model 1, social support
//! in Model 2. The crate provides
//!
//! * the individual tables and the 16-state couple kernel ([`kernel`]),
//! * exact evolution of the couple distribution ([`markov`]),
//! * reproducible Monte Carlo trajectories and ensembles ([`monte_carlo`]),
//! * basins, perceived violence and Model 2 path weights ([`observables`]),
//! * mean-field feedback on the parameters ([`feedback`]),
//! * parallel, deterministic phase-diagram sweeps ([`sweep`]) and their CSV
//!   and PGM output ([`output`]).
//!
//! ```
//! use couple_dynamics::{build_couple_kernel, evolve, model1_basins, Distribution16, ModelParams, MALE_UPSET};
//!
//! let kernel = build_couple_kernel(ModelParams::model1(0.1, 0.1)?)?;
//! let dist = evolve(&Distribution16::delta(MALE_UPSET), &kernel, 500);
//! let basins = model1_basins(&dist);
//! assert!(basins.normal > 0.8);
//! # Ok::<(), couple_dynamics::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod feedback;
pub mod kernel;
pub mod markov;
pub mod monte_carlo;
pub mod observables;
pub mod output;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use feedback::{f_update, g_update, self_consistent_run, Engine, FeedbackConfig, FeedbackTrace, GenderMode, TurnRecord};
pub use kernel::{absorbing_states, build_couple_kernel, garden_of_eden_states, tau1, tau3, CoupleKernel, IndividualKernel};
pub use markov::{delta_distribution, evolve, evolve_trace, evolve_until, step, Distribution16};
pub use monte_carlo::{derive_seed, estimate_distribution, sample_individual, sample_step, sample_trajectory, Trajectory};
pub use observables::{gender_violence, model1_basins, model2_observables, perceived_violence, violent_marginals, GenderViolence, Model1Basins, Model2Observables};
pub use state::{CoupleState, IndividualState, Model, ModelParams, MALE_UPSET};
pub use sweep::{compare_grids, run_sweep, Field, GridComparison, Scenario, SweepGrid, SweepSpec};
