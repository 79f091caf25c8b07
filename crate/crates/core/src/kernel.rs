//! Individual transition tables and the couple product kernel.
//!
//! `tau1` is the aggressiveness-driven table of Model 1 and `tau3` the
//! support-driven table of Model 2. Both are transcribed entry by entry; the
//! numeric column is what defines the chain, so e.g. Model 1's
//! "upset, spouse violent -> upset" entry is 0 even though it is labelled
//! "default".

use std::collections::BTreeSet;

use crate::error::{check_unit, Result};
use crate::state::{CoupleState, IndividualState, Model, ModelParams, COUPLE_STATES};

use IndividualState::{Normal, Passive, Upset, Violent};

/// Row of probabilities over the next state, ordered -1, 0, 1, 2.
pub type Row4 = [f64; 4];

fn model1_row(me: IndividualState, partner: IndividualState, a: f64) -> Row4 {
    match (me, partner) {
        (Passive, Normal) | (Passive, Passive) => [0.0, 1.0, 0.0, 0.0],
        (Passive, Upset) => [1.0 - a, 0.0, a, 0.0],
        (Passive, Violent) => [1.0, 0.0, 0.0, 0.0],

        (Normal, Normal) | (Normal, Passive) => [0.0, 1.0, 0.0, 0.0],
        (Normal, Upset) => [1.0 - a, 0.0, a / 4.0, 3.0 * a / 4.0],
        (Normal, Violent) => [1.0 - a, 0.0, 0.0, a],

        (Upset, Normal) => [1.0 - a, 0.0, a / 4.0, 3.0 * a / 4.0],
        (Upset, Passive) | (Upset, Upset) | (Upset, Violent) => [1.0 - a, 0.0, 0.0, a],

        (Violent, Normal) | (Violent, Upset) => [1.0 - a, 0.0, 0.0, a],
        (Violent, Passive) | (Violent, Violent) => [0.0, 0.0, 0.0, 1.0],
    }
}

fn model2_row(me: IndividualState, partner: IndividualState, s: f64) -> Row4 {
    match (me, partner) {
        (Passive, Normal) | (Passive, Passive) => [0.0, 1.0, 0.0, 0.0],
        (Passive, Upset) | (Passive, Violent) => [1.0, 0.0, 0.0, 0.0],

        (Normal, Normal) | (Normal, Upset) => [0.0, s, 1.0 - s, 0.0],
        (Normal, Passive) | (Normal, Violent) => [0.0, 1.0, 0.0, 0.0],

        (Upset, Normal) => [s, 0.0, 1.0 - s, 0.0],
        (Upset, Passive) => [0.5, 0.5, 0.0, 0.0],
        (Upset, Upset) => [s, 0.0, 0.0, 1.0 - s],
        (Upset, Violent) => [0.0, 0.0, 1.0, 0.0],

        (Violent, Normal) => [0.0, 1.0, 0.0, 0.0],
        (Violent, Passive) => [1.0, 0.0, 0.0, 0.0],
        (Violent, Upset) => [0.0, 0.0, 0.0, 1.0],
        (Violent, Violent) => [0.0, s, 0.0, 1.0 - s],
    }
}

/// Model 1 probability `tau(next | me, partner; a)`.
pub fn tau1(next: IndividualState, me: IndividualState, partner: IndividualState, a: f64) -> Result<f64> {
    let a = check_unit("a", a)?;
    Ok(model1_row(me, partner, a)[next.index()])
}

/// Model 2 probability `tau3(next | me, partner; support)`.
pub fn tau3(next: IndividualState, me: IndividualState, partner: IndividualState, support: f64) -> Result<f64> {
    let s = check_unit("s", support)?;
    Ok(model2_row(me, partner, s)[next.index()])
}

/// The full 4x4x4 table of one partner at a fixed parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct IndividualKernel {
    model: Model,
    param: f64,
    // [me][partner] -> row over next
    rows: [[Row4; 4]; 4],
}

impl IndividualKernel {
    pub fn new(model: Model, param: f64) -> Result<Self> {
        let param = check_unit(if model == Model::Model1 { "a" } else { "s" }, param)?;
        let row_fn = match model {
            Model::Model1 => model1_row,
            Model::Model2 => model2_row,
        };
        let mut rows = [[[0.0; 4]; 4]; 4];
        for me in IndividualState::ALL {
            for partner in IndividualState::ALL {
                rows[me.index()][partner.index()] = row_fn(me, partner, param);
            }
        }
        Ok(IndividualKernel { model, param, rows })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn prob(&self, next: IndividualState, me: IndividualState, partner: IndividualState) -> f64 {
        self.rows[me.index()][partner.index()][next.index()]
    }

    pub fn row(&self, me: IndividualState, partner: IndividualState) -> &Row4 {
        &self.rows[me.index()][partner.index()]
    }
}

/// One nonzero couple transition, as dumped by the audit command.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub from: CoupleState,
    pub to: CoupleState,
    pub prob: f64,
}

/// 16x16 row-stochastic couple matrix,
/// `M[(s1,s2) -> (s1',s2')] = tau(s1'|s1,s2;p1) * tau(s2'|s2,s1;p2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupleKernel {
    params: ModelParams,
    first: IndividualKernel,
    second: IndividualKernel,
    matrix: [[f64; COUPLE_STATES]; COUPLE_STATES],
}

impl CoupleKernel {
    pub fn new(params: ModelParams) -> Result<Self> {
        let params = ModelParams::new(params.model, params.p1, params.p2)?;
        let first = IndividualKernel::new(params.model, params.p1)?;
        let second = IndividualKernel::new(params.model, params.p2)?;
        let mut matrix = [[0.0; COUPLE_STATES]; COUPLE_STATES];
        for from in CoupleState::all() {
            for to in CoupleState::all() {
                // partner 2 sees partner 1 as its spouse
                matrix[from.encode()][to.encode()] =
                    first.prob(to.s1, from.s1, from.s2) * second.prob(to.s2, from.s2, from.s1);
            }
        }
        Ok(CoupleKernel { params, first, second, matrix })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn first(&self) -> &IndividualKernel {
        &self.first
    }

    pub fn second(&self) -> &IndividualKernel {
        &self.second
    }

    pub fn prob(&self, from: CoupleState, to: CoupleState) -> f64 {
        self.matrix[from.encode()][to.encode()]
    }

    pub fn row(&self, from: CoupleState) -> &[f64; COUPLE_STATES] {
        &self.matrix[from.encode()]
    }

    pub fn matrix(&self) -> &[[f64; COUPLE_STATES]; COUPLE_STATES] {
        &self.matrix
    }

    /// Nonzero entries in row-major index order.
    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        CoupleState::all().flat_map(move |from| {
            CoupleState::all().filter_map(move |to| {
                let prob = self.prob(from, to);
                (prob > 0.0).then_some(Transition { from, to, prob })
            })
        })
    }

    /// States with `M[x -> x] = 1`, reachable or not.
    pub fn fixed_states(&self) -> BTreeSet<CoupleState> {
        CoupleState::all().filter(|&x| self.prob(x, x) == 1.0).collect()
    }

    /// States that have an incoming transition from some other state.
    fn has_foreign_predecessor(&self, y: CoupleState) -> bool {
        CoupleState::all().any(|x| x != y && self.prob(x, y) > 0.0)
    }
}

pub fn build_couple_kernel(params: ModelParams) -> Result<CoupleKernel> {
    CoupleKernel::new(params)
}

/// Absorbing states of the dynamics: `M[x -> x] = 1` and `x` can actually be
/// entered from another state.
///
/// Self-trapping states with no predecessor (Model 2's `(2,1)` and `(1,2)`)
/// are garden-of-Eden states rather than attractors and are left out; use
/// [`CoupleKernel::fixed_states`] for the raw set.
pub fn absorbing_states(kernel: &CoupleKernel) -> BTreeSet<CoupleState> {
    kernel
        .fixed_states()
        .into_iter()
        .filter(|&x| kernel.has_foreign_predecessor(x))
        .collect()
}

/// Garden-of-Eden states: no incoming transition from any other state, so
/// they can only ever be initial conditions. Self-loops never count as an
/// incoming transition.
///
/// With `exclude_self_loops`, states that map onto themselves with nonzero
/// probability are dropped from the result, leaving only the transient ones
/// the chain always leaves immediately.
pub fn garden_of_eden_states(kernel: &CoupleKernel, exclude_self_loops: bool) -> BTreeSet<CoupleState> {
    CoupleState::all()
        .filter(|&y| !kernel.has_foreign_predecessor(y))
        .filter(|&y| !exclude_self_loops || kernel.prob(y, y) == 0.0)
        .collect()
}
