//! Parameter-plane scans over `(p1, p2)` in `[0, 1]^2`.
//!
//! Cell `(i, j)` sits at `p1 = i / (n - 1)`, `p2 = j / (n - 1)`. Cells are
//! evaluated in parallel and collected positionally; stochastic runs use
//! `derive_seed(master, [i, j, run])`, so the grid does not depend on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::{self_consistent_run, Engine, FeedbackConfig, GenderMode};
use crate::kernel::CoupleKernel;
use crate::markov::Distribution16;
use crate::monte_carlo::derive_seed;
use crate::observables::{model1_basins, model2_observables, perceived_violence};
use crate::state::{CoupleState, Model, ModelParams, MALE_UPSET};

pub const MAX_RESOLUTION: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Model1Plain,
    Model1ScBlind,
    Model1ScGender,
    Model2Plain,
    Model2ScBlind,
    Model2ScGender,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Model1Plain,
        Scenario::Model1ScBlind,
        Scenario::Model1ScGender,
        Scenario::Model2Plain,
        Scenario::Model2ScBlind,
        Scenario::Model2ScGender,
    ];

    pub fn model(self) -> Model {
        match self {
            Scenario::Model1Plain | Scenario::Model1ScBlind | Scenario::Model1ScGender => Model::Model1,
            _ => Model::Model2,
        }
    }

    /// `None` for plain scans, the feedback mode for self-consistent ones.
    pub fn feedback(self) -> Option<GenderMode> {
        match self {
            Scenario::Model1Plain | Scenario::Model2Plain => None,
            Scenario::Model1ScBlind | Scenario::Model2ScBlind => Some(GenderMode::Blind),
            Scenario::Model1ScGender | Scenario::Model2ScGender => Some(GenderMode::Specific),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Model1Plain => "model1-plain",
            Scenario::Model1ScBlind => "model1-sc-blind",
            Scenario::Model1ScGender => "model1-sc-gender",
            Scenario::Model2Plain => "model2-plain",
            Scenario::Model2ScBlind => "model2-sc-blind",
            Scenario::Model2ScGender => "model2-sc-gender",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

/// A recorded observable. Model 1 cells carry the four basins, Model 2 cells
/// the six path weights; both carry the perceived violence `v1`, `v2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Normal,
    Threshold,
    Recovering,
    ViolenceCycle,
    MutualViolence,
    Separation,
    MaleViolence,
    FemaleViolence,
    V1,
    V2,
}

const MODEL1_FIELDS: [Field; 6] = [Field::Normal, Field::Separation, Field::MaleViolence, Field::FemaleViolence, Field::V1, Field::V2];
const MODEL2_FIELDS: [Field; 8] = [
    Field::Normal,
    Field::Threshold,
    Field::Recovering,
    Field::ViolenceCycle,
    Field::MutualViolence,
    Field::Separation,
    Field::V1,
    Field::V2,
];

impl Field {
    /// Recorded fields in column order.
    pub fn for_model(model: Model) -> &'static [Field] {
        match model {
            Model::Model1 => &MODEL1_FIELDS,
            Model::Model2 => &MODEL2_FIELDS,
        }
    }

    /// Fields that compete for a cell's dominant phase (excludes `v1`, `v2`).
    pub fn phases(model: Model) -> &'static [Field] {
        let all = Field::for_model(model);
        &all[..all.len() - 2]
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Normal => "normal",
            Field::Threshold => "threshold",
            Field::Recovering => "recovering",
            Field::ViolenceCycle => "violence_cycle",
            Field::MutualViolence => "mutual_violence",
            Field::Separation => "separation",
            Field::MaleViolence => "male_violence",
            Field::FemaleViolence => "female_violence",
            Field::V1 => "v1",
            Field::V2 => "v2",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MODEL2_FIELDS
            .iter()
            .chain(MODEL1_FIELDS.iter())
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown field {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub resolution: usize,
    pub runs_per_cell: usize,
    pub engine: Engine,
    pub master_seed: u64,
    /// `vc`, `inner_steps` and `turns` for self-consistent scenarios; the
    /// gender mode is taken from the scenario.
    pub feedback: FeedbackConfig,
    /// Evolution length for plain scenarios.
    pub plain_steps: usize,
    pub start: CoupleState,
}

impl SweepSpec {
    pub fn new(scenario: Scenario) -> Self {
        let plain = scenario.feedback().is_none();
        SweepSpec {
            scenario,
            resolution: 51,
            runs_per_cell: if plain { 1 } else { 20 },
            engine: Engine::Exact,
            master_seed: 0,
            feedback: FeedbackConfig::default(),
            // Model 1 is read at absorption, Model 2 after the usual transient
            plain_steps: if scenario.model() == Model::Model1 { 500 } else { 20 },
            start: MALE_UPSET,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_RESOLUTION).contains(&self.resolution) {
            return Err(Error::Config(format!("resolution {} outside 2..={MAX_RESOLUTION}", self.resolution)));
        }
        if self.runs_per_cell == 0 {
            return Err(Error::Config("runs_per_cell must be at least 1".into()));
        }
        if let Engine::MonteCarlo { ensemble_size: 0 } = self.engine {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        if self.scenario.feedback().is_some() {
            self.feedback.validate()?;
        }
        Ok(())
    }

    pub fn axis_value(&self, i: usize) -> f64 {
        i as f64 / (self.resolution - 1) as f64
    }

    /// Exact runs are identical, so only one is evaluated per cell.
    fn effective_runs(&self) -> usize {
        if self.engine.is_stochastic() {
            self.runs_per_cell
        } else {
            1
        }
    }
}

fn record_values(model: Model, dist: &Distribution16, params: ModelParams) -> Result<Vec<f64>> {
    let v = perceived_violence(model, dist);
    Ok(match model {
        Model::Model1 => {
            let b = model1_basins(dist);
            vec![b.normal, b.separation, b.male_violence, b.female_violence, v.v1, v.v2]
        }
        Model::Model2 => {
            let o = model2_observables(dist, params.p1, params.p2)?;
            vec![o.normal, o.threshold, o.recovering, o.violence_cycle, o.mutual_violence, o.separation, v.v1, v.v2]
        }
    })
}

fn evaluate_run(spec: &SweepSpec, params: ModelParams, seed: u64) -> Result<Vec<f64>> {
    let model = spec.scenario.model();
    match spec.scenario.feedback() {
        None => {
            let kernel = CoupleKernel::new(params)?;
            let dist = spec.engine.distribution(&kernel, spec.start, spec.plain_steps, seed)?;
            record_values(model, &dist, params)
        }
        Some(gender) => {
            let cfg = FeedbackConfig { gender, engine: spec.engine, ..spec.feedback };
            let trace = self_consistent_run(params, &cfg, spec.start, seed)?;
            let last = trace.last();
            record_values(model, &last.distribution, last.params)
        }
    }
}

fn evaluate_cell(spec: &SweepSpec, i: usize, j: usize) -> Result<Vec<f64>> {
    let params = ModelParams::new(spec.scenario.model(), spec.axis_value(i), spec.axis_value(j))?;
    let runs = spec.effective_runs();
    let mut acc = vec![0.0; Field::for_model(params.model).len()];
    for run in 0..runs {
        let seed = derive_seed(spec.master_seed, &[i as u64, j as u64, run as u64]);
        for (a, v) in acc.iter_mut().zip(evaluate_run(spec, params, seed)?) {
            *a += v;
        }
    }
    if runs > 1 {
        let n = runs as f64;
        acc.iter_mut().for_each(|a| *a /= n);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    fields: &'static [Field],
    // row-major over (i, j), then field
    values: Vec<f64>,
}

impl SweepGrid {
    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    pub fn model(&self) -> Model {
        self.spec.scenario.model()
    }

    pub fn fields(&self) -> &'static [Field] {
        self.fields
    }

    pub fn phases(&self) -> &'static [Field] {
        Field::phases(self.model())
    }

    fn field_index(&self, field: Field) -> Option<usize> {
        self.fields.iter().position(|&f| f == field)
    }

    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let n = self.fields.len();
        let start = (i * self.resolution() + j) * n;
        &self.values[start..start + n]
    }

    pub fn value(&self, field: Field, i: usize, j: usize) -> Option<f64> {
        self.field_index(field).map(|k| self.cell(i, j)[k])
    }

    /// `resolution x resolution` matrix of one field, rows indexed by `p1`.
    pub fn field_matrix(&self, field: Field) -> Option<Vec<Vec<f64>>> {
        let k = self.field_index(field)?;
        let n = self.resolution();
        Some((0..n).map(|i| (0..n).map(|j| self.cell(i, j)[k]).collect()).collect())
    }

    /// Phase with the largest value in the cell; earlier fields win ties.
    pub fn dominant(&self, i: usize, j: usize) -> Field {
        let cell = self.cell(i, j);
        let mut best = 0;
        for k in 1..self.phases().len() {
            if cell[k] > cell[best] {
                best = k;
            }
        }
        self.fields[best]
    }

    /// Number of cells each phase dominates, in phase order.
    pub fn dominance_counts(&self) -> Vec<(Field, usize)> {
        let n = self.resolution();
        let mut counts: Vec<(Field, usize)> = self.phases().iter().map(|&f| (f, 0)).collect();
        for i in 0..n {
            for j in 0..n {
                let d = self.dominant(i, j);
                if let Some(slot) = counts.iter_mut().find(|(f, _)| *f == d) {
                    slot.1 += 1;
                }
            }
        }
        counts
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.resolution();
        (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)))
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let n = spec.resolution;
    let fields = Field::for_model(spec.scenario.model());
    let cells: Vec<Vec<f64>> = (0..n * n)
        .into_par_iter()
        .map(|c| evaluate_cell(spec, c / n, c % n))
        .collect::<Result<_>>()?;
    Ok(SweepGrid { spec: spec.clone(), fields, values: cells.concat() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridComparison {
    /// Cells of the first grid whose dominant phase is one of the fields.
    pub dominant_in_first: usize,
    pub dominant_in_second: usize,
    /// Sum over cells and fields of `|g1 - g2|`.
    pub l1_difference: f64,
    /// Cells whose dominant phase differs between the grids (any phase).
    pub dominance_changes: usize,
}

/// Compares two grids of the same model and resolution on a set of fields
/// (a single field is a one-element slice).
pub fn compare_grids(first: &SweepGrid, second: &SweepGrid, fields: &[Field]) -> Result<GridComparison> {
    if first.resolution() != second.resolution() || first.model() != second.model() {
        return Err(Error::ShapeMismatch {
            left: format!("{} at {}x{}", first.spec.scenario, first.resolution(), first.resolution()),
            right: format!("{} at {}x{}", second.spec.scenario, second.resolution(), second.resolution()),
        });
    }
    let mut cmp = GridComparison { dominant_in_first: 0, dominant_in_second: 0, l1_difference: 0.0, dominance_changes: 0 };
    for (i, j) in first.cells() {
        let d1 = first.dominant(i, j);
        let d2 = second.dominant(i, j);
        cmp.dominant_in_first += fields.contains(&d1) as usize;
        cmp.dominant_in_second += fields.contains(&d2) as usize;
        cmp.dominance_changes += (d1 != d2) as usize;
        for &f in fields {
            let a = first.value(f, i, j).ok_or_else(|| Error::Config(format!("field {f} not recorded for {}", first.spec.scenario)))?;
            let b = second.value(f, i, j).expect("same model records the same fields");
            cmp.l1_difference += (a - b).abs();
        }
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: Scenario, n: usize) -> SweepGrid {
        run_sweep(&SweepSpec::new(scenario).with_resolution(n)).unwrap()
    }

    #[test]
    fn model1_plain_corners() {
        let g = small(Scenario::Model1Plain, 11);
        assert_eq!(g.value(Field::Normal, 0, 0), Some(1.0));
        assert!((g.value(Field::Separation, 10, 10).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(g.dominant(9, 1), Field::MaleViolence);
        assert_eq!(g.dominant(1, 9), Field::FemaleViolence);
    }

    #[test]
    fn model2_plain_high_support_is_normal() {
        let g = small(Scenario::Model2Plain, 11);
        assert_eq!(g.dominant(9, 9), Field::Normal);
        assert_eq!(g.value(Field::Threshold, 9, 9).map(|v| v >= 0.0), Some(true));
    }

    #[test]
    fn axis_includes_endpoints() {
        let spec = SweepSpec::new(Scenario::Model1Plain).with_resolution(5);
        assert_eq!(spec.axis_value(0), 0.0);
        assert_eq!(spec.axis_value(2), 0.5);
        assert_eq!(spec.axis_value(4), 1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(run_sweep(&SweepSpec::new(Scenario::Model1Plain).with_resolution(1)).is_err());
        assert!(run_sweep(&SweepSpec::new(Scenario::Model1Plain).with_resolution(202)).is_err());
        let mut spec = SweepSpec::new(Scenario::Model2ScBlind).with_resolution(3);
        spec.runs_per_cell = 0;
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn identical_grids_compare_equal() {
        let g = small(Scenario::Model2Plain, 6);
        let c = compare_grids(&g, &g, Field::phases(Model::Model2)).unwrap();
        assert_eq!(c.l1_difference, 0.0);
        assert_eq!(c.dominance_changes, 0);
        assert_eq!(c.dominant_in_first, 36);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = small(Scenario::Model1Plain, 4);
        let b = small(Scenario::Model1Plain, 5);
        let c = small(Scenario::Model2Plain, 4);
        assert!(matches!(compare_grids(&a, &b, &[Field::Normal]), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(compare_grids(&a, &c, &[Field::Normal]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn monte_carlo_sweep_reproducible_across_threads() {
        let mut spec = SweepSpec::new(Scenario::Model1ScGender).with_resolution(4);
        spec.engine = Engine::MonteCarlo { ensemble_size: 50 };
        spec.runs_per_cell = 2;
        spec.feedback.turns = 3;
        spec.master_seed = 17;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_sweep(&spec).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn parse_names() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert_eq!("violence_cycle".parse::<Field>().unwrap(), Field::ViolenceCycle);
        assert!("nope".parse::<Scenario>().is_err());
    }
}
