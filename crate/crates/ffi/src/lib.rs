//! C ABI over `couple_dynamics`.
//!
//! Kernels and sweep grids are opaque handles created by `*_new`/`*_run` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CdStatus`]; on failure [`cd_last_error`] holds a message for the calling
//! thread. Distributions cross the boundary as 16 doubles indexed by
//! `4 * (s1 + 1) + (s2 + 1)`, state sets as 16-bit masks over the same index.
//! Panics never unwind into C; they surface as `CD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use couple_dynamics::{
    absorbing_states, estimate_distribution, evolve, f_update, g_update, garden_of_eden_states, model1_basins, model2_observables,
    perceived_violence, run_sweep, sample_trajectory, tau1, tau3, CoupleKernel, CoupleState, Distribution16, Engine, Error, Field,
    IndividualState, Model, ModelParams, Scenario, SweepGrid, SweepSpec,
};

pub const CD_STATES: usize = 16;

pub const CD_SCENARIO_MODEL1_PLAIN: u32 = 0;
pub const CD_SCENARIO_MODEL1_SC_BLIND: u32 = 1;
pub const CD_SCENARIO_MODEL1_SC_GENDER: u32 = 2;
pub const CD_SCENARIO_MODEL2_PLAIN: u32 = 3;
pub const CD_SCENARIO_MODEL2_SC_BLIND: u32 = 4;
pub const CD_SCENARIO_MODEL2_SC_GENDER: u32 = 5;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    BufferTooSmall = 4,
    Runtime = 5,
    Panic = 6,
}

/// Opaque couple kernel.
pub struct CdKernel(CoupleKernel);

/// Opaque sweep result.
pub struct CdSweepGrid(SweepGrid);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CdModel1Basins {
    pub normal: f64,
    pub separation: f64,
    pub male_violence: f64,
    pub female_violence: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CdModel2Observables {
    pub normal: f64,
    pub threshold: f64,
    pub recovering: f64,
    pub violence_cycle: f64,
    pub mutual_violence: f64,
    pub separation: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CdGenderViolence {
    pub v1: f64,
    pub v2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(CdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::ParamOutOfRange { .. } | Error::IndexOutOfRange(_) | Error::InvalidState(_) => CdStatus::OutOfRange,
            Error::Io(_) => CdStatus::Runtime,
            _ => CdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside couple_dynamics");
            CdStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(CdStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn model_from(model: u8) -> Result<Model, Failure> {
    Model::from_number(model).map_err(Failure::from)
}

fn state_from(v: i8) -> Result<IndividualState, Failure> {
    IndividualState::try_from(v).map_err(Failure::from)
}

fn couple_from(index: u8) -> Result<CoupleState, Failure> {
    CoupleState::decode(index as usize).map_err(Failure::from)
}

fn scenario_from(code: u32) -> Result<Scenario, Failure> {
    Scenario::ALL
        .get(code as usize)
        .copied()
        .ok_or_else(|| Failure(CdStatus::InvalidArgument, format!("unknown scenario code {code}")))
}

unsafe fn read_distribution(probs: *const f64) -> Result<Distribution16, Failure> {
    non_null(probs, "distribution")?;
    let mut p = [0.0; CD_STATES];
    p.copy_from_slice(slice::from_raw_parts(probs, CD_STATES));
    Distribution16::from_probs(p).map_err(Failure::from)
}

unsafe fn write_distribution(d: &Distribution16, out: *mut f64) -> Result<(), Failure> {
    non_null(out, "output distribution")?;
    slice::from_raw_parts_mut(out, CD_STATES).copy_from_slice(d.probs());
    Ok(())
}

fn mask<'a>(states: impl IntoIterator<Item = &'a CoupleState>) -> u16 {
    states.into_iter().fold(0u16, |m, s| m | (1 << s.encode()))
}

unsafe fn kernel_ref<'a>(kernel: *const CdKernel) -> Result<&'a CoupleKernel, Failure> {
    non_null(kernel, "kernel")?;
    Ok(&(*kernel).0)
}

unsafe fn grid_ref<'a>(grid: *const CdSweepGrid) -> Result<&'a SweepGrid, Failure> {
    non_null(grid, "grid")?;
    Ok(&(*grid).0)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// # Safety
/// `out` must be null or point to writable storage for one `uint8_t`.
#[no_mangle]
pub unsafe extern "C" fn cd_state_encode(s1: i8, s2: i8, out: *mut u8) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = CoupleState::new(state_from(s1)?, state_from(s2)?).encode() as u8;
        Ok(())
    })
}

/// # Safety
/// `s1` and `s2` must be null or point to writable `int8_t`s.
#[no_mangle]
pub unsafe extern "C" fn cd_state_decode(index: u8, s1: *mut i8, s2: *mut i8) -> CdStatus {
    guard(|| {
        non_null(s1, "s1")?;
        non_null(s2, "s2")?;
        let s = couple_from(index)?;
        *s1 = s.s1.value();
        *s2 = s.s2.value();
        Ok(())
    })
}

/// Individual table entry `tau(next | me, partner; param)` for model 1 or 2.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn cd_tau(model: u8, next: i8, me: i8, partner: i8, param: f64, out: *mut f64) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        let (next, me, partner) = (state_from(next)?, state_from(me)?, state_from(partner)?);
        *out = match model_from(model)? {
            Model::Model1 => tau1(next, me, partner, param)?,
            Model::Model2 => tau3(next, me, partner, param)?,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be null or point to writable storage for one pointer. The
/// handle written there must be released with [`cd_kernel_free`].
#[no_mangle]
pub unsafe extern "C" fn cd_kernel_new(model: u8, p1: f64, p2: f64, out: *mut *mut CdKernel) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        let kernel = CoupleKernel::new(ModelParams::new(model_from(model)?, p1, p2)?)?;
        *out = Box::into_raw(Box::new(CdKernel(kernel)));
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a handle from [`cd_kernel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cd_kernel_free(kernel: *mut CdKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `kernel` must be a live handle; `out` a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn cd_kernel_prob(kernel: *const CdKernel, from: u8, to: u8, out: *mut f64) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        non_null(out, "out")?;
        *out = k.prob(couple_from(from)?, couple_from(to)?);
        Ok(())
    })
}

/// Copies the row-major 16x16 matrix into `out` (256 doubles).
///
/// # Safety
/// `kernel` must be a live handle; `out` must hold 256 doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_kernel_matrix(kernel: *const CdKernel, out: *mut f64) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        non_null(out, "out")?;
        let dst = slice::from_raw_parts_mut(out, CD_STATES * CD_STATES);
        for (row, chunk) in k.matrix().iter().zip(dst.chunks_exact_mut(CD_STATES)) {
            chunk.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Bit `i` set when state `i` is absorbing.
///
/// # Safety
/// `kernel` must be a live handle; `out` a writable `uint16_t`.
#[no_mangle]
pub unsafe extern "C" fn cd_kernel_absorbing_mask(kernel: *const CdKernel, out: *mut u16) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        non_null(out, "out")?;
        *out = mask(&absorbing_states(k));
        Ok(())
    })
}

/// Bit `i` set when state `i` has no predecessor other than itself.
///
/// # Safety
/// `kernel` must be a live handle; `out` a writable `uint16_t`.
#[no_mangle]
pub unsafe extern "C" fn cd_kernel_garden_of_eden_mask(kernel: *const CdKernel, exclude_self_loops: bool, out: *mut u16) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        non_null(out, "out")?;
        *out = mask(&garden_of_eden_states(k, exclude_self_loops));
        Ok(())
    })
}

/// Exact evolution of a normalized distribution by `steps` steps.
///
/// # Safety
/// `probs_in` and `probs_out` must each hold 16 doubles; they may alias.
#[no_mangle]
pub unsafe extern "C" fn cd_evolve(kernel: *const CdKernel, probs_in: *const f64, steps: usize, probs_out: *mut f64) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        let d = read_distribution(probs_in)?;
        write_distribution(&evolve(&d, k, steps), probs_out)
    })
}

/// Empirical final-state distribution of `ensemble` trajectories.
///
/// # Safety
/// `kernel` must be a live handle; `probs_out` must hold 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_estimate_distribution(
    kernel: *const CdKernel,
    start: u8,
    steps: usize,
    ensemble: usize,
    seed: u64,
    probs_out: *mut f64,
) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        let d = estimate_distribution(couple_from(start)?, k, steps, ensemble, seed)?;
        write_distribution(&d, probs_out)
    })
}

/// Writes `steps + 1` state indices into `out_states`.
///
/// # Safety
/// `out_states` must hold `out_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cd_sample_trajectory(
    kernel: *const CdKernel,
    start: u8,
    steps: usize,
    seed: u64,
    out_states: *mut u8,
    out_len: usize,
) -> CdStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        non_null(out_states, "out_states")?;
        let needed = steps.checked_add(1).ok_or_else(|| Failure(CdStatus::InvalidArgument, "steps overflow".into()))?;
        if out_len < needed {
            return Err(Failure(CdStatus::BufferTooSmall, format!("need {needed} slots, got {out_len}")));
        }
        let traj = sample_trajectory(couple_from(start)?, k, steps, seed);
        let dst = slice::from_raw_parts_mut(out_states, needed);
        for (slot, s) in dst.iter_mut().zip(&traj.states) {
            *slot = s.encode() as u8;
        }
        Ok(())
    })
}

/// # Safety
/// `probs` must hold 16 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cd_model1_basins(probs: *const f64, out: *mut CdModel1Basins) -> CdStatus {
    guard(|| {
        let d = read_distribution(probs)?;
        non_null(out, "out")?;
        let b = model1_basins(&d);
        *out = CdModel1Basins { normal: b.normal, separation: b.separation, male_violence: b.male_violence, female_violence: b.female_violence };
        Ok(())
    })
}

/// # Safety
/// `probs` must hold 16 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cd_model2_observables(probs: *const f64, support1: f64, support2: f64, out: *mut CdModel2Observables) -> CdStatus {
    guard(|| {
        let d = read_distribution(probs)?;
        non_null(out, "out")?;
        let o = model2_observables(&d, support1, support2)?;
        *out = CdModel2Observables {
            normal: o.normal,
            threshold: o.threshold,
            recovering: o.recovering,
            violence_cycle: o.violence_cycle,
            mutual_violence: o.mutual_violence,
            separation: o.separation,
        };
        Ok(())
    })
}

/// The violence measure that drives each model's feedback.
///
/// # Safety
/// `probs` must hold 16 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cd_perceived_violence(model: u8, probs: *const f64, out: *mut CdGenderViolence) -> CdStatus {
    guard(|| {
        let d = read_distribution(probs)?;
        non_null(out, "out")?;
        let v = perceived_violence(model_from(model)?, &d);
        *out = CdGenderViolence { v1: v.v1, v2: v.v2 };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn cd_f_update(a: f64, v: f64, vc: f64) -> f64 {
    f_update(a, v, vc)
}

#[no_mangle]
pub extern "C" fn cd_g_update(s: f64, v: f64, vc: f64) -> f64 {
    g_update(s, v, vc)
}

/// Runs a sweep with default settings except the given ones.
/// `ensemble = 0` selects the exact engine; `runs_per_cell = 0` keeps the
/// scenario default.
///
/// # Safety
/// `out` must be writable; release the grid with [`cd_sweep_free`].
#[no_mangle]
pub unsafe extern "C" fn cd_sweep_run(
    scenario: u32,
    resolution: usize,
    ensemble: usize,
    runs_per_cell: usize,
    seed: u64,
    out: *mut *mut CdSweepGrid,
) -> CdStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut spec = SweepSpec::new(scenario_from(scenario)?).with_resolution(resolution);
        if ensemble > 0 {
            spec.engine = Engine::MonteCarlo { ensemble_size: ensemble };
        }
        if runs_per_cell > 0 {
            spec.runs_per_cell = runs_per_cell;
        }
        spec.master_seed = seed;
        let grid = run_sweep(&spec)?;
        *out = Box::into_raw(Box::new(CdSweepGrid(grid)));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from [`cd_sweep_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cd_sweep_free(grid: *mut CdSweepGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Points per axis; 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_sweep_resolution(grid: *const CdSweepGrid) -> usize {
    grid_ref(grid).map(|g| g.resolution()).unwrap_or(0)
}

/// Number of recorded fields per cell; 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_sweep_field_count(grid: *const CdSweepGrid) -> usize {
    grid_ref(grid).map(|g| g.fields().len()).unwrap_or(0)
}

fn field_cname(field: Field) -> &'static CStr {
    match field {
        Field::Normal => c"normal",
        Field::Threshold => c"threshold",
        Field::Recovering => c"recovering",
        Field::ViolenceCycle => c"violence_cycle",
        Field::MutualViolence => c"mutual_violence",
        Field::Separation => c"separation",
        Field::MaleViolence => c"male_violence",
        Field::FemaleViolence => c"female_violence",
        Field::V1 => c"v1",
        Field::V2 => c"v2",
    }
}

/// Static name of field `k`, or null when out of range.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cd_sweep_field_name(grid: *const CdSweepGrid, k: usize) -> *const c_char {
    match grid_ref(grid) {
        Ok(g) => g.fields().get(k).map_or(std::ptr::null(), |&f| field_cname(f).as_ptr()),
        Err(_) => std::ptr::null(),
    }
}

/// Value of field `k` at cell `(i, j)`, i.e. `p1 = i / (n - 1)`,
/// `p2 = j / (n - 1)`.
///
/// # Safety
/// `grid` must be a live handle; `out` a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn cd_sweep_value(grid: *const CdSweepGrid, k: usize, i: usize, j: usize, out: *mut f64) -> CdStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        non_null(out, "out")?;
        let n = g.resolution();
        if k >= g.fields().len() || i >= n || j >= n {
            return Err(Failure(CdStatus::OutOfRange, format!("field {k} cell ({i},{j}) outside grid")));
        }
        *out = g.cell(i, j)[k];
        Ok(())
    })
}
