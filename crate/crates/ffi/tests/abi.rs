use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use couple_dynamics_ffi::*;

const NORMAL_NORMAL: u8 = 5;
const MALE_UPSET: u8 = 9;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cd_last_error()) }.to_string_lossy().into_owned()
}

fn kernel(model: u8, p1: f64, p2: f64) -> *mut CdKernel {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { cd_kernel_new(model, p1, p2, &mut k) }, CdStatus::Ok);
    assert!(!k.is_null());
    k
}

fn delta(index: u8) -> [f64; 16] {
    let mut p = [0.0; 16];
    p[index as usize] = 1.0;
    p
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(cd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn state_index_round_trip() {
    for s1 in -1i8..=2 {
        for s2 in -1i8..=2 {
            let mut idx = 99;
            assert_eq!(unsafe { cd_state_encode(s1, s2, &mut idx) }, CdStatus::Ok);
            assert_eq!(idx as i8, 4 * (s1 + 1) + (s2 + 1));
            let (mut a, mut b) = (0i8, 0i8);
            assert_eq!(unsafe { cd_state_decode(idx, &mut a, &mut b) }, CdStatus::Ok);
            assert_eq!((a, b), (s1, s2));
        }
    }
    let mut idx = 0;
    assert_eq!(unsafe { cd_state_encode(3, 0, &mut idx) }, CdStatus::OutOfRange);
    let (mut a, mut b) = (0i8, 0i8);
    assert_eq!(unsafe { cd_state_decode(16, &mut a, &mut b) }, CdStatus::OutOfRange);
}

#[test]
fn tau_entries() {
    let mut out = 0.0;
    assert_eq!(unsafe { cd_tau(1, 2, 0, 1, 0.4, &mut out) }, CdStatus::Ok);
    assert!((out - 0.3).abs() < 1e-15);
    assert_eq!(unsafe { cd_tau(2, 1, 0, 0, 0.3, &mut out) }, CdStatus::Ok);
    assert!((out - 0.7).abs() < 1e-15);
    assert_eq!(unsafe { cd_tau(1, 0, 0, 0, 1.5, &mut out) }, CdStatus::OutOfRange);
    assert!(last_error().contains("1.5"), "{}", last_error());
    assert_eq!(unsafe { cd_tau(3, 0, 0, 0, 0.5, &mut out) }, CdStatus::InvalidArgument);
    assert_eq!(unsafe { cd_tau(1, 0, 0, 0, 0.5, ptr::null_mut()) }, CdStatus::NullPointer);
}

#[test]
fn last_error_clears_after_success() {
    let mut out = 0.0;
    assert_ne!(unsafe { cd_tau(1, 0, 0, 0, -1.0, &mut out) }, CdStatus::Ok);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { cd_tau(1, 0, 0, 0, 0.5, &mut out) }, CdStatus::Ok);
    assert!(last_error().is_empty());
}

#[test]
fn kernel_matrix_is_stochastic() {
    let k = kernel(1, 0.3, 0.7);
    let mut m = [0.0; 256];
    assert_eq!(unsafe { cd_kernel_matrix(k, m.as_mut_ptr()) }, CdStatus::Ok);
    for row in m.chunks(16) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let mut p = 0.0;
    assert_eq!(unsafe { cd_kernel_prob(k, MALE_UPSET, 15, &mut p) }, CdStatus::Ok);
    assert_eq!(p, m[MALE_UPSET as usize * 16 + 15]);
    assert_eq!(unsafe { cd_kernel_prob(k, 16, 0, &mut p) }, CdStatus::OutOfRange);
    unsafe { cd_kernel_free(k) };
}

#[test]
fn kernel_new_rejects_bad_params() {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { cd_kernel_new(1, f64::NAN, 0.5, &mut k) }, CdStatus::OutOfRange);
    assert!(k.is_null());
    assert_eq!(unsafe { cd_kernel_new(1, 0.5, 0.5, ptr::null_mut()) }, CdStatus::NullPointer);
}

#[test]
fn null_handles_are_reported() {
    let mut m = [0.0; 256];
    assert_eq!(unsafe { cd_kernel_matrix(ptr::null(), m.as_mut_ptr()) }, CdStatus::NullPointer);
    unsafe { cd_kernel_free(ptr::null_mut()) };
    unsafe { cd_sweep_free(ptr::null_mut()) };
    assert_eq!(unsafe { cd_sweep_resolution(ptr::null()) }, 0);
    assert_eq!(unsafe { cd_sweep_field_count(ptr::null()) }, 0);
    assert!(unsafe { cd_sweep_field_name(ptr::null(), 0) }.is_null());
}

fn bits(indices: &[u8]) -> u16 {
    indices.iter().fold(0, |m, &i| m | 1 << i)
}

#[test]
fn structure_masks() {
    let k1 = kernel(1, 0.5, 0.5);
    let mut mask = 0u16;
    assert_eq!(unsafe { cd_kernel_absorbing_mask(k1, &mut mask) }, CdStatus::Ok);
    // (0,0), (2,2), (2,-1), (-1,2)
    assert_eq!(mask, bits(&[5, 15, 12, 3]));
    assert_eq!(unsafe { cd_kernel_garden_of_eden_mask(k1, false, &mut mask) }, CdStatus::Ok);
    assert_eq!(mask, bits(&[1, 4, 6, 7, 9, 13]));
    unsafe { cd_kernel_free(k1) };

    let k2 = kernel(2, 0.5, 0.5);
    assert_eq!(unsafe { cd_kernel_absorbing_mask(k2, &mut mask) }, CdStatus::Ok);
    assert_eq!(mask, 0);
    assert_eq!(unsafe { cd_kernel_garden_of_eden_mask(k2, false, &mut mask) }, CdStatus::Ok);
    assert_eq!(mask, bits(&[11, 14]));
    assert_eq!(unsafe { cd_kernel_garden_of_eden_mask(k2, true, &mut mask) }, CdStatus::Ok);
    assert_eq!(mask, 0);
    unsafe { cd_kernel_free(k2) };
}

#[test]
fn evolve_reaches_normal_absorption() {
    let k = kernel(1, 0.0, 0.0);
    let mut out = [0.0; 16];
    assert_eq!(unsafe { cd_evolve(k, delta(MALE_UPSET).as_ptr(), 5, out.as_mut_ptr()) }, CdStatus::Ok);
    assert_eq!(out, delta(NORMAL_NORMAL));
    let mut bad = [0.0; 16];
    bad[0] = 0.5;
    assert_eq!(unsafe { cd_evolve(k, bad.as_ptr(), 1, out.as_mut_ptr()) }, CdStatus::InvalidArgument);
    unsafe { cd_kernel_free(k) };
}

#[test]
fn evolve_in_place() {
    let k = kernel(2, 0.4, 0.6);
    let mut buf = delta(MALE_UPSET);
    let mut expected = [0.0; 16];
    assert_eq!(unsafe { cd_evolve(k, buf.as_ptr(), 7, expected.as_mut_ptr()) }, CdStatus::Ok);
    let p = buf.as_mut_ptr();
    assert_eq!(unsafe { cd_evolve(k, p, 7, p) }, CdStatus::Ok);
    assert_eq!(buf, expected);
    unsafe { cd_kernel_free(k) };
}

#[test]
fn monte_carlo_matches_exact() {
    let k = kernel(1, 0.4, 0.6);
    let mut exact = [0.0; 16];
    let mut mc = [0.0; 16];
    unsafe {
        assert_eq!(cd_evolve(k, delta(MALE_UPSET).as_ptr(), 10, exact.as_mut_ptr()), CdStatus::Ok);
        assert_eq!(cd_estimate_distribution(k, MALE_UPSET, 10, 50_000, 3, mc.as_mut_ptr()), CdStatus::Ok);
        assert_eq!(cd_estimate_distribution(k, MALE_UPSET, 10, 0, 3, mc.as_mut_ptr()), CdStatus::InvalidArgument);
        cd_kernel_free(k);
    }
    let mut again = [0.0; 16];
    let k = kernel(1, 0.4, 0.6);
    unsafe {
        cd_estimate_distribution(k, MALE_UPSET, 10, 50_000, 3, mc.as_mut_ptr());
        cd_estimate_distribution(k, MALE_UPSET, 10, 50_000, 3, again.as_mut_ptr());
        cd_kernel_free(k);
    }
    assert_eq!(mc, again);
    let tvd: f64 = 0.5 * exact.iter().zip(&mc).map(|(a, b)| (a - b).abs()).sum::<f64>();
    assert!(tvd < 0.02, "tvd {tvd}");
}

#[test]
fn trajectory_buffer() {
    let k = kernel(1, 0.5, 0.5);
    let mut states = [0xffu8; 8];
    assert_eq!(unsafe { cd_sample_trajectory(k, MALE_UPSET, 5, 1, states.as_mut_ptr(), states.len()) }, CdStatus::Ok);
    assert_eq!(states[0], MALE_UPSET);
    assert!(states[..6].iter().all(|&s| s < 16));
    assert_eq!(&states[6..], &[0xff, 0xff]);
    let mut p = 0.0;
    for w in states[..6].windows(2) {
        unsafe { cd_kernel_prob(k, w[0], w[1], &mut p) };
        assert!(p > 0.0);
    }
    assert_eq!(unsafe { cd_sample_trajectory(k, MALE_UPSET, 8, 1, states.as_mut_ptr(), states.len()) }, CdStatus::BufferTooSmall);
    let mut one = [0u8; 1];
    assert_eq!(unsafe { cd_sample_trajectory(k, 12, 0, 1, one.as_mut_ptr(), 1) }, CdStatus::Ok);
    assert_eq!(one[0], 12);
    unsafe { cd_kernel_free(k) };
}

#[test]
fn observables() {
    let mut b = CdModel1Basins::default();
    assert_eq!(unsafe { cd_model1_basins(delta(12).as_ptr(), &mut b) }, CdStatus::Ok);
    assert_eq!(b, CdModel1Basins { normal: 0.0, separation: 0.0, male_violence: 1.0, female_violence: 0.0 });

    let mut o = CdModel2Observables::default();
    assert_eq!(unsafe { cd_model2_observables(delta(NORMAL_NORMAL).as_ptr(), 0.3, 0.3, &mut o) }, CdStatus::Ok);
    assert_eq!((o.normal, o.threshold), (1.0, 0.0));
    assert_eq!(unsafe { cd_model2_observables(delta(15).as_ptr(), 0.3, 0.3, &mut o) }, CdStatus::Ok);
    assert!((o.mutual_violence - 0.49).abs() < 1e-12);
    assert!((o.separation - 0.09).abs() < 1e-12);
    assert_eq!(unsafe { cd_model2_observables(delta(0).as_ptr(), 2.0, 0.3, &mut o) }, CdStatus::OutOfRange);

    let mut v = CdGenderViolence::default();
    assert_eq!(unsafe { cd_perceived_violence(1, delta(15).as_ptr(), &mut v) }, CdStatus::Ok);
    assert_eq!(v, CdGenderViolence { v1: 1.0, v2: 1.0 });
    assert_eq!(unsafe { cd_perceived_violence(2, delta(13).as_ptr(), &mut v) }, CdStatus::Ok);
    assert_eq!(v, CdGenderViolence { v1: 1.0, v2: 0.0 });
}

#[test]
fn feedback_maps() {
    assert!((cd_f_update(0.5, 0.5, 0.1) - (1.0 - 0.5f64.powf(1.4))).abs() < 1e-15);
    assert_eq!(cd_f_update(0.37, 0.1, 0.1), 0.37);
    assert_eq!(cd_g_update(0.37, 0.1, 0.1), 0.37);
    assert!((cd_g_update(0.5, 0.5, 0.1) - 0.5f64.powf(1.4)).abs() < 1e-15);
}

#[test]
fn sweep_grid_handle() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { cd_sweep_run(CD_SCENARIO_MODEL1_PLAIN, 5, 0, 0, 0, &mut g) }, CdStatus::Ok);
    unsafe {
        assert_eq!(cd_sweep_resolution(g), 5);
        assert_eq!(cd_sweep_field_count(g), 6);
        let names: Vec<_> = (0..6).map(|k| CStr::from_ptr(cd_sweep_field_name(g, k)).to_str().unwrap()).collect();
        assert_eq!(names, ["normal", "separation", "male_violence", "female_violence", "v1", "v2"]);
        assert!(cd_sweep_field_name(g, 6).is_null());
        let mut x = 0.0;
        assert_eq!(cd_sweep_value(g, 0, 0, 0, &mut x), CdStatus::Ok);
        assert!(x > 0.99, "normal at (0,0) is {x}");
        let mut sum = 0.0;
        for k in 0..4 {
            cd_sweep_value(g, k, 4, 4, &mut x);
            sum += x;
        }
        assert!((sum - 1.0).abs() < 1e-9);
        assert_eq!(cd_sweep_value(g, 0, 5, 0, &mut x), CdStatus::OutOfRange);
        assert_eq!(cd_sweep_value(g, 9, 0, 0, &mut x), CdStatus::OutOfRange);
        cd_sweep_free(g);
    }
    assert_eq!(unsafe { cd_sweep_run(42, 5, 0, 0, 0, &mut g) }, CdStatus::InvalidArgument);
    assert_eq!(unsafe { cd_sweep_run(CD_SCENARIO_MODEL2_PLAIN, 1, 0, 0, 0, &mut g) }, CdStatus::InvalidArgument);
}

#[test]
fn header_is_present_and_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/couple_dynamics.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for sym in ["cd_kernel_new", "cd_kernel_free", "cd_sweep_run", "cd_last_error", "CD_STATUS_OK", "CD_STATUS_PANIC"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"]).arg(&header).status() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success(), "header failed to compile");
}

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let archive = profile_dir.join("libcouple_dynamics_ffi.a");
    assert!(archive.exists(), "{} not built", archive.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let Ok(status) = Command::new("cc")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    else {
        eprintln!("no C compiler; link check skipped");
        return;
    };
    assert!(status.success(), "C smoke program failed to build");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
    assert!(text.contains("a1"), "{text}");
}

