use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use vcont_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(vcont_last_error_message()) }.to_string_lossy().into_owned()
}

fn space(weights: &[f64]) -> *mut VcontSpace {
    let mut out = ptr::null_mut();
    let status = unsafe { vcont_space_new(weights.as_ptr(), weights.len(), 1e-9, &mut out) };
    assert_eq!(status, VcontStatus::Ok, "{}", last_error());
    out
}

fn function(x: *const VcontSpace, y: *const VcontSpace, values: &[f64]) -> *mut VcontFunction {
    let mut out = ptr::null_mut();
    let status = unsafe { vcont_function_new(x, y, values.as_ptr(), values.len(), &mut out) };
    assert_eq!(status, VcontStatus::Ok, "{}", last_error());
    out
}

#[test]
fn space_lifecycle_and_validation() {
    let s = space(&[0.25, 0.75]);
    assert_eq!(unsafe { vcont_space_len(s) }, 2);
    assert_eq!(last_error(), "");
    unsafe { vcont_space_free(s) };
    unsafe { vcont_space_free(ptr::null_mut()) };
    assert_eq!(unsafe { vcont_space_len(ptr::null()) }, 0);

    let mut out = ptr::null_mut();
    let w = [0.3, 0.6];
    let status = unsafe { vcont_space_new(w.as_ptr(), 2, 1e-9, &mut out) };
    assert_eq!(status, VcontStatus::Validation);
    assert!(last_error().contains("weights sum ≠ 1"), "{}", last_error());
    assert!(out.is_null());
    let status = unsafe { vcont_space_new(ptr::null(), 2, 1e-9, &mut out) };
    assert_eq!(status, VcontStatus::NullPointer);
}

#[test]
fn single_cell_regulator_norm() {
    let x = space(&[0.1; 10]);
    let mut values = [0.0; 100];
    values[37] = 1.0;
    let f = function(x, x, &values);
    let (mut value, mut gap) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { vcont_sr_norm(f, &mut value, &mut gap) }, VcontStatus::Ok);
    assert!((value - 0.1).abs() < 1e-12 && gap.abs() < 1e-12, "{value} {gap}");
    let mut cake = f64::NAN;
    assert_eq!(unsafe { vcont_layer_cake(f, &mut cake) }, VcontStatus::Ok);
    assert!((cake - 0.1).abs() < 1e-12);
    let zero = function(x, x, &[0.0; 100]);
    let mut tau = f64::NAN;
    assert_eq!(unsafe { vcont_tau_distance(f, zero, &mut tau) }, VcontStatus::Ok);
    assert!((tau - 0.1).abs() < 1e-12, "{tau}");
    unsafe {
        vcont_function_free(f);
        vcont_function_free(zero);
        vcont_space_free(x);
    }
}

#[test]
fn thickness_and_hall() {
    let x = space(&[0.5, 1.0 / 3.0, 1.0 / 6.0]);
    let members = [1u8, 0, 0, 1, 1, 0, 0, 0, 0];
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { vcont_set_new(x, x, members.as_ptr(), 9, &mut z) }, VcontStatus::Ok);
    let mut th = f64::NAN;
    assert_eq!(unsafe { vcont_thickness(z, &mut th) }, VcontStatus::Ok);
    assert!((th - 5.0 / 6.0).abs() < 1e-12, "{th}");
    let (mut mass, mut plan) = (f64::NAN, [0.0; 9]);
    assert_eq!(unsafe { vcont_hall_mass(z, &mut mass, plan.as_mut_ptr(), 9) }, VcontStatus::Ok);
    assert!((mass - th).abs() < 1e-12);
    assert!((plan.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { vcont_hall_mass(z, &mut mass, plan.as_mut_ptr(), 4) }, VcontStatus::DimensionMismatch);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { vcont_set_new(x, x, members.as_ptr(), 4, &mut bad) }, VcontStatus::DimensionMismatch);
    unsafe {
        vcont_set_free(z);
        vcont_space_free(x);
    }
}

#[test]
fn transport_and_profile() {
    let x = space(&[1.0 / 3.0; 3]);
    let dist = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
    let (a, b) = ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
    let (mut cost, mut u) = (f64::NAN, [0.0; 3]);
    let status =
        unsafe { vcont_kantorovich(x, dist.as_ptr(), 9, a.as_ptr(), b.as_ptr(), 3, &mut cost, u.as_mut_ptr()) };
    assert_eq!(status, VcontStatus::Ok, "{}", last_error());
    assert!((cost - 2.0).abs() < 1e-12);
    assert!((u[0] - u[2] - 2.0).abs() < 1e-12);
    let heavy = [1.0, 1.0, 0.0];
    let status =
        unsafe { vcont_kantorovich(x, dist.as_ptr(), 9, a.as_ptr(), heavy.as_ptr(), 3, &mut cost, ptr::null_mut()) };
    assert_eq!(status, VcontStatus::Unbalanced);
    assert_eq!(last_error(), "marginal totals differ");

    let u8s = space(&[0.125; 8]);
    let tri: Vec<f64> = (0..64).map(|k| ((k / 8) >= (k % 8)) as u8 as f64).collect();
    let f = function(u8s, u8s, &tri);
    let (mut value, mut exact) = (f64::NAN, false);
    assert_eq!(unsafe { vcont_vc_profile(f, 4, &mut value, &mut exact) }, VcontStatus::Ok);
    assert!(exact && (value - 0.25).abs() < 1e-12, "{value}");
    assert_eq!(unsafe { vcont_vc_profile(f, 0, &mut value, &mut exact) }, VcontStatus::InvalidInput);
    unsafe {
        vcont_function_free(f);
        vcont_space_free(u8s);
        vcont_space_free(x);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(vcont_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const EXPORTS: [&str; 16] = [
    "vcont_last_error_message",
    "vcont_version",
    "vcont_space_new",
    "vcont_space_len",
    "vcont_space_free",
    "vcont_function_new",
    "vcont_function_free",
    "vcont_set_new",
    "vcont_set_free",
    "vcont_thickness",
    "vcont_hall_mass",
    "vcont_sr_norm",
    "vcont_layer_cake",
    "vcont_tau_distance",
    "vcont_vc_profile",
    "vcont_kantorovich",
];

#[test]
fn header_declares_the_api() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/vcont.h");
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.contains("#ifndef VCONT_H"));
    for name in EXPORTS {
        assert!(header.contains(&format!("{name}(")), "{name} missing from the header");
    }
    for handle in ["VcontSpace", "VcontFunction", "VcontSet"] {
        assert!(header.contains(&format!("typedef struct {handle} {handle};")), "{handle} is not opaque");
    }
    assert!(header.contains("VCONT_STATUS_OK = 0"));
    assert!(header.contains("VCONT_STATUS_PANIC = 8"));
}

#[test]
fn header_compiles_as_c() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/vcont.h");
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&path).output() else {
        eprintln!("no C compiler available; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
