//! C ABI over the float regime of `vcont`.
//!
//! Objects are opaque handles created by `vcont_*_new` and released by the
//! matching `vcont_*_free`. Every fallible call returns a [`VcontStatus`];
//! on failure `vcont_last_error_message` describes the error for the
//! calling thread. Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use vcont::{
    kantorovich, layer_cake_integral, max_bistochastic_mass, sr_norm, tau_distance, thickness, DiscreteSpace, Error,
    Grid, MassView, MetricMatrix, ProductFunction, ProductSet, SpaceRef, Tol,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcontStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    Validation = 4,
    Unbalanced = 5,
    TooLarge = 6,
    Internal = 7,
    Panic = 8,
}

/// A finite probability space.
pub struct VcontSpace(SpaceRef<f64>);

/// A real function on a product of two spaces.
pub struct VcontFunction(ProductFunction<f64>);

/// A subset of a product of two spaces.
pub struct VcontSet(ProductSet<f64>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(VcontStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch(_) => VcontStatus::DimensionMismatch,
            Error::Validation { .. } | Error::InvalidSemimetric(_) | Error::NotNormalized(_) => VcontStatus::Validation,
            Error::UnbalancedMarginals => VcontStatus::Unbalanced,
            Error::TooLarge(_) => VcontStatus::TooLarge,
            Error::Internal(_) => VcontStatus::Internal,
            _ => VcontStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(VcontStatus::NullPointer, format!("{what} is null"))
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VcontStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            VcontStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("panic inside vcont");
            VcontStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_all(out: *mut f64, len: usize, values: &[f64], what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Ok(());
    }
    if len != values.len() {
        return Err(Failure(VcontStatus::DimensionMismatch, format!("{what} needs {} entries", values.len())));
    }
    std::slice::from_raw_parts_mut(out, len).copy_from_slice(values);
    Ok(())
}

fn grid(rows: usize, cols: usize, values: &[f64]) -> Result<Grid<f64>, Failure> {
    if values.len() != rows * cols {
        return Err(Failure(
            VcontStatus::DimensionMismatch,
            format!("expected {rows} x {cols} = {} entries, got {}", rows * cols, values.len()),
        ));
    }
    Ok(Grid::from_fn(rows, cols, |i, j| values[i * cols + j]))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `vcont_*` call on this thread.
#[no_mangle]
pub extern "C" fn vcont_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vcont_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a space with unlabelled atoms.
///
/// # Safety
/// `weights` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_space_new(
    weights: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut VcontSpace,
) -> VcontStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Failure(VcontStatus::InvalidInput, "tolerance must be positive".into()));
        }
        let w = slice(weights, len, "weights")?.to_vec();
        let labels = (0..len).map(|i| i.to_string()).collect();
        let space = DiscreteSpace::raw(labels, w).with_tol(Tol(tol)).validated()?;
        write(out, Box::into_raw(Box::new(VcontSpace(space.into_ref()))), "out")
    })
}

/// Number of atoms; 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle from `vcont_space_new`.
#[no_mangle]
pub unsafe extern "C" fn vcont_space_len(space: *const VcontSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `space` must be null or a live handle from `vcont_space_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn vcont_space_free(space: *mut VcontSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Creates `f` on `x × y` from `len = |x|·|y|` row-major values.
///
/// # Safety
/// `x` and `y` must be live space handles, `values` must point to `len`
/// readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_function_new(
    x: *const VcontSpace,
    y: *const VcontSpace,
    values: *const f64,
    len: usize,
    out: *mut *mut VcontFunction,
) -> VcontStatus {
    guard(|| {
        let (x, y) = (handle(x, "x")?, handle(y, "y")?);
        let g = grid(x.0.len(), y.0.len(), slice(values, len, "values")?)?;
        let f = ProductFunction::new(x.0.clone(), y.0.clone(), g)?;
        write(out, Box::into_raw(Box::new(VcontFunction(f))), "out")
    })
}

/// # Safety
/// `f` must be null or a live handle from `vcont_function_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn vcont_function_free(f: *mut VcontFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Creates `Z ⊂ x × y`; a nonzero byte marks a member cell.
///
/// # Safety
/// `x` and `y` must be live space handles, `members` must point to `len`
/// readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_set_new(
    x: *const VcontSpace,
    y: *const VcontSpace,
    members: *const u8,
    len: usize,
    out: *mut *mut VcontSet,
) -> VcontStatus {
    guard(|| {
        let (x, y) = (handle(x, "x")?, handle(y, "y")?);
        let (n, m) = (x.0.len(), y.0.len());
        let cells = slice(members, len, "members")?;
        if cells.len() != n * m {
            return Err(Failure(VcontStatus::DimensionMismatch, format!("expected {} cells", n * m)));
        }
        let z = ProductSet::from_fn(x.0.clone(), y.0.clone(), |i, j| cells[i * m + j] != 0);
        write(out, Box::into_raw(Box::new(VcontSet(z))), "out")
    })
}

/// # Safety
/// `set` must be null or a live handle from `vcont_set_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn vcont_set_free(set: *mut VcontSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Thickness of `set`.
///
/// # Safety
/// `set` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_thickness(set: *const VcontSet, out_value: *mut f64) -> VcontStatus {
    guard(|| {
        let z = handle(set, "set")?;
        write(out_value, thickness(&z.0).value, "out_value")
    })
}

/// Largest mass a bistochastic plan puts on `set`. When `plan_out` is not
/// null it receives the `|x|·|y|` row-major plan.
///
/// # Safety
/// `set` must be a live handle, `out_mass` writable and `plan_out` null or
/// writable for `plan_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vcont_hall_mass(
    set: *const VcontSet,
    out_mass: *mut f64,
    plan_out: *mut f64,
    plan_len: usize,
) -> VcontStatus {
    guard(|| {
        let z = handle(set, "set")?;
        let h = max_bistochastic_mass(&z.0);
        write_all(plan_out, plan_len, h.plan.mass().as_slice(), "plan_out")?;
        write(out_mass, h.mass, "out_mass")
    })
}

/// Regulator norm of `f` and the duality gap of its certificates.
///
/// # Safety
/// `f` must be a live handle; `out_value` writable; `out_gap` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_sr_norm(f: *const VcontFunction, out_value: *mut f64, out_gap: *mut f64) -> VcontStatus {
    guard(|| {
        let f = handle(f, "f")?;
        let r = sr_norm(&f.0);
        if !out_gap.is_null() {
            out_gap.write(r.gap());
        }
        write(out_value, r.value, "out_value")
    })
}

/// Integral over levels of the thickness of the level sets of `|f|`.
///
/// # Safety
/// `f` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_layer_cake(f: *const VcontFunction, out_value: *mut f64) -> VcontStatus {
    guard(|| {
        let f = handle(f, "f")?;
        write(out_value, layer_cake_integral(&f.0), "out_value")
    })
}

/// Distance in thickness between `f` and `g`.
///
/// # Safety
/// `f` and `g` must be live handles and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_tau_distance(
    f: *const VcontFunction,
    g: *const VcontFunction,
    out_value: *mut f64,
) -> VcontStatus {
    guard(|| {
        let (f, g) = (handle(f, "f")?, handle(g, "g")?);
        write(out_value, tau_distance(&f.0, &g.0)?.value, "out_value")
    })
}

/// Least partition error with `classes` blocks per side; `out_exact`
/// reports whether the value is exact or a heuristic upper bound.
///
/// # Safety
/// `f` must be a live handle; `out_value` and `out_exact` writable.
#[no_mangle]
pub unsafe extern "C" fn vcont_vc_profile(
    f: *const VcontFunction,
    classes: usize,
    out_value: *mut f64,
    out_exact: *mut bool,
) -> VcontStatus {
    guard(|| {
        let f = handle(f, "f")?;
        if classes == 0 {
            return Err(Failure(VcontStatus::InvalidInput, "classes must be at least 1".into()));
        }
        if out_value.is_null() || out_exact.is_null() {
            return Err(null("output pointer"));
        }
        let p = vcont::vc::vc_profile(&f.0, classes);
        out_exact.write(p.exact);
        write(out_value, p.value, "out_value")
    })
}

/// Optimal transport cost between `mu1` and `mu2` under the semimetric
/// `dist` on `space`. When `potential_out` is not null it receives a
/// 1-Lipschitz optimal potential.
///
/// # Safety
/// `space` must be a live handle; `dist` readable for `dist_len` doubles;
/// `mu1`, `mu2` readable for `len` doubles; `out_cost` writable;
/// `potential_out` null or writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vcont_kantorovich(
    space: *const VcontSpace,
    dist: *const f64,
    dist_len: usize,
    mu1: *const f64,
    mu2: *const f64,
    len: usize,
    out_cost: *mut f64,
    potential_out: *mut f64,
) -> VcontStatus {
    guard(|| {
        let space = handle(space, "space")?;
        let n = space.0.len();
        let rho = MetricMatrix::new(space.0.clone(), grid(n, n, slice(dist, dist_len, "dist")?)?)?;
        let (a, b) = (slice(mu1, len, "mu1")?, slice(mu2, len, "mu2")?);
        let r = kantorovich(a, b, &rho)?;
        write_all(potential_out, len, &r.potential, "potential_out")?;
        write(out_cost, r.cost, "out_cost")
    })
}
