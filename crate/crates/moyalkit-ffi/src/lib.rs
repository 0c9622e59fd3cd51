//! C ABI for the phase-space toolkit: opaque field handles, error codes, and
//! the headline operations (field IO, builtin generators, Wigner transform,
//! star product, quantization spectra, norm estimates, propagation).
//!
//! Conventions:
//! * every function returns an `MkStatus` (0 = success) or a pointer that is
//!   null on failure; the last error message is kept per thread and can be
//!   copied out with `mk_last_error`;
//! * `MkField` is an opaque handle owning a sampled field plus its context;
//!   free with `mk_field_free`;
//! * complex payloads are exchanged as interleaved (re, im) f64 pairs in
//!   row-major axis order, matching the MKF1 file layout.

use moyalkit::error::MoyalError;
use moyalkit::fieldio;
use moyalkit::grid::{C64, GridSpec, SampledField};
use moyalkit::modnorm::{default_phase_window, msinf1_norm, msq_norm, Exponent};
use moyalkit::scenario::Scenario;
use moyalkit::star::{weyl_quantize, Symbol};
use moyalkit::starexp::star_exp_propagate;
use moyalkit::symplectic::HbarContext;
use moyalkit::transforms::{cross_wigner, wave_packet, Window};
use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

/// Status codes mirrored in the generated header.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum MkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    IoError = 3,
    NumericalError = 4,
    VerifyFailed = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &MoyalError) -> MkStatus {
    match e {
        MoyalError::Io(_) | MoyalError::FieldFile(_) | MoyalError::Scenario(_) => MkStatus::IoError,
        MoyalError::NonFinite(_)
        | MoyalError::DivergentSeries(_)
        | MoyalError::NormDriftExceeded { .. }
        | MoyalError::TailTooLarge { .. } => MkStatus::NumericalError,
        _ => MkStatus::InvalidArgument,
    }
}

/// Opaque sampled field with its context.
pub struct MkField {
    field: SampledField,
    ctx: HbarContext,
}

/// Copies the most recent error message on this thread into `buf`
/// (truncated, always NUL-terminated). Returns the message length.
#[no_mangle]
pub extern "C" fn mk_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len().saturating_sub(1)
    })
}

/// Reads an MKF1 field file. Returns null on failure.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mk_field_read(path: *const c_char) -> *mut MkField {
    if path.is_null() {
        set_error("null path");
        return ptr::null_mut();
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    match fieldio::read_field(Path::new(path)) {
        Ok((field, ctx)) => Box::into_raw(Box::new(MkField { field, ctx })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Writes a field as MKF1.
///
/// # Safety
/// `field` must originate from this library and `path` must be a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mk_field_write(field: *const MkField, path: *const c_char) -> MkStatus {
    let Some(f) = field.as_ref() else {
        set_error("null field");
        return MkStatus::NullArgument;
    };
    if path.is_null() {
        set_error("null path");
        return MkStatus::NullArgument;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return MkStatus::InvalidArgument;
        }
    };
    match fieldio::write_field(&f.field, &f.ctx, Path::new(path)) {
        Ok(()) => MkStatus::Ok,
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Builds a builtin field: `name` as in scenario files ("gaussian",
/// "phase_gaussian", "triangle", "plateau_harmonic", ...), with `dims` axes
/// of `points` nodes and extent `extent`. `params`/`values` supply `n_params`
/// named numeric parameters.
///
/// # Safety
/// `name` must be NUL-terminated; `params` and `values` must point to
/// `n_params` valid entries.
#[no_mangle]
pub unsafe extern "C" fn mk_field_builtin(
    name: *const c_char,
    dims: usize,
    points: usize,
    extent: c_double,
    hbar: c_double,
    params: *const *const c_char,
    values: *const c_double,
    n_params: usize,
) -> *mut MkField {
    if name.is_null() {
        set_error("null generator name");
        return ptr::null_mut();
    }
    let name = match CStr::from_ptr(name).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("name is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    let mut map = std::collections::BTreeMap::new();
    for i in 0..n_params {
        let key = *params.add(i);
        if key.is_null() {
            continue;
        }
        if let Ok(k) = CStr::from_ptr(key).to_str() {
            map.insert(k.to_string(), *values.add(i));
        }
    }
    let build = || -> Result<MkField, MoyalError> {
        let ctx = HbarContext::new(hbar, 1)?;
        let grid = GridSpec::uniform(dims, points, extent)?;
        let field = moyalkit::builtin::generate(name, &grid, &ctx, &map)?;
        Ok(MkField { field, ctx })
    };
    match build() {
        Ok(f) => Box::into_raw(Box::new(f)),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `field` must be a pointer previously returned by this library (or null).
#[no_mangle]
pub unsafe extern "C" fn mk_field_free(field: *mut MkField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of complex values in the field (N^d).
///
/// # Safety
/// `field` must originate from this library.
#[no_mangle]
pub unsafe extern "C" fn mk_field_len(field: *const MkField) -> usize {
    field.as_ref().map(|f| f.field.grid().len()).unwrap_or(0)
}

/// Grid descriptor: writes dims, points and the axis-0 extent.
///
/// # Safety
/// All pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mk_field_info(
    field: *const MkField,
    dims: *mut usize,
    points: *mut usize,
    extent: *mut c_double,
    hbar: *mut c_double,
) -> MkStatus {
    let Some(f) = field.as_ref() else {
        set_error("null field");
        return MkStatus::NullArgument;
    };
    if !dims.is_null() {
        *dims = f.field.grid().dims();
    }
    if !points.is_null() {
        *points = f.field.grid().points();
    }
    if !extent.is_null() {
        *extent = f.field.grid().extent(0);
    }
    if !hbar.is_null() {
        *hbar = f.ctx.hbar;
    }
    MkStatus::Ok
}

/// Copies the payload as interleaved (re, im) pairs; `out` must hold
/// 2 * mk_field_len doubles.
///
/// # Safety
/// `out` must point to enough writable memory.
#[no_mangle]
pub unsafe extern "C" fn mk_field_data(field: *const MkField, out: *mut c_double) -> MkStatus {
    let Some(f) = field.as_ref() else {
        set_error("null field");
        return MkStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output buffer");
        return MkStatus::NullArgument;
    }
    for (i, v) in f.field.values().iter().enumerate() {
        *out.add(2 * i) = v.re;
        *out.add(2 * i + 1) = v.im;
    }
    MkStatus::Ok
}

/// Cross-Wigner transform of psi against phi (both configuration-space).
///
/// # Safety
/// Handles must originate from this library.
#[no_mangle]
pub unsafe extern "C" fn mk_cross_wigner(
    psi: *const MkField,
    phi: *const MkField,
) -> *mut MkField {
    let (Some(a), Some(b)) = (psi.as_ref(), phi.as_ref()) else {
        set_error("null operand");
        return ptr::null_mut();
    };
    match cross_wigner(&a.field, &b.field, &a.ctx) {
        Ok(field) => Box::into_raw(Box::new(MkField { field, ctx: a.ctx })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Windowed wave-packet transform (phi is L2-normalized internally).
///
/// # Safety
/// Handles must originate from this library.
#[no_mangle]
pub unsafe extern "C" fn mk_wave_packet(
    phi: *const MkField,
    psi: *const MkField,
) -> *mut MkField {
    let (Some(w), Some(a)) = (phi.as_ref(), psi.as_ref()) else {
        set_error("null operand");
        return ptr::null_mut();
    };
    let run = || -> Result<SampledField, MoyalError> {
        let win = Window::normalized(w.field.clone())?;
        wave_packet(&win, &a.field, &a.ctx)
    };
    match run() {
        Ok(field) => Box::into_raw(Box::new(MkField { field, ctx: a.ctx })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Moyal product of two phase-space symbols.
///
/// # Safety
/// Handles must originate from this library.
#[no_mangle]
pub unsafe extern "C" fn mk_moyal_star(a: *const MkField, b: *const MkField) -> *mut MkField {
    let (Some(fa), Some(fb)) = (a.as_ref(), b.as_ref()) else {
        set_error("null operand");
        return ptr::null_mut();
    };
    let run = || -> Result<SampledField, MoyalError> {
        let sa = Symbol::new(fa.field.clone(), fa.ctx)?;
        let sb = Symbol::new(fb.field.clone(), fb.ctx)?;
        Ok(moyalkit::star::moyal_star(&sa, &sb)?.field)
    };
    match run() {
        Ok(field) => Box::into_raw(Box::new(MkField { field, ctx: fa.ctx })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Lowest `count` eigenvalues of the hermitian part of the Weyl quantization
/// of symbol `a`, written into `out`.
///
/// # Safety
/// `out` must hold `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn mk_weyl_spectrum(
    a: *const MkField,
    out: *mut c_double,
    count: usize,
) -> MkStatus {
    let Some(fa) = a.as_ref() else {
        set_error("null operand");
        return MkStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output buffer");
        return MkStatus::NullArgument;
    }
    let run = || -> Result<Vec<f64>, MoyalError> {
        let sa = Symbol::new(fa.field.clone(), fa.ctx)?;
        Ok(weyl_quantize(&sa)?.hermitian_eigenvalues())
    };
    match run() {
        Ok(ev) => {
            for i in 0..count.min(ev.len()) {
                *out.add(i) = ev[i];
            }
            MkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Modulation-norm estimate: symbol-class norm for d = 2 fields, the
/// wavefunction norm (parameters q > 0; q <= 0 means the sup norm) for d = 1.
///
/// # Safety
/// `value` and `tail` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mk_norm(
    field: *const MkField,
    q: c_double,
    s: c_double,
    value: *mut c_double,
    tail: *mut c_double,
) -> MkStatus {
    let Some(f) = field.as_ref() else {
        set_error("null field");
        return MkStatus::NullArgument;
    };
    let run = || -> Result<(f64, f64), MoyalError> {
        if f.field.grid().dims() == 2 {
            let sym = Symbol::new(f.field.clone(), f.ctx)?;
            let win = default_phase_window(sym.grid())?;
            let r = msinf1_norm(&sym, &win, s)?;
            Ok((r.value, r.truncation_tail))
        } else {
            let g = f.field.grid().clone();
            let win = Window::normalized(moyalkit::builtin::standard_gaussian(&g, f.ctx.hbar)?)?;
            let qe = if q > 0.0 { Exponent::Finite(q) } else { Exponent::Infinity };
            let r = msq_norm(&f.field, &win, qe, s)?;
            Ok((r.value, r.truncation_tail))
        }
    };
    match run() {
        Ok((v, t)) => {
            if !value.is_null() {
                *value = v;
            }
            if !tail.is_null() {
                *tail = t;
            }
            MkStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Propagates Psi0 under H to time t with step dt (dt <= 0 picks the largest
/// admissible step). Returns the evolved field.
///
/// # Safety
/// Handles must originate from this library.
#[no_mangle]
pub unsafe extern "C" fn mk_propagate(
    h: *const MkField,
    psi0: *const MkField,
    t: c_double,
    dt: c_double,
) -> *mut MkField {
    let (Some(fh), Some(fp)) = (h.as_ref(), psi0.as_ref()) else {
        set_error("null operand");
        return ptr::null_mut();
    };
    let run = || -> Result<SampledField, MoyalError> {
        let sh = Symbol::new(fh.field.clone(), fh.ctx)?;
        let step = if dt > 0.0 { dt } else { 0.01 * fh.ctx.hbar / fh.field.max_abs() };
        Ok(star_exp_propagate(&sh, &fp.field, t, step)?.psi_t)
    };
    match run() {
        Ok(field) => Box::into_raw(Box::new(MkField { field, ctx: fp.ctx })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Runs the scenario-driven verification battery from a TOML file path and
/// returns Ok / VerifyFailed.
///
/// # Safety
/// `_config` must be NUL-terminated or null (the battery ignores it today;
/// the argument is reserved for scenario-scoped batteries).
#[no_mangle]
pub unsafe extern "C" fn mk_verify(_config: *const c_char) -> MkStatus {
    match moyalkit::verify::run_battery() {
        Ok(rows) => {
            if rows.iter().all(|r| r.pass || !r.gating) {
                MkStatus::Ok
            } else {
                let failed: Vec<String> = rows
                    .iter()
                    .filter(|r| !r.pass && r.gating)
                    .map(|r| r.name.clone())
                    .collect();
                set_error(&format!("failed invariants: {}", failed.join(", ")));
                MkStatus::VerifyFailed
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

// Scenario type is exercised through the CLI; keep the FFI surface focused.
#[allow(dead_code)]
fn _scenario_keepalive(s: &Scenario) -> usize {
    s.grid.points()
}

#[allow(dead_code)]
fn _c64_keepalive(v: C64) -> f64 {
    v.re
}

#[allow(unused)]
use c_int as _c_int_used;
