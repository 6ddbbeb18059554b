//! C interface to `wigner-core`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every call returns a
//! [`WignerStatus`]; on failure a message is available from
//! [`wigner_last_error_message`] on the same thread. Matrices are passed
//! row-major as separate real and imaginary arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use wigner_core::fockspace::{occupation, validate_density, ComplexMatrix};
use wigner_core::liouvillian::{cascade_observed_state, DetectorConfig};
use wigner_core::metrics::field_metrics;
use wigner_core::reconstruct::{fit_superposition, strip_vacuum_mixture, ReconstructionResult, VacuumWeight};
use wigner_core::states::{DriveConfig, DriveMode, StateSpec};
use wigner_core::wigner::wigner_series;
use wigner_core::{DensityMatrix, Error, PhaseGrid};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WignerStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed spec, grid, dimension or out-of-range index.
    InvalidArgument = 2,
    /// Input matrix is not a valid density matrix.
    Validation = 3,
    /// Reconstruction has no physical solution for this input.
    Infeasible = 4,
    /// Truncation, padding or solver limits were hit.
    Numerical = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WignerDriveMode {
    Incoherent = 0,
    Coherent = 1,
}

/// Opaque density matrix.
pub struct WignerDensity {
    inner: DensityMatrix,
}

/// Opaque sampled Wigner function.
pub struct WignerField {
    inner: wigner_core::WignerField,
}

/// Rectangular grid, `nx` by `ny` samples including both end points.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

/// `negativity` is NaN when the field has not decayed at the grid edge.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WignerMetrics {
    pub integral: f64,
    pub negativity: f64,
    pub min: f64,
    pub argmin_x: f64,
    pub argmin_y: f64,
    pub max_abs: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WignerDrive {
    pub mode: WignerDriveMode,
    pub gamma: f64,
    /// Incoherent pump rate; ignored for coherent drive.
    pub pump: f64,
    /// Rabi frequency; ignored for incoherent drive.
    pub omega: f64,
    /// Laser detuning; ignored for incoherent drive.
    pub delta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WignerDetector {
    pub gamma: f64,
    pub detuning: f64,
    /// Fock truncation of the detector mode, at least 3.
    pub dim: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WignerCascadeSummary {
    pub n_emitter: f64,
    pub n_observed: f64,
    pub residual: f64,
}

/// Weights of a reconstruction. For the mixture model `beta` is zero and
/// `norm` is one.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WignerReconstruction {
    pub alpha: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub norm: f64,
    pub residual: f64,
    pub occupation_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WignerStatus {
    match err {
        Error::InvalidDimension { .. }
        | Error::Layout(_)
        | Error::OutOfRange { .. }
        | Error::InvalidParameter(_)
        | Error::InvalidGrid(_)
        | Error::GridMismatch
        | Error::CostGuard { .. }
        | Error::Parse(_)
        | Error::Io(_)
        | Error::Json(_) => WignerStatus::InvalidArgument,
        Error::NotHermitian { .. }
        | Error::Trace { .. }
        | Error::Positivity { .. }
        | Error::NonFinite
        | Error::ImaginaryResidue { .. } => WignerStatus::Validation,
        Error::Infeasible { .. }
        | Error::Degenerate { .. }
        | Error::NonPhysical { .. }
        | Error::NoFeasibleFit { .. } => WignerStatus::Infeasible,
        Error::Truncation { .. }
        | Error::PadTooSmall { .. }
        | Error::NonUniqueSteadyState { .. }
        | Error::DetectorTruncation { .. }
        | Error::InsufficientExtent { .. } => WignerStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F>(f: F) -> WignerStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WignerStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as `{name}`"));
            WignerStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            WignerStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wigner_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf`, truncating to
/// `len - 1` bytes plus a terminating NUL. Returns the full message length
/// including the NUL, or 0 when no error has been recorded. `buf` may be
/// null to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wigner_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds a state from a text spec such as `fock:2` or `coherent:1,0.5`.
/// `dim == 0` selects the default dimension of the spec.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_from_spec(
    spec: *const c_char,
    dim: usize,
    out: *mut *mut WignerDensity,
) -> WignerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if spec.is_null() {
            return Err(Failure::Null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Error::Parse("state spec is not valid UTF-8".into()))?;
        let spec: StateSpec = text.parse()?;
        let dim = if dim == 0 { spec.default_dim() } else { dim };
        *out = boxed(WignerDensity {
            inner: spec.build(dim)?,
        });
        Ok(())
    })
}

/// Validates and wraps a `dim x dim` matrix given row-major. `im` may be
/// null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_from_parts(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut WignerDensity,
) -> WignerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        if dim == 0 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "dimension must be positive",
            }
            .into());
        }
        let n = dim.checked_mul(dim).ok_or(Error::InvalidDimension {
            dim,
            reason: "dimension overflows",
        })?;
        let re = std::slice::from_raw_parts(re, n);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, n));
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(re[i * dim + j], im.map_or(0.0, |v| v[i * dim + j]))
        });
        *out = boxed(WignerDensity {
            inner: validate_density(&m)?,
        });
        Ok(())
    })
}

/// # Safety
/// `rho` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_free(rho: *mut WignerDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Dimension of the state, or 0 for a null handle.
///
/// # Safety
/// `rho` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_dim(rho: *const WignerDensity) -> usize {
    rho.as_ref().map_or(0, |r| r.inner.dim())
}

/// # Safety
/// `rho` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_entry(
    rho: *const WignerDensity,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> WignerStatus {
    guard(|| {
        let rho = &deref(rho, "rho")?.inner;
        let (re, im) = (out_ptr(re, "re")?, out_ptr(im, "im")?);
        let d = rho.dim();
        if row >= d || col >= d {
            return Err(Error::OutOfRange {
                index: row.max(col),
                dim: d,
            }
            .into());
        }
        let z = rho.get(row, col);
        (*re, *im) = (z.re, z.im);
        Ok(())
    })
}

/// Copies the matrix row-major into `re` and `im`, each of length `len`,
/// which must be at least `dim * dim`.
///
/// # Safety
/// `rho` must be a live handle; `re` and `im` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_copy(
    rho: *const WignerDensity,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> WignerStatus {
    guard(|| {
        let rho = &deref(rho, "rho")?.inner;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null(if re.is_null() { "re" } else { "im" }));
        }
        let d = rho.dim();
        if len < d * d {
            return Err(Error::InvalidParameter(format!("buffer holds {len} values, need {}", d * d)).into());
        }
        let (re, im) = (
            std::slice::from_raw_parts_mut(re, len),
            std::slice::from_raw_parts_mut(im, len),
        );
        for i in 0..d {
            for j in 0..d {
                let z = rho.get(i, j);
                re[i * d + j] = z.re;
                im[i * d + j] = z.im;
            }
        }
        Ok(())
    })
}

/// Mean photon number `tr(a†a ρ)`.
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_density_occupation(rho: *const WignerDensity, out: *mut f64) -> WignerStatus {
    guard(|| {
        let rho = &deref(rho, "rho")?.inner;
        *out_ptr(out, "out")? = occupation(rho);
        Ok(())
    })
}

/// Evaluates the Wigner function of `rho` on `grid` by the Fock-basis series.
///
/// # Safety
/// `rho` must be a live handle; `grid` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_field_series(
    rho: *const WignerDensity,
    grid: *const WignerGrid,
    out: *mut *mut WignerField,
) -> WignerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let rho = &deref(rho, "rho")?.inner;
        let g = deref(grid, "grid")?;
        let grid = PhaseGrid::new(g.x_min, g.x_max, g.nx, g.y_min, g.y_max, g.ny)?;
        *out = boxed(WignerField {
            inner: wigner_series(rho, &grid)?,
        });
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wigner_field_free(field: *mut WignerField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wigner_field_len(field: *const WignerField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.values().len())
}

/// Copies the samples with `x` varying fastest.
///
/// # Safety
/// `field` must be a live handle; `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wigner_field_values(field: *const WignerField, buf: *mut f64, len: usize) -> WignerStatus {
    guard(|| {
        let v = deref(field, "field")?.inner.values();
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        if len < v.len() {
            return Err(Error::InvalidParameter(format!("buffer holds {len} values, need {}", v.len())).into());
        }
        std::slice::from_raw_parts_mut(buf, v.len()).copy_from_slice(v);
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_field_metrics(field: *const WignerField, out: *mut WignerMetrics) -> WignerStatus {
    guard(|| {
        let m = field_metrics(&deref(field, "field")?.inner);
        *out_ptr(out, "out")? = WignerMetrics {
            integral: m.integral,
            negativity: m.negativity.unwrap_or(f64::NAN),
            min: m.min,
            argmin_x: m.argmin[0],
            argmin_y: m.argmin[1],
            max_abs: m.max_abs,
        };
        Ok(())
    })
}

/// Steady state of an emitter feeding a detector mode. Returns the reduced
/// detector state in `out` and, when `summary` is non-null, occupations and
/// the solver residual.
///
/// # Safety
/// `drive` and `detector` must be readable; `out` writable; `summary` null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_cascade(
    drive: *const WignerDrive,
    detector: *const WignerDetector,
    out: *mut *mut WignerDensity,
    summary: *mut WignerCascadeSummary,
) -> WignerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let d = deref(drive, "drive")?;
        let det = deref(detector, "detector")?;
        let mode = match d.mode {
            WignerDriveMode::Incoherent => DriveMode::Incoherent,
            WignerDriveMode::Coherent => DriveMode::Coherent,
        };
        let drive = DriveConfig {
            mode,
            gamma: d.gamma,
            pump: d.pump,
            omega: d.omega,
            delta: d.delta,
        };
        drive.validate()?;
        let det = DetectorConfig::new(det.gamma, det.detuning, det.dim)?;
        let r = cascade_observed_state(&drive, &det)?;
        if let Some(s) = summary.as_mut() {
            *s = WignerCascadeSummary {
                n_emitter: r.n_sigma,
                n_observed: r.n_obs,
                residual: r.residual,
            };
        }
        *out = boxed(WignerDensity { inner: r.rho_obs });
        Ok(())
    })
}

fn finish_reconstruction(r: ReconstructionResult, out: &mut *mut WignerDensity, weights: *mut WignerReconstruction) {
    // SAFETY: caller guarantees `weights` is null or writable.
    if let Some(w) = unsafe { weights.as_mut() } {
        let (alpha, beta, norm) = match r.weights {
            VacuumWeight::Mixture { alpha } => (alpha, Complex64::new(0.0, 0.0), 1.0),
            VacuumWeight::Superposition { alpha, beta, norm } => (alpha, beta, norm),
        };
        *w = WignerReconstruction {
            alpha,
            beta_re: beta.re,
            beta_im: beta.im,
            norm,
            residual: r.residual,
            occupation_error: r.diagnostics.occupation_error,
        };
    }
    *out = boxed(WignerDensity {
        inner: r.effective_state,
    });
}

/// Removes a vacuum admixture so the remainder has mean photon number
/// `n_target`.
///
/// # Safety
/// `observed` must be a live handle; `out` writable; `weights` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wigner_reconstruct_mixture(
    observed: *const WignerDensity,
    n_target: f64,
    out: *mut *mut WignerDensity,
    weights: *mut WignerReconstruction,
) -> WignerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let rho = &deref(observed, "observed")?.inner;
        finish_reconstruction(strip_vacuum_mixture(rho, n_target)?, out, weights);
        Ok(())
    })
}

/// Fits a coherent superposition of vacuum and an effective state with
/// mean photon number at least `n_target`. `seed` fixes the random starts.
///
/// # Safety
/// Same as [`wigner_reconstruct_mixture`].
#[no_mangle]
pub unsafe extern "C" fn wigner_reconstruct_superposition(
    observed: *const WignerDensity,
    n_target: f64,
    seed: u64,
    out: *mut *mut WignerDensity,
    weights: *mut WignerReconstruction,
) -> WignerStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let rho = &deref(observed, "observed")?.inner;
        finish_reconstruction(fit_superposition(rho, n_target, seed)?, out, weights);
        Ok(())
    })
}
