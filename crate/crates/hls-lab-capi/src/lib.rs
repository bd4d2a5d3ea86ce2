//! C ABI for the hls-lab verification library.
//!
//! Conventions:
//! * Opaque handles (`HlsParams`, `HlsGrid`, `HlsField`) are created by
//!   `hls_*_new` constructors and released by the matching `hls_*_free`;
//!   freeing a null pointer is a no-op.
//! * Every fallible call returns an `HlsStatus`; outputs are written through
//!   pointers only on `HLS_STATUS_OK`.
//! * All pointers must be valid for the duration of the call; handles may be
//!   shared across threads for reads.
//!
//! The matching header lives in `include/hls_lab.h` (cbindgen layout; see
//! `cbindgen.toml`).

use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use hls_lab::bubbles::{bubble_sphere, constants, BubbleKind, BubbleParams};
use hls_lab::distance::{nearest_bubble_lp, nearest_bubble_p, Manifold};
use hls_lab::operators::{funk_hecke_multiplier, hls_deficit, hls_residual, sobolev_residual};
use hls_lab::sphere::{lp_norm, Params, ZonalField, ZonalGrid};
use hls_lab::stability::quotient;
use hls_lab::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlsStatus {
    HlsStatusOk = 0,
    /// A required pointer was null.
    HlsStatusNullPointer = 1,
    /// An argument lies outside the mathematical domain.
    HlsStatusDomain = 2,
    /// Grid or cutoff configuration is inconsistent.
    HlsStatusConfig = 3,
    /// Evaluation point collides with a kernel singularity.
    HlsStatusSingular = 4,
    /// Non-finite values were produced or supplied.
    HlsStatusOverflow = 5,
    /// Output buffer is too small.
    HlsStatusBufferTooSmall = 6,
    /// Internal failure (a panic was contained).
    HlsStatusInternal = 7,
}

use HlsStatus::*;

/// Opaque handle: the (n, s) parameter pair.
pub struct HlsParams(Params);

/// Opaque handle: a quadrature grid with a spectral cutoff.
pub struct HlsGrid(Arc<ZonalGrid>);

/// Opaque handle: a zonal field over a grid.
pub struct HlsField(ZonalField);

/// Explicit constants of the stability theory for one (n, s).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HlsConstants {
    pub s_sharp: f64,
    pub c_crit: f64,
    pub d_crit: f64,
    pub c_loc: f64,
    pub k_cmp: f64,
    pub c_ps: f64,
}

/// Result of a nearest-bubble projection.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HlsProjection {
    pub c: f64,
    pub zeta: f64,
    pub dist: f64,
    /// 1 when the solver met its convergence criterion.
    pub converged: c_int,
    /// 1 when the minimizer sits on the parameter box boundary.
    pub boundary_hit: c_int,
}

fn status_of(err: &Error) -> HlsStatus {
    match err {
        Error::Domain(_) => HlsStatusDomain,
        Error::Config(_) => HlsStatusConfig,
        Error::Singular(_) => HlsStatusSingular,
        Error::Overflow(_) => HlsStatusOverflow,
        Error::Io(_) => HlsStatusInternal,
    }
}

fn guarded(body: impl FnOnce() -> HlsStatus) -> HlsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => HlsStatusInternal,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn hls_status_message(status: HlsStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        HlsStatusOk => b"ok\0",
        HlsStatusNullPointer => b"null pointer\0",
        HlsStatusDomain => b"domain error\0",
        HlsStatusConfig => b"configuration error\0",
        HlsStatusSingular => b"singular evaluation\0",
        HlsStatusOverflow => b"overflow or non-finite values\0",
        HlsStatusBufferTooSmall => b"buffer too small\0",
        HlsStatusInternal => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn hls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// Params.
// ---------------------------------------------------------------------------

/// Creates a parameter handle; requires n >= 1 and 0 < s < n/2.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hls_params_new(n: u32, s: f64, out: *mut *mut HlsParams) -> HlsStatus {
    if out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| match Params::new(n, s) {
        Ok(params) => {
            unsafe { *out = Box::into_raw(Box::new(HlsParams(params))) };
            HlsStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// # Safety
/// `params` must be a pointer from `hls_params_new` or null.
#[no_mangle]
pub unsafe extern "C" fn hls_params_free(params: *mut HlsParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Evaluates every explicit constant.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_constants(
    params: *const HlsParams,
    out: *mut HlsConstants,
) -> HlsStatus {
    if params.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| match constants(unsafe { &*params }.0) {
        Ok(c) => {
            unsafe {
                *out = HlsConstants {
                    s_sharp: c.s_sharp,
                    c_crit: c.c_crit,
                    d_crit: c.d_crit,
                    c_loc: c.c_loc,
                    k_cmp: c.k_cmp,
                    c_ps: c.c_ps,
                };
            }
            HlsStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// Funk-Hecke eigenvalue of P_2s on degree-l harmonics.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_funk_hecke_multiplier(
    params: *const HlsParams,
    l: usize,
    out: *mut f64,
) -> HlsStatus {
    if params.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = funk_hecke_multiplier((*params).0, l) };
        HlsStatusOk
    })
}

// ---------------------------------------------------------------------------
// Grid.
// ---------------------------------------------------------------------------

/// Builds a grid with spectral cutoff `cutoff` and `m` quadrature nodes
/// (m >= 2 cutoff + 4, n >= 2).
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_grid_new(
    params: *const HlsParams,
    cutoff: usize,
    m: usize,
    out: *mut *mut HlsGrid,
) -> HlsStatus {
    if params.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| match ZonalGrid::new(unsafe { &*params }.0, cutoff, m) {
        Ok(grid) => {
            unsafe { *out = Box::into_raw(Box::new(HlsGrid(grid))) };
            HlsStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// # Safety
/// `grid` must be a pointer from `hls_grid_new` or null.
#[no_mangle]
pub unsafe extern "C" fn hls_grid_free(grid: *mut HlsGrid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// Number of quadrature nodes.
///
/// # Safety
/// `grid` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_grid_len(grid: *const HlsGrid, out: *mut usize) -> HlsStatus {
    if grid.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    unsafe { *out = (*grid).0.len() };
    HlsStatusOk
}

/// Copies the polar node coordinates into `buf` (capacity `len`).
///
/// # Safety
/// `grid` must be valid; `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hls_grid_nodes(
    grid: *const HlsGrid,
    buf: *mut f64,
    len: usize,
) -> HlsStatus {
    if grid.is_null() || buf.is_null() {
        return HlsStatusNullPointer;
    }
    let nodes = unsafe { &*grid }.0.nodes();
    if len < nodes.len() {
        return HlsStatusBufferTooSmall;
    }
    unsafe { std::ptr::copy_nonoverlapping(nodes.as_ptr(), buf, nodes.len()) };
    HlsStatusOk
}

// ---------------------------------------------------------------------------
// Fields.
// ---------------------------------------------------------------------------

/// Creates the constant field.
///
/// # Safety
/// `grid` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_field_constant(
    grid: *const HlsGrid,
    value: f64,
    out: *mut *mut HlsField,
) -> HlsStatus {
    if grid.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| {
        let field = ZonalField::constant(&unsafe { &*grid }.0, value);
        unsafe { *out = Box::into_raw(Box::new(HlsField(field))) };
        HlsStatusOk
    })
}

/// Creates a bubble field; `kind` is 0 for the integral-equation profile
/// (power (n+2s)/2), 1 for the Aubin-Talenti profile (power (n-2s)/2).
///
/// # Safety
/// `grid` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_field_bubble(
    grid: *const HlsGrid,
    c: f64,
    zeta: f64,
    kind: c_int,
    out: *mut *mut HlsField,
) -> HlsStatus {
    if grid.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    let kind = match kind {
        0 => BubbleKind::Hls,
        1 => BubbleKind::Sobolev,
        _ => return HlsStatusDomain,
    };
    guarded(|| {
        let grid = &unsafe { &*grid }.0;
        let bp = match BubbleParams::new(c, zeta) {
            Ok(bp) => bp,
            Err(e) => return status_of(&e),
        };
        match bubble_sphere(grid.params(), bp, kind, grid) {
            Ok(field) => {
                unsafe { *out = Box::into_raw(Box::new(HlsField(field))) };
                HlsStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Creates a field from node values (`len` must equal the grid size).
///
/// # Safety
/// `grid` and `out` must be valid; `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hls_field_from_values(
    grid: *const HlsGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut HlsField,
) -> HlsStatus {
    if grid.is_null() || values.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| {
        let slice = unsafe { std::slice::from_raw_parts(values, len) };
        match ZonalField::from_values(&unsafe { &*grid }.0, slice.to_vec()) {
            Ok(field) => {
                unsafe { *out = Box::into_raw(Box::new(HlsField(field))) };
                HlsStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `field` must be a pointer from a field constructor or null.
#[no_mangle]
pub unsafe extern "C" fn hls_field_free(field: *mut HlsField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Copies the node values into `buf` (capacity `len`).
///
/// # Safety
/// `field` must be valid; `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hls_field_values(
    field: *const HlsField,
    buf: *mut f64,
    len: usize,
) -> HlsStatus {
    if field.is_null() || buf.is_null() {
        return HlsStatusNullPointer;
    }
    let values = unsafe { &*field }.0.values();
    if len < values.len() {
        return HlsStatusBufferTooSmall;
    }
    unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
    HlsStatusOk
}

// ---------------------------------------------------------------------------
// Functionals.
// ---------------------------------------------------------------------------

/// L^p norm of the field (p >= 1).
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_lp_norm(field: *const HlsField, p: f64, out: *mut f64) -> HlsStatus {
    if field.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    if !(p >= 1.0) {
        return HlsStatusDomain;
    }
    guarded(|| {
        unsafe { *out = lp_norm(&(*field).0, p) };
        HlsStatusOk
    })
}

/// Sharp-inequality deficit of the field.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_deficit_of(field: *const HlsField, out: *mut f64) -> HlsStatus {
    if field.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = hls_deficit(&(*field).0) };
        HlsStatusOk
    })
}

/// Euler-Lagrange residual norm in L^{2n/(n-2s)} on the integral side.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_residual_norm(field: *const HlsField, out: *mut f64) -> HlsStatus {
    if field.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = hls_residual(&(*field).0).1 };
        HlsStatusOk
    })
}

/// Gradient-side residual norm in H^{-s}.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_sobolev_residual_norm(
    field: *const HlsField,
    out: *mut f64,
) -> HlsStatus {
    if field.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| {
        unsafe { *out = sobolev_residual(&(*field).0).1 };
        HlsStatusOk
    })
}

/// Nearest-bubble projection in the non-Hilbert metric. `manifold` is 0 for
/// the free-amplitude optimizer manifold, 1 for the critical manifold.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_nearest_bubble(
    field: *const HlsField,
    manifold: c_int,
    out: *mut HlsProjection,
) -> HlsStatus {
    if field.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    let manifold = match manifold {
        0 => Manifold::Optimizer,
        1 => Manifold::Critical,
        _ => return HlsStatusDomain,
    };
    guarded(
        || match nearest_bubble_lp(&unsafe { &*field }.0, manifold) {
            Ok(pr) => {
                unsafe {
                    *out = HlsProjection {
                        c: pr.bp.c,
                        zeta: pr.bp.zeta,
                        dist: pr.dist,
                        converged: pr.converged as c_int,
                        boundary_hit: pr.boundary_hit as c_int,
                    };
                }
                HlsStatusOk
            }
            Err(e) => status_of(&e),
        },
    )
}

/// Nearest-bubble projection in the Hilbert <P ., .> metric over the
/// critical manifold.
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hls_nearest_bubble_hilbert(
    field: *const HlsField,
    out: *mut HlsProjection,
) -> HlsStatus {
    if field.is_null() || out.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| match nearest_bubble_p(&unsafe { &*field }.0) {
        Ok(pr) => {
            unsafe {
                *out = HlsProjection {
                    c: pr.bp.c,
                    zeta: pr.bp.zeta,
                    dist: pr.dist,
                    converged: pr.converged as c_int,
                    boundary_hit: pr.boundary_hit as c_int,
                };
            }
            HlsStatusOk
        }
        Err(e) => status_of(&e),
    })
}

/// Stability quotient: residual norm over distance to the critical
/// manifold. On manifold points the distance vanishes and the quotient is
/// reported as +infinity.
///
/// # Safety
/// `field`, `out_residual`, `out_dist`, and `out_quotient` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hls_stability_quotient(
    field: *const HlsField,
    out_residual: *mut f64,
    out_dist: *mut f64,
    out_quotient: *mut f64,
) -> HlsStatus {
    if field.is_null() || out_residual.is_null() || out_dist.is_null() || out_quotient.is_null() {
        return HlsStatusNullPointer;
    }
    guarded(|| match quotient(&unsafe { &*field }.0) {
        Ok(outcome) => {
            unsafe {
                *out_residual = outcome.residual_norm;
                *out_dist = outcome.dist;
                *out_quotient = outcome.quotient.unwrap_or(f64::INFINITY);
            }
            HlsStatusOk
        }
        Err(e) => status_of(&e),
    })
}
