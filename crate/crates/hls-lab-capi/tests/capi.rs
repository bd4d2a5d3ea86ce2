//! Exercises the C ABI through the exported extern "C" functions: handle
//! lifecycle, status codes, and agreement with the underlying library.

use std::ptr;

use hls_lab_capi::*;

fn params(n: u32, s: f64) -> *mut HlsParams {
    let mut p: *mut HlsParams = ptr::null_mut();
    let status = unsafe { hls_params_new(n, s, &mut p) };
    assert_eq!(status, HlsStatus::HlsStatusOk);
    assert!(!p.is_null());
    p
}

fn grid(p: *const HlsParams, cutoff: usize, m: usize) -> *mut HlsGrid {
    let mut g: *mut HlsGrid = ptr::null_mut();
    let status = unsafe { hls_grid_new(p, cutoff, m, &mut g) };
    assert_eq!(status, HlsStatus::HlsStatusOk);
    g
}

#[test]
fn params_lifecycle_and_validation() {
    let p = params(3, 1.0);
    unsafe { hls_params_free(p) };
    // Domain violations surface as status codes.
    let mut out: *mut HlsParams = ptr::null_mut();
    assert_eq!(
        unsafe { hls_params_new(3, 1.5, &mut out) },
        HlsStatus::HlsStatusDomain
    );
    assert_eq!(
        unsafe { hls_params_new(3, 1.0, ptr::null_mut()) },
        HlsStatus::HlsStatusNullPointer
    );
    // Freeing null is a no-op.
    unsafe { hls_params_free(ptr::null_mut()) };
}

#[test]
fn constants_match_core_library() {
    let p = params(3, 1.0);
    let mut c = HlsConstants {
        s_sharp: 0.0,
        c_crit: 0.0,
        d_crit: 0.0,
        c_loc: 0.0,
        k_cmp: 0.0,
        c_ps: 0.0,
    };
    assert_eq!(unsafe { hls_constants(p, &mut c) }, HlsStatus::HlsStatusOk);
    let core = hls_lab::bubbles::constants(hls_lab::sphere::Params::new(3, 1.0).unwrap()).unwrap();
    assert_eq!(c.s_sharp, core.s_sharp);
    assert_eq!(c.c_crit, core.c_crit);
    assert_eq!(c.c_loc, core.c_loc);
    assert_eq!(c.c_ps, c.c_loc);

    let mut lambda = 0.0;
    assert_eq!(
        unsafe { hls_funk_hecke_multiplier(p, 0, &mut lambda) },
        HlsStatus::HlsStatusOk
    );
    assert!((lambda - 4.0 / 3.0).abs() <= 1e-13);
    unsafe { hls_params_free(p) };
}

#[test]
fn grid_and_field_roundtrip() {
    let p = params(3, 1.0);
    let g = grid(p, 16, 48);

    let mut len = 0usize;
    assert_eq!(unsafe { hls_grid_len(g, &mut len) }, HlsStatus::HlsStatusOk);
    assert_eq!(len, 48);

    let mut nodes = vec![0.0f64; len];
    assert_eq!(
        unsafe { hls_grid_nodes(g, nodes.as_mut_ptr(), len) },
        HlsStatus::HlsStatusOk
    );
    assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(
        unsafe { hls_grid_nodes(g, nodes.as_mut_ptr(), 3) },
        HlsStatus::HlsStatusBufferTooSmall
    );

    // Build a field from explicit values, read it back.
    let values: Vec<f64> = nodes.iter().map(|t| 1.0 + 0.1 * t).collect();
    let mut f: *mut HlsField = ptr::null_mut();
    assert_eq!(
        unsafe { hls_field_from_values(g, values.as_ptr(), values.len(), &mut f) },
        HlsStatus::HlsStatusOk
    );
    let mut back = vec![0.0f64; len];
    assert_eq!(
        unsafe { hls_field_values(f, back.as_mut_ptr(), len) },
        HlsStatus::HlsStatusOk
    );
    assert_eq!(values, back);

    // Constant constructor.
    let mut ones: *mut HlsField = ptr::null_mut();
    assert_eq!(
        unsafe { hls_field_constant(g, 2.5, &mut ones) },
        HlsStatus::HlsStatusOk
    );
    let mut konst = vec![0.0f64; len];
    assert_eq!(
        unsafe { hls_field_values(ones, konst.as_mut_ptr(), len) },
        HlsStatus::HlsStatusOk
    );
    assert!(konst.iter().all(|&v| v == 2.5));
    unsafe { hls_field_free(ones) };

    // Length mismatch and non-finite values surface as status codes.
    let mut bad: *mut HlsField = ptr::null_mut();
    assert_eq!(
        unsafe { hls_field_from_values(g, values.as_ptr(), 3, &mut bad) },
        HlsStatus::HlsStatusConfig
    );
    let nan = vec![f64::NAN; len];
    assert_eq!(
        unsafe { hls_field_from_values(g, nan.as_ptr(), len, &mut bad) },
        HlsStatus::HlsStatusOverflow
    );

    unsafe {
        hls_field_free(f);
        hls_grid_free(g);
        hls_params_free(p);
    }
}

#[test]
fn bubble_functionals_through_the_abi() {
    let p = params(3, 1.0);
    let g = grid(p, 24, 64);
    let mut c = HlsConstants {
        s_sharp: 0.0,
        c_crit: 0.0,
        d_crit: 0.0,
        c_loc: 0.0,
        k_cmp: 0.0,
        c_ps: 0.0,
    };
    unsafe { hls_constants(p, &mut c) };

    let mut bubble: *mut HlsField = ptr::null_mut();
    assert_eq!(
        unsafe { hls_field_bubble(g, c.c_crit, 0.3, 0, &mut bubble) },
        HlsStatus::HlsStatusOk
    );

    // Equality case: deficit and residual vanish on the critical bubble.
    let mut deficit = 1.0;
    assert_eq!(
        unsafe { hls_deficit_of(bubble, &mut deficit) },
        HlsStatus::HlsStatusOk
    );
    assert!(deficit.abs() <= 1e-9, "deficit {deficit:e}");
    let mut residual = 1.0;
    assert_eq!(
        unsafe { hls_residual_norm(bubble, &mut residual) },
        HlsStatus::HlsStatusOk
    );
    assert!(residual <= 1e-7);

    // Projections recover the bubble parameters.
    let mut projection = HlsProjection {
        c: 0.0,
        zeta: 0.0,
        dist: 0.0,
        converged: 0,
        boundary_hit: 0,
    };
    assert_eq!(
        unsafe { hls_nearest_bubble(bubble, 1, &mut projection) },
        HlsStatus::HlsStatusOk
    );
    assert_eq!(projection.converged, 1);
    assert!((projection.zeta - 0.3).abs() <= 1e-5);
    assert!(projection.dist <= 1e-7);

    assert_eq!(
        unsafe { hls_nearest_bubble_hilbert(bubble, &mut projection) },
        HlsStatus::HlsStatusOk
    );
    assert!((projection.zeta - 0.3).abs() <= 1e-6);

    // The quotient degenerates to +inf on manifold points.
    let (mut r, mut d, mut q) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { hls_stability_quotient(bubble, &mut r, &mut d, &mut q) },
        HlsStatus::HlsStatusOk
    );
    assert!(q.is_infinite());

    // Invalid enum discriminants are domain errors.
    assert_eq!(
        unsafe { hls_field_bubble(g, 1.0, 0.0, 7, &mut bubble) },
        HlsStatus::HlsStatusDomain
    );
    assert_eq!(
        unsafe { hls_nearest_bubble(bubble, 9, &mut projection) },
        HlsStatus::HlsStatusDomain
    );

    unsafe {
        hls_field_free(bubble);
        hls_grid_free(g);
        hls_params_free(p);
    }
}

#[test]
fn status_and_version_strings() {
    let ok = unsafe { std::ffi::CStr::from_ptr(hls_status_message(HlsStatus::HlsStatusOk)) };
    assert_eq!(ok.to_str().unwrap(), "ok");
    let version = unsafe { std::ffi::CStr::from_ptr(hls_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_exported_symbol() {
    let header = include_str!("../include/hls_lab.h");
    for symbol in [
        "hls_status_message",
        "hls_version",
        "hls_params_new",
        "hls_params_free",
        "hls_constants",
        "hls_funk_hecke_multiplier",
        "hls_grid_new",
        "hls_grid_free",
        "hls_grid_len",
        "hls_grid_nodes",
        "hls_field_constant",
        "hls_field_bubble",
        "hls_field_from_values",
        "hls_field_free",
        "hls_field_values",
        "hls_lp_norm",
        "hls_deficit_of",
        "hls_residual_norm",
        "hls_sobolev_residual_norm",
        "hls_nearest_bubble",
        "hls_nearest_bubble_hilbert",
        "hls_stability_quotient",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
