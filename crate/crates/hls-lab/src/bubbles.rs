//! Sharp constants, optimizer and critical bubble manifolds on the sphere,
//! the stereographic transfer to radial functions on R^n, and tangent fields.
//!
//! In the zonal sector a bubble is
//!     v(t) = c (sqrt(1 - zeta^2) / (1 - zeta t))^{kappa/2},
//! with kappa = n + 2s on the integral-equation side and kappa = n - 2s on
//! the gradient side. The critical manifolds fix the amplitude at c_{n,s}
//! (resp. d_{n,s}); the optimizer manifold leaves c free. Centers live on the
//! polar axis: a general center is a rotation away and carries no extra
//! spectral content.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::sharp_constant;
use crate::specialfuncs::ln_gamma;
use crate::sphere::{Params, ZonalField, ZonalGrid};

/// Which Euler-Lagrange equation the bubble solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleKind {
    /// Profile power (n+2s)/2, critical amplitude c_{n,s}.
    Hls,
    /// Profile power (n-2s)/2, critical amplitude d_{n,s} (Aubin-Talenti).
    Sobolev,
}

/// Amplitude and axial conformal parameter (c, zeta) identifying a bubble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleParams {
    pub c: f64,
    pub zeta: f64,
}

impl BubbleParams {
    pub fn new(c: f64, zeta: f64) -> Result<Self> {
        if !(zeta.abs() < 1.0) {
            return Err(Error::Domain(format!("|zeta| < 1 required, got {zeta}")));
        }
        Ok(Self { c, zeta })
    }
}

/// Every explicit constant of the stability theory for a given (n, s).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Constants {
    /// Sharp constant S_{s,n} of the sharp inequality pair.
    pub s_sharp: f64,
    /// Critical amplitude c_{n,s} = (Gamma(n/2+s)/Gamma(n/2-s))^{(n+2s)/4s}.
    pub c_crit: f64,
    /// Critical amplitude d_{n,s} = (Gamma(n/2+s)/Gamma(n/2-s))^{(n-2s)/4s}.
    pub d_crit: f64,
    /// Local stability constant: the minimum of the two case branches.
    pub c_loc: f64,
    /// Comparison factor 1 + 2 S sqrt(2(n+2s)/(n-2s)) between the
    /// non-Hilbert distance and the H^{-s}-minimizer distance.
    pub k_cmp: f64,
    /// Explicit Palais-Smale lower bound; equals `c_loc`.
    pub c_ps: f64,
    /// Case-1 branch of `c_loc`.
    pub c_loc_case1: f64,
    /// Case-2 branch of `c_loc`.
    pub c_loc_case2: f64,
}

/// Evaluates every constant from closed Gamma-function forms.
pub fn constants(params: Params) -> Result<Constants> {
    let n = params.nf();
    let s = params.s();
    let half_n = n / 2.0;
    let area = crate::sphere::sphere_area(params.n())?;

    let s_sharp = sharp_constant(params)?;
    let ln_gamma_ratio = ln_gamma(half_n + s)? - ln_gamma(half_n - s)?;
    let c_crit = ((n + 2.0 * s) / (4.0 * s) * ln_gamma_ratio).exp();
    let d_crit = ((n - 2.0 * s) / (4.0 * s) * ln_gamma_ratio).exp();

    let area_factor = area.powf(-2.0 * s / n);
    let case1 = (ln_gamma(half_n - s + 1.0)? - ln_gamma(half_n + s + 1.0)?).exp()
        * (s / (half_n + s + 1.0))
        * area_factor
        * (2.0 * s / (n + 2.0 * s)).sqrt();
    let case2 = (-ln_gamma_ratio).exp() * (2.0 * s / (n + 2.0 * s)) * area_factor;
    let c_loc = case1.min(case2);

    let k_cmp = 1.0 + 2.0 * s_sharp * (2.0 * (n + 2.0 * s) / (n - 2.0 * s)).sqrt();

    Ok(Constants {
        s_sharp,
        c_crit,
        d_crit,
        c_loc,
        k_cmp,
        c_ps: c_loc,
        c_loc_case1: case1,
        c_loc_case2: case2,
    })
}

/// Bubble profile as a zonal field.
pub fn bubble_sphere(
    params: Params,
    bp: BubbleParams,
    kind: BubbleKind,
    grid: &Arc<ZonalGrid>,
) -> Result<ZonalField> {
    if grid.params() != params {
        return Err(Error::Config("grid parameters do not match".into()));
    }
    if !(bp.zeta.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "|zeta| < 1 required, got {}",
            bp.zeta
        )));
    }
    let kappa = match kind {
        BubbleKind::Hls => params.hls_bubble_power(),
        BubbleKind::Sobolev => params.sobolev_bubble_power(),
    };
    let amp = (1.0 - bp.zeta * bp.zeta).sqrt();
    ZonalField::from_fn(grid, |t| bp.c * (amp / (1.0 - bp.zeta * t)).powf(kappa))
}

/// Critical bubble (amplitude c_{n,s}) on the integral-equation side.
pub fn critical_bubble(grid: &Arc<ZonalGrid>, zeta: f64) -> Result<ZonalField> {
    let params = grid.params();
    let consts = constants(params)?;
    bubble_sphere(
        params,
        BubbleParams::new(consts.c_crit, zeta)?,
        BubbleKind::Hls,
        grid,
    )
}

/// Critical Aubin-Talenti bubble (amplitude d_{n,s}) on the gradient side.
pub fn critical_sobolev_bubble(grid: &Arc<ZonalGrid>, zeta: f64) -> Result<ZonalField> {
    let params = grid.params();
    let consts = constants(params)?;
    bubble_sphere(
        params,
        BubbleParams::new(consts.d_crit, zeta)?,
        BubbleKind::Sobolev,
        grid,
    )
}

/// Conformal lift of a radial function on R^n, sampled at the stereographic
/// radii of the grid nodes r_i = sqrt((1 - t_i)/(1 + t_i)), to a zonal field:
/// u_i = ((1 + r_i^2)/2)^{(n+2s)/2} f_i. The lift preserves the
/// L^{2n/(n+2s)} norm; node-exact, no interpolation.
pub fn stereo_lift(
    params: Params,
    radial_samples: &[f64],
    grid: &Arc<ZonalGrid>,
) -> Result<ZonalField> {
    if grid.params() != params {
        return Err(Error::Config("grid parameters do not match".into()));
    }
    if radial_samples.len() != grid.len() {
        return Err(Error::Config(format!(
            "expected {} radial samples, got {}",
            grid.len(),
            radial_samples.len()
        )));
    }
    let kappa = params.hls_bubble_power();
    // 1 + r^2 = 2/(1 + t) at the stereographic radii.
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(radial_samples)
        .map(|(&t, &f)| (1.0 + t).powf(-kappa) * f)
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(
            "stereographic lift produced non-finite values (f does not decay fast enough)".into(),
        ));
    }
    ZonalField::from_values(grid, values)
}

/// Inverse of `stereo_lift`: radial samples at the node radii.
pub fn stereo_project(u: &ZonalField) -> Vec<f64> {
    let kappa = u.grid().params().hls_bubble_power();
    u.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&t, &v)| (1.0 + t).powf(kappa) * v)
        .collect()
}

/// Radial bubble profile on R^n sampled at the given radii:
/// c (lambda / (1 + lambda^2 r^2))^power, the standard parametrization of
/// the extremal family up to translation.
pub fn radial_bubble_samples(c: f64, lambda: f64, power: f64, radii: &[f64]) -> Vec<f64> {
    radii
        .iter()
        .map(|&r| c * (lambda / (1.0 + lambda * lambda * r * r)).powf(power))
        .collect()
}

/// Analytic partial derivatives of `bubble_sphere` with respect to the
/// amplitude and the axial parameter, validated against central finite
/// differences in the test suite.
pub fn tangent_fields(
    params: Params,
    bp: BubbleParams,
    kind: BubbleKind,
    grid: &Arc<ZonalGrid>,
) -> Result<(ZonalField, ZonalField)> {
    let unit = bubble_sphere(params, BubbleParams::new(1.0, bp.zeta)?, kind, grid)?;
    let kappa = match kind {
        BubbleKind::Hls => params.hls_bubble_power(),
        BubbleKind::Sobolev => params.sobolev_bubble_power(),
    };
    let zeta = bp.zeta;
    // d/dzeta log profile = kappa (t/(1 - zeta t) - zeta/(1 - zeta^2)).
    let d_zeta = ZonalField::from_values(
        grid,
        grid.nodes()
            .iter()
            .zip(unit.values())
            .map(|(&t, &v)| bp.c * v * kappa * (t / (1.0 - zeta * t) - zeta / (1.0 - zeta * zeta)))
            .collect(),
    )?;
    Ok((unit, d_zeta))
}

/// Second zeta-derivative of the bubble, for Newton polishing of the
/// Hilbert-metric projection.
pub fn bubble_d2_zeta(
    params: Params,
    bp: BubbleParams,
    kind: BubbleKind,
    grid: &Arc<ZonalGrid>,
) -> Result<ZonalField> {
    let unit = bubble_sphere(params, BubbleParams::new(1.0, bp.zeta)?, kind, grid)?;
    let kappa = match kind {
        BubbleKind::Hls => params.hls_bubble_power(),
        BubbleKind::Sobolev => params.sobolev_bubble_power(),
    };
    let zeta = bp.zeta;
    let one_m = 1.0 - zeta * zeta;
    ZonalField::from_values(
        grid,
        grid.nodes()
            .iter()
            .zip(unit.values())
            .map(|(&t, &v)| {
                let g = kappa * (t / (1.0 - zeta * t) - zeta / one_m);
                let gp = kappa
                    * (t * t / (1.0 - zeta * t).powi(2) - (1.0 + zeta * zeta) / (one_m * one_m));
                bp.c * v * (g * g + gp)
            })
            .collect(),
    )
}
