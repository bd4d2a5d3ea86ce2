//! Zonal-function representation on S^n: grids carrying the surface measure,
//! L^p norms, and the orthonormal zonal-harmonic (Gegenbauer) transform.
//!
//! A zonal function depends on the polar coordinate t = omega . e only. All
//! sphere integrals reduce to [-1, 1] against the weight (1 - t^2)^{(n-2)/2}
//! times |S^{n-1}|, which a Gauss-Jacobi rule integrates exactly on
//! polynomials; every degree l is represented in the zonal sector, which is
//! exactly the spectral data the local expansions need.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specialfuncs::{gauss_jacobi, gegenbauer_all, ln_gamma, QuadratureRule};

/// Dimension and fractional order (n, s), the pair every constant in the
/// laboratory is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    n: u32,
    s: f64,
}

impl Params {
    /// Requires n >= 1 and 0 < s < n/2.
    pub fn new(n: u32, s: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain(format!(
                "dimension must satisfy n >= 1, got {n}"
            )));
        }
        if !(s > 0.0 && s < n as f64 / 2.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "fractional order must satisfy 0 < s < n/2 = {}, got {s}",
                n as f64 / 2.0
            )));
        }
        Ok(Self { n, s })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Gegenbauer index of the zonal harmonics, (n-1)/2.
    pub fn gegenbauer_alpha(&self) -> f64 {
        (self.nf() - 1.0) / 2.0
    }

    /// Jacobi weight exponent of the surface measure, (n-2)/2.
    pub fn jacobi_exponent(&self) -> f64 {
        (self.nf() - 2.0) / 2.0
    }

    /// Lebesgue exponent on the integral-equation side, 2n/(n+2s).
    pub fn p_hls(&self) -> f64 {
        2.0 * self.nf() / (self.nf() + 2.0 * self.s)
    }

    /// Dual Lebesgue exponent, 2n/(n-2s).
    pub fn p_dual(&self) -> f64 {
        2.0 * self.nf() / (self.nf() - 2.0 * self.s)
    }

    /// Bubble profile power on the integral-equation side, (n+2s)/2.
    pub fn hls_bubble_power(&self) -> f64 {
        (self.nf() + 2.0 * self.s) / 2.0
    }

    /// Bubble profile power on the gradient side, (n-2s)/2.
    pub fn sobolev_bubble_power(&self) -> f64 {
        (self.nf() - 2.0 * self.s) / 2.0
    }

    /// Exponent of the monotone map |u|^{-4s/(n+2s)} u, i.e. (n-2s)/(n+2s).
    pub fn hls_map_exponent(&self) -> f64 {
        (self.nf() - 2.0 * self.s) / (self.nf() + 2.0 * self.s)
    }

    /// Exponent of the map |u|^{4s/(n-2s)} u, i.e. (n+2s)/(n-2s).
    pub fn sobolev_map_exponent(&self) -> f64 {
        (self.nf() + 2.0 * self.s) / (self.nf() - 2.0 * self.s)
    }
}

/// Surface area |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2).
pub fn sphere_area(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain(format!(
            "sphere_area requires n >= 1, got {n}"
        )));
    }
    let nf = n as f64;
    let ln = std::f64::consts::LN_2 + (nf + 1.0) / 2.0 * std::f64::consts::PI.ln()
        - ln_gamma((nf + 1.0) / 2.0)?;
    Ok(ln.exp())
}

/// Quadrature grid for zonal functions on S^n with a spectral cutoff.
#[derive(Debug)]
pub struct ZonalGrid {
    params: Params,
    cutoff: usize,
    rule: QuadratureRule,
    /// Rule weights times |S^{n-1}|: full surface-measure weights.
    measure_weights: Vec<f64>,
    /// Orthonormal zonal harmonics at the nodes: basis[l][i] = Y_l(t_i).
    basis: Vec<Vec<f64>>,
    /// L^2(S^n) normalizations of the raw Gegenbauer polynomials.
    norms: Vec<f64>,
    area: f64,
}

impl ZonalGrid {
    /// Builds an m-node grid resolving degrees up to `cutoff`.
    ///
    /// Requires n >= 2 (the zonal harmonic basis degenerates on S^1),
    /// cutoff >= 2 and m >= 2 cutoff + 4.
    pub fn new(params: Params, cutoff: usize, m: usize) -> Result<Arc<Self>> {
        if params.n() < 2 {
            return Err(Error::Config(
                "zonal grids require n >= 2; the S^1 basis is a Chebyshev limit outside scope"
                    .into(),
            ));
        }
        if cutoff < 2 {
            return Err(Error::Config(format!("cutoff must be >= 2, got {cutoff}")));
        }
        if m < 2 * cutoff + 4 {
            return Err(Error::Config(format!(
                "need m >= 2L + 4 = {} nodes for cutoff L = {cutoff}, got {m}",
                2 * cutoff + 4
            )));
        }
        let a = params.jacobi_exponent();
        let rule = gauss_jacobi(m, a, a)?;
        let area_nm1 = sphere_area(params.n() - 1)?;
        let area = sphere_area(params.n())?;
        let measure_weights: Vec<f64> = rule.weights.iter().map(|w| w * area_nm1).collect();

        let mass: f64 = measure_weights.iter().sum();
        if ((mass - area) / area).abs() > 1e-10 {
            return Err(Error::Config(format!(
                "surface measure mass off by {:.3e} relative",
                ((mass - area) / area).abs()
            )));
        }

        let alpha = params.gegenbauer_alpha();
        let norms = zonal_norms(params, cutoff, area_nm1)?;
        let mut basis = vec![vec![0.0; m]; cutoff + 1];
        let mut scratch = vec![0.0; cutoff + 1];
        for (i, &t) in rule.nodes.iter().enumerate() {
            gegenbauer_all(cutoff, alpha, t, &mut scratch);
            for l in 0..=cutoff {
                basis[l][i] = scratch[l] / norms[l];
            }
        }

        Ok(Arc::new(Self {
            params,
            cutoff,
            rule,
            measure_weights,
            basis,
            norms,
            area,
        }))
    }

    pub fn params(&self) -> Params {
        self.params
    }

    /// Spectral cutoff L (maximum resolved degree).
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn measure_weights(&self) -> &[f64] {
        &self.measure_weights
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Surface integral of a zonal integrand given by node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.measure_weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Orthonormal degree-l zonal harmonic evaluated at an arbitrary polar
    /// coordinate.
    pub fn harmonic_at(&self, l: usize, t: f64) -> f64 {
        debug_assert!(l <= self.cutoff);
        crate::specialfuncs::gegenbauer(l, self.params.gegenbauer_alpha(), t) / self.norms[l]
    }

    /// Stereographic radii of the nodes, r_i = sqrt((1 - t_i)/(1 + t_i)).
    pub fn stereographic_radii(&self) -> Vec<f64> {
        self.nodes()
            .iter()
            .map(|&t| ((1.0 - t) / (1.0 + t)).sqrt())
            .collect()
    }

    /// Midpoints of adjacent node gaps: evaluation angles staggered away
    /// from every quadrature node, for the direct kernel operator.
    pub fn staggered_angles(&self, count: usize) -> Vec<f64> {
        let nodes = self.nodes();
        let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        if count == 0 || mids.is_empty() {
            return mids;
        }
        let stride = (mids.len() / count).max(1);
        mids.into_iter().step_by(stride).take(count).collect()
    }
}

/// L^2(S^n) norms of the raw Gegenbauer polynomials C_l^{(n-1)/2}:
/// N_l^2 = |S^{n-1}| pi 2^{1-2a} Gamma(l+2a) / (l! (l+a) Gamma(a)^2).
fn zonal_norms(params: Params, cutoff: usize, area_nm1: f64) -> Result<Vec<f64>> {
    let alpha = params.gegenbauer_alpha();
    let mut norms = Vec::with_capacity(cutoff + 1);
    for l in 0..=cutoff {
        let lf = l as f64;
        let ln_h = std::f64::consts::PI.ln()
            + (1.0 - 2.0 * alpha) * std::f64::consts::LN_2
            + ln_gamma(lf + 2.0 * alpha)?
            - ln_gamma(lf + 1.0)?
            - (lf + alpha).ln()
            - 2.0 * ln_gamma(alpha)?;
        norms.push((area_nm1.ln() + ln_h).exp().sqrt());
    }
    Ok(norms)
}

/// Zonal-harmonic coefficients a_l, l = 0..L, in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    coeffs: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, l: usize) -> f64 {
        self.coeffs[l]
    }

    /// Parseval sum, equal to the squared L^2 norm on band-limited fields.
    pub fn l2_squared(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    /// Applies a degree-wise multiplier in place.
    pub fn scaled_by(&self, multiplier: impl Fn(usize) -> f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(l, a)| a * multiplier(l))
                .collect(),
        }
    }
}

/// A zonal function held as node values over a shared grid.
#[derive(Debug, Clone)]
pub struct ZonalField {
    grid: Arc<ZonalGrid>,
    values: Vec<f64>,
}

impl ZonalField {
    pub fn from_values(grid: &Arc<ZonalGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("field contains non-finite values".into()));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn from_fn(grid: &Arc<ZonalGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::from_values(grid, values)
    }

    pub fn constant(grid: &Arc<ZonalGrid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    /// Orthonormal degree-l zonal harmonic as a field.
    pub fn zonal_harmonic(grid: &Arc<ZonalGrid>, l: usize) -> Result<Self> {
        if l > grid.cutoff() {
            return Err(Error::Config(format!(
                "degree {l} above grid cutoff {}",
                grid.cutoff()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values: grid.basis[l].clone(),
        })
    }

    pub fn grid(&self) -> &Arc<ZonalGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::Config("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Orthonormal projection onto the zonal harmonics of degree <= L.
    pub fn analyze(&self) -> SpectralCoeffs {
        let mut coeffs = Vec::with_capacity(self.grid.cutoff() + 1);
        for l in 0..=self.grid.cutoff() {
            let basis = &self.grid.basis[l];
            let a: f64 = self
                .grid
                .measure_weights
                .iter()
                .zip(&self.values)
                .zip(basis)
                .map(|((w, v), y)| w * v * y)
                .sum();
            coeffs.push(a);
        }
        SpectralCoeffs::new(coeffs)
    }

    /// Band-limited evaluation at an arbitrary polar coordinate through the
    /// coefficient view.
    pub fn eval_band_limited(&self, t: f64) -> f64 {
        let coeffs = self.analyze();
        synthesize_at(&coeffs, &self.grid, t)
    }

    /// Relative L^2 distance between the field and its band-limited
    /// projection; zero for resolvable fields, grows under aliasing.
    pub fn aliasing_error(&self) -> f64 {
        let projected = synthesize(&self.analyze(), &self.grid).expect("cutoff matches");
        let diff = self.sub(&projected).expect("same grid");
        let num = lp_norm(&diff, 2.0);
        let den = lp_norm(self, 2.0).max(1e-300);
        num / den
    }
}

/// Right-inverse of `analyze` on band-limited fields.
pub fn synthesize(coeffs: &SpectralCoeffs, grid: &Arc<ZonalGrid>) -> Result<ZonalField> {
    if coeffs.cutoff() != grid.cutoff() {
        return Err(Error::Config(format!(
            "coefficient cutoff {} does not match grid cutoff {}",
            coeffs.cutoff(),
            grid.cutoff()
        )));
    }
    let mut values = vec![0.0; grid.len()];
    for (l, &a) in coeffs.as_slice().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (v, y) in values.iter_mut().zip(&grid.basis[l]) {
            *v += a * y;
        }
    }
    ZonalField::from_values(grid, values)
}

/// Synthesis at an arbitrary polar coordinate.
pub fn synthesize_at(coeffs: &SpectralCoeffs, grid: &ZonalGrid, t: f64) -> f64 {
    let alpha = grid.params.gegenbauer_alpha();
    let mut raw = vec![0.0; coeffs.cutoff() + 1];
    gegenbauer_all(coeffs.cutoff(), alpha, t, &mut raw);
    coeffs
        .as_slice()
        .iter()
        .enumerate()
        .map(|(l, &a)| a * raw[l] / grid.norms[l])
        .sum()
}

/// Quadrature approximation of (integral |u|^p dsigma)^{1/p}; p >= 1.
pub fn lp_norm(u: &ZonalField, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm requires p >= 1");
    let sum: f64 = u
        .grid
        .measure_weights
        .iter()
        .zip(&u.values)
        .map(|(w, v)| w * v.abs().powf(p))
        .sum();
    sum.powf(1.0 / p)
}

/// Quadrature approximation of integral u v dsigma.
pub fn inner(u: &ZonalField, v: &ZonalField) -> f64 {
    debug_assert!(Arc::ptr_eq(&u.grid, &v.grid));
    u.grid
        .measure_weights
        .iter()
        .zip(&u.values)
        .zip(&v.values)
        .map(|((w, a), b)| w * a * b)
        .sum()
}

/// Axial conformal recentering: the L^p isometry that carries the constant
/// bubble to the bubble at parameter zeta.
///
/// (T_zeta u)(t) = w_zeta(t) u((t - zeta)/(1 - zeta t)) with w_zeta the
/// unit-amplitude bubble profile; exact on the continuum, applied here
/// through the band-limited coefficient view of u.
pub fn conformal_recenter(u: &ZonalField, zeta: f64) -> Result<ZonalField> {
    if !(zeta.abs() < 1.0) {
        return Err(Error::Domain(format!("|zeta| < 1 required, got {zeta}")));
    }
    let grid = Arc::clone(&u.grid);
    let kappa = grid.params().hls_bubble_power();
    let coeffs = u.analyze();
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| {
            let w = ((1.0 - zeta * zeta).sqrt() / (1.0 - zeta * t)).powf(kappa);
            let mapped = (t - zeta) / (1.0 - zeta * t);
            w * synthesize_at(&coeffs, &grid, mapped)
        })
        .collect();
    ZonalField::from_values(&grid, values)
}
