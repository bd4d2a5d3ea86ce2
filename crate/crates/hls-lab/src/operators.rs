//! The fractional integral operator P_2s on S^n and its spectral inverse,
//! fractional Sobolev norms, sharp-inequality deficits, and Euler-Lagrange
//! residual fields.
//!
//! P_2s acts on a degree-l spherical harmonic as multiplication by the
//! Funk-Hecke eigenvalue Gamma(l + n/2 - s) / Gamma(l + n/2 + s); the direct
//! route integrates the Riesz kernel |omega - xi|^{-(n-2s)} with constant
//! Gamma(n/2 - s) / (2^{2s} pi^{n/2} Gamma(s)) and serves as the
//! implementation-independent cross-check of the spectral route.

use crate::error::{Error, Result};
use crate::specialfuncs::{gauss_jacobi, ln_gamma, QuadratureRule};
use crate::sphere::{lp_norm, synthesize, synthesize_at, Params, ZonalField};

/// Sharp constant of the Hardy-Littlewood-Sobolev inequality,
/// Gamma((n+2s)/2) / Gamma((n-2s)/2) * |S^n|^{2s/n}.
pub fn sharp_constant(params: Params) -> Result<f64> {
    let (n, s) = (params.nf(), params.s());
    let area = crate::sphere::sphere_area(params.n())?;
    Ok(
        (ln_gamma((n + 2.0 * s) / 2.0)? - ln_gamma((n - 2.0 * s) / 2.0)?
            + (2.0 * s / n) * area.ln())
        .exp(),
    )
}

/// Funk-Hecke eigenvalue of P_2s on degree-l harmonics,
/// Gamma(l + n/2 - s) / Gamma(l + n/2 + s).
pub fn funk_hecke_multiplier(params: Params, l: usize) -> f64 {
    let half_n = params.nf() / 2.0;
    let s = params.s();
    let lf = l as f64;
    (ln_gamma(lf + half_n - s).expect("argument positive since s < n/2")
        - ln_gamma(lf + half_n + s).expect("argument positive"))
    .exp()
}

/// Eigenvalues lambda_l for l = 0..L; strictly decreasing and positive.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    lambdas: Vec<f64>,
}

impl MultiplierTable {
    pub fn new(params: Params, cutoff: usize) -> Self {
        let lambdas: Vec<f64> = (0..=cutoff)
            .map(|l| funk_hecke_multiplier(params, l))
            .collect();
        debug_assert!(lambdas.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        Self { lambdas }
    }

    pub fn get(&self, l: usize) -> f64 {
        self.lambdas[l]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambdas
    }

    /// Growth of the inverse multipliers across the band, lambda_0/lambda_L;
    /// behaves like L^{2s}. Reported, never asserted.
    pub fn conditioning(&self) -> f64 {
        self.lambdas[0] / *self.lambdas.last().unwrap()
    }
}

/// Spectral application of P_2s: synthesize(lambda . analyze(u)).
pub fn apply_p2s(u: &ZonalField) -> ZonalField {
    let grid = u.grid();
    let table = MultiplierTable::new(grid.params(), grid.cutoff());
    let coeffs = u.analyze().scaled_by(|l| table.get(l));
    synthesize(&coeffs, grid).expect("cutoff matches grid")
}

/// Spectral inverse of P_2s on the band-limited sector; the sphere analogue
/// of the fractional Laplacian. Truncation is declared, not regularized.
pub fn apply_a2s(u: &ZonalField) -> ZonalField {
    let grid = u.grid();
    let table = MultiplierTable::new(grid.params(), grid.cutoff());
    let coeffs = u.analyze().scaled_by(|l| 1.0 / table.get(l));
    synthesize(&coeffs, grid).expect("cutoff matches grid")
}

/// The pair (||u||_{H^{-s}}, ||u||_{H^s}) = (sqrt(sum lambda_l a_l^2),
/// sqrt(sum a_l^2 / lambda_l)) on the band-limited sector.
pub fn h_norms(u: &ZonalField) -> (f64, f64) {
    let grid = u.grid();
    let table = MultiplierTable::new(grid.params(), grid.cutoff());
    let coeffs = u.analyze();
    let mut minus = 0.0;
    let mut plus = 0.0;
    for (l, &a) in coeffs.as_slice().iter().enumerate() {
        minus += table.get(l) * a * a;
        plus += a * a / table.get(l);
    }
    (minus.sqrt(), plus.sqrt())
}

/// H^{-s} pairing <P u, u> computed through the coefficient view.
pub fn p_quadratic_form(u: &ZonalField) -> f64 {
    let h = h_norms(u).0;
    h * h
}

/// The monotone map |x|^{-4s/(n+2s)} x, extended by 0 at x = 0 (the exponent
/// on |x| is (n-2s)/(n+2s) > 0, so the extension is continuous).
pub fn hls_power(params: Params, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(params.hls_map_exponent())
    }
}

/// The map |x|^{4s/(n-2s)} x.
pub fn sobolev_power(params: Params, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(params.sobolev_map_exponent())
    }
}

/// Sharp-inequality deficit ||u||^2_{2n/(n+2s)} - S <P u, u>; nonnegative up
/// to quadrature tolerance, zero exactly on the optimizer manifold.
pub fn hls_deficit(u: &ZonalField) -> f64 {
    let params = u.grid().params();
    let s_sharp = sharp_constant(params).expect("valid params");
    let norm = lp_norm(u, params.p_hls());
    norm * norm - s_sharp * p_quadratic_form(u)
}

/// Euler-Lagrange residual |u|^{-4s/(n+2s)} u - P_2s u together with its
/// L^{2n/(n-2s)} norm.
pub fn hls_residual(u: &ZonalField) -> (ZonalField, f64) {
    let params = u.grid().params();
    let pu = apply_p2s(u);
    let field = u.map(|x| hls_power(params, x)).sub(&pu).expect("same grid");
    let norm = lp_norm(&field, params.p_dual());
    (field, norm)
}

/// Gradient-side residual A_2s u - |u|^{4s/(n-2s)} u together with its
/// H^{-s} norm sqrt(<P r, r>).
pub fn sobolev_residual(u: &ZonalField) -> (ZonalField, f64) {
    let params = u.grid().params();
    let au = apply_a2s(u);
    let field = au
        .sub(&u.map(|x| sobolev_power(params, x)))
        .expect("same grid");
    let norm = h_norms(&field).0;
    (field, norm)
}

const NODE_COINCIDENCE_TOL: f64 = 1e-12;

/// Direct kernel evaluation of (P_2s u)(theta) at the given polar
/// coordinates, never touching the Funk-Hecke multipliers.
///
/// The S^n integral is written in coordinates centered at the evaluation
/// point: with gamma the geodesic angle from the evaluation point and c the
/// azimuthal cosine toward the pole,
///   xi . e = cos(gamma) t0 + sin(gamma) sqrt(1 - t0^2) c,
/// so the azimuthal reduction is a Gauss-Jacobi integral of a degree-L
/// polynomial (exact), and the kernel factor (2 - 2 cos gamma)^{-(n-2s)/2}
/// is singular only at the fixed endpoint gamma = 0, which geometrically
/// graded Gauss-Legendre panels absorb.
///
/// Evaluation angles must stay off the grid nodes; `ZonalGrid::staggered_angles`
/// provides compliant defaults. The endpoint singularity is integrable for
/// all 0 < s < n/2; panel accuracy degrades below s ~ 0.1.
pub fn apply_p2s_direct(u: &ZonalField, eval_angles: &[f64]) -> Result<Vec<f64>> {
    let grid = u.grid();
    let params = grid.params();
    let n = params.nf();
    let s = params.s();

    for &t0 in eval_angles {
        if !(t0 > -1.0 && t0 < 1.0) {
            return Err(Error::Domain(format!("eval angle {t0} outside (-1, 1)")));
        }
        if grid
            .nodes()
            .iter()
            .any(|&t| (t - t0).abs() <= NODE_COINCIDENCE_TOL)
        {
            return Err(Error::Singular(format!(
                "eval angle {t0} coincides with a quadrature node"
            )));
        }
    }

    // Kernel constant Gamma(n/2 - s) / (2^{2s} pi^{n/2} Gamma(s)).
    let kernel_const = (ln_gamma(n / 2.0 - s)?
        - 2.0 * s * std::f64::consts::LN_2
        - (n / 2.0) * std::f64::consts::PI.ln()
        - ln_gamma(s)?)
    .exp();
    // |S^{n-2}| = 2 pi^{(n-1)/2} / Gamma((n-1)/2); n >= 2 so the argument is
    // positive (n = 2 gives |S^0| = 2).
    let area_nm2 = (std::f64::consts::LN_2 + (n - 1.0) / 2.0 * std::f64::consts::PI.ln()
        - ln_gamma((n - 1.0) / 2.0)?)
    .exp();

    // 64 azimuthal nodes integrate polynomials up to degree 127, well above
    // any cutoff in use.
    let az_exp = (n - 3.0) / 2.0;
    let azimuth = gauss_jacobi(64, az_exp, az_exp)?;
    let panel = gauss_jacobi(12, 0.0, 0.0)?;
    let coeffs = u.analyze();
    let kernel_exp = -(n - 2.0 * s);

    let mut out = Vec::with_capacity(eval_angles.len());
    for &t0 in eval_angles {
        let sin0 = (1.0 - t0 * t0).sqrt();
        let mut polar = 0.0;
        for (lo, hi) in endpoint_graded_panels(std::f64::consts::PI) {
            polar += gl_panel(&panel, lo, hi, |gamma| {
                let (sg, cg) = gamma.sin_cos();
                // |omega - xi| = 2 sin(gamma/2), stable at small gamma.
                let dist = 2.0 * (0.5 * gamma).sin();
                let profile =
                    azimuth.integrate(|c| synthesize_at(&coeffs, grid, cg * t0 + sg * sin0 * c));
                sg.powf(n - 1.0) * dist.powf(kernel_exp) * profile
            });
        }
        out.push(kernel_const * area_nm2 * polar);
    }
    Ok(out)
}

/// Geometric panel subdivision of [0, hi] refined toward the singular
/// endpoint at 0.
fn endpoint_graded_panels(hi: f64) -> Vec<(f64, f64)> {
    let levels = ((hi / 1e-9).log2().ceil().max(1.0)) as usize;
    let mut cuts = Vec::with_capacity(levels + 2);
    cuts.push(0.0);
    for k in (0..levels).rev() {
        cuts.push(hi * 0.5f64.powi(k as i32 + 1));
    }
    cuts.push(hi);
    cuts.dedup();
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn gl_panel(rule: &QuadratureRule, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    rule.integrate(|x| f(mid + half * x)) * half
}

/// Deficit/instance helpers used in several invariant checks: the analytic
/// first-order expansion coefficient for a degree-l perturbation of the
/// constant beta c_{n,s},
/// A(l, beta) = (n-2s)/(n+2s) (beta c)^{-4s/(n+2s)} - lambda_l.
pub fn expansion_coefficient(params: Params, l: usize, beta: f64) -> f64 {
    let ratio = params.hls_map_exponent();
    // c_{n,s}^{-4s/(n+2s)} = lambda_0 by the Euler-Lagrange identity.
    let lambda0 = funk_hecke_multiplier(params, 0);
    let scaled = beta.powf(-4.0 * params.s() / (params.nf() + 2.0 * params.s())) * lambda0;
    ratio * scaled - funk_hecke_multiplier(params, l)
}

/// Lower bound of the eigenvalue gap displayed in the local expansion:
/// Gamma(n/2-s+1)/Gamma(n/2+s+1) (beta^{-4s/(n+2s)} - (n/2-s+1)/(n/2+s+1)).
pub fn expansion_gap_bound(params: Params, beta: f64) -> f64 {
    let half_n = params.nf() / 2.0;
    let s = params.s();
    let prefactor = (ln_gamma(half_n - s + 1.0).expect("positive")
        - ln_gamma(half_n + s + 1.0).expect("positive"))
    .exp();
    let threshold = (half_n - s + 1.0) / (half_n + s + 1.0);
    prefactor * (beta.powf(-4.0 * s / (params.nf() + 2.0 * s)) - threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{inner, SpectralCoeffs, ZonalGrid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn grid(n: u32, s: f64) -> Arc<ZonalGrid> {
        ZonalGrid::new(Params::new(n, s).unwrap(), 16, 48).unwrap()
    }

    #[test]
    fn multiplier_gamma_oracle_values() {
        // Gamma(1/2)/Gamma(5/2) = 4/3 and Gamma(2)/Gamma(4) = 1/6.
        let p31 = Params::new(3, 1.0).unwrap();
        assert_relative_eq!(
            funk_hecke_multiplier(p31, 0),
            4.0 / 3.0,
            max_relative = 1e-13
        );
        let p41 = Params::new(4, 1.0).unwrap();
        assert_relative_eq!(
            funk_hecke_multiplier(p41, 1),
            1.0 / 6.0,
            max_relative = 1e-13
        );
        // Equal Gamma arguments in the s -> 0 limit proxy.
        let tiny = Params::new(3, 1e-8).unwrap();
        assert!((funk_hecke_multiplier(tiny, 5) - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn multipliers_strictly_decreasing() {
        for &(n, s) in &[(3u32, 1.0), (4, 1.0), (5, 1.5), (2, 0.7)] {
            let table = MultiplierTable::new(Params::new(n, s).unwrap(), 32);
            for l in 0..32 {
                assert!(table.get(l + 1) < table.get(l));
                assert!(table.get(l) > 0.0);
            }
            assert!(table.conditioning() > 1.0);
        }
    }

    #[test]
    fn p2s_on_constants_and_eigenfunctions() {
        let grid = grid(3, 1.0);
        let params = grid.params();
        let c = 1.7;
        let pu = apply_p2s(&ZonalField::constant(&grid, c));
        let lambda0 = funk_hecke_multiplier(params, 0);
        for &v in pu.values() {
            assert_relative_eq!(v, lambda0 * c, max_relative = 1e-12);
        }
        let y2 = ZonalField::zonal_harmonic(&grid, 2).unwrap();
        let py2 = apply_p2s(&y2);
        let lambda2 = funk_hecke_multiplier(params, 2);
        for (a, b) in py2.values().iter().zip(y2.values()) {
            assert_relative_eq!(*a, lambda2 * b, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn a2s_inverts_p2s_on_band_limited_fields() {
        let grid = grid(4, 1.0);
        let u = ZonalField::constant(&grid, 0.8)
            .add(&ZonalField::zonal_harmonic(&grid, 3).unwrap().scale(0.5))
            .unwrap();
        let roundtrip = apply_a2s(&apply_p2s(&u));
        for (a, b) in roundtrip.values().iter().zip(u.values()) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        let params = grid.params();
        let au = apply_a2s(&ZonalField::constant(&grid, 1.0));
        let expect = 1.0 / funk_hecke_multiplier(params, 0);
        // Analysis noise in the degree-L coefficients is amplified by the
        // inverse multipliers, so the tolerance sits above pure roundoff.
        for &v in au.values() {
            assert_relative_eq!(v, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn h_norm_identities() {
        let grid = grid(3, 1.0);
        let params = grid.params();
        let area = grid.area();
        let c = 0.9;
        let u = ZonalField::constant(&grid, c);
        let (h_minus, h_plus) = h_norms(&u);
        let lambda0 = funk_hecke_multiplier(params, 0);
        assert_relative_eq!(
            h_minus,
            lambda0.sqrt() * area.sqrt() * c,
            max_relative = 1e-12
        );
        // Cauchy-Schwarz in the spectrum.
        let v = u
            .add(&ZonalField::zonal_harmonic(&grid, 2).unwrap().scale(0.4))
            .unwrap();
        let (hm, hp) = h_norms(&v);
        let l2 = lp_norm(&v, 2.0);
        assert!(hm * hp >= l2 * l2 * (1.0 - 1e-12));
        // Sharp-inequality instance: h_minus <= S^{-1/2} ||v||_{2n/(n+2s)}.
        let s_sharp = sharp_constant(params).unwrap();
        assert!(hm <= s_sharp.powf(-0.5) * lp_norm(&v, params.p_hls()) * (1.0 + 1e-12));
        let _ = h_plus;
    }

    #[test]
    fn deficit_vanishes_on_constants_at_critical_amplitude_scalings() {
        // Any constant is an optimizer (the zeta = 0 bubble with free c).
        let grid = grid(3, 1.0);
        for c in [0.3, 1.0, 2.4] {
            let u = ZonalField::constant(&grid, c);
            let d = hls_deficit(&u);
            let scale = lp_norm(&u, grid.params().p_hls()).powi(2);
            assert!(d.abs() <= 1e-10 * scale, "c={c}: {d:e}");
        }
        let zero = ZonalField::constant(&grid, 0.0);
        assert_eq!(hls_deficit(&zero), 0.0);
    }

    #[test]
    fn deficit_positive_for_harmonic_perturbations() {
        let grid = grid(3, 1.0);
        let lambda0 = funk_hecke_multiplier(grid.params(), 0);
        let c = lambda0.powf(1.0 / (4.0 * 1.0 / (3.0 + 2.0)));
        let u = ZonalField::constant(&grid, c)
            .add(&ZonalField::zonal_harmonic(&grid, 2).unwrap().scale(1e-2))
            .unwrap();
        assert!(hls_deficit(&u) > 0.0);
    }

    #[test]
    fn residual_closed_form_on_scaled_constant() {
        // For u = 2 c_{n,s} the residual is the constant
        // (2c)^{(n-2s)/(n+2s)} - 2 lambda_0 c, and its L^{2n/(n-2s)} norm
        // carries a factor |S^n|^{(n-2s)/(2n)}.
        let grid = grid(3, 1.0);
        let params = grid.params();
        let lambda0 = funk_hecke_multiplier(params, 0);
        let c = lambda0.powf((params.nf() + 2.0 * params.s()) / (4.0 * params.s()) * -1.0);
        let u = ZonalField::constant(&grid, 2.0 * c);
        let (_, norm) = hls_residual(&u);
        let expect = ((2.0 * c).powf(params.hls_map_exponent()) - 2.0 * lambda0 * c).abs()
            * grid.area().powf(1.0 / params.p_dual());
        assert_relative_eq!(norm, expect, max_relative = 1e-10);
        assert!(norm > 1e-3);
    }

    #[test]
    fn residual_vanishes_at_critical_constant() {
        for (n, s) in [(3u32, 1.0f64), (4, 1.0), (5, 1.5)] {
            let grid = grid(n, s);
            let params = grid.params();
            let lambda0 = funk_hecke_multiplier(params, 0);
            // c_{n,s}^{4s/(n+2s)} = 1/lambda_0.
            let c = lambda0.powf(-(params.nf() + 2.0 * params.s()) / (4.0 * params.s()));
            let u = ZonalField::constant(&grid, c);
            let (_, norm) = hls_residual(&u);
            assert!(norm <= 1e-9, "(n,s)=({n},{s}): {norm:e}");
            let d = u.map(|x| hls_power(params, x));
            assert_relative_eq!(d.values()[0], lambda0 * c, max_relative = 1e-12);
        }
    }

    #[test]
    fn sobolev_residual_vanishes_at_critical_constant_and_zero() {
        let grid = grid(3, 1.0);
        let params = grid.params();
        let lambda0 = funk_hecke_multiplier(params, 0);
        let d_crit = lambda0.powf(-(params.nf() - 2.0 * params.s()) / (4.0 * params.s()));
        let (_, norm) = sobolev_residual(&ZonalField::constant(&grid, d_crit));
        assert!(norm <= 1e-9, "{norm:e}");
        let (_, zero_norm) = sobolev_residual(&ZonalField::constant(&grid, 0.0));
        assert_eq!(zero_norm, 0.0);
    }

    #[test]
    fn sobolev_residual_is_not_homogeneous() {
        let grid = grid(3, 1.0);
        let u = ZonalField::constant(&grid, 0.7)
            .add(&ZonalField::zonal_harmonic(&grid, 2).unwrap().scale(0.1))
            .unwrap();
        let r1 = sobolev_residual(&u).1;
        let r2 = sobolev_residual(&u.scale(2.0)).1;
        assert!((r2 - 2.0 * r1).abs() > 1e-3 * r1.abs());
    }

    #[test]
    fn direct_operator_matches_spectrum_on_constants() {
        for (n, s) in [(3u32, 1.0f64), (4, 1.0), (5, 1.5)] {
            let grid = grid(n, s);
            let lambda0 = funk_hecke_multiplier(grid.params(), 0);
            let u = ZonalField::constant(&grid, 1.0);
            let angles = grid.staggered_angles(5);
            let direct = apply_p2s_direct(&u, &angles).unwrap();
            for v in direct {
                assert!(
                    (v - lambda0).abs() <= 1e-4 * lambda0,
                    "(n,s)=({n},{s}): {v} vs {lambda0}"
                );
            }
        }
    }

    #[test]
    fn direct_operator_matches_spectrum_on_harmonics() {
        let grid = grid(3, 1.0);
        let params = grid.params();
        let angles = grid.staggered_angles(7);
        for l in 1..=8usize {
            let y = ZonalField::zonal_harmonic(&grid, l).unwrap();
            let lambda = funk_hecke_multiplier(params, l);
            let direct = apply_p2s_direct(&y, &angles).unwrap();
            let scale = y.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (&t0, &v) in angles.iter().zip(&direct) {
                let expect = lambda * grid.harmonic_at(l, t0);
                assert!(
                    (v - expect).abs() <= 1e-4 * (lambda * scale),
                    "l={l}, t0={t0}: {v} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn direct_operator_is_linear() {
        let grid = grid(3, 1.0);
        let u = ZonalField::zonal_harmonic(&grid, 2).unwrap();
        let v = ZonalField::zonal_harmonic(&grid, 5).unwrap();
        let angles = grid.staggered_angles(3);
        let du = apply_p2s_direct(&u, &angles).unwrap();
        let dv = apply_p2s_direct(&v, &angles).unwrap();
        let dsum = apply_p2s_direct(&u.add(&v).unwrap(), &angles).unwrap();
        for i in 0..angles.len() {
            assert!((dsum[i] - du[i] - dv[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn direct_operator_rejects_node_coincidence() {
        let grid = grid(3, 1.0);
        let u = ZonalField::constant(&grid, 1.0);
        let node = grid.nodes()[10];
        assert!(matches!(
            apply_p2s_direct(&u, &[node]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn eigenvalue_gap_bound_over_band_and_betas() {
        // A(l, beta) >= the displayed lower bound for every l >= 2, over a
        // beta grid inside the admissible regime.
        for &(n, s) in &[(3u32, 1.0), (4, 1.0), (5, 1.5)] {
            let params = Params::new(n, s).unwrap();
            let half_n = params.nf() / 2.0;
            let threshold = (half_n - s + 1.0) / (half_n + s + 1.0);
            for ib in 0..=20 {
                let beta = 0.7 + 0.04 * ib as f64;
                let admissible = beta.powf(-4.0 * s / (params.nf() + 2.0 * s)) > threshold;
                if !admissible {
                    continue;
                }
                let bound = expansion_gap_bound(params, beta);
                for l in 2..=32 {
                    let a = expansion_coefficient(params, l, beta);
                    assert!(
                        a >= bound - 1e-14,
                        "(n,s)=({n},{s}), l={l}, beta={beta}: {a} < {bound}"
                    );
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // Self-adjointness of the spectral operator under the quadrature
        // inner product.
        #[test]
        fn p2s_self_adjoint(
            cu in proptest::collection::vec(-1.0f64..1.0, 17),
            cv in proptest::collection::vec(-1.0f64..1.0, 17),
        ) {
            let grid = grid(3, 1.0);
            let u = synthesize(&SpectralCoeffs::new(cu), &grid).unwrap();
            let v = synthesize(&SpectralCoeffs::new(cv), &grid).unwrap();
            let lhs = inner(&apply_p2s(&u), &v);
            let rhs = inner(&u, &apply_p2s(&v));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }

        // Deficit nonnegativity on random band-limited fields.
        #[test]
        fn deficit_nonnegative(coeffs in proptest::collection::vec(-1.0f64..1.0, 17)) {
            let grid = grid(3, 1.0);
            let u = synthesize(&SpectralCoeffs::new(coeffs), &grid).unwrap();
            prop_assert!(hls_deficit(&u) >= -1e-9);
        }
    }
}
