//! Nearest-bubble distances: derivative-free simplex descent for the
//! non-Hilbert L^{2n/(n+2s)} metric, golden-section plus Newton polish for
//! the Hilbert <P ., .> metric, first-order orthogonality at the Hilbert
//! minimizer, and the comparison between the two distances.
//!
//! The minimization box clamps |zeta| <= 0.995; a boundary hit is flagged as
//! concentration rather than treated as convergence failure.

use std::sync::Arc;

use crate::bubbles::{
    bubble_d2_zeta, bubble_sphere, constants, tangent_fields, BubbleKind, BubbleParams,
};
use crate::error::Result;
use crate::operators::MultiplierTable;
use crate::sphere::{lp_norm, Params, ZonalField, ZonalGrid};

/// Clamp for the axial parameter; beyond it the quadrature under-resolves
/// the concentrating bubble.
pub const ZETA_CLAMP: f64 = 0.995;

/// Which bubble family the projection ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    /// Free amplitude and axial parameter (the optimizer manifold M).
    Optimizer,
    /// Fixed critical amplitude, axial parameter only (the manifold of
    /// critical points).
    Critical,
}

/// Result of a nearest-bubble projection.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionResult {
    pub bp: BubbleParams,
    pub dist: f64,
    pub converged: bool,
    pub iterations: usize,
    /// max - min of the local minima found from the multistart grid.
    pub multistart_spread: f64,
    /// Set when the minimizer sits on the zeta clamp or the amplitude floor.
    pub boundary_hit: bool,
}

// ---------------------------------------------------------------------------
// Bounded Nelder-Mead simplex descent.
// ---------------------------------------------------------------------------

struct SimplexOutcome {
    x: Vec<f64>,
    f: f64,
    converged: bool,
    iterations: usize,
}

/// Standard Nelder-Mead with reflection/expansion/contraction/shrink and box
/// clamping; convergence when the simplex diameter drops below `tol`.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    max_iter: usize,
) -> SimplexOutcome {
    let dim = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..dim {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    vertices.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += step[i];
        vertices.push(v);
    }
    for v in &mut vertices {
        clamp(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| f(v)).collect();

    let diameter = |vs: &[Vec<f64>]| -> f64 {
        let mut d = 0.0f64;
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                let gap = vs[i]
                    .iter()
                    .zip(&vs[j])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                d = d.max(gap);
            }
        }
        d
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // Order vertices by value.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim.saturating_sub(1).min(dim - 1)];

        if diameter(&vertices) <= tol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (idx, v) in vertices.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for i in 0..dim {
                centroid[i] += v[i] / dim as f64;
            }
        }

        let blend = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + s * (x - y)).collect()
        };

        let mut reflected = blend(&centroid, &vertices[worst], 1.0);
        clamp(&mut reflected);
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            let mut expanded = blend(&centroid, &vertices[worst], 2.0);
            clamp(&mut expanded);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                vertices[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                vertices[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            vertices[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        // Contraction toward the centroid.
        let mut contracted = blend(&centroid, &vertices[worst], -0.5);
        clamp(&mut contracted);
        let f_contracted = f(&contracted);
        if f_contracted < values[worst] {
            vertices[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // Shrink toward the best vertex.
        let best_vertex = vertices[best].clone();
        for (idx, v) in vertices.iter_mut().enumerate() {
            if idx == best {
                continue;
            }
            for i in 0..dim {
                v[i] = best_vertex[i] + 0.5 * (v[i] - best_vertex[i]);
            }
            clamp(v);
            values[idx] = f(v);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    SimplexOutcome {
        x: vertices[best].clone(),
        f: values[best],
        converged,
        iterations,
    }
}

// ---------------------------------------------------------------------------
// Non-Hilbert projection.
// ---------------------------------------------------------------------------

/// Minimizes ||u - v_{c,zeta}||_{L^{2n/(n+2s)}} over the requested manifold:
/// both parameters for the optimizer manifold, the axial parameter alone at
/// critical amplitude. Derivative-free simplex descent from a multistart
/// grid (amplitude multipliers 0.2..2, zeta in {-0.8,-0.4,0,0.4,0.8});
/// non-convergence is flagged on the result, never raised.
pub fn nearest_bubble_lp(u: &ZonalField, manifold: Manifold) -> Result<ProjectionResult> {
    let grid = Arc::clone(u.grid());
    let params = grid.params();
    let consts = constants(params)?;
    let p = params.p_hls();
    let c_scale = consts.c_crit;

    let objective_pair = |c: f64, zeta: f64| -> f64 {
        let v = bubble_sphere(params, BubbleParams { c, zeta }, BubbleKind::Hls, &grid)
            .expect("zeta stays clamped inside (-1,1)");
        lp_norm(&u.sub(&v).expect("same grid"), p)
    };

    let zeta_starts = [-0.8, -0.4, 0.0, 0.4, 0.8];
    let mut runs: Vec<SimplexOutcome> = Vec::new();
    match manifold {
        Manifold::Critical => {
            let mut f = |x: &[f64]| objective_pair(consts.c_crit, x[0]);
            for &z0 in &zeta_starts {
                runs.push(nelder_mead(
                    &mut f,
                    &[z0],
                    &[0.1],
                    &[-ZETA_CLAMP],
                    &[ZETA_CLAMP],
                    1e-9,
                    800,
                ));
            }
        }
        Manifold::Optimizer => {
            let mut f = |x: &[f64]| objective_pair(x[0] * c_scale, x[1]);
            for ic in 0..5 {
                let c0 = 0.2 + 0.45 * ic as f64;
                for &z0 in &zeta_starts {
                    runs.push(nelder_mead(
                        &mut f,
                        &[c0, z0],
                        &[0.15, 0.1],
                        &[0.0, -ZETA_CLAMP],
                        &[4.0, ZETA_CLAMP],
                        1e-9,
                        800,
                    ));
                }
            }
        }
    }

    let converged_runs: Vec<&SimplexOutcome> = runs.iter().filter(|r| r.converged).collect();
    let pool: Vec<&SimplexOutcome> = if converged_runs.is_empty() {
        runs.iter().collect()
    } else {
        converged_runs
    };
    let f_best = pool.iter().map(|r| r.f).fold(f64::INFINITY, f64::min);
    let f_worst_local = pool.iter().map(|r| r.f).fold(f64::NEG_INFINITY, f64::max);
    // Ties within solver tolerance resolve to the smallest |zeta|.
    let zeta_index = match manifold {
        Manifold::Critical => 0,
        Manifold::Optimizer => 1,
    };
    let best = pool
        .iter()
        .filter(|r| r.f <= f_best + 1e-12 * f_best.max(1.0))
        .min_by(|a, b| {
            a.x[zeta_index]
                .abs()
                .partial_cmp(&b.x[zeta_index].abs())
                .unwrap()
        })
        .unwrap();

    let (c, zeta) = match manifold {
        Manifold::Critical => (consts.c_crit, best.x[0]),
        Manifold::Optimizer => (best.x[0] * c_scale, best.x[1]),
    };
    let boundary_hit =
        zeta.abs() >= ZETA_CLAMP - 1e-9 || (manifold == Manifold::Optimizer && c <= 1e-9 * c_scale);
    Ok(ProjectionResult {
        bp: BubbleParams { c, zeta },
        dist: best.f,
        converged: best.converged,
        iterations: runs.iter().map(|r| r.iterations).sum(),
        multistart_spread: f_worst_local - f_best,
        boundary_hit,
    })
}

// ---------------------------------------------------------------------------
// Hilbert projection.
// ---------------------------------------------------------------------------

struct QuadraticMetric {
    kind: BubbleKind,
    amplitude: f64,
    /// Degree multipliers of the metric: lambda_l for <P ., .>, 1/lambda_l
    /// for the H^s pairing.
    multipliers: Vec<f64>,
}

impl QuadraticMetric {
    fn hls(params: Params, grid: &ZonalGrid) -> Result<Self> {
        let consts = constants(params)?;
        Ok(Self {
            kind: BubbleKind::Hls,
            amplitude: consts.c_crit,
            multipliers: MultiplierTable::new(params, grid.cutoff())
                .as_slice()
                .to_vec(),
        })
    }

    fn sobolev(params: Params, grid: &ZonalGrid) -> Result<Self> {
        let consts = constants(params)?;
        Ok(Self {
            kind: BubbleKind::Sobolev,
            amplitude: consts.d_crit,
            multipliers: MultiplierTable::new(params, grid.cutoff())
                .as_slice()
                .iter()
                .map(|l| 1.0 / l)
                .collect(),
        })
    }
}

fn quadratic_objective(
    u: &ZonalField,
    metric: &QuadraticMetric,
    grid: &Arc<ZonalGrid>,
    zeta: f64,
) -> f64 {
    let params = grid.params();
    let v = bubble_sphere(
        params,
        BubbleParams {
            c: metric.amplitude,
            zeta,
        },
        metric.kind,
        grid,
    )
    .expect("clamped zeta");
    let diff = u.sub(&v).expect("same grid").analyze();
    diff.as_slice()
        .iter()
        .zip(&metric.multipliers)
        .map(|(a, m)| m * a * a)
        .sum()
}

/// First and second zeta-derivatives of the quadratic objective.
fn quadratic_derivs(
    u: &ZonalField,
    metric: &QuadraticMetric,
    grid: &Arc<ZonalGrid>,
    zeta: f64,
) -> (f64, f64) {
    let params = grid.params();
    let bp = BubbleParams {
        c: metric.amplitude,
        zeta,
    };
    let v = bubble_sphere(params, bp, metric.kind, grid).expect("clamped zeta");
    let (_, dv) = tangent_fields(params, bp, metric.kind, grid).expect("clamped zeta");
    let d2v = bubble_d2_zeta(params, bp, metric.kind, grid).expect("clamped zeta");
    let diff = u.sub(&v).expect("same grid").analyze();
    let a_dv = dv.analyze();
    let a_d2v = d2v.analyze();
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for (l, m) in metric.multipliers.iter().enumerate() {
        let r = diff.get(l);
        q1 += -2.0 * m * r * a_dv.get(l);
        q2 += 2.0 * m * (a_dv.get(l) * a_dv.get(l) - r * a_d2v.get(l));
    }
    (q1, q2)
}

fn project_zeta_quadratic(u: &ZonalField, metric: &QuadraticMetric) -> Result<ProjectionResult> {
    let grid = Arc::clone(u.grid());
    let obj = |z: f64| quadratic_objective(u, metric, &grid, z);

    // Coarse scan to bracket the global minimum, then golden section.
    let scan_count = 65usize;
    let mut best_idx = 0;
    let mut best_val = f64::INFINITY;
    let scan_at = |i: usize| -ZETA_CLAMP + 2.0 * ZETA_CLAMP * i as f64 / (scan_count - 1) as f64;
    for i in 0..scan_count {
        let v = obj(scan_at(i));
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    let mut lo = scan_at(best_idx.saturating_sub(1));
    let mut hi = scan_at((best_idx + 1).min(scan_count - 1));

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = obj(x1);
    let mut f2 = obj(x2);
    let mut iterations = scan_count;
    while hi - lo > 1e-6 {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = obj(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = obj(x2);
        }
    }
    let mut z = 0.5 * (lo + hi);

    // Newton polish on the analytic gradient.
    let mut stationarity = f64::INFINITY;
    for _ in 0..25 {
        iterations += 1;
        let (q1, q2) = quadratic_derivs(u, metric, &grid, z);
        stationarity = q1.abs() / q2.abs().max(1.0);
        if !q2.is_finite() || q2 <= 0.0 {
            break;
        }
        let step = q1 / q2;
        let next = (z - step).clamp(-ZETA_CLAMP, ZETA_CLAMP);
        let moved = (next - z).abs();
        z = next;
        if moved <= 1e-13 {
            let (q1, q2) = quadratic_derivs(u, metric, &grid, z);
            stationarity = q1.abs() / q2.abs().max(1.0);
            break;
        }
    }
    let boundary_hit = z.abs() >= ZETA_CLAMP - 1e-9;
    let converged = stationarity <= 1e-8 || boundary_hit;

    Ok(ProjectionResult {
        bp: BubbleParams {
            c: metric.amplitude,
            zeta: z,
        },
        dist: obj(z).max(0.0).sqrt(),
        converged,
        iterations,
        multistart_spread: 0.0,
        boundary_hit,
    })
}

/// Minimizes <P(u - v_zeta), u - v_zeta> over the critical manifold;
/// golden-section bracketing plus Newton polish on the analytic gradient.
pub fn nearest_bubble_p(u: &ZonalField) -> Result<ProjectionResult> {
    let grid = u.grid();
    let metric = QuadraticMetric::hls(grid.params(), grid)?;
    project_zeta_quadratic(u, &metric)
}

/// Minimizes the H^s distance ||u - v_zeta||_{H^s} over the critical
/// Aubin-Talenti family (gradient side).
pub fn nearest_sobolev_bubble_hs(u: &ZonalField) -> Result<ProjectionResult> {
    let grid = u.grid();
    let metric = QuadraticMetric::sobolev(grid.params(), grid)?;
    project_zeta_quadratic(u, &metric)
}

// ---------------------------------------------------------------------------
// Orthogonality and comparison.
// ---------------------------------------------------------------------------

/// Normalized first-order pairing at a Hilbert-metric minimizer.
#[derive(Debug, Clone, Copy)]
pub struct OrthogonalityCheck {
    /// |<P(u - phi), d_zeta phi>| / (||u - phi||_{H^{-s}} ||d_zeta phi||_{H^{-s}}).
    pub value: f64,
    /// Set when the remainder is numerically zero and the quotient is 0/0.
    pub degenerate: bool,
}

/// Checks the first-order condition of the Hilbert projection: the remainder
/// is orthogonal to the axial tangent direction in the <P ., .> pairing.
pub fn orthogonality_check(u: &ZonalField, pr: &ProjectionResult) -> Result<OrthogonalityCheck> {
    let grid = Arc::clone(u.grid());
    let params = grid.params();
    let bp = BubbleParams::new(pr.bp.c, pr.bp.zeta)?;
    let v = bubble_sphere(params, bp, BubbleKind::Hls, &grid)?;
    let (_, dv) = tangent_fields(params, bp, BubbleKind::Hls, &grid)?;
    let table = MultiplierTable::new(params, grid.cutoff());
    let r = u.sub(&v)?.analyze();
    let a_dv = dv.analyze();
    let mut pairing = 0.0;
    let mut r_norm_sq = 0.0;
    let mut dv_norm_sq = 0.0;
    for l in 0..=grid.cutoff() {
        let m = table.get(l);
        pairing += m * r.get(l) * a_dv.get(l);
        r_norm_sq += m * r.get(l) * r.get(l);
        dv_norm_sq += m * a_dv.get(l) * a_dv.get(l);
    }
    let den = (r_norm_sq * dv_norm_sq).sqrt();
    let scale = dv_norm_sq.sqrt() * lp_norm(u, 2.0).max(1e-300);
    if den <= 1e-14 * scale {
        return Ok(OrthogonalityCheck {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(OrthogonalityCheck {
        value: pairing.abs() / den,
        degenerate: false,
    })
}

/// Comparison of the two projection distances (Lemma on equivalent
/// infinitesimals): d_lp <= ||u - phi||_{L^p} <= K_cmp d_lp with phi the
/// Hilbert-metric minimizer.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonReport {
    pub d_lp: f64,
    pub lp_dist_to_p_minimizer: f64,
    pub ratio: f64,
    pub k_cmp: f64,
    /// Heuristic small-distance regime d_lp <= 0.1 S^{(n+2s)/4s}; violations
    /// are informational, not errors.
    pub in_regime: bool,
    /// Both distances numerically zero (manifold point).
    pub degenerate: bool,
}

pub fn comparison_verify(u: &ZonalField) -> Result<ComparisonReport> {
    let params = u.grid().params();
    let consts = constants(params)?;
    let p = params.p_hls();

    let lp_proj = nearest_bubble_lp(u, Manifold::Critical)?;
    let p_proj = nearest_bubble_p(u)?;
    let phi = bubble_sphere(
        params,
        BubbleParams::new(consts.c_crit, p_proj.bp.zeta)?,
        BubbleKind::Hls,
        u.grid(),
    )?;
    let lp_dist = lp_norm(&u.sub(&phi)?, p);

    let scale = lp_norm(u, p).max(1e-300);
    let degenerate = lp_proj.dist <= 1e-10 * scale && lp_dist <= 1e-10 * scale;
    let ratio = if degenerate {
        1.0
    } else {
        lp_dist / lp_proj.dist
    };
    let regime_bound = 0.1
        * consts
            .s_sharp
            .powf((params.nf() + 2.0 * params.s()) / (4.0 * params.s()));
    Ok(ComparisonReport {
        d_lp: lp_proj.dist,
        lp_dist_to_p_minimizer: lp_dist,
        ratio,
        k_cmp: consts.k_cmp,
        in_regime: lp_proj.dist <= regime_bound,
        degenerate,
    })
}
