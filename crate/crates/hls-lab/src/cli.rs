//! Verification subcommands and report emission.
//!
//! Exit codes: 0 when every enabled assertion passes within its slack, 1 on
//! assertion failure (the report is still written), 2 on invalid parameters
//! or configuration, 3 on I/O failure. The `HLS_LAB_THREADS` environment
//! variable caps internal parallelism.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bubbles::{constants, Constants};
use crate::distance::{comparison_verify, nearest_bubble_p, orthogonality_check};
use crate::error::{Error, Result};
use crate::operators::MultiplierTable;
use crate::oracles;
use crate::report::{plot_csv, write_to, Meta, Report};
use crate::specialfuncs::{gauss_jacobi, gegenbauer};
use crate::sphere::{Params, ZonalField, ZonalGrid};
use crate::stability::{
    self, dual_chain_report, local_expansion_check, quotient_survey, sobolev_quotient_survey,
    struwe_demo, PsKind, SurveyConfig,
};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(
    name = "hlslab",
    version,
    about = "Desk-scale verification suites for sharp HLS / fractional Sobolev stability constants on the sphere"
)]
pub struct HlsLab {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sharp constants and the Funk-Hecke multiplier table.
    Constants {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stability-quotient survey against the explicit local constant.
    Survey {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Perturbation sizes.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3])]
        eps: Vec<f64>,
        /// Perturbation degrees (0 exercises the case-2 branch).
        #[arg(long, value_delimiter = ',', default_values_t = vec![0usize, 2, 3, 4])]
        degrees: Vec<usize>,
        /// Amplitude scalings of the critical constant.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.95, 1.0, 1.05])]
        betas: Vec<f64>,
        /// Conformal recentering parameters.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.4])]
        zetas: Vec<f64>,
    },
    /// First-order expansion slopes against the analytic coefficients.
    Expansion {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4])]
        degrees: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.95, 1.0, 1.05])]
        betas: Vec<f64>,
        /// Halving ladder for the Richardson slope fit.
        #[arg(long = "eps-ladder", value_delimiter = ',', default_values_t = vec![1e-2, 5e-3, 2.5e-3])]
        eps_ladder: Vec<f64>,
    },
    /// Palais-Smale sequence demonstration with single-bubble extraction.
    Struwe {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Perturbation)]
        kind: KindArg,
        #[arg(long, default_value_t = 12)]
        kmax: u32,
    },
    /// Duality chain between the gradient-side and integral-side equations.
    Dual {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distance comparison between the non-Hilbert and Hilbert projections.
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Perturbation sizes of the comparison samples.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-3, 1e-2])]
        eps: Vec<f64>,
    },
    /// Independent oracle suites (gamma cross-check, scalar scans,
    /// quadrature exactness).
    Selftest {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args, Clone)]
pub struct ParamArgs {
    /// Sphere dimension n.
    #[arg(long)]
    pub n: u32,
    /// Fractional order s, 0 < s < n/2.
    #[arg(long)]
    pub s: f64,
}

#[derive(Debug, Args, Clone)]
pub struct GridArgs {
    /// Spectral cutoff (maximum resolved degree).
    #[arg(long = "L", default_value_t = 32)]
    pub cutoff: usize,
    /// Quadrature nodes; defaults to 2L + 16.
    #[arg(long = "m", alias = "nodes")]
    pub m: Option<usize>,
}

impl GridArgs {
    pub fn resolve_m(&self) -> usize {
        self.m.unwrap_or(2 * self.cutoff + 16)
    }
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Seed recorded in reports and used by randomized scans.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Slack percentage applied to asymptotic assertions, in (0, 20].
    #[arg(long, default_value_t = 5.0)]
    pub slack: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write (x, y) plot columns as CSV to this path.
    #[arg(long = "emit-plot")]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Perturbation,
    Concentration,
}

struct Outcome {
    pass: bool,
    payload: String,
    plot: Option<String>,
}

/// Runs a parsed command line, writes reports, and returns the process exit
/// code.
pub fn run(cli: HlsLab) -> i32 {
    let (output, outcome) = match dispatch(&cli.command) {
        Ok(pair) => pair,
        Err(Error::Io(e)) => {
            eprintln!("error: {e}");
            return 3;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(path) = &output.out {
        if let Err(e) = write_to(path, &outcome.payload) {
            eprintln!("error: {e}");
            return 3;
        }
    } else {
        print!("{}", outcome.payload);
    }
    if let (Some(path), Some(plot)) = (&output.emit_plot, &outcome.plot) {
        if let Err(e) = write_to(path, plot) {
            eprintln!("error: {e}");
            return 3;
        }
    }
    if outcome.pass {
        0
    } else {
        1
    }
}

fn dispatch(command: &Command) -> Result<(OutputArgs, Outcome)> {
    match command {
        Command::Constants {
            params,
            grid,
            output,
        } => Ok((output.clone(), cmd_constants(params, grid, output)?)),
        Command::Survey {
            params,
            grid,
            output,
            eps,
            degrees,
            betas,
            zetas,
        } => {
            let config = SurveyConfig {
                degrees: degrees.clone(),
                eps: eps.clone(),
                betas: betas.clone(),
                zetas: zetas.clone(),
            };
            Ok((output.clone(), cmd_survey(params, grid, output, &config)?))
        }
        Command::Expansion {
            params,
            grid,
            output,
            degrees,
            betas,
            eps_ladder,
        } => Ok((
            output.clone(),
            cmd_expansion(params, grid, output, degrees, betas, eps_ladder)?,
        )),
        Command::Struwe {
            params,
            grid,
            output,
            kind,
            kmax,
        } => Ok((
            output.clone(),
            cmd_struwe(params, grid, output, *kind, *kmax)?,
        )),
        Command::Dual {
            params,
            grid,
            output,
        } => Ok((output.clone(), cmd_dual(params, grid, output)?)),
        Command::Compare {
            params,
            grid,
            output,
            eps,
        } => Ok((output.clone(), cmd_compare(params, grid, output, eps)?)),
        Command::Selftest { n, s, grid, output } => Ok((
            output.clone(),
            cmd_selftest(&ParamArgs { n: *n, s: *s }, grid, output)?,
        )),
    }
}

fn validate_common(params: &ParamArgs, output: &OutputArgs) -> Result<Params> {
    if !(output.slack > 0.0 && output.slack <= 20.0) {
        return Err(Error::Config(format!(
            "slack must lie in (0, 20] percent, got {}",
            output.slack
        )));
    }
    Params::new(params.n, params.s)
}

fn build_grid(params: Params, grid: &GridArgs) -> Result<Arc<ZonalGrid>> {
    ZonalGrid::new(params, grid.cutoff, grid.resolve_m())
}

fn meta_for(params: Params, grid: &GridArgs, output: &OutputArgs) -> Meta {
    Meta::new(
        params.n(),
        params.s(),
        grid.cutoff,
        grid.resolve_m(),
        output.seed,
        output.slack,
    )
}

fn render<R: Serialize, S: Serialize>(
    report: &Report<R, S>,
    output: &OutputArgs,
) -> Result<String> {
    match output.format {
        FormatArg::Json => report.to_json(),
        FormatArg::Csv => report.to_csv(),
    }
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MultiplierRow {
    l: usize,
    lambda: f64,
}

#[derive(Serialize)]
struct ConstantsSummary {
    constants: Constants,
    multiplier_conditioning: f64,
    strictly_decreasing: bool,
    pass: bool,
}

fn cmd_constants(params: &ParamArgs, grid: &GridArgs, output: &OutputArgs) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let consts = constants(p)?;
    let table = MultiplierTable::new(p, grid.cutoff);
    let records: Vec<MultiplierRow> = table
        .as_slice()
        .iter()
        .enumerate()
        .map(|(l, &lambda)| MultiplierRow { l, lambda })
        .collect();
    let strictly_decreasing = table.as_slice().windows(2).all(|w| w[1] < w[0]);
    let report = Report {
        meta: meta_for(p, grid, output).with_tolerance("el_identity", 1e-12),
        summary: ConstantsSummary {
            constants: consts,
            multiplier_conditioning: table.conditioning(),
            strictly_decreasing,
            pass: strictly_decreasing,
        },
        records,
    };
    let plot = Some(plot_csv(
        "l",
        "lambda",
        &report
            .records
            .iter()
            .map(|r| (r.l as f64, r.lambda))
            .collect::<Vec<_>>(),
    ));
    Ok(Outcome {
        pass: strictly_decreasing,
        payload: render(&report, output)?,
        plot,
    })
}

// ---------------------------------------------------------------------------
// survey
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SurveySummary {
    #[serde(flatten)]
    inner: stability::QuotientSummary,
    threshold: f64,
    pass: bool,
}

fn cmd_survey(
    params: &ParamArgs,
    grid_args: &GridArgs,
    output: &OutputArgs,
    config: &SurveyConfig,
) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let grid = build_grid(p, grid_args)?;
    let report_inner = quotient_survey(&grid, config)?;
    let threshold = report_inner.summary.c_loc * (1.0 - output.slack / 100.0);
    let pass = report_inner
        .summary
        .min_quotient
        .map_or(config.degrees.is_empty(), |m| m >= threshold);
    let plot = Some(plot_csv(
        "eps",
        "quotient",
        &report_inner
            .records
            .iter()
            .filter_map(|r| r.quotient.map(|q| (r.eps, q)))
            .collect::<Vec<_>>(),
    ));
    let report = Report {
        meta: meta_for(p, grid_args, output).with_tolerance("quotient_threshold", threshold),
        records: report_inner.records,
        summary: SurveySummary {
            inner: report_inner.summary,
            threshold,
            pass,
        },
    };
    Ok(Outcome {
        pass,
        payload: render(&report, output)?,
        plot,
    })
}

// ---------------------------------------------------------------------------
// expansion
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ExpansionSummary {
    max_rel_error: f64,
    tol: f64,
    eps_ladder: Vec<f64>,
    pass: bool,
}

fn cmd_expansion(
    params: &ParamArgs,
    grid_args: &GridArgs,
    output: &OutputArgs,
    degrees: &[usize],
    betas: &[f64],
    eps_ladder: &[f64],
) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let grid = build_grid(p, grid_args)?;
    let mut records = Vec::new();
    for &l in degrees {
        for &beta in betas {
            records.push(local_expansion_check(&grid, l, beta, eps_ladder)?);
        }
    }
    let max_rel_error = records.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let tol = 1e-3;
    let pass = max_rel_error <= tol;
    let plot = Some(plot_csv(
        "l",
        "rel_error",
        &records
            .iter()
            .map(|r| (r.l as f64, r.rel_error))
            .collect::<Vec<_>>(),
    ));
    let report = Report {
        meta: meta_for(p, grid_args, output).with_tolerance("slope_rel_error", tol),
        records,
        summary: ExpansionSummary {
            max_rel_error,
            tol,
            eps_ladder: eps_ladder.to_vec(),
            pass,
        },
    };
    Ok(Outcome {
        pass,
        payload: render(&report, output)?,
        plot,
    })
}

// ---------------------------------------------------------------------------
// struwe
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct StruweSummary {
    #[serde(flatten)]
    trends: stability::StruweTrends,
    pass: bool,
}

fn cmd_struwe(
    params: &ParamArgs,
    grid_args: &GridArgs,
    output: &OutputArgs,
    kind: KindArg,
    kmax: u32,
) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let grid = build_grid(p, grid_args)?;
    let kind = match kind {
        KindArg::Perturbation => PsKind::Perturbation,
        KindArg::Concentration => PsKind::Concentration,
    };
    let demo = struwe_demo(&grid, kind, kmax, output.slack / 100.0)?;
    let pass = match kind {
        PsKind::Perturbation => {
            demo.trends.residual_decreasing
                && demo.trends.dist_decreasing
                && demo.trends.pairing_decreasing
                && demo.trends.ratio_pass
        }
        PsKind::Concentration => demo.trends.norm_drift.is_some_and(|d| d <= 1e-8),
    };
    let plot = Some(plot_csv(
        "k",
        "residual_norm",
        &demo
            .records
            .iter()
            .map(|r| (r.k as f64, r.residual_norm))
            .collect::<Vec<_>>(),
    ));
    let ratio_threshold = demo.trends.c_ps * (1.0 - output.slack / 100.0);
    let report = Report {
        meta: meta_for(p, grid_args, output)
            .with_tolerance("norm_drift", 1e-8)
            .with_tolerance("ratio_threshold", ratio_threshold),
        records: demo.records,
        summary: StruweSummary {
            trends: demo.trends,
            pass,
        },
    };
    Ok(Outcome {
        pass,
        payload: render(&report, output)?,
        plot,
    })
}

// ---------------------------------------------------------------------------
// dual
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DualSummary {
    all_forced_hold: bool,
    max_identity_error: f64,
    max_pointwise_error: f64,
    /// Empirical gradient-side quotient minimum over a small survey; the
    /// true constant is non-constructive.
    sobolev_survey_min: Option<f64>,
    pass: bool,
}

fn cmd_dual(params: &ParamArgs, grid_args: &GridArgs, output: &OutputArgs) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let grid = build_grid(p, grid_args)?;
    let report_inner = dual_chain_report(&grid)?;
    let sobolev_min = sobolev_quotient_survey(&grid, &[2, 3], &[1e-2, 1e-3])?;
    let pass = report_inner.all_forced_hold
        && report_inner.max_pointwise_error <= 1e-12
        && report_inner.max_identity_error <= 1e-5;
    let plot = Some(plot_csv(
        "sample",
        "identity_error",
        &report_inner
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| (i as f64, r.identity_error))
            .collect::<Vec<_>>(),
    ));
    let report = Report {
        meta: meta_for(p, grid_args, output)
            .with_tolerance("pointwise_identity", 1e-12)
            .with_tolerance("operator_identity", 1e-5),
        records: report_inner.records,
        summary: DualSummary {
            all_forced_hold: report_inner.all_forced_hold,
            max_identity_error: report_inner.max_identity_error,
            max_pointwise_error: report_inner.max_pointwise_error,
            sobolev_survey_min: sobolev_min,
            pass,
        },
    };
    Ok(Outcome {
        pass,
        payload: render(&report, output)?,
        plot,
    })
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CompareRecord {
    label: String,
    d_lp: f64,
    lp_dist_to_p_minimizer: f64,
    ratio: f64,
    orthogonality: f64,
    in_regime: bool,
    degenerate: bool,
}

#[derive(Serialize)]
struct CompareSummary {
    k_cmp: f64,
    max_ratio: f64,
    max_orthogonality: f64,
    pass: bool,
}

fn cmd_compare(
    params: &ParamArgs,
    grid_args: &GridArgs,
    output: &OutputArgs,
    eps: &[f64],
) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let grid = build_grid(p, grid_args)?;
    let consts = constants(p)?;

    let mut samples: Vec<(String, ZonalField)> = Vec::new();
    for &e in eps {
        samples.push((
            format!("degree2-{e:.0e}"),
            ZonalField::constant(&grid, consts.c_crit)
                .add(&ZonalField::zonal_harmonic(&grid, 2)?.scale(e))?,
        ));
        samples.push((
            format!("degree2+4-{e:.0e}"),
            ZonalField::constant(&grid, consts.c_crit)
                .add(&ZonalField::zonal_harmonic(&grid, 2)?.scale(e))?
                .add(&ZonalField::zonal_harmonic(&grid, 4)?.scale(e))?,
        ));
    }

    let mut records = Vec::new();
    for (label, u) in &samples {
        let cmp = comparison_verify(u)?;
        let projection = nearest_bubble_p(u)?;
        let orth = orthogonality_check(u, &projection)?;
        records.push(CompareRecord {
            label: label.clone(),
            d_lp: cmp.d_lp,
            lp_dist_to_p_minimizer: cmp.lp_dist_to_p_minimizer,
            ratio: cmp.ratio,
            orthogonality: orth.value,
            in_regime: cmp.in_regime,
            degenerate: cmp.degenerate,
        });
    }
    let max_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let max_orthogonality = records.iter().map(|r| r.orthogonality).fold(0.0, f64::max);
    let pass = records
        .iter()
        .all(|r| r.degenerate || (r.ratio >= 1.0 - 1e-6 && r.ratio <= consts.k_cmp))
        && max_orthogonality <= 1e-6;
    let plot = Some(plot_csv(
        "sample",
        "ratio",
        &records
            .iter()
            .enumerate()
            .map(|(i, r)| (i as f64, r.ratio))
            .collect::<Vec<_>>(),
    ));
    let report = Report {
        meta: meta_for(p, grid_args, output)
            .with_tolerance("orthogonality", 1e-6)
            .with_tolerance("ratio_upper", consts.k_cmp),
        records,
        summary: CompareSummary {
            k_cmp: consts.k_cmp,
            max_ratio,
            max_orthogonality,
            pass,
        },
    };
    Ok(Outcome {
        pass,
        payload: render(&report, output)?,
        plot,
    })
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckRow {
    check: String,
    value: f64,
    bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SelftestSummary {
    pass: bool,
}

fn cmd_selftest(params: &ParamArgs, grid_args: &GridArgs, output: &OutputArgs) -> Result<Outcome> {
    let p = validate_common(params, output)?;
    let mut records: Vec<CheckRow> = Vec::new();
    let mut push = |check: &str, value: f64, bound: f64, upper: bool| {
        let pass = if upper {
            value <= bound
        } else {
            value >= bound
        };
        records.push(CheckRow {
            check: check.to_string(),
            value,
            bound,
            pass,
        });
    };

    // Gamma cross-check: dense grid and exact small values.
    let dense: Vec<f64> = (1..=2000).map(|k| 0.1 * k as f64).collect();
    push(
        "gamma_crosscheck_dense",
        oracles::gamma_crosscheck(&dense)?,
        1e-11,
        true,
    );
    let exact = [1.0, 2.0, 3.0, 4.0, 5.0, 0.5];
    push(
        "gamma_crosscheck_exact",
        oracles::gamma_crosscheck(&exact)?,
        1e-13,
        true,
    );

    // Scalar Hoelder-difference scan at beta = (n-2s)/(n+2s).
    let beta = p.hls_map_exponent();
    let scan = oracles::holder_inequality_scan(beta, 100_000, output.seed)?;
    push("holder_scan_ratio", scan.worst_ratio, scan.c_beta, true);

    // Finite-difference oracle health.
    let fd = oracles::fd_derivative(|x| x * x, 3.0, &[1e-2, 5e-3, 2.5e-3]);
    push("fd_square_error", (fd.value - 6.0).abs(), 1e-10, true);

    // Quadrature mass against the Stirling-oracle Beta integral.
    let a = p.jacobi_exponent();
    let rule = gauss_jacobi(grid_args.resolve_m(), a, a)?;
    let mass: f64 = rule.weights.iter().sum();
    let oracle_mass = (0.5 * std::f64::consts::PI.ln() + oracles::ln_gamma_stirling(p.nf() / 2.0)?
        - oracles::ln_gamma_stirling((p.nf() + 1.0) / 2.0)?)
    .exp();
    push(
        "quadrature_mass_rel_error",
        ((mass - oracle_mass) / oracle_mass).abs(),
        1e-12,
        true,
    );

    // Gegenbauer orthogonality under the sphere rule.
    let alpha = p.gegenbauer_alpha();
    let mut worst_gram = 0.0f64;
    for l in 0..=8usize {
        for lp in 0..l {
            let raw = rule.integrate(|t| gegenbauer(l, alpha, t) * gegenbauer(lp, alpha, t));
            let nl = rule.integrate(|t| gegenbauer(l, alpha, t).powi(2)).sqrt();
            let nlp = rule.integrate(|t| gegenbauer(lp, alpha, t).powi(2)).sqrt();
            worst_gram = worst_gram.max((raw / (nl * nlp)).abs());
        }
    }
    push("gegenbauer_gram_offdiag", worst_gram, 1e-10, true);

    // Scalar vector inequality at p = 2n/(n-2s).
    let (min_ratio, c_p) = stability::vector_inequality_scan(p.p_dual(), 2.0, 400);
    push(
        "vector_inequality_min_ratio",
        min_ratio,
        c_p * (1.0 - 1e-13),
        false,
    );

    let pass = records.iter().all(|r| r.pass);
    let plot = Some(plot_csv(
        "check",
        "value",
        &records
            .iter()
            .enumerate()
            .map(|(i, r)| (i as f64, r.value))
            .collect::<Vec<_>>(),
    ));
    let report = Report {
        meta: meta_for(p, grid_args, output).with_tolerance("gamma_dense", 1e-11),
        records,
        summary: SelftestSummary { pass },
    };
    Ok(Outcome {
        pass,
        payload: render(&report, output)?,
        plot,
    })
}
