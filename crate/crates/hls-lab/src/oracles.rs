//! Independent brute-force cross-checks backing the derived test values:
//! a Stirling-series log-gamma, scalar-inequality scans, and
//! Richardson-extrapolated finite differences.
//!
//! Nothing here shares a code path with the module it validates, apart from
//! quadrature primitives in `specialfuncs` where a rule is needed.

use crate::error::{Error, Result};

/// Fixed-seed deterministic generator (SplitMix64). Scans record their seed
/// so every reported extremum is reproducible bit for bit.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform sample in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform sample in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Bernoulli numbers B_2 .. B_24 for the Stirling series.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// 12-term Stirling series with argument shift: the independent log-gamma
/// oracle. Arguments below 30 are shifted up through the recursion
/// Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1)).
pub fn ln_gamma_stirling(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "ln_gamma_stirling requires x > 0, got {x}"
        )));
    }
    let mut shift = 0.0f64;
    let mut y = x;
    while y < 30.0 {
        shift += y.ln();
        y += 1.0;
    }
    let mut series = 0.0;
    let y2 = y * y;
    let mut power = y;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let two_j = 2.0 * (j as f64 + 1.0);
        series += b / (two_j * (two_j - 1.0) * power);
        power *= y2;
    }
    let half_ln_two_pi = 0.918_938_533_204_672_74;
    Ok((y - 0.5) * y.ln() - y + half_ln_two_pi + series - shift)
}

/// Compares the Lanczos `ln_gamma` against the Stirling oracle over a grid;
/// returns the worst discrepancy, measured relative to max(1, |oracle|) so
/// the zeros at x = 1, 2 do not divide by zero.
pub fn gamma_crosscheck(x_grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in x_grid {
        let a = crate::specialfuncs::ln_gamma(x)?;
        let b = ln_gamma_stirling(x)?;
        let gap = (a - b).abs() / b.abs().max(1.0);
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Outcome of the scalar Hoelder-difference scan for F(t) = |t|^{beta-1} t.
#[derive(Debug, Clone)]
pub struct HolderScan {
    pub beta: f64,
    /// max over samples of |F(a+b) - F(a)| / |b|^beta (0 when b = 0).
    pub worst_ratio: f64,
    /// The admissible constant max(3^beta + 2^beta, beta 2^{1-beta}).
    pub c_beta: f64,
    pub seed: u64,
    pub samples: usize,
}

/// Random-sample scan of |F(a+b) - F(a)| <= C_beta |b|^beta.
///
/// Half the samples stress the |a| >> |b| regime by shrinking b.
pub fn holder_inequality_scan(beta: f64, samples: usize, seed: u64) -> Result<HolderScan> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::Domain(format!(
            "holder scan requires beta in (0,1), got {beta}"
        )));
    }
    let f = |t: f64| {
        if t == 0.0 {
            0.0
        } else {
            t.abs().powf(beta - 1.0) * t
        }
    };
    let ratio = |a: f64, b: f64| {
        if b == 0.0 {
            0.0
        } else {
            (f(a + b) - f(a)).abs() / b.abs().powf(beta)
        }
    };
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for k in 0..samples {
        let a = rng.uniform(-3.0, 3.0);
        let mut b = rng.uniform(-3.0, 3.0);
        if k % 2 == 1 {
            b *= 1e-3;
        }
        worst = worst.max(ratio(a, b));
    }
    let c_beta = (3f64.powf(beta) + 2f64.powf(beta)).max(beta * 2f64.powf(1.0 - beta));
    Ok(HolderScan {
        beta,
        worst_ratio: worst,
        c_beta,
        seed,
        samples,
    })
}

/// Richardson-extrapolated central-difference derivative.
#[derive(Debug, Clone, Copy)]
pub struct FdDerivative {
    pub value: f64,
    /// Difference between the two deepest extrapolation levels.
    pub error_estimate: f64,
    /// Set when the ladder was too coarse to stabilize.
    pub flagged: bool,
}

/// Central differences over a ladder of step sizes, combined by the
/// Richardson table for even error expansions. The ladder should shrink by
/// a fixed factor (halving is customary).
pub fn fd_derivative(mut f: impl FnMut(f64) -> f64, x: f64, eps_ladder: &[f64]) -> FdDerivative {
    assert!(eps_ladder.len() >= 2, "need at least two step sizes");
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(eps_ladder.len());
    for (j, &h) in eps_ladder.iter().enumerate() {
        let mut row = vec![(f(x + h) - f(x - h)) / (2.0 * h)];
        for k in 1..=j {
            let factor = 4f64.powi(k as i32);
            let prev = table[j - 1][k - 1];
            let cur = row[k - 1];
            row.push((factor * cur - prev) / (factor - 1.0));
        }
        table.push(row);
    }
    let last = table.last().unwrap();
    let value = *last.last().unwrap();
    let error_estimate = if last.len() >= 2 {
        (value - last[last.len() - 2]).abs()
    } else {
        (value - table[table.len() - 2][0]).abs()
    };
    let flagged = error_estimate > 1e-6 * value.abs().max(1.0);
    FdDerivative {
        value,
        error_estimate,
        flagged,
    }
}

/// Richardson extrapolation of a first-order sequence s_j = A + O(eps_j)
/// sampled at a halving ladder; kills the eps and eps^2 terms.
pub fn richardson_first_order(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut level: Vec<f64> = samples.to_vec();
    let mut order = 1.0f64;
    while level.len() > 1 {
        let factor = 2f64.powf(order);
        level = level
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        order += 1.0;
    }
    level[0]
}
