//! Dyadic level series `sum_n 2^{n(alpha p - 1)} sum_k |Delta_{k,n} f|^p`,
//! whose convergence places a continuous path in `B^alpha_{pp}`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::SampledPath;

/// Half-width of the slope band reported as [`Verdict::Inconclusive`].
pub const SLOPE_THRESHOLD: f64 = 0.05;

/// Fewest levels for which a tail fit is attempted.
pub const MIN_LEVELS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSeriesReport {
    pub alpha: f64,
    pub p: f64,
    pub levels: Vec<u32>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Weighted least-squares slope of `log2 T_n` over the tail window;
    /// absent when a tail term vanishes.
    pub fitted_log2_slope: Option<f64>,
    /// First level of the tail window.
    pub tail_start: u32,
    pub verdict: Verdict,
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else {
        x.abs().powf(p)
    }
}

fn check_alpha_p(alpha: f64, p: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(LabError::param(format!("p must lie in [1, inf), got {p}")));
    }
    Ok(())
}

/// `sum_k |level-n increment k|^p`.
pub fn level_power_sum(path: &SampledPath, level: u32, p: f64) -> Result<f64> {
    Ok(path.increments_of(level)?.iter().map(|&d| abs_pow(d, p)).sum())
}

/// Power sums for levels `1..=levels`.
pub fn level_power_sums(path: &SampledPath, levels: u32, p: f64) -> Result<Vec<f64>> {
    (1..=levels).map(|n| level_power_sum(path, n, p)).collect()
}

/// `2^{n(alpha p - 1)}`.
pub fn level_weight(level: u32, alpha: f64, p: f64) -> f64 {
    (level as f64 * (alpha * p - 1.0)).exp2()
}

/// `T_n = 2^{n(alpha p - 1)} sum_k |Delta_{k,n} f|^p`.
pub fn level_term(path: &SampledPath, level: u32, alpha: f64, p: f64) -> Result<f64> {
    check_alpha_p(alpha, p)?;
    if level == 0 {
        return Err(LabError::param("series levels start at n = 1"));
    }
    Ok(level_weight(level, alpha, p) * level_power_sum(path, level, p)?)
}

/// Weighted least-squares slope of `log2 terms` against `levels`, weighting
/// level `n` by its number of summands `2^n`.
pub fn fit_log2_slope(levels: &[u32], terms: &[f64]) -> Option<f64> {
    if levels.len() < 2 || terms.iter().any(|&t| t.is_nan() || t <= 0.0) {
        return None;
    }
    let w: Vec<f64> = levels.iter().map(|&n| (n as f64).exp2()).collect();
    let x: Vec<f64> = levels.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = terms.iter().map(|t| t.log2()).collect();
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..x.len() {
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    }
    Some(sxy / sxx)
}

pub fn verdict_for_slope(slope: f64) -> Verdict {
    if slope < -SLOPE_THRESHOLD {
        Verdict::Converges
    } else if slope > SLOPE_THRESHOLD {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    }
}

/// Tail window `N - ceil(N/2) + 1 ..= N`.
pub fn tail_start(levels: u32) -> u32 {
    levels - levels.div_ceil(2) + 1
}

/// Builds the report from precomputed power sums for levels `1..=N`.
pub fn series_from_power_sums(power_sums: &[f64], alpha: f64, p: f64) -> LevelSeriesReport {
    let n_levels = power_sums.len() as u32;
    let levels: Vec<u32> = (1..=n_levels).collect();
    let terms: Vec<f64> = levels
        .iter()
        .zip(power_sums)
        .map(|(&n, s)| level_weight(n, alpha, p) * s)
        .collect();
    let mut acc = 0.0;
    let partial_sums = terms
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect();
    let start = tail_start(n_levels);
    let window = (start - 1) as usize..;
    let slope = fit_log2_slope(&levels[window.clone()], &terms[window.clone()]);
    let verdict = match slope {
        Some(s) => verdict_for_slope(s),
        // A vanishing tail means the series terminates when every tail term
        // is zero; a mixed tail cannot be fitted.
        None if terms[window].iter().all(|&t| t == 0.0) => Verdict::Converges,
        None => Verdict::Inconclusive,
    };
    LevelSeriesReport {
        alpha,
        p,
        levels,
        terms,
        partial_sums,
        fitted_log2_slope: slope,
        tail_start: start,
        verdict,
    }
}

/// Level terms, partial sums and verdict for levels `1..=levels`.
pub fn kamont_series(path: &SampledPath, levels: u32, alpha: f64, p: f64) -> Result<LevelSeriesReport> {
    check_alpha_p(alpha, p)?;
    let j = path.grid().exponent();
    if levels > j {
        return Err(LabError::Resolution { requested: levels, available: j });
    }
    if levels < MIN_LEVELS {
        return Err(LabError::param(format!(
            "the tail fit needs at least {MIN_LEVELS} levels, got {levels}"
        )));
    }
    Ok(series_from_power_sums(&level_power_sums(path, levels, p)?, alpha, p))
}

/// `(T_n(alpha2), 2^{n p (alpha2 - alpha1)} T_n(alpha1))`, equal up to rounding.
pub fn reweight_identity_check(
    path: &SampledPath,
    level: u32,
    alpha1: f64,
    alpha2: f64,
    p: f64,
) -> Result<(f64, f64)> {
    let t1 = level_term(path, level, alpha1, p)?;
    let t2 = level_term(path, level, alpha2, p)?;
    Ok((t2, (level as f64 * p * (alpha2 - alpha1)).exp2() * t1))
}
