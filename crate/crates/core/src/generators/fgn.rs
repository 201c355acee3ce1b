//! Fractional Gaussian noise synthesis.
//!
//! Circulant embedding (Davies-Harte / Wood-Chan) is used whenever the
//! embedding's eigenvalues are nonnegative; otherwise the exact sequential
//! Durbin-Levinson recursion (Hosking) takes over.

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlannerScalar;

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::rng::{rng_from_seed, LabRng};

/// Unit-step fGn autocovariance
/// `gamma(m) = (|m+1|^{2H} - 2|m|^{2H} + |m-1|^{2H}) / 2`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    let m = lag as f64;
    let e = 2.0 * hurst;
    0.5 * ((m + 1.0).powf(e) - 2.0 * m.powf(e) + (m - 1.0).abs().powf(e))
}

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(LabError::param(format!("Hurst index must lie in (0, 1), got {hurst}")))
    }
}

/// Eigenvalues of the size-`2n` circulant embedding of the first `n + 1`
/// autocovariances.
pub fn circulant_eigenvalues(n: usize, hurst: f64) -> Vec<f64> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let lag = if k <= n { k } else { m - k };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    FftPlannerScalar::new().plan_fft_forward(m).process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

/// `n` unit-step fGn values by circulant embedding, or `None` when the
/// embedding is not nonnegative definite.
pub fn circulant_fgn(n: usize, hurst: f64, rng: &mut LabRng) -> Option<Vec<f64>> {
    let m = 2 * n;
    let eig = circulant_eigenvalues(n, hurst);
    let scale = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    // FFT rounding can leave exact zeros slightly negative.
    let floor = -1e-10 * scale.max(1.0);
    if eig.iter().any(|&v| v < floor) {
        return None;
    }
    let mut w: Vec<Complex<f64>> = eig
        .iter()
        .map(|&lam| {
            let amp = (lam.max(0.0) / m as f64).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(amp * re, amp * im)
        })
        .collect();
    FftPlannerScalar::new().plan_fft_forward(m).process(&mut w);
    Some(w[..n].iter().map(|c| c.re).collect())
}

/// `n` unit-step fGn values by the Durbin-Levinson recursion. O(n^2).
pub fn hosking_fgn(n: usize, hurst: f64, rng: &mut LabRng) -> Vec<f64> {
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(hurst, k)).collect();
    let mut out = Vec::with_capacity(n);
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    let mut v = gamma[0];
    let z: f64 = StandardNormal.sample(rng);
    out.push(v.sqrt() * z);
    for t in 1..n {
        // phi_{t,t} = (gamma(t) - sum_j phi_{t-1,j} gamma(t-j)) / v_{t-1}
        let acc: f64 = prev.iter().enumerate().map(|(j, p)| p * gamma[t - 1 - j]).sum();
        let kappa = (gamma[t] - acc) / v;
        phi.clear();
        phi.extend(prev.iter().zip(prev.iter().rev()).map(|(p, q)| p - kappa * q));
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
        let mean: f64 = phi.iter().zip(out.iter().rev()).map(|(p, x)| p * x).sum();
        let z: f64 = StandardNormal.sample(rng);
        out.push(mean + v.max(0.0).sqrt() * z);
        std::mem::swap(&mut prev, &mut phi);
    }
    out
}

/// fGn increments over the finest cells of `grid`, scaled so that each has
/// variance `spacing^{2H}`.
pub fn generate_fgn(grid: &Grid, hurst: f64, seed: u64) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    let n = grid.cells();
    let mut rng = rng_from_seed(seed);
    let unit = match circulant_fgn(n, hurst, &mut rng) {
        Some(x) => x,
        None => hosking_fgn(n, hurst, &mut rng_from_seed(seed)),
    };
    let scale = grid.spacing().powf(hurst);
    let out: Vec<f64> = unit.into_iter().map(|x| scale * x).collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(LabError::Numeric("fGn synthesis produced non-finite values".into()));
    }
    Ok(out)
}
