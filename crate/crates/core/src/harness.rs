//! Monte Carlo experiments: alpha sweeps that locate the convergence
//! threshold of the dyadic series, and Besov-norm profiles.
//!
//! Replicate `r` always draws its sample from seed
//! `stream_seed(master, r)` and aggregation folds replicates in index order,
//! so reports do not depend on the worker count.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm_with, BesovNormReport, BesovOptions, BesovParams};
use crate::criterion::{level_power_sums, series_from_power_sums, Verdict, MIN_LEVELS};
use crate::error::{LabError, Result};
use crate::generators::{GeneratorRegistry, GeneratorSpec, MeasureGenerator};
use crate::measure::StochasticMeasureSample;
use crate::report::{fmt_f64, fmt_opt_f64, version_string};
use crate::rng::stream_seed;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub generator: GeneratorSpec,
    pub p: f64,
    pub alpha_grid: Vec<f64>,
    pub n_levels: u32,
    pub replicates: usize,
    /// Worker-pool size; defaults to the number of CPUs. Never echoed into
    /// reports, since it cannot change their content.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| LabError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| LabError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LabError::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(LabError::config(format!("p must lie in [1, inf), got {}", self.p)));
        }
        if self.alpha_grid.is_empty() {
            return Err(LabError::config("alpha_grid is empty"));
        }
        if self.alpha_grid.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(LabError::config("alpha_grid values must lie in (0, 1)"));
        }
        if self.alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::config("alpha_grid must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(LabError::config("replicates must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(LabError::config("workers must be at least 1"));
        }
        let j = self.generator.grid.exponent();
        if self.n_levels > j || self.n_levels < MIN_LEVELS {
            return Err(LabError::config(format!(
                "n_levels must lie in {MIN_LEVELS}..={j}, got {}",
                self.n_levels
            )));
        }
        Ok(())
    }

    fn echo(&self) -> Self {
        Self { workers: None, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub version: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub median_slope: Option<f64>,
    pub frac_converges: f64,
    pub frac_diverges: f64,
    pub frac_inconclusive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub critical_alpha: Option<f64>,
    pub meta: ReportMeta,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with `meta.wall_time_s` removed; equal configs give equal text.
    pub fn to_json_without_wall_time(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(meta) = v.get_mut("meta").and_then(|m| m.as_object_mut()) {
            meta.remove("wall_time_s");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,median_slope,frac_conv,frac_div,frac_inc\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(r.alpha),
                fmt_opt_f64(r.median_slope),
                fmt_f64(r.frac_converges),
                fmt_f64(r.frac_diverges),
                fmt_f64(r.frac_inconclusive)
            ));
        }
        out
    }

    pub fn row(&self, alpha: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| (r.alpha - alpha).abs() < 1e-12)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Linear interpolation of the first sign change of `slopes` from negative
/// to nonnegative along `alphas`.
pub fn interpolate_zero_crossing(alphas: &[f64], slopes: &[Option<f64>]) -> Option<f64> {
    for i in 0..alphas.len().saturating_sub(1) {
        let (Some(s0), Some(s1)) = (slopes[i], slopes[i + 1]) else { continue };
        if s0 < 0.0 && s1 >= 0.0 {
            return Some(alphas[i] + (0.0 - s0) * (alphas[i + 1] - alphas[i]) / (s1 - s0));
        }
    }
    None
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Numeric(format!("cannot start worker pool: {e}")))
}

/// Runs `job` for every replicate on a dedicated pool; results are returned
/// in replicate order. A panicking replicate fails the whole run.
fn run_replicates<T, F>(workers: Option<usize>, replicates: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = build_pool(workers)?;
    panic::catch_unwind(AssertUnwindSafe(|| {
        pool.install(|| (0..replicates).into_par_iter().map(&job).collect::<Result<Vec<T>>>())
    }))
    .map_err(|_| LabError::Numeric("a replicate worker panicked; no report written".into()))?
}

fn replicate_sample(
    generator: &dyn MeasureGenerator,
    spec: &GeneratorSpec,
    replicate: usize,
) -> Result<StochasticMeasureSample> {
    generator.generate(&spec.grid, stream_seed(spec.seed, replicate as u64))
}

pub fn run_alpha_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_alpha_sweep_with(config, &GeneratorRegistry::with_builtins())
}

pub fn run_alpha_sweep_with(
    config: &ExperimentConfig,
    registry: &GeneratorRegistry,
) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let generator = config.generator.build(registry)?;
    let generator = generator.as_ref();

    let per_replicate: Vec<Vec<(Option<f64>, Verdict)>> =
        run_replicates(config.workers, config.replicates, |r| {
            let path = replicate_sample(generator, &config.generator, r)?.path_of();
            let sums = level_power_sums(&path, config.n_levels, config.p)?;
            Ok(config
                .alpha_grid
                .iter()
                .map(|&alpha| {
                    let s = series_from_power_sums(&sums, alpha, config.p);
                    (s.fitted_log2_slope, s.verdict)
                })
                .collect())
        })?;

    let total = config.replicates as f64;
    let rows: Vec<SweepRow> = config
        .alpha_grid
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let slopes: Vec<f64> = per_replicate.iter().filter_map(|r| r[i].0).collect();
            let count = |v: Verdict| per_replicate.iter().filter(|r| r[i].1 == v).count() as f64;
            let frac_converges = count(Verdict::Converges) / total;
            let frac_diverges = count(Verdict::Diverges) / total;
            SweepRow {
                alpha,
                median_slope: median(&slopes),
                frac_converges,
                frac_diverges,
                // Summed as (conv + div) + inc this is exactly 1.
                frac_inconclusive: 1.0 - (frac_converges + frac_diverges),
            }
        })
        .collect();
    let medians: Vec<Option<f64>> = rows.iter().map(|r| r.median_slope).collect();
    let critical_alpha = interpolate_zero_crossing(&config.alpha_grid, &medians);

    Ok(ExperimentReport {
        config: config.echo(),
        rows,
        critical_alpha,
        meta: ReportMeta { version: version_string(), wall_time_s: started.elapsed().as_secs_f64() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovProfileRow {
    pub params: BesovParams,
    pub median_seminorm: f64,
    pub q1_seminorm: f64,
    pub q3_seminorm: f64,
    pub replicates: Vec<BesovNormReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovProfileReport {
    pub generator: GeneratorSpec,
    pub replicates: usize,
    pub rows: Vec<BesovProfileRow>,
    pub meta: ReportMeta,
}

/// Besov norms of every replicate path for every parameter triple, with the
/// median and interquartile range of the truncated seminorm.
pub fn run_besov_profile(
    spec: &GeneratorSpec,
    replicates: usize,
    workers: Option<usize>,
    params: &[BesovParams],
    options: BesovOptions,
    registry: &GeneratorRegistry,
) -> Result<BesovProfileReport> {
    if replicates == 0 {
        return Err(LabError::config("replicates must be at least 1"));
    }
    for p in params {
        p.validate()?;
    }
    let started = Instant::now();
    let generator = spec.build(registry)?;
    let generator = generator.as_ref();
    let per_replicate: Vec<Vec<BesovNormReport>> = run_replicates(workers, replicates, |r| {
        let path = replicate_sample(generator, spec, r)?.path_of();
        params.iter().map(|&bp| besov_norm_with(&path, bp, options)).collect()
    })?;
    let rows = params
        .iter()
        .enumerate()
        .map(|(i, &bp)| {
            let reports: Vec<BesovNormReport> = per_replicate.iter().map(|r| r[i].clone()).collect();
            let mut semis: Vec<f64> = reports.iter().map(|r| r.seminorm_truncated).collect();
            BesovProfileRow {
                params: bp,
                median_seminorm: crate::lemma::empirical_quantile(&mut semis, 0.5),
                q1_seminorm: crate::lemma::empirical_quantile(&mut semis, 0.25),
                q3_seminorm: crate::lemma::empirical_quantile(&mut semis, 0.75),
                replicates: reports,
            }
        })
        .collect();
    Ok(BesovProfileReport {
        generator: spec.clone(),
        replicates,
        rows,
        meta: ReportMeta { version: version_string(), wall_time_s: started.elapsed().as_secs_f64() },
    })
}
