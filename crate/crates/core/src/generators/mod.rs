//! Random stochastic-measure generators.
//!
//! Each process is a [`MeasureGenerator`] trait object; a
//! [`GeneratorRegistry`] maps process names (`bm`, `martingale`, `fbm`,
//! `wfbm`) to factories so experiments and the CLI select them by name.

mod fgn;
mod weight;

use std::collections::BTreeMap;
use std::fmt;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::measure::StochasticMeasureSample;
use crate::rng::rng_from_seed;

pub use fgn::{circulant_eigenvalues, circulant_fgn, fgn_autocovariance, generate_fgn, hosking_fgn};
pub use weight::WeightFn;

/// A process that produces one measure realization per `(grid, seed)`.
/// Implementations must be pure functions of their inputs.
pub trait MeasureGenerator: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn generate(&self, grid: &Grid, seed: u64) -> Result<StochasticMeasureSample>;

    /// True when the configuration lies outside the hypotheses under which
    /// the generated set function is known to be a stochastic measure.
    fn exploratory(&self) -> bool {
        false
    }
}

fn midpoint(grid: &Grid, k: usize) -> f64 {
    grid.a() + (k as f64 + 0.5) * grid.spacing()
}

/// Brownian increments: i.i.d. `N(0, spacing)`.
pub fn generate_bm(grid: &Grid, seed: u64) -> StochasticMeasureSample {
    let mut rng = rng_from_seed(seed);
    let sd = grid.spacing().sqrt();
    let increments = (0..grid.cells())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect();
    StochasticMeasureSample::new(*grid, increments).expect("finite Gaussian increments")
}

/// `X(t) = int_a^t g(s) dW(s)` with the weight frozen at each cell midpoint.
pub fn generate_martingale(grid: &Grid, weight: &WeightFn, seed: u64) -> Result<StochasticMeasureSample> {
    weight.validate()?;
    let bm = generate_bm(grid, seed);
    let increments = bm
        .increments()
        .iter()
        .enumerate()
        .map(|(k, d)| weight.eval(midpoint(grid, k)) * d)
        .collect();
    StochasticMeasureSample::new(*grid, increments)
}

/// `mu(A) = int f 1_A dW^H` for `H > 1/2`, midpoint rule against fGn increments.
pub fn generate_weighted_fbm_measure(
    grid: &Grid,
    weight: &WeightFn,
    hurst: f64,
    seed: u64,
) -> Result<StochasticMeasureSample> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(LabError::param(format!(
            "weighted fBm measure requires 1/2 < H < 1, got {hurst}"
        )));
    }
    weight.validate()?;
    let fgn = generate_fgn(grid, hurst, seed)?;
    let increments = fgn
        .into_iter()
        .enumerate()
        .map(|(k, d)| weight.eval(midpoint(grid, k)) * d)
        .collect();
    StochasticMeasureSample::new(*grid, increments)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BrownianMotion;

impl MeasureGenerator for BrownianMotion {
    fn name(&self) -> &str {
        "bm"
    }

    fn generate(&self, grid: &Grid, seed: u64) -> Result<StochasticMeasureSample> {
        Ok(generate_bm(grid, seed))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeightedMartingale {
    pub weight: WeightFn,
}

impl MeasureGenerator for WeightedMartingale {
    fn name(&self) -> &str {
        "martingale"
    }

    fn generate(&self, grid: &Grid, seed: u64) -> Result<StochasticMeasureSample> {
        generate_martingale(grid, &self.weight, seed)
    }
}

/// The fBm measure `mu((s, t]) = W^H(t) - W^H(s)` for any `H` in `(0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct FractionalBm {
    pub hurst: f64,
}

impl MeasureGenerator for FractionalBm {
    fn name(&self) -> &str {
        "fbm"
    }

    fn generate(&self, grid: &Grid, seed: u64) -> Result<StochasticMeasureSample> {
        StochasticMeasureSample::new(*grid, generate_fgn(grid, self.hurst, seed)?)
    }

    fn exploratory(&self) -> bool {
        self.hurst <= 0.5
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeightedFbmMeasure {
    pub weight: WeightFn,
    pub hurst: f64,
}

impl MeasureGenerator for WeightedFbmMeasure {
    fn name(&self) -> &str {
        "wfbm"
    }

    fn generate(&self, grid: &Grid, seed: u64) -> Result<StochasticMeasureSample> {
        generate_weighted_fbm_measure(grid, &self.weight, self.hurst, seed)
    }
}

/// Parameters a factory may consume; unused fields are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hurst: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFn>,
}

impl ProcessParams {
    fn require_hurst(&self, process: &str) -> Result<f64> {
        self.hurst
            .ok_or_else(|| LabError::config(format!("process {process:?} needs a Hurst index")))
    }
}

pub type GeneratorFactory =
    Box<dyn Fn(&ProcessParams) -> Result<Box<dyn MeasureGenerator>> + Send + Sync>;

/// Name -> factory table.
pub struct GeneratorRegistry {
    factories: BTreeMap<String, GeneratorFactory>,
}

impl fmt::Debug for GeneratorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.factories.keys()).finish()
    }
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl GeneratorRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("bm", |_| Ok(Box::new(BrownianMotion)));
        reg.register("martingale", |p| {
            let weight = p.weight.unwrap_or(WeightFn::ONE);
            weight.validate()?;
            Ok(Box::new(WeightedMartingale { weight }))
        });
        reg.register("fbm", |p| {
            let hurst = p.require_hurst("fbm")?;
            fgn::check_hurst(hurst)?;
            Ok(Box::new(FractionalBm { hurst }))
        });
        reg.register("wfbm", |p| {
            let hurst = p.require_hurst("wfbm")?;
            if !(hurst > 0.5 && hurst < 1.0) {
                return Err(LabError::param(format!(
                    "weighted fBm measure requires 1/2 < H < 1, got {hurst}"
                )));
            }
            let weight = p.weight.unwrap_or(WeightFn::ONE);
            weight.validate()?;
            Ok(Box::new(WeightedFbmMeasure { weight, hurst }))
        });
        reg
    }

    /// Adds or replaces a factory.
    pub fn register<F>(&mut self, name: impl Into<String>, factory: F)
    where
        F: Fn(&ProcessParams) -> Result<Box<dyn MeasureGenerator>> + Send + Sync + 'static,
    {
        self.factories.insert(name.into(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, params: &ProcessParams) -> Result<Box<dyn MeasureGenerator>> {
        let factory = self.factories.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            LabError::config(format!("unknown process {name:?}; known: {}", known.join(", ")))
        })?;
        factory(params)
    }
}

/// Serializable description of one generator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub process: String,
    #[serde(flatten)]
    pub params: ProcessParams,
    pub grid: Grid,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(process: impl Into<String>, grid: Grid, seed: u64) -> Self {
        Self { process: process.into(), params: ProcessParams::default(), grid, seed }
    }

    pub fn with_hurst(mut self, hurst: f64) -> Self {
        self.params.hurst = Some(hurst);
        self
    }

    pub fn with_weight(mut self, weight: WeightFn) -> Self {
        self.params.weight = Some(weight);
        self
    }

    pub fn build(&self, registry: &GeneratorRegistry) -> Result<Box<dyn MeasureGenerator>> {
        registry.build(&self.process, &self.params)
    }

    pub fn sample(&self, registry: &GeneratorRegistry) -> Result<StochasticMeasureSample> {
        self.build(registry)?.generate(&self.grid, self.seed)
    }
}
