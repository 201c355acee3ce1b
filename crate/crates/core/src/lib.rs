//! Numerical laboratory for the path regularity of stochastic measures.
//!
//! A stochastic measure is simulated as signed increments on the finest
//! dyadic cells of `[a, b]`; its path `t -> mu((a, t])` is then tested for
//! Besov regularity in two ways: directly through the `L_p` modulus of
//! continuity ([`besov`]) and through the dyadic level series
//! `sum_n 2^{n(alpha p - 1)} sum_k |Delta_{k,n} f|^p` ([`criterion`]).
//! [`lemma`] holds the probabilistic ingredients behind the a.s. finiteness
//! of weighted quadratic sums, and [`harness`] runs Monte Carlo sweeps.

pub mod besov;
pub mod criterion;
pub mod dyadic;
pub mod error;
pub mod generators;
pub mod grid;
pub mod harness;
pub mod lemma;
pub mod measure;
pub mod report;
pub mod rng;

pub use besov::{besov_norm, besov_norm_with, lp_norm, modulus, modulus_curve, BesovNormReport, BesovOptions, BesovParams, ModulusCurve};
pub use criterion::{kamont_series, level_term, reweight_identity_check, LevelSeriesReport, Verdict};
pub use dyadic::{DyadicInterval, DyadicSet};
pub use error::{LabError, Result};
pub use generators::{
    generate_bm, generate_fgn, generate_martingale, generate_weighted_fbm_measure, GeneratorRegistry, GeneratorSpec,
    MeasureGenerator, ProcessParams, WeightFn,
};
pub use grid::{Grid, SampledPath, MAX_EXPONENT};
pub use harness::{run_alpha_sweep, run_alpha_sweep_with, run_besov_profile, ExperimentConfig, ExperimentReport};
pub use lemma::{
    boundedness_probe, lemma_statistic, paley_zygmund_check, randomize_signs, DisjointFamily, PzInstance, PzMode,
    PzOutcome, WeightSequence,
};
pub use measure::StochasticMeasureSample;
