//! Computable ingredients of the quadratic-sum lemma for stochastic
//! measures: the weighted statistic `sum_n a_n^2 sum_k mu(Delta_{kn})^2`,
//! the Paley-Zygmund sign bound, sign randomization into sets `B_n, C_n`,
//! and an empirical probe of boundedness in probability for
//! `sum_k c_k mu(A_k)` over disjoint `A_k` and `|c_k| <= 1`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, DyadicSet};
use crate::error::{LabError, Result};
use crate::generators::{GeneratorRegistry, GeneratorSpec};
use crate::measure::StochasticMeasureSample;
use crate::report::fmt_f64;
use crate::rng::{rng_from_seed, stream_seed, LabRng};

/// Largest coefficient vector enumerated exhaustively (2^20 sign patterns).
pub const EXACT_PZ_LIMIT: usize = 20;

/// Probability bound on the sign-sum event.
pub const PZ_BOUND: f64 = 0.125;

/// Fraction of the second moment in the sign-sum event.
pub const PZ_FRACTION: f64 = 0.25;

/// Positive weights `a_1, ..., a_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    values: Vec<f64>,
    /// `sum a_n` including the geometric tail beyond `N` when known;
    /// `None` when the built-in geometric sequence is not summable.
    summability_margin: Option<f64>,
}

impl WeightSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::param("weight sequence is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(LabError::param(format!("weights must be positive and finite, got {v}")));
        }
        let margin = values.iter().sum();
        Ok(Self { values, summability_margin: Some(margin) })
    }

    /// `a_n = 2^{n (alpha p - 1) / 2}` for `n = 1..=len`.
    pub fn geometric(alpha: f64, p: f64, len: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && p >= 1.0 && p.is_finite()) {
            return Err(LabError::param(format!("invalid (alpha, p) = ({alpha}, {p})")));
        }
        let exponent = (alpha * p - 1.0) / 2.0;
        let values: Vec<f64> = (1..=len).map(|n| (n as f64 * exponent).exp2()).collect();
        let mut seq = Self::new(values)?;
        let ratio = exponent.exp2();
        seq.summability_margin = if ratio < 1.0 {
            let last = *seq.values.last().expect("nonempty");
            seq.summability_margin.map(|s| s + last * ratio / (1.0 - ratio))
        } else {
            None
        };
        Ok(seq)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a_n`, one-based.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn summability_margin(&self) -> Option<f64> {
        self.summability_margin
    }

    pub fn is_summable(&self) -> bool {
        self.summability_margin.is_some()
    }
}

fn check_disjoint(sets: &[DyadicSet]) -> bool {
    let level = sets.iter().map(DyadicSet::level).max().unwrap_or(0);
    let mut all = Vec::new();
    for s in sets {
        match s.refined_to(level) {
            Ok(r) => all.extend_from_slice(r.indices()),
            Err(_) => return false,
        }
    }
    let n = all.len();
    all.sort_unstable();
    all.dedup();
    all.len() == n
}

/// Sets `Delta_{k,n}`, pairwise disjoint within each level `n = 1..`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisjointFamily {
    levels: Vec<Vec<DyadicSet>>,
}

impl DisjointFamily {
    pub fn new(levels: Vec<Vec<DyadicSet>>) -> Result<Self> {
        for (i, sets) in levels.iter().enumerate() {
            if !check_disjoint(sets) {
                return Err(LabError::config(format!("family level {} is not pairwise disjoint", i + 1)));
            }
        }
        Ok(Self { levels })
    }

    /// Level `n` holds the `2^n` dyadic intervals of that level, `n = 1..=depth`.
    pub fn dyadic(depth: u32) -> Result<Self> {
        let levels = (1..=depth)
            .map(|n| {
                (1..=1u32 << n)
                    .map(|k| DyadicInterval::new(n, k).map(DyadicSet::single))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Sets of level `n`, one-based.
    pub fn level(&self, n: usize) -> &[DyadicSet] {
        &self.levels[n - 1]
    }

    pub fn levels(&self) -> &[Vec<DyadicSet>] {
        &self.levels
    }
}

fn check_depth(weights: &WeightSequence, family: &DisjointFamily) -> Result<()> {
    if weights.len() < family.depth() {
        return Err(LabError::config(format!(
            "{} weights cannot cover a family of depth {}",
            weights.len(),
            family.depth()
        )));
    }
    Ok(())
}

/// Partial sums over `n` of `a_n^2 sum_k mu(Delta_{kn})^2`.
pub fn lemma_statistic(
    sample: &StochasticMeasureSample,
    weights: &WeightSequence,
    family: &DisjointFamily,
) -> Result<Vec<f64>> {
    check_depth(weights, family)?;
    let mut acc = 0.0;
    family
        .levels
        .iter()
        .enumerate()
        .map(|(i, sets)| {
            let a = weights.get(i + 1);
            let mut inner = 0.0;
            for s in sets {
                let m = sample.measure_of(s)?;
                inner += m * m;
            }
            acc += a * a * inner;
            Ok(acc)
        })
        .collect()
}

/// Coefficients `lambda_1..lambda_m` of a Rademacher sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PzInstance {
    lambdas: Vec<f64>,
}

impl PzInstance {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(LabError::param("Paley-Zygmund instance needs at least one coefficient"));
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(LabError::param("Paley-Zygmund coefficients must be finite"));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    fn threshold(&self) -> f64 {
        // Ties that are lost to rounding still count as attained.
        PZ_FRACTION * self.lambdas.iter().map(|l| l * l).sum::<f64>() * (1.0 - 1e-12)
    }

    fn signed_sum(&self, mask: u64) -> f64 {
        self.lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| if mask >> i & 1 == 1 { *l } else { -*l })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PzMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PzOutcome {
    pub probability: f64,
    pub bound: f64,
    pub standard_error: Option<f64>,
    pub pass: bool,
}

/// `P[(sum lambda_i eps_i)^2 >= (1/4) sum lambda_i^2]` over uniform signs,
/// compared with the bound `1/8`.
pub fn paley_zygmund_check(instance: &PzInstance, mode: PzMode) -> Result<PzOutcome> {
    let threshold = instance.threshold();
    match mode {
        PzMode::Exact => {
            let m = instance.lambdas.len();
            if m > EXACT_PZ_LIMIT {
                return Err(LabError::Size { len: m, max: EXACT_PZ_LIMIT });
            }
            let hits = (0..1u64 << m)
                .into_par_iter()
                .filter(|&mask| instance.signed_sum(mask).powi(2) >= threshold)
                .count();
            let probability = hits as f64 / (1u64 << m) as f64;
            Ok(PzOutcome {
                probability,
                bound: PZ_BOUND,
                standard_error: None,
                pass: probability >= PZ_BOUND,
            })
        }
        PzMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(LabError::param("Monte Carlo mode needs at least one sample"));
            }
            let mut rng = rng_from_seed(seed);
            let m = instance.lambdas.len();
            let mut hits = 0u64;
            for _ in 0..samples {
                let s: f64 = (0..m)
                    .map(|i| if rng.random::<bool>() { instance.lambdas[i] } else { -instance.lambdas[i] })
                    .sum();
                if s * s >= threshold {
                    hits += 1;
                }
            }
            let probability = hits as f64 / samples as f64;
            let se = (probability * (1.0 - probability) / samples as f64).sqrt();
            Ok(PzOutcome {
                probability,
                bound: PZ_BOUND,
                standard_error: Some(se),
                pass: probability >= PZ_BOUND - 3.0 * se,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Independent fair signs, one per set of `family`.
pub fn random_signs(family: &DisjointFamily, rng: &mut LabRng) -> Vec<Vec<Sign>> {
    family
        .levels
        .iter()
        .map(|sets| {
            sets.iter()
                .map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus })
                .collect()
        })
        .collect()
}

fn check_signs(family: &DisjointFamily, signs: &[Vec<Sign>]) -> Result<()> {
    if signs.len() != family.depth()
        || signs.iter().zip(&family.levels).any(|(s, sets)| s.len() != sets.len())
    {
        return Err(LabError::config("sign assignment does not cover every set of the family"));
    }
    Ok(())
}

/// `B_n` = union of level-`n` sets signed `+`, `C_n` = union of those signed `-`.
pub fn randomize_signs(
    family: &DisjointFamily,
    weights: &WeightSequence,
    signs: &[Vec<Sign>],
) -> Result<(Vec<DyadicSet>, Vec<DyadicSet>)> {
    check_depth(weights, family)?;
    check_signs(family, signs)?;
    let mut plus = Vec::with_capacity(family.depth());
    let mut minus = Vec::with_capacity(family.depth());
    for (sets, level_signs) in family.levels.iter().zip(signs) {
        let mut b = DyadicSet::empty();
        let mut c = DyadicSet::empty();
        for (set, sign) in sets.iter().zip(level_signs) {
            match sign {
                Sign::Plus => b = b.union(set)?,
                Sign::Minus => c = c.union(set)?,
            }
        }
        plus.push(b);
        minus.push(c);
    }
    Ok((plus, minus))
}

/// Both sides of `sum_n a_n (mu(B_n) - mu(C_n)) = sum_{n,k} a_n eps_{kn} mu(Delta_{kn})`.
pub fn sign_identity_sides(
    sample: &StochasticMeasureSample,
    weights: &WeightSequence,
    family: &DisjointFamily,
    signs: &[Vec<Sign>],
) -> Result<(f64, f64)> {
    let (plus, minus) = randomize_signs(family, weights, signs)?;
    let mut lhs = 0.0;
    for (n, (b, c)) in plus.iter().zip(&minus).enumerate() {
        lhs += weights.get(n + 1) * (sample.measure_of(b)? - sample.measure_of(c)?);
    }
    let mut rhs = 0.0;
    for (n, (sets, level_signs)) in family.levels.iter().zip(signs).enumerate() {
        for (set, sign) in sets.iter().zip(level_signs) {
            rhs += weights.get(n + 1) * sign.value() * sample.measure_of(set)?;
        }
    }
    Ok((lhs, rhs))
}

/// `max_x |sum_n a_n (1_{B_n}(x) - 1_{C_n}(x))|` over the finest cells; bounded
/// by `sum a_n`, which is what places the signed combination in the family
/// of sums with coefficients of modulus at most `sum a_n`.
pub fn signed_indicator_sup(
    plus: &[DyadicSet],
    minus: &[DyadicSet],
    weights: &WeightSequence,
    exponent: u32,
) -> Result<f64> {
    let mut acc = vec![0.0f64; 1usize << exponent];
    for (n, (b, c)) in plus.iter().zip(minus).enumerate() {
        let a = weights.get(n + 1);
        for r in b.cell_ranges(exponent)? {
            acc[r].iter_mut().for_each(|x| *x += a);
        }
        for r in c.cell_ranges(exponent)? {
            acc[r].iter_mut().for_each(|x| *x -= a);
        }
    }
    Ok(acc.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// `sum_k c_k mu(A_k)` with `|c_k| <= 1` and disjoint `A_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFamily {
    coefficients: Vec<f64>,
    sets: Vec<DyadicSet>,
}

impl CoefficientFamily {
    pub fn new(coefficients: Vec<f64>, sets: Vec<DyadicSet>) -> Result<Self> {
        if coefficients.len() != sets.len() {
            return Err(LabError::config("one coefficient per set is required"));
        }
        if let Some(c) = coefficients.iter().find(|c| c.is_nan() || c.abs() > 1.0) {
            return Err(LabError::param(format!("coefficients need |c| <= 1, got {c}")));
        }
        if !check_disjoint(&sets) {
            return Err(LabError::config("coefficient family sets are not pairwise disjoint"));
        }
        Ok(Self { coefficients, sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn evaluate(&self, sample: &StochasticMeasureSample) -> Result<f64> {
        let mut total = 0.0;
        for (c, s) in self.coefficients.iter().zip(&self.sets) {
            total += c * sample.measure_of(s)?;
        }
        Ok(total)
    }
}

/// How the disjoint sets of each probe family are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyRule {
    /// Shuffle the finest cells and cut them into equal groups.
    #[default]
    RandomPartition,
    /// The dyadic intervals of level `log2(size)`.
    DyadicPartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientRule {
    /// Independent uniform draws on `[-1, 1]`.
    #[default]
    Uniform,
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub family_sizes: Vec<usize>,
    pub replicates: usize,
    pub quantile: f64,
    #[serde(default)]
    pub families: FamilyRule,
    #[serde(default)]
    pub coefficients: CoefficientRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub family_size: usize,
    pub quantile_value: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub quantile: f64,
    pub replicates: usize,
    pub rows: Vec<ProbeRow>,
}

impl ProbeTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family_size,quantile_value,max_abs\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.family_size, fmt_f64(r.quantile_value), fmt_f64(r.max_abs)));
        }
        out
    }
}

/// Linear-interpolation empirical quantile of `values` (sorted in place).
pub fn empirical_quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (pos - lo as f64) * (values[hi] - values[lo])
}

const PROBE_SALT: u64 = 0x5eed_0ffa_u64;

fn draw_family(
    size: usize,
    exponent: u32,
    config: &ProbeConfig,
    rng: &mut LabRng,
) -> Result<CoefficientFamily> {
    let sets = match config.families {
        FamilyRule::RandomPartition => {
            let mut cells: Vec<u32> = (1..=1u32 << exponent).collect();
            cells.shuffle(rng);
            let base = cells.len() / size;
            let extra = cells.len() % size;
            let mut start = 0;
            (0..size)
                .map(|k| {
                    let len = base + usize::from(k < extra);
                    let members = cells[start..start + len]
                        .iter()
                        .map(|&i| DyadicInterval::new(exponent, i))
                        .collect::<Result<Vec<_>>>()?;
                    start += len;
                    DyadicSet::from_intervals(members)
                })
                .collect::<Result<Vec<_>>>()?
        }
        FamilyRule::DyadicPartition => {
            if !size.is_power_of_two() {
                return Err(LabError::param(format!("dyadic partition size {size} is not a power of two")));
            }
            let level = size.trailing_zeros();
            (1..=size as u32)
                .map(|k| DyadicInterval::new(level, k).map(DyadicSet::single))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let coefficients = match config.coefficients {
        CoefficientRule::Uniform => (0..size).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        CoefficientRule::Constant { value } => vec![value; size],
    };
    CoefficientFamily::new(coefficients, sets)
}

/// Empirical quantile of `|sum_k c_k mu(A_k)|` for each family size.
pub fn boundedness_probe(
    spec: &GeneratorSpec,
    registry: &GeneratorRegistry,
    config: &ProbeConfig,
) -> Result<ProbeTable> {
    if !(config.quantile > 0.0 && config.quantile < 1.0) {
        return Err(LabError::param(format!("quantile must lie in (0, 1), got {}", config.quantile)));
    }
    if config.replicates == 0 {
        return Err(LabError::param("probe needs at least one replicate"));
    }
    let cells = spec.grid.cells();
    if let Some(&bad) = config.family_sizes.iter().find(|&&n| n == 0 || n > cells) {
        return Err(LabError::Resolution {
            requested: (bad as f64).log2().ceil() as u32,
            available: spec.grid.exponent(),
        });
    }
    let generator = spec.build(registry)?;
    let exponent = spec.grid.exponent();
    let per_replicate: Vec<Vec<f64>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let sample = generator.generate(&spec.grid, stream_seed(spec.seed, r as u64))?;
            let mut rng = rng_from_seed(stream_seed(spec.seed ^ PROBE_SALT, r as u64));
            config
                .family_sizes
                .iter()
                .map(|&size| Ok(draw_family(size, exponent, config, &mut rng)?.evaluate(&sample)?.abs()))
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows = config
        .family_sizes
        .iter()
        .enumerate()
        .map(|(i, &family_size)| {
            let mut col: Vec<f64> = per_replicate.iter().map(|r| r[i]).collect();
            let q = empirical_quantile(&mut col, config.quantile);
            ProbeRow { family_size, quantile_value: q, max_abs: *col.last().expect("nonempty") }
        })
        .collect();
    Ok(ProbeTable { quantile: config.quantile, replicates: config.replicates, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::generate_bm;
    use crate::grid::Grid;

    fn exact(l: &[f64]) -> PzOutcome {
        paley_zygmund_check(&PzInstance::new(l.to_vec()).unwrap(), PzMode::Exact).unwrap()
    }

    #[test]
    fn pz_small_enumerations() {
        let one = exact(&[1.0]);
        assert_eq!(one.probability, 1.0);
        assert!(one.pass);
        let two = exact(&[1.0, 1.0]);
        assert_eq!(two.probability, 0.5);
        assert!(two.pass);
        assert_eq!(exact(&[1.0, 1.0, 1.0]).probability, 1.0);
    }

    #[test]
    fn pz_size_limit() {
        let inst = PzInstance::new(vec![1.0; 21]).unwrap();
        assert!(matches!(paley_zygmund_check(&inst, PzMode::Exact), Err(LabError::Size { len: 21, .. })));
        let mc = paley_zygmund_check(&inst, PzMode::MonteCarlo { samples: 20_000, seed: 1 }).unwrap();
        assert!(mc.pass);
        assert!(mc.standard_error.unwrap() > 0.0);
        assert!(PzInstance::new(vec![]).is_err());
    }

    #[test]
    fn geometric_weights() {
        let w = WeightSequence::geometric(0.4, 2.0, 12).unwrap();
        assert!((w.get(1) - 2f64.powf(-0.1)).abs() < 1e-15);
        let r = 2f64.powf(-0.1);
        let full = r / (1.0 - r);
        assert!((w.summability_margin().unwrap() - full).abs() < 1e-12);
        assert!(!WeightSequence::geometric(0.6, 2.0, 12).unwrap().is_summable());
        assert!(WeightSequence::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn statistic_of_linear_sample() {
        let g = Grid::unit(10).unwrap();
        let sample = StochasticMeasureSample::new(g, vec![g.spacing(); g.cells()]).unwrap();
        let weights = WeightSequence::new((1..=8).map(|n| (-(n as f64)).exp2()).collect()).unwrap();
        let stat = lemma_statistic(&sample, &weights, &DisjointFamily::dyadic(8).unwrap()).unwrap();
        let mut want = 0.0;
        for (n, got) in (1..=8).zip(&stat) {
            want += (-3.0 * n as f64).exp2();
            assert!((got / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn statistic_of_zero_measure() {
        let g = Grid::unit(6).unwrap();
        let weights = WeightSequence::geometric(0.3, 2.0, 6).unwrap();
        let stat = lemma_statistic(&StochasticMeasureSample::zero(g), &weights, &DisjointFamily::dyadic(6).unwrap()).unwrap();
        assert!(stat.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn statistic_depth_checks() {
        let g = Grid::unit(4).unwrap();
        let weights = WeightSequence::geometric(0.3, 2.0, 3).unwrap();
        let family = DisjointFamily::dyadic(4).unwrap();
        assert!(matches!(
            lemma_statistic(&StochasticMeasureSample::zero(g), &weights, &family),
            Err(LabError::Configuration(_))
        ));
        let weights = WeightSequence::geometric(0.3, 2.0, 5).unwrap();
        let deep = DisjointFamily::dyadic(5).unwrap();
        assert!(matches!(
            lemma_statistic(&StochasticMeasureSample::zero(g), &weights, &deep),
            Err(LabError::Resolution { .. })
        ));
    }

    #[test]
    fn family_rejects_overlap() {
        let a = DyadicSet::single(DyadicInterval::new(1, 1).unwrap());
        let b = DyadicSet::single(DyadicInterval::new(2, 2).unwrap());
        assert!(DisjointFamily::new(vec![vec![a.clone(), b.clone()]]).is_err());
        assert!(CoefficientFamily::new(vec![1.0, 1.0], vec![a.clone(), b]).is_err());
        assert!(CoefficientFamily::new(vec![1.5], vec![a]).is_err());
    }

    #[test]
    fn uniform_signs_give_trivial_sets() {
        let family = DisjointFamily::dyadic(3).unwrap();
        let weights = WeightSequence::geometric(0.3, 2.0, 3).unwrap();
        let plus: Vec<Vec<Sign>> = family.levels().iter().map(|l| vec![Sign::Plus; l.len()]).collect();
        let (b, c) = randomize_signs(&family, &weights, &plus).unwrap();
        assert!(c.iter().all(DyadicSet::is_empty));
        for (n, set) in b.iter().enumerate() {
            assert_eq!(set.relative_length(), 1.0, "level {}", n + 1);
        }
        let minus: Vec<Vec<Sign>> = family.levels().iter().map(|l| vec![Sign::Minus; l.len()]).collect();
        let (b, c) = randomize_signs(&family, &weights, &minus).unwrap();
        assert!(b.iter().all(DyadicSet::is_empty));
        assert!(c.iter().all(|s| s.relative_length() == 1.0));
    }

    #[test]
    fn alternating_signs_interleave() {
        let g = Grid::unit(8).unwrap();
        let family = DisjointFamily::new(vec![DisjointFamily::dyadic(3).unwrap().level(3).to_vec()]).unwrap();
        let weights = WeightSequence::new(vec![0.7]).unwrap();
        let signs = vec![(0..8).map(|k| if k % 2 == 0 { Sign::Plus } else { Sign::Minus }).collect::<Vec<_>>()];
        let (b, c) = randomize_signs(&family, &weights, &signs).unwrap();
        assert_eq!(b[0].indices(), &[1, 3, 5, 7]);
        assert_eq!(c[0].indices(), &[2, 4, 6, 8]);
        let sample = generate_bm(&g, 17);
        let (lhs, rhs) = sign_identity_sides(&sample, &weights, &family, &signs).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-300));
        assert!(signed_indicator_sup(&b, &c, &weights, 8).unwrap() <= 0.7);
    }

    #[test]
    fn missing_sign_is_a_configuration_error() {
        let family = DisjointFamily::dyadic(2).unwrap();
        let weights = WeightSequence::geometric(0.3, 2.0, 2).unwrap();
        let signs = vec![vec![Sign::Plus; 2], vec![Sign::Plus; 3]];
        assert!(matches!(randomize_signs(&family, &weights, &signs), Err(LabError::Configuration(_))));
    }

    #[test]
    fn quantile_interpolates() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(empirical_quantile(&mut v, 0.5), 2.5);
        assert_eq!(empirical_quantile(&mut v, 1.0), 4.0);
        assert_eq!(empirical_quantile(&mut v, 0.0), 1.0);
    }

    fn bm_spec(j: u32, seed: u64) -> GeneratorSpec {
        GeneratorSpec::new("bm", Grid::unit(j).unwrap(), seed)
    }

    #[test]
    fn probe_with_zero_coefficients() {
        let cfg = ProbeConfig {
            family_sizes: vec![4, 16],
            replicates: 20,
            quantile: 0.9,
            families: FamilyRule::RandomPartition,
            coefficients: CoefficientRule::Constant { value: 0.0 },
        };
        let t = boundedness_probe(&bm_spec(6, 1), &GeneratorRegistry::with_builtins(), &cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.quantile_value == 0.0));
    }

    #[test]
    fn probe_full_dyadic_partition_is_terminal_value() {
        let cfg = ProbeConfig {
            family_sizes: vec![2, 8, 64],
            replicates: 50,
            quantile: 0.75,
            families: FamilyRule::DyadicPartition,
            coefficients: CoefficientRule::Constant { value: 1.0 },
        };
        let t = boundedness_probe(&bm_spec(8, 5), &GeneratorRegistry::with_builtins(), &cfg).unwrap();
        let q0 = t.rows[0].quantile_value;
        for r in &t.rows {
            assert!((r.quantile_value - q0).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn probe_rejects_oversized_family() {
        let cfg = ProbeConfig {
            family_sizes: vec![128],
            replicates: 2,
            quantile: 0.5,
            families: FamilyRule::RandomPartition,
            coefficients: CoefficientRule::Uniform,
        };
        let err = boundedness_probe(&bm_spec(6, 1), &GeneratorRegistry::with_builtins(), &cfg);
        assert!(matches!(err, Err(LabError::Resolution { .. })));
    }
}
