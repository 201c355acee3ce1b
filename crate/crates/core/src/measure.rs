//! One realization of a stochastic measure on the finest dyadic algebra.

use crate::dyadic::{DyadicInterval, DyadicSet};
use crate::error::{LabError, Result};
use crate::grid::{Grid, SampledPath};

/// Signed increments `mu(Delta_{k,J})` over the finest cells. Coarser
/// intervals and unions are evaluated by additivity.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMeasureSample {
    grid: Grid,
    increments: Vec<f64>,
}

impl StochasticMeasureSample {
    pub fn new(grid: Grid, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != grid.cells() {
            return Err(LabError::Data(format!(
                "measure on a 2^{} grid needs {} increments, got {}",
                grid.exponent(),
                grid.cells(),
                increments.len()
            )));
        }
        if let Some(i) = increments.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Numeric(format!("non-finite increment at cell {i}")));
        }
        Ok(Self { grid, increments })
    }

    /// The measure whose distribution function is `path`, i.e.
    /// `mu((s, t]) = path(t) - path(s)`.
    pub fn from_path(path: &SampledPath) -> Self {
        let increments = path
            .increments_of(path.grid().exponent())
            .expect("finest level is always resolvable");
        Self { grid: *path.grid(), increments }
    }

    pub fn zero(grid: Grid) -> Self {
        Self { grid, increments: vec![0.0; grid.cells()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Sum of the finest increments covered by `set`.
    pub fn measure_of(&self, set: &DyadicSet) -> Result<f64> {
        let mut total = 0.0;
        for r in set.cell_ranges(self.grid.exponent())? {
            total += self.increments[r].iter().sum::<f64>();
        }
        Ok(total)
    }

    pub fn interval_measure(&self, interval: DyadicInterval) -> Result<f64> {
        let r = interval.cells(self.grid.exponent())?;
        Ok(self.increments[r].iter().sum())
    }

    /// `mu(Delta_{k,n})` for `k = 1..=2^n`, each summed from its finest cells.
    pub fn level_increments(&self, level: u32) -> Result<Vec<f64>> {
        self.grid.check_level(level)?;
        let width = 1usize << (self.grid.exponent() - level);
        Ok(self.increments.chunks(width).map(|c| c.iter().sum()).collect())
    }

    /// The path `t -> mu((a, t])` sampled on the grid.
    pub fn path_of(&self) -> SampledPath {
        let mut values = Vec::with_capacity(self.grid.points());
        let mut acc = 0.0;
        values.push(acc);
        for d in &self.increments {
            acc += d;
            values.push(acc);
        }
        SampledPath::new(self.grid, values).expect("prefix sums of finite increments")
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.increments.iter().map(|d| c * d).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_1234() -> StochasticMeasureSample {
        StochasticMeasureSample::new(Grid::unit(2).unwrap(), vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn left_half_sums_its_children() {
        let s = sample_1234();
        let left = DyadicSet::single(DyadicInterval::new(1, 1).unwrap());
        assert_eq!(s.measure_of(&left).unwrap(), 3.0);
    }

    #[test]
    fn whole_and_empty() {
        let s = sample_1234();
        assert_eq!(s.measure_of(&DyadicSet::whole()).unwrap(), 10.0);
        assert_eq!(s.measure_of(&DyadicSet::empty()).unwrap(), 0.0);
        let p = s.path_of();
        assert_eq!(s.measure_of(&DyadicSet::whole()).unwrap(), p.values()[4] - p.values()[0]);
    }

    #[test]
    fn path_is_prefix_sum() {
        assert_eq!(sample_1234().path_of().values(), &[0.0, 1.0, 3.0, 6.0, 10.0]);
        let z = StochasticMeasureSample::zero(Grid::unit(3).unwrap());
        assert!(z.path_of().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip_is_exact_for_integer_increments() {
        let s = sample_1234();
        assert_eq!(StochasticMeasureSample::from_path(&s.path_of()), s);
    }

    #[test]
    fn set_finer_than_grid_is_a_resolution_error() {
        let s = sample_1234();
        let fine = DyadicSet::single(DyadicInterval::new(3, 1).unwrap());
        assert!(matches!(s.measure_of(&fine), Err(LabError::Resolution { .. })));
        assert!(s.level_increments(3).is_err());
    }

    #[test]
    fn level_increments_are_block_sums() {
        assert_eq!(sample_1234().level_increments(1).unwrap(), vec![3.0, 7.0]);
        assert_eq!(sample_1234().level_increments(0).unwrap(), vec![10.0]);
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(StochasticMeasureSample::new(Grid::unit(2).unwrap(), vec![1.0; 3]).is_err());
    }
}
