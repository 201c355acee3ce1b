//! Uniform dyadic grids and the sampled paths that live on them.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest supported resolution exponent. A path at this exponent holds
/// 2^24 + 1 doubles (~128 MiB).
pub const MAX_EXPONENT: u32 = 24;

/// `2^exponent + 1` equally spaced points covering `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid {
    a: f64,
    b: f64,
    exponent: u32,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    a: f64,
    b: f64,
    j: u32,
}

impl TryFrom<GridRepr> for Grid {
    type Error = LabError;

    fn try_from(r: GridRepr) -> Result<Self> {
        Grid::new(r.a, r.b, r.j)
    }
}

impl From<Grid> for GridRepr {
    fn from(g: Grid) -> Self {
        GridRepr { a: g.a, b: g.b, j: g.exponent }
    }
}

impl Grid {
    pub fn new(a: f64, b: f64, exponent: u32) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(LabError::param(format!("grid needs finite a < b, got [{a}, {b}]")));
        }
        if !(1..=MAX_EXPONENT).contains(&exponent) {
            return Err(LabError::param(format!(
                "grid exponent must lie in 1..={MAX_EXPONENT}, got {exponent}"
            )));
        }
        Ok(Self { a, b, exponent })
    }

    /// The unit interval at resolution `2^-exponent`.
    pub fn unit(exponent: u32) -> Result<Self> {
        Self::new(0.0, 1.0, exponent)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Number of finest-level cells, `2^J`.
    pub fn cells(&self) -> usize {
        1usize << self.exponent
    }

    /// Number of grid points, `2^J + 1`.
    pub fn points(&self) -> usize {
        self.cells() + 1
    }

    /// Grid spacing `(b - a) 2^-J`.
    pub fn spacing(&self) -> f64 {
        self.length() * (-(self.exponent as f64)).exp2()
    }

    /// Grid point `k`; the endpoints are returned exactly.
    pub fn point(&self, k: usize) -> f64 {
        assert!(k <= self.cells(), "grid index {k} out of range");
        if k == self.cells() {
            self.b
        } else {
            self.a + self.length() * (k as f64 / self.cells() as f64)
        }
    }

    /// Same interval at a different resolution.
    pub fn with_exponent(&self, exponent: u32) -> Result<Self> {
        Self::new(self.a, self.b, exponent)
    }

    pub(crate) fn check_level(&self, level: u32) -> Result<()> {
        if level > self.exponent {
            Err(LabError::Resolution { requested: level, available: self.exponent })
        } else {
            Ok(())
        }
    }
}

/// Function values at every point of a [`Grid`], read as a piecewise linear
/// interpolant between grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(LabError::Data(format!(
                "path on a 2^{} grid needs {} values, got {}",
                grid.exponent(),
                grid.points(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Data(format!("non-finite path value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.points()).map(|k| f(grid.point(k))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluates the piecewise linear interpolant at `x`, clamped to `[a, b]`.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = ((x - g.a()) / g.spacing()).clamp(0.0, g.cells() as f64);
        let k = (s.floor() as usize).min(g.cells() - 1);
        let frac = s - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Differences of the path across the `2^level` dyadic intervals of that level.
    pub fn increments_of(&self, level: u32) -> Result<Vec<f64>> {
        self.grid.check_level(level)?;
        let step = 1usize << (self.grid.exponent() - level);
        Ok(self
            .values
            .iter()
            .step_by(step)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect())
    }

    /// `c * f`, same grid.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// Pointwise `f + g` on a shared grid.
    pub fn add(&self, other: &SampledPath) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::Data("paths live on different grids".into()));
        }
        Self::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(x, y)| x + y).collect(),
        )
    }
}
