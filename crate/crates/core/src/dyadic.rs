//! The finite dyadic algebra on `(a, b]`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::MAX_EXPONENT;

/// `(a + (k-1) 2^-n (b-a), a + k 2^-n (b-a)]`, with `1 <= k <= 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    level: u32,
    index: u32,
}

impl DyadicInterval {
    pub fn new(level: u32, index: u32) -> Result<Self> {
        if level > MAX_EXPONENT {
            return Err(LabError::Resolution { requested: level, available: MAX_EXPONENT });
        }
        if index == 0 || index > (1u32 << level) {
            return Err(LabError::param(format!(
                "dyadic index {index} outside 1..={} at level {level}",
                1u32 << level
            )));
        }
        Ok(Self { level, index })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Zero-based range of finest cells covered at resolution `exponent`.
    pub fn cells(&self, exponent: u32) -> Result<Range<usize>> {
        if self.level > exponent {
            return Err(LabError::Resolution { requested: self.level, available: exponent });
        }
        let width = 1usize << (exponent - self.level);
        let start = (self.index as usize - 1) * width;
        Ok(start..start + width)
    }

    /// The two halves at level `n + 1`.
    pub fn children(&self) -> Result<[DyadicInterval; 2]> {
        let level = self.level + 1;
        Ok([
            DyadicInterval::new(level, 2 * self.index - 1)?,
            DyadicInterval::new(level, 2 * self.index)?,
        ])
    }
}

/// A finite union of dyadic intervals, held in normal form: every member is
/// expressed at one common level, sorted by index, without repeats.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DyadicSet {
    level: u32,
    indices: Vec<u32>,
}

impl DyadicSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The whole interval `(a, b]`.
    pub fn whole() -> Self {
        Self { level: 0, indices: vec![1] }
    }

    /// `(a, a + k 2^-n (b - a)]`.
    pub fn prefix(level: u32, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(Self { level, indices: Vec::new() });
        }
        DyadicInterval::new(level, k)?;
        Ok(Self { level, indices: (1..=k).collect() })
    }

    /// Union of the given intervals, normalized at the finest level among them.
    pub fn from_intervals<I>(intervals: I) -> Result<Self>
    where
        I: IntoIterator<Item = DyadicInterval>,
    {
        let intervals: Vec<_> = intervals.into_iter().collect();
        let level = intervals.iter().map(|d| d.level).max().unwrap_or(0);
        let mut indices = Vec::new();
        for d in &intervals {
            let width = 1u32 << (level - d.level);
            let start = (d.index - 1) * width + 1;
            indices.extend(start..start + width);
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { level, indices })
    }

    pub fn single(interval: DyadicInterval) -> Self {
        Self { level: interval.level, indices: vec![interval.index] }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of normal-form members.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        self.indices.iter().map(move |&index| DyadicInterval { level: self.level, index })
    }

    /// Lebesgue measure as a fraction of `b - a`.
    pub fn relative_length(&self) -> f64 {
        self.indices.len() as f64 * (-(self.level as f64)).exp2()
    }

    /// Re-expresses the set at a finer level.
    pub fn refined_to(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(LabError::param(format!(
                "cannot refine a level-{} set down to level {level}",
                self.level
            )));
        }
        if level > MAX_EXPONENT {
            return Err(LabError::Resolution { requested: level, available: MAX_EXPONENT });
        }
        let width = 1u32 << (level - self.level);
        let indices = self
            .indices
            .iter()
            .flat_map(|&k| {
                let start = (k - 1) * width + 1;
                start..start + width
            })
            .collect();
        Ok(Self { level, indices })
    }

    pub fn union(&self, other: &DyadicSet) -> Result<Self> {
        let level = self.level.max(other.level);
        let mut indices = self.refined_to(level)?.indices;
        indices.extend(other.refined_to(level)?.indices);
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { level, indices })
    }

    pub fn is_disjoint(&self, other: &DyadicSet) -> bool {
        let level = self.level.max(other.level);
        let (Ok(x), Ok(y)) = (self.refined_to(level), other.refined_to(level)) else {
            return false;
        };
        let (mut i, mut j) = (0, 0);
        while i < x.indices.len() && j < y.indices.len() {
            match x.indices[i].cmp(&y.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Zero-based finest-cell ranges covered at resolution `exponent`, in order.
    pub fn cell_ranges(&self, exponent: u32) -> Result<impl Iterator<Item = Range<usize>> + '_> {
        if self.level > exponent && !self.is_empty() {
            return Err(LabError::Resolution { requested: self.level, available: exponent });
        }
        let width = 1usize << exponent.saturating_sub(self.level);
        Ok(self.indices.iter().map(move |&k| {
            let start = (k as usize - 1) * width;
            start..start + width
        }))
    }
}
