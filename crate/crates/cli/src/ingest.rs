//! Reading `t,value` series and putting them on a dyadic grid.

use std::io::Read;
use std::path::Path;

use besov_lab::{Grid, LabError, SampledPath, MAX_EXPONENT};
use serde::Serialize;

/// Times closer than this fraction of a cell to the grid point count as on-grid.
const GRID_MATCH_TOL: f64 = 1e-9;

/// What happened to an input series on its way onto the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub source: String,
    pub rows: usize,
    pub first_time: f64,
    pub last_time: f64,
    pub exponent: u32,
    pub resampled: bool,
}

#[derive(Debug, Clone)]
pub struct IngestedSeries {
    pub resampled: SampledPath,
    pub summary: IngestSummary,
}

/// Smallest `J >= 1` with `2^J + 1 >= rows`, capped at the grid limit.
pub fn natural_exponent(rows: usize) -> u32 {
    let mut j = 1;
    while j < MAX_EXPONENT && (1usize << j) + 1 < rows {
        j += 1;
    }
    j
}

pub fn parse_series(reader: impl Read) -> Result<Vec<(f64, f64)>, LabError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.len() < 2 {
        return Err(LabError::Data(format!("expected columns t,value, found {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut raw = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = i + 2;
        let field = |k: usize| -> Result<f64, LabError> {
            let s = record.get(k).unwrap_or("");
            let x: f64 = s
                .parse()
                .map_err(|_| LabError::Data(format!("line {line}: cannot parse {s:?} as a number")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(LabError::Data(format!("line {line}: non-finite value {s:?}")))
            }
        };
        raw.push((field(0)?, field(1)?));
    }
    if raw.len() < 2 {
        return Err(LabError::Data(format!("need at least two rows, found {}", raw.len())));
    }
    if let Some(w) = raw.windows(2).find(|w| w[1].0 <= w[0].0) {
        return Err(LabError::Data(format!("times must increase strictly: {} then {}", w[0].0, w[1].0)));
    }
    Ok(raw)
}

fn csv_error(e: csv::Error) -> LabError {
    LabError::Data(e.to_string())
}

/// Linear interpolation of the raw series at `x` (inside its time range).
fn interpolate(raw: &[(f64, f64)], x: f64) -> f64 {
    let hi = raw.partition_point(|&(t, _)| t < x);
    if hi == 0 {
        return raw[0].1;
    }
    if hi == raw.len() {
        return raw[raw.len() - 1].1;
    }
    let (t0, v0) = raw[hi - 1];
    let (t1, v1) = raw[hi];
    if x == t1 {
        return v1;
    }
    v0 + (x - t0) / (t1 - t0) * (v1 - v0)
}

/// Puts `raw` on the dyadic grid over `[first, last]`, at `exponent` if given.
pub fn to_grid(raw: Vec<(f64, f64)>, exponent: Option<u32>, source: &str) -> Result<IngestedSeries, LabError> {
    let j = exponent.unwrap_or_else(|| natural_exponent(raw.len()));
    let first = raw[0].0;
    let last = raw[raw.len() - 1].0;
    let grid = Grid::new(first, last, j)?;
    let on_grid = raw.len() == grid.points()
        && raw
            .iter()
            .enumerate()
            .all(|(k, &(t, _))| (t - grid.point(k)).abs() <= GRID_MATCH_TOL * grid.spacing());
    let values: Vec<f64> = if on_grid {
        raw.iter().map(|&(_, v)| v).collect()
    } else {
        (0..grid.points()).map(|k| interpolate(&raw, grid.point(k))).collect()
    };
    let resampled = SampledPath::new(grid, values)?;
    let summary = IngestSummary {
        source: source.to_string(),
        rows: raw.len(),
        first_time: first,
        last_time: last,
        exponent: j,
        resampled: !on_grid,
    };
    Ok(IngestedSeries { resampled, summary })
}

pub fn load(path: &Path, exponent: Option<u32>) -> Result<IngestedSeries, LabError> {
    let file = std::fs::File::open(path)
        .map_err(|e| LabError::Data(format!("cannot open {}: {e}", path.display())))?;
    to_grid(parse_series(file)?, exponent, &path.display().to_string())
}
