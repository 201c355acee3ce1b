use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Closed set of bounded deterministic weight functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFn {
    Constant { value: f64 },
    /// `intercept + slope * s`
    Affine { intercept: f64, slope: f64 },
    /// `amplitude * sin(2 pi frequency s + phase)`
    Sine { amplitude: f64, frequency: f64, phase: f64 },
    /// 1 on `[lo, hi]`, 0 elsewhere.
    Indicator { lo: f64, hi: f64 },
}

impl WeightFn {
    pub const ONE: WeightFn = WeightFn::Constant { value: 1.0 };

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            WeightFn::Constant { value } => value,
            WeightFn::Affine { intercept, slope } => intercept + slope * s,
            WeightFn::Sine { amplitude, frequency, phase } => {
                amplitude * (std::f64::consts::TAU * frequency * s + phase).sin()
            }
            WeightFn::Indicator { lo, hi } => {
                if (lo..=hi).contains(&s) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Rejects descriptors that are not bounded on a compact interval.
    pub fn validate(&self) -> Result<()> {
        let params: &[f64] = match self {
            WeightFn::Constant { value } => &[*value],
            WeightFn::Affine { intercept, slope } => &[*intercept, *slope],
            WeightFn::Sine { amplitude, frequency, phase } => &[*amplitude, *frequency, *phase],
            WeightFn::Indicator { lo, hi } => {
                if lo > hi {
                    return Err(LabError::config(format!("indicator needs lo <= hi, got [{lo}, {hi}]")));
                }
                &[*lo, *hi]
            }
        };
        if params.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(LabError::config(format!("weight {self} has non-finite parameters")))
        }
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::Constant { value } => write!(f, "constant:{value}"),
            WeightFn::Affine { intercept, slope } => write!(f, "affine:{intercept},{slope}"),
            WeightFn::Sine { amplitude, frequency, phase } => {
                write!(f, "sine:{amplitude},{frequency},{phase}")
            }
            WeightFn::Indicator { lo, hi } => write!(f, "indicator:{lo},{hi}"),
        }
    }
}

/// Parses `name:p1,p2,...`, e.g. `affine:0,1` or `indicator:0,0.5`.
impl FromStr for WeightFn {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let args: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LabError::config(format!("bad weight parameter in {s:?}: {e}")))?
        };
        let w = match (name.trim(), args.as_slice()) {
            ("constant", [value]) => WeightFn::Constant { value: *value },
            ("one", []) => WeightFn::ONE,
            ("affine", [intercept, slope]) => WeightFn::Affine { intercept: *intercept, slope: *slope },
            ("sine", [amplitude, frequency, phase]) => {
                WeightFn::Sine { amplitude: *amplitude, frequency: *frequency, phase: *phase }
            }
            ("indicator", [lo, hi]) => WeightFn::Indicator { lo: *lo, hi: *hi },
            _ => return Err(LabError::config(format!("unrecognized weight descriptor {s:?}"))),
        };
        w.validate()?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_agree() {
        for s in ["constant:2", "affine:0,1", "sine:1,2,0.5", "indicator:0,0.5"] {
            let w: WeightFn = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
    }

    #[test]
    fn invalid_descriptors() {
        assert!("affine:1".parse::<WeightFn>().is_err());
        assert!("cubic:1".parse::<WeightFn>().is_err());
        assert!("indicator:1,0".parse::<WeightFn>().is_err());
        assert!("constant:inf".parse::<WeightFn>().is_err());
    }

    #[test]
    fn indicator_support() {
        let w = WeightFn::Indicator { lo: 0.0, hi: 0.5 };
        assert_eq!(w.eval(0.25), 1.0);
        assert_eq!(w.eval(0.75), 0.0);
    }
}
