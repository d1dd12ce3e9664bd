use serde::Serialize;

use crate::error::{Error, Result};
use crate::paraproduct::least_squares_slope;

/// Slopes below this are read as bounded.
pub const BOUNDED_SLOPE: f64 = 0.05;
/// Slopes above this are read as divergent.
pub const DIVERGENT_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Divergent,
    Inconclusive,
    Pass,
    Fail,
    Measured,
    Degenerate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Measured => "measured",
            Verdict::Degenerate => "degenerate",
        }
    }

    pub fn from_check(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Least-squares slope of `log2 value` against `log2 N` and the verdict it implies.
pub fn classify_boundedness(series: &[(usize, f64)]) -> Result<(f64, Verdict)> {
    if series.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 resolutions, got {}", series.len())));
    }
    if let Some((n, v)) = series.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("nonpositive value {v} at N = {n}")));
    }
    let xs: Vec<f64> = series.iter().map(|(n, _)| (*n as f64).log2()).collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.log2()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let verdict = if slope < BOUNDED_SLOPE {
        Verdict::Bounded
    } else if slope > DIVERGENT_SLOPE {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    Ok((slope, verdict))
}
