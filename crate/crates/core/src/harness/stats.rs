use serde::Serialize;

use crate::error::{Error, Result};

/// Empirical CDF: ascending errors with `prob[k] = (k + 1) / n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfSeries {
    pub points: Vec<(f64, f64)>,
}

impl CdfSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest error whose cumulative probability reaches `p`.
    pub fn inverse(&self, p: f64) -> Option<f64> {
        self.points.iter().find(|(_, q)| *q >= p - 1e-12).map(|(e, _)| *e)
    }
}

fn sorted(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if errors.iter().any(|e| e.is_nan()) {
        return Err(Error::InvalidParameter("NaN in error list".into()));
    }
    let mut v = errors.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn cdf(errors: &[f64]) -> Result<CdfSeries> {
    let v = sorted(errors)?;
    let n = v.len() as f64;
    Ok(CdfSeries { points: v.into_iter().enumerate().map(|(k, e)| (e, (k + 1) as f64 / n)).collect() })
}

/// Nearest-rank percentile: the `⌈p·n⌉`-th smallest value.
pub fn percentile(errors: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("percentile {p} not in (0, 1]")));
    }
    let v = sorted(errors)?;
    // guard against p·n landing a hair above an integer, e.g. 0.9·10
    let rank = ((p * v.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(v[rank.min(v.len()) - 1])
}
