//! Attention-cost model and the statistics used by the timing benchmark.
//!
//! Cost units count only the multiply-adds of the score product `Q·Kᵀ` and the
//! weighted sum `A·V`, per layer, up to a constant factor shared by both
//! models. Projections and the feed-forward network are linear in length and
//! are left out.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Hi,
    Flat,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Hi => "hi",
            ModelKind::Flat => "flat",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hi" => Ok(ModelKind::Hi),
            "flat" => Ok(ModelKind::Flat),
            _ => Err(Error::Config(format!("unknown model kind {s:?} (hi|flat)"))),
        }
    }
}

/// Per-layer attention cost. Hierarchical: two sentence passes over `K+1`
/// slots plus one document pass, `2·M·(K+1)²·d + M²·d`. Flat: `(M·K)²·d`.
pub fn flop_estimate(kind: ModelKind, m: u64, k: u64, d: u64) -> u64 {
    match kind {
        ModelKind::Hi => 2 * m * (k + 1) * (k + 1) * d + m * m * d,
        ModelKind::Flat => (m * k) * (m * k) * d,
    }
}

/// How many times cheaper the hierarchical layer is than the flat one.
pub fn advantage_ratio(m: u64, k: u64, d: u64) -> f64 {
    flop_estimate(ModelKind::Flat, m, k, d) as f64 / flop_estimate(ModelKind::Hi, m, k, d) as f64
}

pub const COST_CSV_HEADER: &str = "kind,L,M,K,d,analytic_units,median_s,stddev_s";

/// One timed configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub kind: ModelKind,
    pub m: usize,
    pub k: usize,
    pub d: usize,
    pub layers: usize,
    pub analytic_units: u64,
    /// Median seconds per forward layer.
    pub median_s: f64,
    pub stddev_s: f64,
    pub repeats: usize,
}

impl CostReport {
    /// Total token count `M·K`.
    pub fn length(&self) -> usize {
        self.m * self.k
    }

    /// A row under [`COST_CSV_HEADER`].
    pub fn csv_row(&self) -> alloc::string::String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e}",
            self.kind,
            self.length(),
            self.m,
            self.k,
            self.d,
            self.analytic_units,
            self.median_s,
            self.stddev_s
        )
    }
}

/// Median and sample standard deviation.
pub fn median_and_stddev(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Dimension("no samples".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    };
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok((median, num_traits::Float::sqrt(var)))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Dimension("a slope needs at least two points".into()));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (num_traits::Float::ln(x), num_traits::Float::ln(y)))
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all x values are equal".into()));
    }
    Ok(sxy / sxx)
}
