use serde::{Deserialize, Serialize};

use super::CostBreakdown;
use crate::error::{Error, Result};

/// Exact statistics over a set of trial values. `std` is the population
/// standard deviation; percentiles use the nearest-rank rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

/// Nearest-rank percentile of sorted data: element `ceil(p/100·n) − 1`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

impl Stats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Runtime("cannot summarize zero trials".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            mean,
            std: var.sqrt(),
            min: sorted[0],
            p5: nearest_rank(&sorted, 5.0),
            p50: nearest_rank(&sorted, 50.0),
            p95: nearest_rank(&sorted, 95.0),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_trials: usize,
    pub c_vsl: Stats,
    pub c_medical: Stats,
    pub c_prod: Stats,
    pub c_build: Stats,
    pub c_cic: Stats,
    /// Non-energy impacts: everything except the interruption cost.
    pub nei: Stats,
    pub total: Stats,
    pub n_death: Stats,
    pub n_injured: Stats,
    /// Share of trials with no deaths.
    pub zero_death_fraction: f64,
}

pub fn summarize(trials: &[CostBreakdown]) -> Result<Summary> {
    let col = |f: fn(&CostBreakdown) -> f64| Stats::of(&trials.iter().map(f).collect::<Vec<_>>());
    Ok(Summary {
        n_trials: trials.len(),
        c_vsl: col(|t| t.c_vsl)?,
        c_medical: col(|t| t.c_medical)?,
        c_prod: col(|t| t.c_prod)?,
        c_build: col(|t| t.c_build)?,
        c_cic: col(|t| t.c_cic)?,
        nei: col(CostBreakdown::nei)?,
        total: col(CostBreakdown::total)?,
        n_death: col(|t| t.n_death as f64)?,
        n_injured: col(|t| t.n_injured as f64)?,
        zero_death_fraction: trials.iter().filter(|t| t.n_death == 0).count() as f64 / trials.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

/// Fixed-width histogram spanning `[min, max]`; the last bin is closed. When
/// all values coincide every count lands in the first bin.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() || bins == 0 {
        return Err(Error::Runtime("histogram needs values and at least one bin".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lower: lo + width * i as f64,
            upper: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
            count: 0,
        })
        .collect();
    for &v in values {
        let i = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        out[i].count += 1;
    }
    Ok(out)
}
