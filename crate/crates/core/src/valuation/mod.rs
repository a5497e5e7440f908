//! Monetization of outage impacts and the Monte-Carlo trial loop.
//!
//! Everything that depends only on the exposure traces (mortality
//! probability, Winter Index, lost productivity, interruption cost) is
//! computed once per scenario in [`prepare_scenario`]. A trial then only
//! draws occupant outcomes and pipe damage, each building from its own
//! counter-keyed stream, so trials can run in any order on any number of
//! threads.

mod costs;
mod params;
mod summary;

pub use costs::{
    building_productivity_cost, building_repair_cost, interruption_cost, medical_cost, occupant_medical_cost,
    productivity_cost, repair_cost, vsl_cost,
};
pub use params::{
    default_wages, BetaKeyword, BetaWi, CicParams, CicSectorTable, CostRange, ValuationParams, WorkingHours,
    VSL_DOT, VSL_FEMA,
};
pub use summary::{histogram, nearest_rank, summarize, HistogramBin, Stats, Summary};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::{winter_index, HazardModels, OccupantSampler, WinterIndexParams};
use crate::outage::unpowered_hours;
use crate::population::Population;
use crate::rng::{trial_stream, REPAIR_SLOT};
use crate::thermal::ExposureTrace;

/// Costs and counts of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub c_vsl: f64,
    pub c_medical: f64,
    pub c_prod: f64,
    pub c_build: f64,
    pub c_cic: f64,
    pub n_death: u64,
    pub n_injured: u64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.c_vsl + self.c_medical + self.c_prod + self.c_build + self.c_cic
    }

    /// Non-energy impacts: all components except the interruption cost.
    pub fn nei(&self) -> f64 {
        self.c_vsl + self.c_medical + self.c_prod + self.c_build
    }
}

/// Trial-invariant quantities for one building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingExposure {
    pub building_id: u32,
    pub n_occupants: u32,
    pub mean_rr: f64,
    pub p_mort: f64,
    pub sum_wi: f64,
    pub outage_hours: f64,
    pub c_prod: f64,
    pub c_cic: f64,
}

/// A scenario ready for Monte-Carlo trials.
#[derive(Debug, Clone)]
pub struct ScenarioBundle {
    pub buildings: Vec<BuildingExposure>,
    pub beta_wi: f64,
    pub params: ValuationParams,
    pub occupants: OccupantSampler,
}

impl ScenarioBundle {
    /// Occupant-weighted mean relative risk.
    pub fn mean_rr(&self) -> f64 {
        let occupants: f64 = self.buildings.iter().map(|b| f64::from(b.n_occupants)).sum();
        if occupants == 0.0 {
            return 1.0;
        }
        self.buildings
            .iter()
            .map(|b| b.mean_rr * f64::from(b.n_occupants))
            .sum::<f64>()
            / occupants
    }

    pub fn c_prod(&self) -> f64 {
        self.buildings.iter().map(|b| b.c_prod).sum()
    }

    pub fn c_cic(&self) -> f64 {
        self.buildings.iter().map(|b| b.c_cic).sum()
    }
}

fn check_alignment(pop: &Population, traces: &[ExposureTrace]) -> Result<()> {
    if pop.len() != traces.len() {
        return Err(Error::Mismatch(format!("{} buildings but {} traces", pop.len(), traces.len())));
    }
    if let Some((b, t)) = pop.buildings.iter().zip(traces).find(|(b, t)| b.id != t.building_id) {
        return Err(Error::Mismatch(format!("trace for building {} found where {} was expected", t.building_id, b.id)));
    }
    Ok(())
}

/// Accumulated Winter Index per trace, using `rh` as the outdoor humidity.
pub fn sum_winter_index(traces: &[ExposureTrace], rh: &[f64], params: &WinterIndexParams) -> Result<Vec<f64>> {
    traces.iter().map(|t| winter_index(&t.t_in, rh, params)).collect()
}

/// Precomputes every trial-invariant quantity. `traces[i]` must belong to
/// `pop.buildings[i]`; `rh` is the outdoor humidity over the same steps.
pub fn prepare_scenario(
    pop: &Population,
    traces: &[ExposureTrace],
    rh: &[f64],
    hazard: &HazardModels,
    params: &ValuationParams,
    beta_wi: f64,
) -> Result<ScenarioBundle> {
    check_alignment(pop, traces)?;
    if !(beta_wi > 0.0 && beta_wi.is_finite()) {
        return Err(Error::Config(format!("beta_wi must be > 0, got {beta_wi}")));
    }
    let sum_wi = sum_winter_index(traces, rh, &hazard.winter_index)?;
    let buildings = pop
        .buildings
        .iter()
        .zip(traces)
        .zip(sum_wi)
        .map(|((b, t), sum_wi)| {
            let mean_rr = hazard.mean_rr(t);
            let outage_hours = unpowered_hours(&t.powered, t.dt);
            BuildingExposure {
                building_id: b.id,
                n_occupants: b.n_occupants,
                mean_rr,
                p_mort: hazard.p_mort(t),
                sum_wi,
                outage_hours,
                c_prod: building_productivity_cost(b, t, &hazard.productivity, params.wage(b.kind), &params.working_hours),
                c_cic: interruption_cost(b, outage_hours, &params.cic),
            }
        })
        .collect();
    Ok(ScenarioBundle {
        buildings,
        beta_wi,
        params: params.clone(),
        occupants: hazard.occupants.clone(),
    })
}

/// One Monte-Carlo trial; a pure function of `(bundle, trial, master_seed)`.
pub fn run_trial(bundle: &ScenarioBundle, trial: u64, master_seed: u64) -> CostBreakdown {
    let params = &bundle.params;
    let mut out = CostBreakdown::default();
    for b in &bundle.buildings {
        let id = u64::from(b.building_id);
        if b.p_mort > 0.0 {
            let mut rng = trial_stream(master_seed, trial, id, 0);
            for _ in 0..b.n_occupants {
                let o = bundle.occupants.simulate(b.p_mort, &mut rng);
                if o.is_death() {
                    out.n_death += 1;
                } else if o.is_injured() {
                    out.n_injured += 1;
                    out.c_medical += occupant_medical_cost(&o, b.p_mort, params);
                }
            }
        }
        if b.sum_wi > 0.0 {
            let mut rng = trial_stream(master_seed, trial, id, REPAIR_SLOT);
            out.c_build += building_repair_cost(b.sum_wi, bundle.beta_wi, params, &bundle.occupants.home_insurance, &mut rng);
        }
        out.c_prod += b.c_prod;
        out.c_cic += b.c_cic;
    }
    out.c_vsl = out.n_death as f64 * params.vsl;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostDistribution {
    pub trials: Vec<CostBreakdown>,
    pub summary: Summary,
    /// Histogram of trial totals.
    pub histogram: Vec<HistogramBin>,
}

/// Runs `n_trials` trials on a pool of `threads` workers (0 = one per
/// core). Results are collected in trial order, so they do not depend on
/// the worker count.
pub fn run_monte_carlo(bundle: &ScenarioBundle, n_trials: u64, master_seed: u64, threads: usize) -> Result<CostDistribution> {
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Runtime(format!("cannot start worker pool: {e}")))?;
    let trials: Vec<CostBreakdown> =
        pool.install(|| (0..n_trials).into_par_iter().map(|t| run_trial(bundle, t, master_seed)).collect());
    let summary = summarize(&trials)?;
    let totals: Vec<f64> = trials.iter().map(CostBreakdown::total).collect();
    let histogram = histogram(&totals, bundle.params.histogram_bins)?;
    Ok(CostDistribution {
        trials,
        summary,
        histogram,
    })
}

pub const TRIAL_COLUMNS: [&str; 9] =
    ["trial", "c_vsl", "c_medical", "c_prod", "c_build", "c_cic", "total", "n_death", "n_injured"];

/// One row per trial, money with two decimals.
pub fn write_trials_csv<W: Write>(trials: &[CostBreakdown], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Runtime(format!("trials CSV: {e}"));
    writeln!(w, "{}", TRIAL_COLUMNS.join(",")).map_err(io)?;
    for (i, t) in trials.iter().enumerate() {
        writeln!(
            w,
            "{i},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{},{}",
            t.c_vsl,
            t.c_medical,
            t.c_prod,
            t.c_build,
            t.c_cic,
            t.total(),
            t.n_death,
            t.n_injured
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Runtime(format!("histogram CSV: {e}"));
    writeln!(w, "lower,upper,count").map_err(io)?;
    for b in bins {
        writeln!(w, "{:.2},{:.2},{}", b.lower, b.upper, b.count).map_err(io)?;
    }
    w.flush().map_err(io)
}
