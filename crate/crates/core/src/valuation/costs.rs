//! Cost components in USD.

use chrono::Timelike;
use rand::Rng;

use super::params::{CicParams, ValuationParams, WorkingHours};
use crate::hazard::{bernoulli, productivity, Condition, OccupantOutcome, OutcomeStatus, ProductivityModel, TruncatedNormal};
use crate::population::{Building, Sector};
use crate::thermal::ExposureTrace;

pub fn vsl_cost(deaths_per_building: &[u64], vsl: f64) -> f64 {
    deaths_per_building.iter().map(|&d| d as f64 * vsl).sum()
}

/// Medical cost of one occupant. Hospital-recovered injuries scale with
/// `p_mort` across the insured or uninsured range; home recoveries cost a
/// fixed fraction of the insured minimum; deaths and unaffected occupants
/// cost nothing.
pub fn occupant_medical_cost(outcome: &OccupantOutcome, p_mort: f64, params: &ValuationParams) -> f64 {
    let condition = match outcome.condition {
        Condition::None => return 0.0,
        c => c,
    };
    match outcome.status {
        OutcomeStatus::InjuredRecoveredHospital => {
            let table = if outcome.insured {
                &params.medical_insured
            } else {
                &params.medical_uninsured
            };
            table.get(condition).at(p_mort / params.medical_severity_ceiling)
        }
        OutcomeStatus::InjuredRecoveredHome => {
            params.home_recovery_fraction * params.medical_insured.get(condition).min
        }
        OutcomeStatus::Death | OutcomeStatus::Unaffected => 0.0,
    }
}

/// Sum of [`occupant_medical_cost`] over `(outcome, p_mort)` pairs.
pub fn medical_cost(outcomes: &[(OccupantOutcome, f64)], params: &ValuationParams) -> f64 {
    outcomes
        .iter()
        .map(|(o, p)| occupant_medical_cost(o, *p, params))
        .sum()
}

fn in_hours(trace: &ExposureTrace, step: usize, window: [f64; 2], offset_hours: f64) -> bool {
    let t = trace.start + chrono::Duration::seconds(trace.dt * step as i64);
    let secs = t.num_seconds_from_midnight() as f64 + offset_hours * 3600.0;
    let hour = secs.rem_euclid(86_400.0) / 3600.0;
    hour >= window[0] && hour < window[1]
}

/// Lost wages in one building: for each working-hours step,
/// `workers · (1 − P) · wage · dt_h`, where `P` is zero while power is off
/// for power-dependent jobs and the comfort productivity otherwise.
pub fn building_productivity_cost(
    building: &Building,
    trace: &ExposureTrace,
    model: &ProductivityModel,
    wage: f64,
    hours: &WorkingHours,
) -> f64 {
    if building.n_workers == 0 || wage == 0.0 {
        return 0.0;
    }
    let window = if building.is_residential() {
        hours.residential
    } else {
        hours.commercial
    };
    let dt_h = trace.dt as f64 / 3600.0;
    let mut lost = 0.0;
    for i in 0..trace.len() {
        if !in_hours(trace, i, window, hours.utc_offset_hours) {
            continue;
        }
        let p = if building.job_requires_power && !trace.powered[i] {
            0.0
        } else {
            productivity(trace.t_in[i], model)
        };
        lost += 1.0 - p;
    }
    f64::from(building.n_workers) * wage * dt_h * lost
}

/// Population productivity cost; `traces[i]` belongs to `buildings[i]`.
pub fn productivity_cost(
    buildings: &[Building],
    traces: &[ExposureTrace],
    model: &ProductivityModel,
    params: &ValuationParams,
) -> f64 {
    buildings
        .iter()
        .zip(traces)
        .map(|(b, t)| building_productivity_cost(b, t, model, params.wage(b.kind), &params.working_hours))
        .sum()
}

/// Frozen-pipe repair draw for one building. Damage occurs with probability
/// `clamp(ΣWI/β)`; a damaged building is insured with a probability drawn
/// from `home_insurance`, and pays the matching range at severity `ΣWI/β`.
pub fn building_repair_cost<R: Rng + ?Sized>(
    sum_wi: f64,
    beta_wi: f64,
    params: &ValuationParams,
    home_insurance: &TruncatedNormal,
    rng: &mut R,
) -> f64 {
    if sum_wi <= 0.0 {
        return 0.0;
    }
    let ratio = (sum_wi / beta_wi).clamp(0.0, 1.0);
    if !bernoulli(ratio, rng) {
        return 0.0;
    }
    let insured = bernoulli(home_insurance.sample(rng) / 100.0, rng);
    let range = if insured {
        params.repair_insured
    } else {
        params.repair_uninsured
    };
    range.at(ratio)
}

pub fn repair_cost<R: Rng + ?Sized>(
    sum_wi_by_building: &[f64],
    beta_wi: f64,
    params: &ValuationParams,
    home_insurance: &TruncatedNormal,
    rng: &mut R,
) -> f64 {
    sum_wi_by_building
        .iter()
        .map(|&wi| building_repair_cost(wi, beta_wi, params, home_insurance, rng))
        .sum()
}

/// Customer interruption cost for a building that was without power for
/// `outage_hours` in total.
pub fn interruption_cost(building: &Building, outage_hours: f64, cic: &CicParams) -> f64 {
    if outage_hours <= 0.0 {
        return 0.0;
    }
    let table = cic.table(building.sector);
    let capped = outage_hours.min(cic.duration_cap_hours);
    let unserved_kwh = building.avg_annual_kwh / 8760.0 * outage_hours;
    let mut cost = table.base + table.per_hour * capped + table.per_kwh * unserved_kwh;
    cost *= cic.season_multiplier;
    cost *= match building.sector {
        Sector::Residential => building
            .annual_income_bracket
            .and_then(|b| cic.income_multiplier.get(&b).copied())
            .unwrap_or(1.0),
        _ => cic.industry_multiplier.get(&building.kind).copied().unwrap_or(1.0),
    };
    if building.sector == Sector::SmallCi && building.backup {
        cost *= cic.backup_discount;
    }
    cost + table.slope * (outage_hours - cic.duration_cap_hours).max(0.0)
}
