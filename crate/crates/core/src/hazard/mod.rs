//! Damage functions: mortality relative risk, occupant outcomes,
//! productivity level and the Winter Index for freeze damage.

mod curves;
mod outcome;
mod sampling;

pub use curves::{
    fit_polynomial, polyval, productivity, relative_risk, CurveSpec, FitProvenance, ProductivityModel,
    RRModel, DEFAULT_PRODUCTIVITY_POINTS, DEFAULT_PRODUCTIVITY_RANGE, DEFAULT_RR_POINTS,
    DEFAULT_RR_RANGE, NORMALIZATION_GRID_STEP,
};
pub use outcome::{
    simulate_occupant_outcome, ByCondition, Condition, HealthDistributions, OccupantOutcome,
    OccupantProbs, OccupantSampler, OutcomeStatus,
};
pub(crate) use outcome::bernoulli;
pub use sampling::{sample_truncated_normal, TruncNormalParams, TruncatedNormal, MIN_ACCEPTANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::ExposureTrace;

/// Moisture source for the Winter Index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IndoorRh {
    /// Use the outdoor relative humidity series.
    #[default]
    Outdoor,
    /// Fixed indoor relative humidity (%).
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WinterIndexParams {
    /// Critical temperature T_L (°C).
    pub t_crit: f64,
    /// Critical relative humidity RH_L (%).
    pub rh_crit: f64,
    pub indoor_rh: IndoorRh,
}

impl Default for WinterIndexParams {
    fn default() -> Self {
        Self {
            t_crit: 0.0,
            rh_crit: 80.0,
            indoor_rh: IndoorRh::Outdoor,
        }
    }
}

impl WinterIndexParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.rh_crit) {
            return Err(Error::Config(format!("rh_crit {} outside [0, 100]", self.rh_crit)));
        }
        if !self.t_crit.is_finite() {
            return Err(Error::Config("t_crit must be finite".into()));
        }
        if let IndoorRh::Constant(rh) = self.indoor_rh {
            if !(0.0..=100.0).contains(&rh) {
                return Err(Error::Config(format!("constant indoor RH {rh} outside [0, 100]")));
            }
        }
        Ok(())
    }
}

/// Accumulated Winter Index over aligned indoor temperature and RH series.
/// A step contributes `(T_L - t) * (RH - RH_L)` only when `t < T_L` and
/// `RH > RH_L`.
pub fn winter_index(t_in: &[f64], rh: &[f64], params: &WinterIndexParams) -> Result<f64> {
    if t_in.len() != rh.len() {
        return Err(Error::Mismatch(format!(
            "winter index: {} temperatures vs {} humidity samples",
            t_in.len(),
            rh.len()
        )));
    }
    let sum = t_in
        .iter()
        .zip(rh)
        .map(|(&t, &rh_out)| {
            let rh = match params.indoor_rh {
                IndoorRh::Outdoor => rh_out,
                IndoorRh::Constant(c) => c,
            };
            if t < params.t_crit && rh > params.rh_crit {
                (params.t_crit - t) * (rh - params.rh_crit)
            } else {
                0.0
            }
        })
        .sum();
    Ok(sum)
}

/// Which steps enter the mean relative risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RrWindow {
    /// Every step of the event window.
    #[default]
    WholeEvent,
    /// Only steps without power; buildings never unpowered get RR 1.
    UnpoweredOnly,
}

/// Mean relative risk over the trace.
pub fn mean_relative_risk(trace: &ExposureTrace, model: &RRModel, window: RrWindow) -> f64 {
    let (sum, n) = trace
        .t_in
        .iter()
        .zip(&trace.powered)
        .filter(|(_, &powered)| window == RrWindow::WholeEvent || !powered)
        .fold((0.0, 0usize), |(s, n), (&t, _)| (s + relative_risk(t, model), n + 1));
    if n == 0 {
        1.0
    } else {
        sum / n as f64
    }
}

/// Probability that an occupant suffers an at-risk event:
/// `clamp(mean RR - 1 + delta, 0, 1)`.
pub fn base_mortality(trace: &ExposureTrace, model: &RRModel, delta: f64) -> f64 {
    mortality_from_mean_rr(mean_relative_risk(trace, model, RrWindow::WholeEvent), delta)
}

pub fn mortality_from_mean_rr(mean_rr: f64, delta: f64) -> f64 {
    (mean_rr - 1.0 + delta).clamp(0.0, 1.0)
}

/// Hazard section of the scenario configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HazardConfig {
    pub rr_model: CurveSpec,
    pub productivity_model: CurveSpec,
    pub winter_index: WinterIndexParams,
    /// Additive mortality adjustment for event duration and severity.
    pub delta: f64,
    pub rr_window: RrWindow,
    pub distributions: HealthDistributions,
}

impl Default for HazardConfig {
    fn default() -> Self {
        Self {
            rr_model: CurveSpec::default_rr(),
            productivity_model: CurveSpec::default_productivity(),
            winter_index: WinterIndexParams::default(),
            delta: 0.0,
            rr_window: RrWindow::WholeEvent,
            distributions: HealthDistributions::default(),
        }
    }
}

impl HazardConfig {
    pub fn resolve(&self) -> Result<HazardModels> {
        self.winter_index.validate()?;
        if !self.delta.is_finite() {
            return Err(Error::Config("delta must be finite".into()));
        }
        Ok(HazardModels {
            rr: RRModel::from_spec(&self.rr_model)?,
            productivity: ProductivityModel::from_spec(&self.productivity_model)?,
            winter_index: self.winter_index,
            delta: self.delta,
            rr_window: self.rr_window,
            occupants: self.distributions.build()?,
        })
    }
}

/// Fitted and validated hazard models, ready for evaluation.
#[derive(Debug, Clone)]
pub struct HazardModels {
    pub rr: RRModel,
    pub productivity: ProductivityModel,
    pub winter_index: WinterIndexParams,
    pub delta: f64,
    pub rr_window: RrWindow,
    pub occupants: OccupantSampler,
}

impl HazardModels {
    pub fn mean_rr(&self, trace: &ExposureTrace) -> f64 {
        mean_relative_risk(trace, &self.rr, self.rr_window)
    }

    pub fn p_mort(&self, trace: &ExposureTrace) -> f64 {
        mortality_from_mean_rr(self.mean_rr(trace), self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn trace(t_in: Vec<f64>) -> ExposureTrace {
        let n = t_in.len();
        ExposureTrace {
            building_id: 1,
            start: Utc.with_ymd_and_hms(2021, 2, 15, 0, 0, 0).unwrap(),
            dt: 300,
            t_in,
            powered: vec![false; n],
            hvac_electric_kw: vec![0.0; n],
        }
    }

    #[test]
    fn wi_zero_when_warm() {
        let p = WinterIndexParams::default();
        assert_eq!(winter_index(&[5.0, 0.0, 12.0], &[95.0; 3], &p).unwrap(), 0.0);
    }

    #[test]
    fn wi_single_step_product() {
        let p = WinterIndexParams::default();
        // T_L - t = 5, RH - RH_L = 10
        assert_eq!(winter_index(&[-5.0, 10.0], &[90.0, 90.0], &p).unwrap(), 50.0);
    }

    #[test]
    fn wi_zero_when_dry() {
        let p = WinterIndexParams::default();
        assert_eq!(winter_index(&[-20.0; 4], &[80.0, 70.0, 10.0, 80.0], &p).unwrap(), 0.0);
    }

    #[test]
    fn wi_constant_rh_override() {
        let p = WinterIndexParams {
            indoor_rh: IndoorRh::Constant(85.0),
            ..Default::default()
        };
        assert_eq!(winter_index(&[-2.0], &[0.0], &p).unwrap(), 10.0);
    }

    #[test]
    fn wi_misaligned_is_an_error() {
        let p = WinterIndexParams::default();
        assert!(matches!(winter_index(&[1.0, 2.0], &[90.0], &p), Err(Error::Mismatch(_))));
    }

    fn flat_rr(value: f64) -> RRModel {
        // constant polynomial; bypasses normalization to model "RR = value"
        RRModel {
            coefficients: [0.0, 0.0, 0.0, 0.0, value],
            valid_range: [-20.0, 30.0],
            provenance: None,
        }
    }

    #[test]
    fn mortality_zero_at_mmt() {
        let model = RRModel::from_spec(&CurveSpec::default_rr()).unwrap();
        let mmt = model.minimum_mortality_temperature();
        assert!(base_mortality(&trace(vec![mmt; 10]), &model, 0.0).abs() < 1e-12);
    }

    #[test]
    fn mortality_from_constant_rr() {
        let p = base_mortality(&trace(vec![0.0; 10]), &flat_rr(1.43), 0.0);
        assert!((p - 0.43).abs() < 1e-12);
    }

    #[test]
    fn delta_is_additive_before_clamp() {
        let t = trace(vec![0.0; 10]);
        let base = base_mortality(&t, &flat_rr(1.2), 0.0);
        let shifted = base_mortality(&t, &flat_rr(1.2), 0.05);
        assert!((shifted - base - 0.05).abs() < 1e-12);
        assert_eq!(base_mortality(&t, &flat_rr(1.0), -0.5), 0.0);
        assert_eq!(base_mortality(&t, &flat_rr(2.5), 0.0), 1.0);
    }

    #[test]
    fn unpowered_only_window_ignores_powered_steps() {
        let model = flat_rr(1.3);
        let mut t = trace(vec![0.0; 4]);
        t.powered = vec![true; 4];
        assert_eq!(mean_relative_risk(&t, &model, RrWindow::UnpoweredOnly), 1.0);
        assert!((mean_relative_risk(&t, &model, RrWindow::WholeEvent) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn colder_traces_never_lower_mortality() {
        let model = RRModel::from_spec(&CurveSpec::default_rr()).unwrap();
        let mmt = model.minimum_mortality_temperature();
        let mut prev = 0.0;
        let mut t = mmt;
        while t > model.valid_range[0] {
            let p = base_mortality(&trace(vec![t; 3]), &model, 0.0);
            assert!(p >= prev - 1e-15, "P_mort fell at {t}");
            prev = p;
            t -= 0.25;
        }
    }

    #[test]
    fn default_config_resolves() {
        let models = HazardConfig::default().resolve().unwrap();
        assert!(models.rr.provenance.is_some());
        assert!(models.productivity.provenance.is_some());
    }
}
