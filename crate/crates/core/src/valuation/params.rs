use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::ByCondition;
use crate::population::{BuildingKind, IncomeBracket, Sector};

/// FEMA value of a statistical life (USD).
pub const VSL_FEMA: f64 = 11.6e6;
/// US DOT value of a statistical life (USD).
pub const VSL_DOT: f64 = 11.8e6;

/// Closed cost interval in USD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRange {
    pub min: f64,
    pub max: f64,
}

impl CostRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// `min + (max − min)·s` with `s` clamped to [0, 1].
    pub fn at(&self, severity: f64) -> f64 {
        self.min + (self.max - self.min) * severity.clamp(0.0, 1.0)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.min >= 0.0 && self.min <= self.max && self.max.is_finite()) {
            return Err(Error::Config(format!("{name}: need 0 <= min <= max, got [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }
}

/// Normalizer for accumulated Winter Index: the population maximum over the
/// simulated scenarios, or a fixed value for cross-run comparability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaWi {
    Fixed(f64),
    Keyword(BetaKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaKeyword {
    Auto,
}

impl BetaWi {
    pub const AUTO: BetaWi = BetaWi::Keyword(BetaKeyword::Auto);

    pub fn fixed(&self) -> Option<f64> {
        match *self {
            BetaWi::Fixed(v) => Some(v),
            BetaWi::Keyword(BetaKeyword::Auto) => None,
        }
    }
}

/// Hours of day `[from, to)` in which workers are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingHours {
    pub residential: [f64; 2],
    pub commercial: [f64; 2],
    /// Offset added to timestamps before taking the hour of day.
    pub utc_offset_hours: f64,
}

impl Default for WorkingHours {
    fn default() -> Self {
        Self {
            residential: [9.0, 17.0],
            commercial: [8.0, 17.0],
            utc_offset_hours: 0.0,
        }
    }
}

/// Interruption-cost coefficients for one customer sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CicSectorTable {
    /// USD per event.
    pub base: f64,
    /// USD per outage hour, up to the duration cap.
    pub per_hour: f64,
    /// USD per kWh of unserved average load.
    pub per_kwh: f64,
    /// USD per outage hour beyond the duration cap.
    pub slope: f64,
}

impl CicSectorTable {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(self.base) && ok(self.per_hour) && ok(self.per_kwh) && ok(self.slope)) {
            return Err(Error::Config(format!("cic.{name}: coefficients must be finite and >= 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CicParams {
    /// True for the shipped order-of-magnitude tables. Runs refuse them
    /// unless the valuation config acknowledges it.
    pub placeholder: bool,
    pub residential: CicSectorTable,
    pub small_ci: CicSectorTable,
    pub medium_ci: CicSectorTable,
    pub large_ci: CicSectorTable,
    pub season_multiplier: f64,
    /// Per business type; kinds not listed use 1.
    pub industry_multiplier: BTreeMap<BuildingKind, f64>,
    /// Per household income bracket; brackets not listed use 1.
    pub income_multiplier: BTreeMap<IncomeBracket, f64>,
    /// Factor applied to small C&I customers with backup generation.
    pub backup_discount: f64,
    /// Duration (h) beyond which only the linear slope accrues.
    pub duration_cap_hours: f64,
}

impl Default for CicParams {
    fn default() -> Self {
        let table = |base, per_hour, per_kwh, slope| CicSectorTable {
            base,
            per_hour,
            per_kwh,
            slope,
        };
        Self {
            placeholder: true,
            residential: table(3.0, 1.0, 0.5, 0.5),
            small_ci: table(300.0, 150.0, 2.0, 50.0),
            medium_ci: table(3000.0, 1500.0, 5.0, 500.0),
            large_ci: table(10_000.0, 6000.0, 10.0, 2000.0),
            season_multiplier: 1.0,
            industry_multiplier: BTreeMap::new(),
            income_multiplier: [
                (IncomeBracket::Low, 0.8),
                (IncomeBracket::Median, 1.0),
                (IncomeBracket::High, 1.3),
            ]
            .into_iter()
            .collect(),
            backup_discount: 0.8,
            duration_cap_hours: 16.0,
        }
    }
}

impl CicParams {
    pub fn table(&self, sector: Sector) -> &CicSectorTable {
        match sector {
            Sector::Residential => &self.residential,
            Sector::SmallCi => &self.small_ci,
            Sector::MediumCi => &self.medium_ci,
            Sector::LargeCi => &self.large_ci,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.residential.validate("residential")?;
        self.small_ci.validate("small_ci")?;
        self.medium_ci.validate("medium_ci")?;
        self.large_ci.validate("large_ci")?;
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let multipliers = self.industry_multiplier.values().chain(self.income_multiplier.values());
        if !ok(self.season_multiplier) || !ok(self.backup_discount) || !multipliers.copied().all(ok) {
            return Err(Error::Config("cic multipliers must be finite and >= 0".into()));
        }
        if !(self.duration_cap_hours >= 0.0) {
            return Err(Error::Config("cic.duration_cap_hours must be >= 0".into()));
        }
        Ok(())
    }
}

pub fn default_wages() -> BTreeMap<BuildingKind, f64> {
    use BuildingKind::*;
    [
        (SingleFamily, 45.51),
        (MultiFamily, 45.51),
        (MobileHome, 45.51),
        (Office, 37.88),
        (WarehouseStorage, 15.49),
        (BigBox, 29.36),
        (StripMall, 22.38),
        (Education, 27.95),
        (FoodService, 13.4),
        (FoodSales, 15.64),
        (Lodging, 13.44),
        (Healthcare, 43.15),
        (LowOccupancy, 21.41),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValuationParams {
    /// USD per death.
    pub vsl: f64,
    pub medical_insured: ByCondition<CostRange>,
    pub medical_uninsured: ByCondition<CostRange>,
    /// P_mort at which medical severity saturates.
    pub medical_severity_ceiling: f64,
    /// Cost of a home-recovered injury as a fraction of the insured minimum.
    pub home_recovery_fraction: f64,
    pub repair_insured: CostRange,
    pub repair_uninsured: CostRange,
    pub beta_wi: BetaWi,
    /// USD per hour by building kind.
    pub wages: BTreeMap<BuildingKind, f64>,
    pub working_hours: WorkingHours,
    pub cic: CicParams,
    pub acknowledge_placeholder_cic: bool,
    pub histogram_bins: usize,
}

impl Default for ValuationParams {
    fn default() -> Self {
        let insured = CostRange::new(1014.0, 6282.0);
        let uninsured = CostRange::new(3162.0, 15348.0);
        Self {
            vsl: VSL_FEMA,
            medical_insured: ByCondition {
                cardiac: insured,
                respiratory: insured,
                hypothermia_frost: insured,
            },
            medical_uninsured: ByCondition {
                cardiac: uninsured,
                respiratory: uninsured,
                hypothermia_frost: uninsured,
            },
            medical_severity_ceiling: 0.5,
            home_recovery_fraction: 0.25,
            repair_insured: CostRange::new(500.0, 2000.0),
            repair_uninsured: CostRange::new(600.0, 5000.0),
            beta_wi: BetaWi::AUTO,
            wages: default_wages(),
            working_hours: WorkingHours::default(),
            cic: CicParams::default(),
            acknowledge_placeholder_cic: false,
            histogram_bins: 50,
        }
    }
}

impl ValuationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.vsl > 0.0 && self.vsl.is_finite()) {
            return Err(Error::Config(format!("vsl must be > 0, got {}", self.vsl)));
        }
        for (name, table) in [("medical_insured", &self.medical_insured), ("medical_uninsured", &self.medical_uninsured)] {
            table.cardiac.validate(name)?;
            table.respiratory.validate(name)?;
            table.hypothermia_frost.validate(name)?;
        }
        self.repair_insured.validate("repair_insured")?;
        self.repair_uninsured.validate("repair_uninsured")?;
        if !(self.medical_severity_ceiling > 0.0) {
            return Err(Error::Config("medical_severity_ceiling must be > 0".into()));
        }
        if !(self.home_recovery_fraction >= 0.0 && self.home_recovery_fraction.is_finite()) {
            return Err(Error::Config("home_recovery_fraction must be >= 0".into()));
        }
        if let Some(beta) = self.beta_wi.fixed() {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::Config(format!("beta_wi must be > 0, got {beta}")));
            }
        }
        if let Some((kind, w)) = self.wages.iter().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Config(format!("wage for {} must be >= 0, got {w}", kind.as_str())));
        }
        for (name, [from, to]) in [
            ("residential", self.working_hours.residential),
            ("commercial", self.working_hours.commercial),
        ] {
            if !(0.0 <= from && from <= to && to <= 24.0) {
                return Err(Error::Config(format!("working_hours.{name} must satisfy 0 <= from <= to <= 24")));
            }
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram_bins must be >= 1".into()));
        }
        self.cic.validate()?;
        if self.cic.placeholder && !self.acknowledge_placeholder_cic {
            return Err(Error::Config(
                "the interruption-cost tables are uncalibrated placeholders; supply calibrated tables \
                 (cic.placeholder = false) or set acknowledge_placeholder_cic = true"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn wage(&self, kind: BuildingKind) -> f64 {
        self.wages.get(&kind).copied().unwrap_or(0.0)
    }
}
