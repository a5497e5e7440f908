//! Per-occupant probabilistic outcome tree: at-risk event, health condition,
//! healthcare access, survival, insurance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{TruncNormalParams, TruncatedNormal};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Cardiac,
    Respiratory,
    HypothermiaFrost,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Unaffected,
    InjuredRecoveredHome,
    InjuredRecoveredHospital,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupantOutcome {
    pub status: OutcomeStatus,
    pub condition: Condition,
    pub accessed_healthcare: bool,
    pub insured: bool,
}

impl OccupantOutcome {
    pub const UNAFFECTED: Self = Self {
        status: OutcomeStatus::Unaffected,
        condition: Condition::None,
        accessed_healthcare: false,
        insured: false,
    };

    pub fn is_injured(&self) -> bool {
        matches!(
            self.status,
            OutcomeStatus::InjuredRecoveredHome | OutcomeStatus::InjuredRecoveredHospital
        )
    }

    pub fn is_death(&self) -> bool {
        self.status == OutcomeStatus::Death
    }
}

/// One value per health condition that can follow an at-risk event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ByCondition<T> {
    pub cardiac: T,
    pub respiratory: T,
    pub hypothermia_frost: T,
}

impl<T: Copy> ByCondition<T> {
    /// Panics on [`Condition::None`]; only at-risk outcomes carry a condition.
    pub fn get(&self, condition: Condition) -> T {
        match condition {
            Condition::Cardiac => self.cardiac,
            Condition::Respiratory => self.respiratory,
            Condition::HypothermiaFrost => self.hypothermia_frost,
            Condition::None => panic!("no per-condition value for Condition::None"),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(T) -> U) -> ByCondition<U> {
        ByCondition {
            cardiac: f(self.cardiac),
            respiratory: f(self.respiratory),
            hypothermia_frost: f(self.hypothermia_frost),
        }
    }
}

/// Branch probabilities for one occupant, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupantProbs {
    pub p_pre_cardiac: f64,
    pub p_pre_respiratory: f64,
    pub p_access: f64,
    pub hospital_survival: ByCondition<f64>,
    pub home_survival: ByCondition<f64>,
    pub p_health_insurance: f64,
}

/// Percent-valued distributions for the occupant branch probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HealthDistributions {
    pub pre_existing_cardiac: TruncNormalParams,
    pub pre_existing_respiratory: TruncNormalParams,
    pub health_insurance: TruncNormalParams,
    pub healthcare_access: TruncNormalParams,
    pub hospital_survival: ByCondition<TruncNormalParams>,
    pub home_survival: ByCondition<TruncNormalParams>,
    pub home_insurance: TruncNormalParams,
}

impl Default for HealthDistributions {
    fn default() -> Self {
        let pct = TruncNormalParams::percent;
        Self {
            pre_existing_cardiac: pct(5.1, 1.0),
            pre_existing_respiratory: pct(7.3, 1.0),
            health_insurance: pct(79.4, 3.0),
            healthcare_access: pct(89.4, 3.0),
            hospital_survival: ByCondition {
                cardiac: pct(89.3, 1.0),
                respiratory: pct(83.0, 1.0),
                hypothermia_frost: pct(91.9, 3.0),
            },
            home_survival: ByCondition {
                cardiac: pct(19.3, 1.0),
                respiratory: pct(13.0, 1.0),
                hypothermia_frost: pct(78.9, 1.0),
            },
            home_insurance: pct(95.9, 3.0),
        }
    }
}

impl HealthDistributions {
    /// Every distribution, labeled, for validation and reporting.
    pub fn labeled(&self) -> Vec<(&'static str, TruncNormalParams)> {
        vec![
            ("pre_existing_cardiac", self.pre_existing_cardiac),
            ("pre_existing_respiratory", self.pre_existing_respiratory),
            ("health_insurance", self.health_insurance),
            ("healthcare_access", self.healthcare_access),
            ("hospital_survival.cardiac", self.hospital_survival.cardiac),
            ("hospital_survival.respiratory", self.hospital_survival.respiratory),
            ("hospital_survival.hypothermia_frost", self.hospital_survival.hypothermia_frost),
            ("home_survival.cardiac", self.home_survival.cardiac),
            ("home_survival.respiratory", self.home_survival.respiratory),
            ("home_survival.hypothermia_frost", self.home_survival.hypothermia_frost),
            ("home_insurance", self.home_insurance),
        ]
    }

    pub fn build(&self) -> Result<OccupantSampler> {
        let tn = |p: TruncNormalParams, name: &str| {
            TruncatedNormal::new(p).map_err(|e| crate::Error::Config(format!("{name}: {e}")))
        };
        let by = |b: &ByCondition<TruncNormalParams>, name: &str| -> Result<ByCondition<TruncatedNormal>> {
            Ok(ByCondition {
                cardiac: tn(b.cardiac, name)?,
                respiratory: tn(b.respiratory, name)?,
                hypothermia_frost: tn(b.hypothermia_frost, name)?,
            })
        };
        for (name, p) in self.labeled() {
            if p.min < 0.0 || p.max > 100.0 {
                return Err(crate::Error::Config(format!(
                    "{name}: percent window [{}, {}] must lie within [0, 100]",
                    p.min, p.max
                )));
            }
        }
        Ok(OccupantSampler {
            pre_cardiac: tn(self.pre_existing_cardiac, "pre_existing_cardiac")?,
            pre_respiratory: tn(self.pre_existing_respiratory, "pre_existing_respiratory")?,
            access: tn(self.healthcare_access, "healthcare_access")?,
            hospital_survival: by(&self.hospital_survival, "hospital_survival")?,
            home_survival: by(&self.home_survival, "home_survival")?,
            health_insurance: tn(self.health_insurance, "health_insurance")?,
            home_insurance: tn(self.home_insurance, "home_insurance")?,
        })
    }
}

/// Validated samplers for [`HealthDistributions`].
#[derive(Debug, Clone)]
pub struct OccupantSampler {
    pub pre_cardiac: TruncatedNormal,
    pub pre_respiratory: TruncatedNormal,
    pub access: TruncatedNormal,
    pub hospital_survival: ByCondition<TruncatedNormal>,
    pub home_survival: ByCondition<TruncatedNormal>,
    pub health_insurance: TruncatedNormal,
    pub home_insurance: TruncatedNormal,
}

impl OccupantSampler {
    /// Draws a fresh set of branch probabilities (percent draws / 100).
    pub fn sample_probs<R: Rng + ?Sized>(&self, rng: &mut R) -> OccupantProbs {
        let mut p = |d: &TruncatedNormal| d.sample(rng) / 100.0;
        OccupantProbs {
            p_pre_cardiac: p(&self.pre_cardiac),
            p_pre_respiratory: p(&self.pre_respiratory),
            p_access: p(&self.access),
            hospital_survival: ByCondition {
                cardiac: p(&self.hospital_survival.cardiac),
                respiratory: p(&self.hospital_survival.respiratory),
                hypothermia_frost: p(&self.hospital_survival.hypothermia_frost),
            },
            home_survival: ByCondition {
                cardiac: p(&self.home_survival.cardiac),
                respiratory: p(&self.home_survival.respiratory),
                hypothermia_frost: p(&self.home_survival.hypothermia_frost),
            },
            p_health_insurance: p(&self.health_insurance),
        }
    }

    /// Full occupant draw. Branch probabilities are only sampled once the
    /// occupant is at risk, so unaffected occupants cost one uniform.
    pub fn simulate<R: Rng + ?Sized>(&self, p_mort: f64, rng: &mut R) -> OccupantOutcome {
        if !bernoulli(p_mort, rng) {
            return OccupantOutcome::UNAFFECTED;
        }
        let probs = self.sample_probs(rng);
        resolve_at_risk(&probs, rng)
    }
}

/// Outcome for one occupant with fixed branch probabilities.
pub fn simulate_occupant_outcome<R: Rng + ?Sized>(
    p_mort: f64,
    probs: &OccupantProbs,
    rng: &mut R,
) -> OccupantOutcome {
    if !bernoulli(p_mort, rng) {
        return OccupantOutcome::UNAFFECTED;
    }
    resolve_at_risk(probs, rng)
}

fn resolve_at_risk<R: Rng + ?Sized>(probs: &OccupantProbs, rng: &mut R) -> OccupantOutcome {
    let condition = if bernoulli(probs.p_pre_cardiac, rng) {
        Condition::Cardiac
    } else {
        // conditional probability so the respiratory marginal is p_pre_respiratory
        let rest = 1.0 - probs.p_pre_cardiac;
        let p_resp = if rest > 0.0 {
            probs.p_pre_respiratory / rest
        } else {
            0.0
        };
        if bernoulli(p_resp, rng) {
            Condition::Respiratory
        } else {
            Condition::HypothermiaFrost
        }
    };
    let accessed_healthcare = bernoulli(probs.p_access, rng);
    let p_survive = if accessed_healthcare {
        probs.hospital_survival.get(condition)
    } else {
        probs.home_survival.get(condition)
    };
    let survived = bernoulli(p_survive, rng);
    let insured = bernoulli(probs.p_health_insurance, rng);
    let status = match (survived, accessed_healthcare) {
        (false, _) => OutcomeStatus::Death,
        (true, true) => OutcomeStatus::InjuredRecoveredHospital,
        (true, false) => OutcomeStatus::InjuredRecoveredHome,
    };
    OccupantOutcome {
        status,
        condition,
        accessed_healthcare,
        insured,
    }
}

#[inline]
pub(crate) fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}
