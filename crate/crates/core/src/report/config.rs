use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hazard::HazardConfig;
use crate::outage::{AvailabilitySeries, EventWindow, Scenario, ShedSpec};
use crate::population::PopulationSpec;
use crate::thermal::ThermalParams;
use crate::valuation::ValuationParams;

/// Where the building population comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationSource {
    Synthesize {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        spec: PopulationSpec,
    },
    File(PathBuf),
}

impl Default for PopulationSource {
    fn default() -> Self {
        PopulationSource::Synthesize {
            seed: 0,
            spec: PopulationSpec::default(),
        }
    }
}

/// Supply availability for rolling outages: explicit `(slot, fraction)`
/// pairs, or one constant fraction for every slot of the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AvailabilityConfig {
    pub slot_hours: f64,
    pub slots: Vec<(usize, f64)>,
    pub constant: Option<f64>,
}

impl Default for AvailabilityConfig {
    fn default() -> Self {
        Self {
            slot_hours: 1.0,
            slots: Vec::new(),
            constant: None,
        }
    }
}

impl AvailabilityConfig {
    pub fn resolve(&self, window: &EventWindow) -> Result<AvailabilitySeries> {
        match (self.constant, self.slots.is_empty()) {
            (Some(f), true) => {
                let slots = (window.hours() / self.slot_hours).ceil() as usize;
                AvailabilitySeries::constant(self.slot_hours, f, slots)
            }
            (None, false) => AvailabilitySeries::from_pairs(self.slot_hours, &self.slots),
            (Some(_), false) => Err(Error::Config("availability: give either slots or constant, not both".into())),
            (None, true) => Err(Error::Config("availability: no slots and no constant given".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutageConfig {
    /// Seed for isolation and shed sampling, kept apart from the trial seed
    /// so that the scenarios of one study share one fault.
    pub seed: u64,
    pub fault_fraction: f64,
    pub shed: ShedSpec,
    pub n_groups: usize,
    pub availability: AvailabilityConfig,
}

impl Default for OutageConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            fault_fraction: 0.034,
            shed: ShedSpec::default(),
            n_groups: 3,
            availability: AvailabilityConfig {
                constant: Some(1.0 / 3.0),
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub population: PopulationSource,
    pub weather: PathBuf,
    pub window: EventWindow,
    /// Simulation step in seconds.
    #[serde(default = "default_dt")]
    pub dt: i64,
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default)]
    pub outage: OutageConfig,
    #[serde(default)]
    pub thermal: ThermalParams,
    #[serde(default)]
    pub hazard: HazardConfig,
    #[serde(default)]
    pub valuation: ValuationParams,
    #[serde(default = "default_trials")]
    pub n_trials: u64,
    /// Monte-Carlo master seed.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_dt() -> i64 {
    300
}

fn default_scenario() -> Scenario {
    Scenario::Base
}

fn default_trials() -> u64 {
    1000
}

impl ScenarioConfig {
    /// Parses JSON text; errors name the offending field path.
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::ingestion(
                source,
                Some(inner.line() as u64),
                (path != ".").then_some(path.as_str()),
                inner.to_string(),
            )
        })
    }

    /// Reads a config file and makes its relative paths relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Input {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.weather);
        if let PopulationSource::File(p) = &mut self.population {
            join(p);
        }
        if let Some(out) = &mut self.output_dir {
            join(out);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be >= 1".into()));
        }
        self.window.steps(self.dt)?;
        if self.outage.n_groups < 2 {
            return Err(Error::Config("outage.n_groups must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.outage.fault_fraction) {
            return Err(Error::Config(format!("outage.fault_fraction {} outside [0, 1)", self.outage.fault_fraction)));
        }
        self.outage.availability.resolve(&self.window)?;
        self.thermal.validate()?;
        self.valuation.validate()?;
        if let PopulationSource::Synthesize { spec, .. } = &self.population {
            spec.validate()?;
        }
        Ok(())
    }

    /// Materialized JSON (every default spelled out).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 over the materialized config with file paths replaced by the
    /// digests of their contents. Output location and thread count do not
    /// affect results and are left out.
    pub fn hash(&self, input_digests: &[(String, String)]) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        canonical.threads = 0;
        canonical.weather = PathBuf::new();
        if let PopulationSource::File(p) = &mut canonical.population {
            *p = PathBuf::new();
        }
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&canonical).expect("config serializes"));
        for (role, digest) in input_digests {
            h.update(role.as_bytes());
            h.update(digest.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Input {
        path: path.to_owned(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}
