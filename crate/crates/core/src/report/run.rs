use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{file_digest, sha256_hex, PopulationSource, ScenarioConfig};
use super::manifest::{InputDigest, OutputDigest, RunManifest};
use crate::error::{Error, Result};
use crate::hazard::HazardModels;
use crate::outage::{
    build_base_schedule, build_controlled_outage, build_rolling_outage, max_contiguous_off, resolve_shed_set,
    unpowered_hours, write_schedule_csv, PowerScheduleSet, Scenario,
};
use crate::population::{
    load_population, synthesize_population, validate_population, write_population_csv, Population,
};
use crate::thermal::{simulate_building, write_exposure_csv, ExposureTrace};
use crate::valuation::{
    prepare_scenario, run_monte_carlo, sum_winter_index, write_histogram_csv, write_trials_csv, CostDistribution,
    ScenarioBundle, Summary,
};
use crate::weather::{load_weather_csv, resample, slice_window, WeatherSeries};

/// Traces and schedules of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioExposure {
    pub schedules: PowerScheduleSet,
    /// In population order.
    pub traces: Vec<ExposureTrace>,
}

/// Loaded inputs of a study: one population, one weather window, one set of
/// hazard models, shared by all four scenarios. Traces are simulated on
/// first use and kept.
pub struct Study {
    pub config: ScenarioConfig,
    pub population: Population,
    pub population_csv: Vec<u8>,
    /// Weather over the event window at the simulation step.
    pub weather: WeatherSeries,
    pub hazard: HazardModels,
    pub inputs: Vec<InputDigest>,
    exposures: [OnceLock<ScenarioExposure>; 4],
    beta_wi: OnceLock<f64>,
}

impl Study {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let mut inputs = vec![InputDigest {
            role: "weather".into(),
            path: config.weather.clone(),
            sha256: file_digest(&config.weather)?,
        }];
        let population = match &config.population {
            PopulationSource::Synthesize { seed, spec } => synthesize_population(spec, *seed)?,
            PopulationSource::File(path) => {
                inputs.push(InputDigest {
                    role: "population".into(),
                    path: path.clone(),
                    sha256: file_digest(path)?,
                });
                load_population(path)?
            }
        };
        let violations = validate_population(&population);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().take(10).map(ToString::to_string).collect();
            return Err(Error::Config(format!(
                "population fails {} check(s): {}",
                violations.len(),
                list.join("; ")
            )));
        }
        let mut population_csv = Vec::new();
        write_population_csv(&population, &mut population_csv)?;

        let raw = load_weather_csv(&config.weather)?;
        let stepped = if raw.dt == config.dt {
            raw
        } else {
            resample(&raw, config.dt)?
        };
        let weather = slice_window(&stepped, config.window.start, config.window.end)?;
        let hazard = config.hazard.resolve()?;
        Ok(Self {
            config,
            population,
            population_csv,
            weather,
            hazard,
            inputs,
            exposures: Default::default(),
            beta_wi: OnceLock::new(),
        })
    }

    pub fn load(config_path: &Path) -> Result<Self> {
        Self::new(ScenarioConfig::load(config_path)?)
    }

    pub fn population_hash(&self) -> String {
        sha256_hex(&self.population_csv)
    }

    pub fn config_hash(&self) -> String {
        let digests: Vec<(String, String)> = self.inputs.iter().map(|d| (d.role.clone(), d.sha256.clone())).collect();
        self.config.hash(&digests)
    }

    pub fn schedules(&self, scenario: Scenario) -> Result<PowerScheduleSet> {
        let cfg = &self.config;
        let o = &cfg.outage;
        let (pop, window, dt) = (&self.population, cfg.window, cfg.dt);
        match scenario {
            Scenario::Base => build_base_schedule(pop, window, dt),
            Scenario::Co => {
                let shed = resolve_shed_set(pop, &o.shed, o.seed)?;
                build_controlled_outage(pop, window, dt, &shed, o.fault_fraction, o.seed)
            }
            Scenario::RoDi | Scenario::RoHi => {
                let availability = o.availability.resolve(&window)?;
                let hardened = scenario == Scenario::RoHi;
                build_rolling_outage(pop, window, dt, o.n_groups, &availability, hardened, o.fault_fraction, o.seed)
            }
        }
    }

    pub fn exposure(&self, scenario: Scenario) -> Result<&ScenarioExposure> {
        let cell = &self.exposures[scenario as usize];
        if let Some(e) = cell.get() {
            return Ok(e);
        }
        let schedules = self.schedules(scenario)?;
        schedules.validate(&self.population)?;
        let traces = self
            .population
            .buildings
            .par_iter()
            .map(|b| {
                let s = schedules.schedule(b.id).expect("validated schedule set");
                simulate_building(b, &self.weather, s, &self.config.thermal)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(cell.get_or_init(|| ScenarioExposure { schedules, traces }))
    }

    /// The configured β_WI, or the largest per-building accumulated Winter
    /// Index over all four scenarios.
    pub fn beta_wi(&self) -> Result<f64> {
        if let Some(beta) = self.config.valuation.beta_wi.fixed() {
            return Ok(beta);
        }
        if let Some(&b) = self.beta_wi.get() {
            return Ok(b);
        }
        let mut max = 0.0f64;
        for scenario in Scenario::ALL {
            let e = self.exposure(scenario)?;
            let wi = sum_winter_index(&e.traces, &self.weather.rh_out, &self.hazard.winter_index)?;
            max = wi.into_iter().fold(max, f64::max);
        }
        // a study that never freezes has nothing to normalize
        let beta = if max > 0.0 { max } else { 1.0 };
        Ok(*self.beta_wi.get_or_init(|| beta))
    }

    pub fn bundle(&self, scenario: Scenario) -> Result<ScenarioBundle> {
        let e = self.exposure(scenario)?;
        prepare_scenario(
            &self.population,
            &e.traces,
            &self.weather.rh_out,
            &self.hazard,
            &self.config.valuation,
            self.beta_wi()?,
        )
    }

    pub fn run(&self, scenario: Scenario, n_trials: u64, seed: u64, threads: usize) -> Result<ScenarioRun> {
        let bundle = self.bundle(scenario)?;
        let distribution = run_monte_carlo(&bundle, n_trials, seed, threads)?;
        Ok(ScenarioRun {
            scenario,
            bundle,
            distribution,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub bundle: ScenarioBundle,
    pub distribution: CostDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureStats {
    /// Mean over buildings of the per-building mean indoor temperature (°C).
    pub mean_t_in: f64,
    pub min_t_in: f64,
    pub unpowered_building_hours: f64,
    pub max_contiguous_off_hours: f64,
}

impl ExposureStats {
    pub fn of(traces: &[ExposureTrace]) -> Self {
        let n = traces.len().max(1) as f64;
        Self {
            mean_t_in: traces.iter().map(ExposureTrace::mean_t_in).sum::<f64>() / n,
            min_t_in: traces.iter().map(ExposureTrace::min_t_in).fold(f64::INFINITY, f64::min),
            unpowered_building_hours: traces.iter().map(|t| unpowered_hours(&t.powered, t.dt)).sum(),
            max_contiguous_off_hours: traces
                .iter()
                .map(|t| max_contiguous_off(&t.powered, t.dt))
                .fold(0.0, f64::max),
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub n_trials: u64,
    pub seed: u64,
    pub config_hash: String,
    pub population_hash: String,
    pub n_buildings: usize,
    pub n_occupants: u64,
    pub isolated_buildings: usize,
    pub beta_wi: f64,
    /// Occupant-weighted mean relative risk.
    pub mean_rr: f64,
    pub exposure: ExposureStats,
    pub stats: Summary,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub scenario: Option<Scenario>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunOverrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        if let Some(n) = self.n_trials {
            cfg.n_trials = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.output_dir {
            cfg.output_dir = Some(o.clone());
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
    }
}

/// Files written by [`run_scenario`], in manifest order.
pub const RUN_FILES: [&str; 8] = [
    "trials.csv",
    "summary.json",
    "histogram.csv",
    "buildings.csv",
    "exposure.csv",
    "schedules.csv",
    "population.csv",
    "config.json",
];

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub summary: RunSummary,
    pub manifest: RunManifest,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|source| Error::Output {
        path: path.to_owned(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Output {
        path: path.to_owned(),
        source,
    })
}

/// Full pipeline for the configured scenario, writing every artifact into
/// the output directory (default `out/<scenario>` next to the working
/// directory).
pub fn run_scenario(config: ScenarioConfig) -> Result<RunReport> {
    let clock = Instant::now();
    let started_at = chrono::Utc::now();
    let out = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(config.scenario.as_str()));
    let scenario = config.scenario;
    let (n_trials, seed, threads) = (config.n_trials, config.seed, config.threads);

    let study = Study::new(config)?;
    let run = study.run(scenario, n_trials, seed, threads)?;
    let exposure = study.exposure(scenario)?;

    fs::create_dir_all(&out).map_err(|source| Error::Output {
        path: out.clone(),
        source,
    })?;
    let summary = RunSummary {
        scenario,
        n_trials,
        seed,
        config_hash: study.config_hash(),
        population_hash: study.population_hash(),
        n_buildings: study.population.len(),
        n_occupants: study.population.total_occupants,
        isolated_buildings: exposure.schedules.isolated_ids.len(),
        beta_wi: run.bundle.beta_wi,
        mean_rr: run.bundle.mean_rr(),
        exposure: ExposureStats::of(&exposure.traces),
        stats: run.distribution.summary.clone(),
    };

    write_trials_csv(&run.distribution.trials, create(&out.join("trials.csv"))?)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Runtime(e.to_string()))?;
    write_bytes(&out.join("summary.json"), (json + "\n").as_bytes())?;
    write_histogram_csv(&run.distribution.histogram, create(&out.join("histogram.csv"))?)?;
    write_buildings_csv(&run.bundle, create(&out.join("buildings.csv"))?)?;
    write_exposure_csv(&exposure.traces, create(&out.join("exposure.csv"))?)?;
    write_schedule_csv(&exposure.schedules, create(&out.join("schedules.csv"))?)?;
    write_bytes(&out.join("population.csv"), &study.population_csv)?;
    // where the files land does not change what they contain
    let mut materialized = study.config.clone();
    materialized.output_dir = None;
    materialized.threads = 0;
    write_bytes(&out.join("config.json"), (materialized.to_json() + "\n").as_bytes())?;

    let outputs = RUN_FILES
        .iter()
        .map(|f| {
            Ok(OutputDigest {
                file: (*f).to_string(),
                sha256: file_digest(&out.join(f))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: summary.config_hash.clone(),
        scenario,
        seed,
        n_trials,
        threads,
        started_at,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        inputs: study.inputs.clone(),
        rr_fit: study.hazard.rr.provenance.clone(),
        productivity_fit: study.hazard.productivity.provenance.clone(),
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Runtime(e.to_string()))?;
    write_bytes(&out.join("manifest.json"), (json + "\n").as_bytes())?;
    Ok(RunReport {
        output_dir: out,
        summary,
        manifest,
    })
}

pub fn run_config_file(path: &Path, overrides: &RunOverrides) -> Result<RunReport> {
    let mut cfg = ScenarioConfig::load(path)?;
    overrides.apply(&mut cfg);
    run_scenario(cfg)
}

/// Per-building trial-invariant quantities.
pub fn write_buildings_csv<W: std::io::Write>(bundle: &ScenarioBundle, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for b in &bundle.buildings {
        w.serialize(b).map_err(|e| Error::Runtime(format!("buildings CSV: {e}")))?;
    }
    w.flush().map_err(|e| Error::Runtime(format!("buildings CSV: {e}")))
}

pub fn read_summary(dir: &Path) -> Result<RunSummary> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(|source| Error::Input {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Error::ingestion(path.display().to_string(), Some(e.line() as u64), None, e.to_string())
    })
}

/// Mean of each stats block keyed by metric name, for quick lookups.
pub fn summary_means(s: &RunSummary) -> BTreeMap<&'static str, f64> {
    let st = &s.stats;
    [
        ("c_vsl", st.c_vsl.mean),
        ("c_medical", st.c_medical.mean),
        ("c_prod", st.c_prod.mean),
        ("c_build", st.c_build.mean),
        ("c_cic", st.c_cic.mean),
        ("nei", st.nei.mean),
        ("total", st.total.mean),
        ("mean_rr", s.mean_rr),
        ("n_death", st.n_death.mean),
        ("n_injured", st.n_injured.mean),
    ]
    .into_iter()
    .collect()
}
