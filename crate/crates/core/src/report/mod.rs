//! Scenario configuration, run orchestration, output files and
//! cross-scenario comparison.

mod compare;
mod config;
mod demo;
mod exposure;
mod manifest;
mod run;

pub use compare::{compare_scenarios, compare_summaries, percent_change, percent_reduction, Comparison, COMPARE_METRICS};
pub use config::{file_digest, sha256_hex, AvailabilityConfig, OutageConfig, PopulationSource, ScenarioConfig};
pub use demo::{demo_weather_csv, write_demo, DEMO_CONFIG, DEMO_CONFIG_FILE, DEMO_WEATHER_FILE};
pub use exposure::{
    building_summaries, class_summaries, export_exposure, read_exposure_csv, BuildingExposureSummary, ClassSummary,
    BUILDING_EXPOSURE_FILE, CLASS_EXPOSURE_FILE,
};
pub use manifest::{InputDigest, OutputDigest, RunManifest};
pub use run::{
    read_summary, run_config_file, run_scenario, summary_means, write_buildings_csv, ExposureStats, RunOverrides,
    RunReport, RunSummary, ScenarioExposure, ScenarioRun, Study, RUN_FILES,
};
