use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::weather::{uri_like_weather, write_weather_csv};

pub const DEMO_CONFIG_FILE: &str = "config.json";
pub const DEMO_WEATHER_FILE: &str = "weather_uri_like.csv";

/// Demo study: the 1403-building feeder, four days of Uri-like cold, one
/// of three rolling groups powered in every hour of the event. The shed
/// fraction of the controlled outage is calibrated so that CO is the
/// costliest strategy, as in the observed event.
pub const DEMO_CONFIG: &str = r#"{
  "population": {
    "synthesize": {
      "seed": 1403
    }
  },
  "weather": "weather_uri_like.csv",
  "window": {
    "start": "2021-02-15T00:00:00Z",
    "end": "2021-02-19T00:00:00Z"
  },
  "dt": 300,
  "scenario": "base",
  "outage": {
    "seed": 2021,
    "fault_fraction": 0.034,
    "shed": {
      "residential_fraction": 0.15
    },
    "n_groups": 3,
    "availability": {
      "slot_hours": 1.0,
      "constant": 0.3333333333333333
    }
  },
  "valuation": {
    "acknowledge_placeholder_cic": true
  },
  "n_trials": 1000,
  "seed": 7
}
"#;

pub fn demo_weather_csv() -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_weather_csv(&uri_like_weather(), &mut buf)?;
    Ok(buf)
}

/// Writes the demo config and weather into `dir` and returns the config
/// path.
pub fn write_demo(dir: &Path) -> Result<PathBuf> {
    let out = |path: PathBuf, e| Error::Output { path, source: e };
    fs::create_dir_all(dir).map_err(|e| out(dir.to_owned(), e))?;
    let config = dir.join(DEMO_CONFIG_FILE);
    fs::write(&config, DEMO_CONFIG).map_err(|e| out(config.clone(), e))?;
    let weather = dir.join(DEMO_WEATHER_FILE);
    fs::write(&weather, demo_weather_csv()?).map_err(|e| out(weather.clone(), e))?;
    Ok(config)
}
