//! Single-zone equivalent thermal parameter (ETP) building model.
//!
//! Air and structure share one heat capacity `C` (J/°C) coupled to outdoor
//! air through the envelope conductance `UA` (W/°C):
//!
//! ```text
//! C dT/dt = UA (T_out - T) + Q
//! ```
//!
//! With `T_out` and `Q` held constant over a step the ODE is solved exactly,
//! so the integrator is stable at any step size.

use std::io::Write;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Building, HeatingFuel};
use crate::weather::{format_timestamp, WeatherSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalParams {
    /// Plug-load and occupant heat in occupied residential buildings (W).
    pub internal_gain_residential_w: f64,
    pub internal_gain_commercial_w: f64,
    /// Electric draw of a gas furnace's blower while firing (kW).
    pub gas_blower_kw: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        Self {
            internal_gain_residential_w: 200.0,
            internal_gain_commercial_w: 0.0,
            gas_blower_kw: 0.5,
        }
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(self.internal_gain_residential_w) && ok(self.internal_gain_commercial_w) && ok(self.gas_blower_kw)) {
            return Err(Error::Config("thermal gains and blower draw must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn internal_gain_w(&self, building: &Building) -> f64 {
        if building.n_occupants == 0 {
            0.0
        } else if building.is_residential() {
            self.internal_gain_residential_w
        } else {
            self.internal_gain_commercial_w
        }
    }

    /// Electric draw (kW) of the heating plant while running.
    pub fn rated_electric_kw(&self, building: &Building) -> f64 {
        match building.heating_fuel {
            HeatingFuel::Electric => building.hvac_heat_capacity / 1000.0,
            HeatingFuel::GasWithElectricBlower => self.gas_blower_kw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    /// °C
    pub t_in: f64,
    pub hvac_on: bool,
    /// Heat delivered by the HVAC so far (kWh).
    pub heating_energy: f64,
}

/// Per-building time series over the event window. Entry `i` describes the
/// step starting at `start + i·dt`; `t_in[i]` is the temperature at that
/// instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureTrace {
    pub building_id: u32,
    pub start: DateTime<Utc>,
    /// Seconds per step.
    pub dt: i64,
    pub t_in: Vec<f64>,
    pub powered: Vec<bool>,
    pub hvac_electric_kw: Vec<f64>,
}

impl ExposureTrace {
    pub fn len(&self) -> usize {
        self.t_in.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_in.is_empty()
    }

    pub fn mean_t_in(&self) -> f64 {
        self.t_in.iter().sum::<f64>() / self.t_in.len() as f64
    }

    pub fn min_t_in(&self) -> f64 {
        self.t_in.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Indoor temperature after `dt` seconds with constant outdoor temperature
/// and heat input.
pub fn step_indoor_temp(
    state: &ThermalState,
    building: &Building,
    t_out: f64,
    hvac_heat_w: f64,
    internal_gain_w: f64,
    dt: f64,
) -> f64 {
    let t_eq = t_out + (hvac_heat_w + internal_gain_w) / building.ua;
    let decay = (-building.ua * dt / building.thermal_mass).exp();
    t_eq + (state.t_in - t_eq) * decay
}

/// Hysteresis thermostat. `was_on` is the state carried from the previous
/// step. Returns whether the heating runs and its electric draw in kW.
pub fn hvac_thermostat(
    t_in: f64,
    setpoint: f64,
    deadband: f64,
    powered: bool,
    was_on: bool,
    rated_kw: f64,
) -> (bool, f64) {
    if !powered {
        return (false, 0.0);
    }
    let on = if t_in < setpoint - deadband / 2.0 {
        true
    } else if t_in > setpoint + deadband / 2.0 {
        false
    } else {
        was_on
    };
    (on, if on { rated_kw } else { 0.0 })
}

/// Runs the building through the weather series under the given power
/// schedule (one entry per weather step). Starts at the setpoint with the
/// heating off.
pub fn simulate_building(
    building: &Building,
    weather: &WeatherSeries,
    schedule: &[bool],
    params: &ThermalParams,
) -> Result<ExposureTrace> {
    if schedule.len() != weather.len() {
        return Err(Error::Mismatch(format!(
            "building {}: schedule has {} steps, weather has {}",
            building.id,
            schedule.len(),
            weather.len()
        )));
    }
    if !(building.ua > 0.0 && building.thermal_mass > 0.0) {
        return Err(Error::Config(format!("building {}: ua and thermal_mass must be > 0", building.id)));
    }
    let n = weather.len();
    let dt = weather.dt as f64;
    let gain = params.internal_gain_w(building);
    let rated_kw = params.rated_electric_kw(building);

    let mut state = ThermalState {
        t_in: building.setpoint,
        hvac_on: false,
        heating_energy: 0.0,
    };
    let mut t_in = Vec::with_capacity(n);
    let mut kw = Vec::with_capacity(n);
    for (i, &powered) in schedule.iter().enumerate() {
        let (on, draw) = hvac_thermostat(
            state.t_in,
            building.setpoint,
            building.deadband,
            powered,
            state.hvac_on,
            rated_kw,
        );
        let heat_w = if on { building.hvac_heat_capacity } else { 0.0 };
        t_in.push(state.t_in);
        kw.push(draw);
        state.hvac_on = on;
        state.t_in = step_indoor_temp(&state, building, weather.t_out[i], heat_w, gain, dt);
        state.heating_energy += heat_w * dt / 3.6e6;
    }
    Ok(ExposureTrace {
        building_id: building.id,
        start: weather.start,
        dt: weather.dt,
        t_in,
        powered: schedule.to_vec(),
        hvac_electric_kw: kw,
    })
}

pub const EXPOSURE_COLUMNS: [&str; 5] = ["building_id", "timestamp", "t_in_c", "powered", "hvac_kw"];

/// Writes traces in long format, one row per building and step.
pub fn write_exposure_csv<W: Write>(traces: &[ExposureTrace], writer: W) -> Result<()> {
    let wrap = |e: csv::Error| Error::Runtime(format!("exposure CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EXPOSURE_COLUMNS).map_err(wrap)?;
    let Some(first) = traces.first() else {
        w.flush().map_err(|e| Error::Runtime(e.to_string()))?;
        return Ok(());
    };
    // all traces share one time grid in practice; format timestamps once
    let n = traces.iter().map(ExposureTrace::len).max().unwrap_or(0);
    let stamps: Vec<String> = (0..n)
        .map(|i| format_timestamp(first.start + Duration::seconds(first.dt * i as i64)))
        .collect();
    for trace in traces {
        let id = trace.building_id.to_string();
        let same_grid = trace.start == first.start && trace.dt == first.dt;
        for i in 0..trace.len() {
            let stamp = if same_grid {
                stamps[i].clone()
            } else {
                format_timestamp(trace.start + Duration::seconds(trace.dt * i as i64))
            };
            w.write_record([
                id.as_str(),
                stamp.as_str(),
                &trace.t_in[i].to_string(),
                if trace.powered[i] { "true" } else { "false" },
                &trace.hvac_electric_kw[i].to_string(),
            ])
            .map_err(wrap)?;
        }
    }
    w.flush().map_err(|e| Error::Runtime(format!("exposure CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{BuildingKind, Insulation, IncomeBracket, Sector};
    use chrono::TimeZone;

    fn house(ua: f64, mass: f64) -> Building {
        Building {
            id: 7,
            kind: BuildingKind::SingleFamily,
            sector: Sector::Residential,
            insulation: Insulation::Average,
            heating_fuel: HeatingFuel::Electric,
            floor_area: 150.0,
            ua,
            thermal_mass: mass,
            hvac_heat_capacity: ua * 35.0 * 1.5,
            setpoint: 20.0,
            deadband: 1.0,
            n_occupants: 2,
            n_workers: 1,
            job_requires_power: true,
            avg_annual_kwh: 11_000.0,
            annual_income_bracket: Some(IncomeBracket::Median),
            backup: false,
        }
    }

    fn weather(t_out: Vec<f64>, dt: i64) -> WeatherSeries {
        let n = t_out.len();
        let start = Utc.with_ymd_and_hms(2021, 2, 15, 0, 0, 0).unwrap();
        WeatherSeries::new(start, dt, t_out, vec![80.0; n]).unwrap()
    }

    fn state(t_in: f64) -> ThermalState {
        ThermalState {
            t_in,
            hvac_on: false,
            heating_energy: 0.0,
        }
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let b = house(250.0, 3e7);
        assert_eq!(step_indoor_temp(&state(5.0), &b, 5.0, 0.0, 0.0, 300.0), 5.0);
    }

    #[test]
    fn half_life_step() {
        let b = house(250.0, 3e7);
        let dt = std::f64::consts::LN_2 * b.thermal_mass / b.ua;
        let t = step_indoor_temp(&state(20.0), &b, 0.0, 0.0, 0.0, dt);
        assert!((t - 10.0).abs() < 1e-12);
    }

    #[test]
    fn thermostat_gating_and_memory() {
        assert_eq!(hvac_thermostat(-30.0, 20.0, 1.0, false, true, 12.0), (false, 0.0));
        assert_eq!(hvac_thermostat(10.0, 20.0, 1.0, true, false, 12.0), (true, 12.0));
        assert_eq!(hvac_thermostat(20.2, 20.0, 1.0, true, true, 12.0), (true, 12.0));
        assert_eq!(hvac_thermostat(20.2, 20.0, 1.0, true, false, 12.0), (false, 0.0));
        assert_eq!(hvac_thermostat(20.6, 20.0, 1.0, true, true, 12.0), (false, 0.0));
    }

    #[test]
    fn gas_heat_draws_only_the_blower() {
        let mut b = house(250.0, 3e7);
        b.heating_fuel = HeatingFuel::GasWithElectricBlower;
        let w = weather(vec![-10.0; 288], 300);
        let trace = simulate_building(&b, &w, &vec![true; 288], &ThermalParams::default()).unwrap();
        assert!(trace.hvac_electric_kw.iter().all(|&kw| kw == 0.0 || kw == 0.5));
        assert!(trace.hvac_electric_kw.contains(&0.5));
    }

    #[test]
    fn powered_trace_holds_the_band() {
        let b = house(1.7 * 160.0, 200e3 * 160.0);
        let w = weather((0..1152).map(|i| -10.0 + 5.0 * (i as f64 / 40.0).sin()).collect(), 300);
        let trace = simulate_building(&b, &w, &vec![true; 1152], &ThermalParams::default()).unwrap();
        for &t in &trace.t_in {
            assert!((19.3..=20.7).contains(&t), "{t}");
        }
    }

    #[test]
    fn unpowered_no_gain_decays_monotonically() {
        let b = house(300.0, 3e7);
        let w = weather(vec![-5.0; 500], 300);
        let params = ThermalParams {
            internal_gain_residential_w: 0.0,
            ..Default::default()
        };
        let trace = simulate_building(&b, &w, &vec![false; 500], &params).unwrap();
        assert!(trace.t_in.windows(2).all(|p| p[1] < p[0] && p[1] > -5.0));
        assert!(trace.hvac_electric_kw.iter().all(|&kw| kw == 0.0));
    }

    #[test]
    fn schedule_length_mismatch() {
        let b = house(300.0, 3e7);
        let w = weather(vec![0.0; 10], 300);
        let err = simulate_building(&b, &w, &[true; 9], &ThermalParams::default()).unwrap_err();
        assert!(matches!(err, Error::Mismatch(_)));
    }

    #[test]
    fn exposure_csv_layout() {
        let b = house(300.0, 3e7);
        let w = weather(vec![0.0; 3], 300);
        let trace = simulate_building(&b, &w, &[true, false, false], &ThermalParams::default()).unwrap();
        let mut buf = Vec::new();
        write_exposure_csv(&[trace], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "building_id,timestamp,t_in_c,powered,hvac_kw");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("7,2021-02-15T00:00:00Z,20,true,"));
        assert!(lines[2].starts_with("7,2021-02-15T00:05:00Z,"));
        assert!(lines[3].ends_with(",false,0"));
    }
}
