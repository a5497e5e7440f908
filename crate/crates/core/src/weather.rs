//! Outdoor weather series: ingestion, windowing and resampling.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, SecondsFormat, TimeZone, Utc};

use crate::error::{Error, Result};

/// Allowed deviation from uniform spacing when reading a CSV, in seconds.
pub const SPACING_JITTER_S: i64 = 1;

pub const WEATHER_COLUMNS: [&str; 3] = ["timestamp", "temp_c", "rh_pct"];

/// Uniformly sampled outdoor temperature and relative humidity. Sample `i`
/// belongs to time `start + i·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub start: DateTime<Utc>,
    /// Seconds per step.
    pub dt: i64,
    /// °C
    pub t_out: Vec<f64>,
    /// %
    pub rh_out: Vec<f64>,
}

impl WeatherSeries {
    pub fn new(start: DateTime<Utc>, dt: i64, t_out: Vec<f64>, rh_out: Vec<f64>) -> Result<Self> {
        let s = Self {
            start,
            dt,
            t_out,
            rh_out,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0 {
            return Err(Error::Config(format!("weather dt must be > 0, got {}", self.dt)));
        }
        if self.t_out.len() != self.rh_out.len() {
            return Err(Error::Mismatch(format!(
                "weather: {} temperatures vs {} humidity samples",
                self.t_out.len(),
                self.rh_out.len()
            )));
        }
        if self.t_out.len() < 2 {
            return Err(Error::Range("weather series needs at least 2 samples".into()));
        }
        if let Some(t) = self.t_out.iter().find(|t| !t.is_finite()) {
            return Err(Error::Range(format!("non-finite temperature {t}")));
        }
        if let Some(rh) = self.rh_out.iter().find(|rh| !(0.0..=100.0).contains(*rh)) {
            return Err(Error::Range(format!("relative humidity {rh} outside [0, 100]")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t_out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_out.is_empty()
    }

    /// Exclusive end of the span covered by the samples: `start + len·dt`.
    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp(self.len())
    }

    pub fn timestamp(&self, step: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(self.dt * step as i64)
    }
}

/// Parses a timestamp as RFC 3339, or as a naive `YYYY-MM-DD[T ]HH:MM[:SS]`
/// taken to be UTC.
pub fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(text, fmt).ok())
        .map(|naive| Utc.from_utc_datetime(&naive))
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn read_weather_csv<R: Read>(reader: R, source: &str) -> Result<WeatherSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ingestion(source, Some(1), None, e.to_string()))?
        .clone();
    let mut idx = [0usize; 3];
    for (slot, column) in idx.iter_mut().zip(WEATHER_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::ingestion(source, Some(1), Some(column), "missing column"))?;
    }

    let mut times: Vec<DateTime<Utc>> = Vec::new();
    let mut t_out = Vec::new();
    let mut rh_out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            Error::ingestion(source, e.position().map(|p| p.line()), None, e.to_string())
        })?;
        let row = record.position().map(|p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");

        let ts = parse_timestamp(field(idx[0])).ok_or_else(|| {
            Error::ingestion(source, row, Some("timestamp"), format!("unparsable timestamp {:?}", field(idx[0])))
        })?;
        let parse_num = |i: usize, column: &str| {
            field(i).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::ingestion(source, row, Some(column), format!("not a number: {:?}", field(i)))
            })
        };
        let temp = parse_num(idx[1], "temp_c")?;
        let rh = parse_num(idx[2], "rh_pct")?;
        if !(0.0..=100.0).contains(&rh) {
            return Err(Error::Range(format!(
                "{source}: row {}: rh_pct {rh} outside [0, 100]",
                row.unwrap_or(0)
            )));
        }

        if let Some(&prev) = times.last() {
            let gap = (ts - prev).num_seconds();
            if gap <= 0 {
                return Err(Error::ingestion(source, row, Some("timestamp"), "timestamps not strictly increasing"));
            }
            if times.len() >= 2 {
                let dt = (times[1] - times[0]).num_seconds();
                let expected = times[0] + Duration::seconds(dt * times.len() as i64);
                if (ts - expected).num_seconds().abs() > SPACING_JITTER_S {
                    return Err(Error::ingestion(
                        source,
                        row,
                        Some("timestamp"),
                        format!("non-uniform spacing: expected {}, got {}", format_timestamp(expected), format_timestamp(ts)),
                    ));
                }
            }
        }
        times.push(ts);
        t_out.push(temp);
        rh_out.push(rh);
    }
    if times.len() < 2 {
        return Err(Error::ingestion(source, None, None, "weather file needs at least 2 rows"));
    }
    let dt = (times[1] - times[0]).num_seconds();
    WeatherSeries::new(times[0], dt, t_out, rh_out)
}

pub fn load_weather_csv(path: &Path) -> Result<WeatherSeries> {
    let file = File::open(path).map_err(|source| Error::Input {
        path: path.to_owned(),
        source,
    })?;
    read_weather_csv(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn write_weather_csv<W: Write>(series: &WeatherSeries, writer: W) -> Result<()> {
    let wrap = |e: csv::Error| Error::Runtime(format!("weather CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WEATHER_COLUMNS).map_err(wrap)?;
    for i in 0..series.len() {
        w.write_record([
            format_timestamp(series.timestamp(i)),
            series.t_out[i].to_string(),
            series.rh_out[i].to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::Runtime(format!("weather CSV: {e}")))?;
    Ok(())
}

/// Sub-series covering the half-open window `[start, end)`. Both bounds must
/// sit on the series' time grid.
pub fn slice_window(series: &WeatherSeries, start: DateTime<Utc>, end: DateTime<Utc>) -> Result<WeatherSeries> {
    let from = grid_index(series, start, "start")?;
    let to = grid_index(series, end, "end")?;
    if from < 0 || to > series.len() as i64 {
        return Err(Error::Range(format!(
            "window [{}, {}) outside weather span [{}, {})",
            format_timestamp(start),
            format_timestamp(end),
            format_timestamp(series.start),
            format_timestamp(series.end())
        )));
    }
    if to - from < 2 {
        return Err(Error::Range(format!(
            "window [{}, {}) has {} steps, at least 2 required",
            format_timestamp(start),
            format_timestamp(end),
            (to - from).max(0)
        )));
    }
    let (from, to) = (from as usize, to as usize);
    Ok(WeatherSeries {
        start,
        dt: series.dt,
        t_out: series.t_out[from..to].to_vec(),
        rh_out: series.rh_out[from..to].to_vec(),
    })
}

fn grid_index(series: &WeatherSeries, t: DateTime<Utc>, what: &str) -> Result<i64> {
    let offset = (t - series.start).num_seconds();
    if offset % series.dt != 0 {
        return Err(Error::Range(format!(
            "window {what} {} is not aligned to the {} s weather grid",
            format_timestamp(t),
            series.dt
        )));
    }
    Ok(offset / series.dt)
}

/// Changes the step to `new_dt`, which must divide or be a multiple of the
/// current step. Finer grids interpolate linearly between samples; coarser
/// grids keep every `new_dt/dt`-th sample, so the last sample survives only
/// when the span is a multiple of `new_dt`.
pub fn resample(series: &WeatherSeries, new_dt: i64) -> Result<WeatherSeries> {
    if new_dt <= 0 {
        return Err(Error::Config(format!("resample step must be > 0, got {new_dt}")));
    }
    let dt = series.dt;
    if new_dt == dt {
        return Ok(series.clone());
    }
    if new_dt < dt {
        if dt % new_dt != 0 {
            return Err(Error::Config(format!("resample step {new_dt} s does not divide {dt} s")));
        }
        let m = (dt / new_dt) as usize;
        let interp = |v: &[f64]| {
            let mut out = Vec::with_capacity((v.len() - 1) * m + 1);
            for w in v.windows(2) {
                for j in 0..m {
                    let f = j as f64 / m as f64;
                    out.push(w[0] + (w[1] - w[0]) * f);
                }
            }
            out.push(v[v.len() - 1]);
            out
        };
        WeatherSeries::new(series.start, new_dt, interp(&series.t_out), interp(&series.rh_out))
    } else {
        if new_dt % dt != 0 {
            return Err(Error::Config(format!("resample step {new_dt} s is not a multiple of {dt} s")));
        }
        let m = (new_dt / dt) as usize;
        let pick = |v: &[f64]| v.iter().step_by(m).copied().collect::<Vec<_>>();
        WeatherSeries::new(series.start, new_dt, pick(&series.t_out), pick(&series.rh_out)).map_err(|_| {
            Error::Range(format!("resampling {} samples to {new_dt} s leaves fewer than 2", series.len()))
        })
    }
}

/// Diurnal shape in [-1, 1]: minimum at 06:00, maximum at 15:00.
fn diurnal(hour: f64) -> f64 {
    if (6.0..15.0).contains(&hour) {
        -(PI * (hour - 6.0) / 9.0).cos()
    } else {
        let since_peak = if hour >= 15.0 { hour - 15.0 } else { hour + 9.0 };
        (PI * since_peak / 15.0).cos()
    }
}

/// Synthetic five-day cold snap in the style of February 2021 Texas weather,
/// sampled every 300 s from 2021-02-14T00:00Z. Daily means fall to −10 °C on
/// the second day and recover to −3 °C; the coldest hour reaches −15 °C.
/// Humidity moves against temperature between 75 % and 95 %.
pub fn uri_like_weather() -> WeatherSeries {
    const DT: i64 = 300;
    const DAILY_MEAN: [f64; 5] = [-8.0, -10.0, -9.0, -5.0, -3.0];
    const AMPLITUDE: f64 = 5.0;
    let start = Utc.with_ymd_and_hms(2021, 2, 14, 0, 0, 0).unwrap();
    let n = 5 * 86_400 / DT as usize;
    let round2 = |x: f64| (x * 100.0).round() / 100.0;

    let mut t_out = Vec::with_capacity(n);
    let mut rh_out = Vec::with_capacity(n);
    for i in 0..n {
        let hours = (i as i64 * DT) as f64 / 3600.0;
        // daily means are anchored at noon and interpolated in between
        let x = ((hours - 12.0) / 24.0).clamp(0.0, 4.0);
        let day = (x.floor() as usize).min(3);
        let mean = DAILY_MEAN[day] + (DAILY_MEAN[day + 1] - DAILY_MEAN[day]) * (x - day as f64);
        let shape = diurnal(hours % 24.0);
        t_out.push(round2(mean + AMPLITUDE * shape));
        rh_out.push(round2(85.0 - 10.0 * shape));
    }
    WeatherSeries {
        start,
        dt: DT,
        t_out,
        rh_out,
    }
}
