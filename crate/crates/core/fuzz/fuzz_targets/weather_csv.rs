#![no_main]

use libfuzzer_sys::fuzz_target;
use resilval::weather::{parse_timestamp, read_weather_csv, resample};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_timestamp(text.lines().next().unwrap_or(""));
    }
    if let Ok(series) = read_weather_csv(data, "fuzz") {
        assert_eq!(series.t_out.len(), series.rh_out.len());
        let _ = resample(&series, series.dt * 2);
        if series.dt % 2 == 0 {
            let _ = resample(&series, series.dt / 2);
        }
    }
});
