#![no_main]

use libfuzzer_sys::fuzz_target;
use resilval::report::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ScenarioConfig::from_json(text, "fuzz") {
        let _ = cfg.validate();
        let again = ScenarioConfig::from_json(&cfg.to_json(), "materialized").unwrap();
        assert_eq!(again.hash(&[]), cfg.hash(&[]));
    }
});
