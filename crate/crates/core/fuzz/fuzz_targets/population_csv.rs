#![no_main]

use libfuzzer_sys::fuzz_target;
use resilval::population::{read_population_csv, validate_population, write_population_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(pop) = read_population_csv(data, "fuzz") else {
        return;
    };
    let _ = validate_population(&pop);
    // anything accepted must survive a write/read round trip
    let mut buf = Vec::new();
    write_population_csv(&pop, &mut buf).unwrap();
    let again = read_population_csv(buf.as_slice(), "fuzz").unwrap();
    assert_eq!(again.len(), pop.len());
});
