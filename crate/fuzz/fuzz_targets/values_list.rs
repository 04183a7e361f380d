#![no_main]

use antijam_harness::{parse_schemes, parse_values};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_values(text) {
        assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
    }
    if let Ok(s) = parse_schemes(text) {
        let names: Vec<&str> = s.iter().map(|x| x.name()).collect();
        assert_eq!(parse_schemes(&names.join(",")).unwrap(), s);
    }
});
