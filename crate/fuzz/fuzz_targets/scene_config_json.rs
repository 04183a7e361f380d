#![no_main]

use antijam_core::scene::SceneConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SceneConfig::from_json_str(text) {
        cfg.validate().expect("parsed config validates");
        let again = SceneConfig::from_json_str(&cfg.to_json_string()).expect("round trip parses");
        assert_eq!(again.to_json_string(), cfg.to_json_string());
    }
});
