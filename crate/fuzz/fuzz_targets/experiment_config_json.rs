#![no_main]

use antijam_harness::{ExperimentFile, ExperimentSpec, Sweep};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = ExperimentFile::from_json_str(text) {
        let mut spec = ExperimentSpec::new(Sweep::Cj);
        if file.apply_to(&mut spec).is_ok() {
            let _ = spec.validate();
        }
    }
});
