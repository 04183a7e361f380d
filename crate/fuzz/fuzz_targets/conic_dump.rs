#![no_main]

use antijam_conic::ConicProgram;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = ConicProgram::parse_dump(text) {
        let dumped = p.dump();
        let q = ConicProgram::parse_dump(&dumped).expect("dump output parses");
        assert_eq!(q.dump(), dumped);
    }
});
