#![no_main]
use libfuzzer_sys::fuzz_target;

use holder_reg::catalog::ProblemSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ProblemSpec::from_json(text) {
        let _ = spec.build();
    }
});
