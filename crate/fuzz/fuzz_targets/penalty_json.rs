#![no_main]
use libfuzzer_sys::fuzz_target;

use holder_reg::catalog::PenaltySpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = PenaltySpec::from_json(text) {
        let _ = spec.build(None, None);
        let _ = spec.build(Some(1.0), Some(2.0));
    }
});
