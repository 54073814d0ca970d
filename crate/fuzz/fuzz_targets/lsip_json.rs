#![no_main]
use libfuzzer_sys::fuzz_target;

use holder_reg::lsip::LsipProblem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = LsipProblem::from_json(text) {
        // Keep discretization cheap; the count itself is validated on parse.
        let _ = p.discretize(p.count.min(64));
    }
});
