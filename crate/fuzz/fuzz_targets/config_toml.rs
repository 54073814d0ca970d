#![no_main]
use libfuzzer_sys::fuzz_target;

use holder_reg::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_toml(text) {
        cfg.settings().expect("validated config yields settings");
    }
});
