#![no_main]

use coopscatter_cli::config::{parse_json, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pairs) = parse_json(text) {
        let mut cfg = RunConfig::default();
        for (k, v) in pairs {
            let _ = cfg.set(&k, &v);
        }
        let _ = cfg.validate();
    }
});
