#![no_main]

use coopscatter_cli::config::{parse_flat, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_flat(text);
    let mut cfg = RunConfig::default();
    if cfg.apply_text(text).is_ok() && cfg.validate().is_ok() {
        // a config that loads must survive its own flat rendering
        let mut again = RunConfig::default();
        again.apply_text(&cfg.to_flat()).expect("flat rendering reloads");
        assert_eq!(again.hash(), cfg.hash());
    }
});
