#![no_main]

use libfuzzer_sys::fuzz_target;
use mcdf_core::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RunConfig::from_toml_str(text) else { return };
    // anything accepted must survive a write/read cycle unchanged
    let again = RunConfig::from_toml_str(&cfg.to_toml_string()).expect("re-parse of a written config");
    assert_eq!(cfg.to_toml_string(), again.to_toml_string());
});
