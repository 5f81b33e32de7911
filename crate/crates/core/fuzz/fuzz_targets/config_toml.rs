#![no_main]

use libfuzzer_sys::fuzz_target;
use neural_fde::harness::ConfigFile;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = ConfigFile::from_toml(text) {
        // Validation must reject or accept without panicking.
        let _ = cfg.experiment_spec();
    }
});
