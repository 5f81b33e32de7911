#![no_main]

use libfuzzer_sys::fuzz_target;
use neural_fde::data::Manifest;

fuzz_target!(|text: &str| {
    if let Ok(m) = Manifest::from_toml(text) {
        let again = Manifest::from_toml(&m.to_toml()).expect("written manifest must parse");
        assert_eq!(again.points, m.points);
    }
});
