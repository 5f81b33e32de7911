#![no_main]

use libfuzzer_sys::fuzz_target;
use neural_fde::neuralfde::{read_model, write_model};

fuzz_target!(|text: &str| {
    if let Ok(model) = read_model(text) {
        let again = read_model(&write_model(&model)).expect("written model must parse");
        assert_eq!(model, again);
    }
});
