#![no_main]

use libfuzzer_sys::fuzz_target;
use neural_fde::data::{parse_csv, ColumnRef};

fuzz_target!(|data: &[u8]| {
    let (time, value) = (ColumnRef::Index(0), ColumnRef::Name("x".into()));
    if let Ok((series, report)) = parse_csv(data, &time, &value) {
        assert!(series.times().windows(2).all(|w| w[0] < w[1]));
        assert!(report.rows >= series.len());
    }
});
