#![no_main]

use libfuzzer_sys::fuzz_target;
use neural_fde::neuralfde::LossHistory;

fuzz_target!(|data: &[u8]| {
    if let Ok(h) = LossHistory::read_csv(data) {
        assert_eq!(h.loss.len(), h.alpha.len());
        let mut buf = Vec::new();
        h.write_csv(&mut buf, true).unwrap();
        let again = LossHistory::read_csv(buf.as_slice()).expect("written history must parse");
        assert_eq!(again.len(), h.len());
    }
});
