#![no_main]

use fracalc_core::fitting::TimeSeries;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = TimeSeries::read_csv(data) {
        assert!(d.validate().is_ok());
        assert_eq!(d.times.len(), d.values.len());
    }
});
