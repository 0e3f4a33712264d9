#![no_main]

use fracalc_core::frac_ops::Operand;
use fracalc_core::io::history_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(h) = history_from_json(s) {
        // evaluation may fail with an error but must not panic
        let _ = h.value(0.0);
        let _ = h.left_slope(-1.0);
        let _ = h.breakpoints(-10.0, 10.0);
        let _ = h.past();
    }
});
