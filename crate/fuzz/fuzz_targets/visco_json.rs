#![no_main]

use fracalc_core::io::{strain_from_json, visco_input_from_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(v) = visco_input_from_json(s) {
        let t0 = v.strain.origin();
        let _ = v.strain.strain(t0 + 1.0);
        let _ = v.material.modulus(1.0);
    }
    if let Ok(p) = strain_from_json(s) {
        let _ = p.strain(p.origin());
    }
});
