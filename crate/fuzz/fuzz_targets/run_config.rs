#![no_main]

use fracalc_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(c) = RunConfig::from_json(s) {
        for cmd in ["ml", "fracop", "relax", "fit", "visco", "ctrw", "diffusion", "extension"] {
            let _ = c.section(cmd);
        }
    }
});
