#![no_main]

use indi_hinf::sysid::EstimationResult;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = EstimationResult::from_toml(text) {
        let _ = r.g12_matrix();
    }
});
