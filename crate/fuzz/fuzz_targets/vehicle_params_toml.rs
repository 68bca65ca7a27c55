#![no_main]

use indi_hinf::vehicle::QuadcopterParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = QuadcopterParams::from_toml(text) {
        let _ = p.hover_speed();
        let _ = p.fs();
    }
});
