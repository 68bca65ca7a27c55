#![no_main]

use indi_hinf::synthesis::LoopController;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = LoopController::from_toml(text);
});
