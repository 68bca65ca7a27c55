#![no_main]

use indi_hinf::synthesis::SynthesisReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = SynthesisReport::from_toml(text);
});
