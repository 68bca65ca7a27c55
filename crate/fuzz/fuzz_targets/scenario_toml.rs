#![no_main]

use indi_hinf::sim::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = Scenario::from_toml(text) {
        let _ = s.disturbance_schedule();
        let _ = s.reference_at(0.0);
        let _ = s.reference_at(s.duration);
    }
});
