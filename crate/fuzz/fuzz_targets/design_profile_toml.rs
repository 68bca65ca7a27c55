#![no_main]

use indi_hinf::synthesis::{DesignProfile, WeightSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = DesignProfile::from_toml(text) {
        let _ = WeightSet::new(p.attitude.weights);
        let _ = WeightSet::new(p.guidance.weights);
    }
});
