#![no_main]

use indi_hinf::linsys::StateSpaceSystem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sys) = StateSpaceSystem::from_toml(text) {
        // Anything accepted must survive a round trip.
        let again = StateSpaceSystem::from_toml(&sys.to_toml().unwrap()).unwrap();
        assert_eq!(again.order(), sys.order());
        let _ = sys.poles();
    }
});
