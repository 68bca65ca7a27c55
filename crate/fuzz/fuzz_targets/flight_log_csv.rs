#![no_main]

use indi_hinf::sysid::FlightLog;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(log) = FlightLog::read_csv(data) {
        let mut out = Vec::new();
        log.write_csv(&mut out).unwrap();
        assert_eq!(FlightLog::read_csv(out.as_slice()).unwrap().len(), log.len());
    }
});
