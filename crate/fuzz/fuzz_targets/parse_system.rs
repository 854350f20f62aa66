#![no_main]

use ergomax_core::io::{parse_system, system_to_json};
use ergomax_core::Exact;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_system::<f64>(text);
    if let Ok(sys) = parse_system::<Exact>(text) {
        let again = parse_system::<Exact>(&system_to_json(&sys).to_string()).unwrap();
        assert_eq!(again, sys);
    }
});
