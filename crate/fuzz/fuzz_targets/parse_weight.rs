#![no_main]

use ergomax_core::io::parse_weight;
use ergomax_core::Exact;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_weight::<f64>(text);
    let _ = parse_weight::<Exact>(text);
});
