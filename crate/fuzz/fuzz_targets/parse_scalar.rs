#![no_main]

use ergomax_core::scalar::{format_scalar, parse_exact};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_exact(text) {
        assert_eq!(parse_exact(&format_scalar(&q)).unwrap(), q);
    }
});
