#![no_main]

use ergomax_core::io::{parse_sequence, sequence_to_json};
use ergomax_core::{Exact, WindowedSequence};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_sequence::<f64>(text);
    if let Ok(a) = parse_sequence::<Exact>(text) {
        // serialized sequences parse back to themselves
        let again: WindowedSequence<Exact> = parse_sequence(&sequence_to_json(&a).to_string()).unwrap();
        assert_eq!(again, a);
    }
});
