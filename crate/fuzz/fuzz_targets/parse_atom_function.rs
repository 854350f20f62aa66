#![no_main]

use ergomax_core::io::parse_atom_function;
use ergomax_core::Exact;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_atom_function::<f64>(text);
    let _ = parse_atom_function::<Exact>(text);
});
