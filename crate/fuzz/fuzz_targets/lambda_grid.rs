#![no_main]

use ergomax_core::io::LambdaGrid;
use ergomax_core::{Exact, WindowedSequence};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = LambdaGrid::parse(text) {
        let a = WindowedSequence::<Exact>::delta(0);
        if let Ok(heights) = grid.resolve(&a) {
            assert!(heights.len() <= ergomax_core::io::MAX_GRID);
        }
    }
});
