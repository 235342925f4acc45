#![no_main]

use libfuzzer_sys::fuzz_target;
use semifix_core::contraction::GammaTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = GammaTable::parse_text(text) {
            let x = table.max_t();
            assert!(table.integral(x, 1e-2).is_finite());
        }
    }
});
