#![no_main]

use libfuzzer_sys::fuzz_target;
use semifix_core::scalar::parse_rational;
use semifix_core::{Float, Scalar};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(value) = parse_rational(text) {
            assert_eq!(parse_rational(&value.to_string()), Ok(value));
        }
        let _ = Float::parse_literal(text);
    }
});
