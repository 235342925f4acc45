#![no_main]

use libfuzzer_sys::fuzz_target;
use semifix_core::problem::parse_problem;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(problem) = parse_problem(text) {
            // Anything accepted must survive its own normal form.
            let normal = problem.to_normalized_json();
            let again = parse_problem(&normal).expect("normalized instance parses");
            assert_eq!(again.to_normalized_json(), normal);
        }
    }
});
