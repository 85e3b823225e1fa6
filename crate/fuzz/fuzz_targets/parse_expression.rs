#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    papm_core::fuzzing::parse_expression_input(data);
});
